"""Synthetic emergency-braking plant with a swappable detection source.

The subject vehicle approaches a stationary obstacle.  A radar reports the
obstacle exactly within its range; beyond that range detection comes from
the perception component, which can be the concrete classifier, an
always-correct detector (optimistic abstraction) or an always-wrong one
(pessimistic abstraction).  The controller switches between safe, warning,
braking and collision-mitigation modes on time-to-collision thresholds.

All plant constants live in ``ControllerConfig``/``ModelConfig`` and are
mirrored in the scenario file schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .analyzer import Concretizer
from .classifier import ClassifierHandle
from .trace import Signal, TimeGrid, Trace

MPH_TO_MS = 0.44704

V0_MAX_MS = 17.9  # 40 mph, rounded up
D0_MAX_M = 60.0

MODE_SAFE = 0
MODE_WARNING = 1
MODE_BRAKING = 2
MODE_MITIGATION = 3


class InputError(ValueError):
    """Simulation parameter outside the admissible box."""


@dataclass(frozen=True)
class ControllerConfig:
    radar_range: float = 30.0
    # mode bands on time-to-collision, seconds: safe above ttc_warning,
    # warning in (ttc_braking, ttc_warning], braking in
    # (ttc_mitigation, ttc_braking], mitigation at or below ttc_mitigation.
    ttc_warning: float = 4.0
    ttc_braking: float = 3.0
    ttc_mitigation: float = 1.0
    decel_braking: float = 4.0  # m/s^2, applied as negative acceleration
    decel_mitigation: float = 4.0


@dataclass(frozen=True)
class ModelConfig:
    dt: float = 0.1
    horizon: float = 10.0
    controller: ControllerConfig = field(default_factory=ControllerConfig)


class Perfect:
    """Optimistic abstraction: detection always equals the ground truth."""

    def detect(self, features) -> bool:
        return True


class AlwaysWrong:
    """Pessimistic abstraction: detection is always the negation of the truth."""

    def detect(self, features) -> bool:
        return False


class Concrete:
    """Detection through the actual classifier: label 1 means obstacle seen."""

    def __init__(self, handle: ClassifierHandle, gamma: Concretizer):
        self.handle = handle
        self.gamma = gamma
        self.queries = 0

    def detect(self, features) -> bool:
        self.queries += 1
        return self.handle.classify(self.gamma.concretize(features)).label == 1


MLMode = Perfect | AlwaysWrong | Concrete


@dataclass
class Scene:
    """Abstract scene point; one dim may be slaved to the live distance.

    In ``static`` mode the slaved dim is computed once from the initial
    distance (one picture per run); in ``tracked`` mode it is recomputed
    from the live distance every step.
    """

    point: np.ndarray
    distance_dim: int | None = None
    distance_range: tuple[float, float] = (0.0, D0_MAX_M)
    mode: str = "static"

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float).copy()
        if self.mode not in ("static", "tracked"):
            raise InputError(f"scene mode must be static or tracked, got {self.mode!r}")

    def features_at(self, dist: float, d0: float) -> np.ndarray:
        a = self.point.copy()
        if self.distance_dim is not None:
            lo, hi = self.distance_range
            ref = d0 if self.mode == "static" else dist
            a[self.distance_dim] = min(max((ref - lo) / (hi - lo), 0.0), 1.0)
        return a


@dataclass(frozen=True)
class SimModel:
    config: ModelConfig = field(default_factory=ModelConfig)
    ml: MLMode = field(default_factory=Perfect)


def make_variant(model: SimModel, ml: MLMode) -> SimModel:
    """Same plant and controller, only the detection source swapped."""
    return replace(model, ml=ml)


def _controller(cc: ControllerConfig, detected: bool, ttc: float) -> tuple[int, float]:
    if not detected:
        return MODE_SAFE, 0.0
    if ttc > cc.ttc_warning:
        return MODE_SAFE, 0.0
    if ttc > cc.ttc_braking:
        return MODE_WARNING, 0.0
    if ttc > cc.ttc_mitigation:
        return MODE_BRAKING, -cc.decel_braking
    return MODE_MITIGATION, -cc.decel_mitigation


def simulate(model: SimModel, v0: float, d0: float, scene: Scene,
             ml: MLMode | None = None) -> Trace:
    """Closed-loop run; returns signals v_s, dist, mode, detected.

    ``v0`` in m/s, ``d0`` in m.  Integration is semi-implicit Euler: the
    speed is updated first and the distance uses the updated speed.  Once
    the gap reaches zero both state signals are held (collision latch).
    """
    if not (0.0 <= v0 <= V0_MAX_MS + 1e-9):
        raise InputError(f"v0={v0} outside [0, {V0_MAX_MS}] m/s")
    if not (0.0 <= d0 <= D0_MAX_M + 1e-9):
        raise InputError(f"d0={d0} outside [0, {D0_MAX_M}] m")
    ml = ml if ml is not None else model.ml
    cfg = model.config
    cc = cfg.controller
    n = int(round(cfg.horizon / cfg.dt)) + 1
    v_arr = np.empty(n)
    d_arr = np.empty(n)
    mode_arr = np.empty(n)
    det_arr = np.empty(n)
    v_cur, d_cur = float(v0), float(d0)
    latched = d_cur <= 0.0
    for k in range(n):
        if d_cur <= cc.radar_range:
            detected = True
        else:
            detected = ml.detect(scene.features_at(d_cur, d0))
        ttc = d_cur / max(v_cur, 1e-6)
        mode, accel = _controller(cc, detected, ttc)
        v_arr[k] = v_cur
        d_arr[k] = d_cur
        mode_arr[k] = mode
        det_arr[k] = 1.0 if detected else 0.0
        if k < n - 1 and not latched:
            v_cur = max(0.0, v_cur + accel * cfg.dt)
            d_cur = d_cur - v_cur * cfg.dt
            if d_cur <= 0.0:
                latched = True
    grid = TimeGrid(t0=0.0, dt=cfg.dt, n_steps=n)
    return Trace.from_signals([
        Signal("v_s", grid, v_arr, interp="linear"),
        Signal("dist", grid, d_arr, interp="linear"),
        Signal("mode", grid, mode_arr, interp="hold"),
        Signal("detected", grid, det_arr, interp="hold"),
    ])
