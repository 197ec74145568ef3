"""Scenario file schema and builders for the objects it configures.

A scenario bundles everything one falsification run needs: plant constants,
the parameter box, the specification text, the abstract scene space with
its binding to plant parameters, the classifier under test, the ground
truth rule and the search knobs.  See README for a commented example.
"""

from __future__ import annotations

import json

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from . import aebs
from .analyzer import AbstractSpace, Dim
from .classifier import Box, RemoteClassifier, SyntheticClassifier
from .falsify import Param, ParamBox
from .stl import parse


class ControllerCfg(BaseModel):
    radar_range: float = 30.0
    ttc_warning: float = 4.0
    ttc_braking: float = 3.0
    ttc_mitigation: float = 1.0
    decel_braking: float = 4.0
    decel_mitigation: float = 4.0


class ModelCfg(BaseModel):
    dt: float = 0.1
    horizon: float = 10.0
    controller: ControllerCfg = Field(default_factory=ControllerCfg)


class ParamCfg(BaseModel):
    name: str
    lo: float
    hi: float
    unit: str = ""


class DimCfg(BaseModel):
    name: str
    lo: float
    hi: float
    unit: str = ""


class BoxCfg(BaseModel):
    lo: list[float]
    hi: list[float]


class ClassifierCfg(BaseModel):
    kind: str = "synthetic"  # "synthetic" | "remote"
    base_label: int = 1
    boxes: list[BoxCfg] = Field(default_factory=list)
    host: str = "127.0.0.1"
    port: int = 0
    timeout: float = 5.0

    @field_validator("kind")
    @classmethod
    def _kind(cls, v):
        if v not in ("synthetic", "remote"):
            raise ValueError("classifier kind must be synthetic or remote")
        return v


class AnalyzerCfg(BaseModel):
    sampler: str = "halton"  # halton | lattice | grid
    epsilon: float = 0.05
    batch: int = 128
    max_iters: int = 20
    link_radius: float = 0.1
    truth: int = 1  # constant ground-truth label over the scene space

    @field_validator("sampler")
    @classmethod
    def _sampler(cls, v):
        if v not in ("halton", "lattice", "grid"):
            raise ValueError("sampler must be halton, lattice or grid")
        return v


class Scenario(BaseModel):
    model: ModelCfg = Field(default_factory=ModelCfg)
    params: list[ParamCfg]
    formula: str
    space: list[DimCfg]
    binding: dict[str, str]  # abstract dim name -> param name
    scene_defaults: dict[str, float] = Field(default_factory=dict)
    scene_mode: str = "static"
    classifier: ClassifierCfg = Field(default_factory=ClassifierCfg)
    analyzer: AnalyzerCfg = Field(default_factory=AnalyzerCfg)
    resolution: list[int] = Field(default_factory=lambda: [40, 60])
    budget: int = 500
    seed: int = 0

    @model_validator(mode="after")
    def _cross_refs(self):
        parse(self.formula)  # syntax-check early
        if len(self.params) != 2:
            raise ValueError("the plant takes two parameters: initial speed, then initial gap")
        dim_names = {d.name for d in self.space}
        param_names = {p.name for p in self.params}
        if len(dim_names) != len(self.space):
            raise ValueError("duplicate dim names in space")
        for dim, param in self.binding.items():
            if dim not in dim_names:
                raise ValueError(f"binding references unknown dim {dim!r}")
            if param not in param_names:
                raise ValueError(f"binding references unknown param {param!r}")
        for name in self.scene_defaults:
            if name not in dim_names:
                raise ValueError(f"scene_defaults references unknown dim {name!r}")
        if self.scene_mode not in ("static", "tracked"):
            raise ValueError("scene_mode must be static or tracked")
        if len(self.resolution) != len(self.params):
            raise ValueError("resolution must have one entry per param")
        if self.classifier.kind == "synthetic":
            for box in self.classifier.boxes:
                if len(box.lo) != len(self.space) or len(box.hi) != len(self.space):
                    raise ValueError("classifier box arity must match the space dimension")
        return self

    # --- builders ---------------------------------------------------------

    def build_model(self) -> aebs.SimModel:
        cc = self.model.controller
        config = aebs.ModelConfig(
            dt=self.model.dt,
            horizon=self.model.horizon,
            controller=aebs.ControllerConfig(
                radar_range=cc.radar_range,
                ttc_warning=cc.ttc_warning,
                ttc_braking=cc.ttc_braking,
                ttc_mitigation=cc.ttc_mitigation,
                decel_braking=cc.decel_braking,
                decel_mitigation=cc.decel_mitigation,
            ),
        )
        return aebs.SimModel(config=config)

    def build_box(self) -> ParamBox:
        return ParamBox(params=tuple(Param(p.name, p.lo, p.hi, p.unit) for p in self.params))

    def build_space(self) -> AbstractSpace:
        return AbstractSpace(dims=tuple(Dim(d.name, d.lo, d.hi, d.unit) for d in self.space))

    def build_classifier(self):
        if self.classifier.kind == "synthetic":
            boxes = [Box(tuple(b.lo), tuple(b.hi)) for b in self.classifier.boxes]
            return SyntheticClassifier(arity=len(self.space),
                                       base_label=self.classifier.base_label, boxes=boxes)
        return RemoteClassifier(host=self.classifier.host, port=self.classifier.port,
                                timeout=self.classifier.timeout, arity=len(self.space))

    def truth_fn(self):
        label = self.analyzer.truth
        return lambda a: label

    def distance_dim_index(self) -> int | None:
        """Index of the dim bound to the gap parameter (params[1]), if any."""
        space = self.build_space()
        gap_param = self.params[1].name
        for dim_name, param_name in self.binding.items():
            if param_name == gap_param:
                return space.index_of(dim_name)
        return None

    def build_scene(self, scene_point: np.ndarray | None = None) -> aebs.Scene:
        space = self.build_space()
        if scene_point is None:
            point = np.array([self.scene_defaults.get(d.name, 0.5) for d in space.dims])
        else:
            point = np.asarray(scene_point, dtype=float)
        dd = self.distance_dim_index()
        if dd is None:
            return aebs.Scene(point=point, distance_dim=None, mode=self.scene_mode)
        dim = space.dims[dd]
        return aebs.Scene(point=point, distance_dim=dd,
                          distance_range=(dim.lo, dim.hi), mode=self.scene_mode)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True)


def load_scenario(text: str) -> Scenario:
    return Scenario.model_validate(json.loads(text))


def default_aebs_scenario(**overrides) -> Scenario:
    """The stock emergency-braking scenario with a planted scene-space box."""
    base = {
        "params": [
            {"name": "v0", "lo": 0.0, "hi": 40.0, "unit": "mph"},
            {"name": "d0", "lo": 0.0, "hi": 60.0, "unit": "m"},
        ],
        "formula": "G(dist > 0)",
        "space": [
            {"name": "x_pos", "lo": 0.0, "hi": 1.0},
            {"name": "distance", "lo": 0.0, "hi": 60.0, "unit": "m"},
            {"name": "brightness", "lo": 0.0, "hi": 1.0},
        ],
        "binding": {"distance": "d0"},
        "scene_defaults": {"x_pos": 0.5, "brightness": 0.2},
        "classifier": {
            "kind": "synthetic",
            "base_label": 1,
            "boxes": [{"lo": [0.4, 0.0, 0.15], "hi": [0.5, 1.0, 0.25]}],
        },
    }
    base.update(overrides)
    return Scenario.model_validate(base)
