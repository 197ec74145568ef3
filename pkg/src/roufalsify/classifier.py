"""Binary classifier handles and their error metrics.

Two kinds of handle answer ``classify`` queries: an in-process synthetic
classifier (a base label flipped inside planted axis-aligned boxes) and a
remote classifier reached over a newline-delimited JSON protocol::

    request:  {"id": <uint64>, "features": [<float>, ...]}
    response: {"id": <uint64>, "label": 0|1, "score": <float in [0,1]>}
    error:    {"id": <uint64>, "error": "<message>"}

The synthetic score is shaped from the distance to the nearest decision
boundary (1 at distance >= the score width, 0.5 on the boundary); scores
are advisory, every algorithm in this package uses labels only.
"""

from __future__ import annotations

import itertools
import json
import socket
from dataclasses import dataclass

import numpy as np


class TransportError(RuntimeError):
    """Remote classification failed (timeout, malformed reply, id mismatch)."""

    def __init__(self, message: str, item_index: int | None = None):
        if item_index is not None:
            message = f"{message} (item {item_index})"
        super().__init__(message)
        self.item_index = item_index


@dataclass(frozen=True)
class Verdict:
    label: int
    score: float


@dataclass(frozen=True)
class Box:
    """Axis-aligned half-open box: lo <= x < hi per coordinate."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("box lo/hi must have equal length")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError("box lo must be <= hi per coordinate")

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(np.asarray(self.lo) <= x) and np.all(x < np.asarray(self.hi)))

    def boundary_distance(self, x: np.ndarray) -> float:
        """Distance from x to the box surface (0 on the surface)."""
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        if self.contains(x):
            return float(min(np.min(x - lo), np.min(hi - x)))
        outside = np.maximum(np.maximum(lo - x, x - hi), 0.0)
        return float(np.linalg.norm(outside))


@dataclass(frozen=True)
class LabeledSet:
    points: np.ndarray  # (m, n)
    labels: np.ndarray  # (m,) of 0/1

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        labs = np.asarray(self.labels, dtype=int)
        if pts.ndim != 2 or labs.shape != (pts.shape[0],):
            raise ValueError("points must be (m, n) and labels (m,)")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return len(self.labels)


class SyntheticClassifier:
    """Pure function of the feature vector: base label, flipped inside any box."""

    def __init__(self, arity: int, base_label: int = 1, boxes: list[Box] | None = None,
                 score_width: float = 0.1):
        if base_label not in (0, 1):
            raise ValueError("base_label must be 0 or 1")
        self.arity = arity
        self.base_label = base_label
        self.boxes = list(boxes or [])
        self.score_width = score_width
        for b in self.boxes:
            if len(b.lo) != arity:
                raise ValueError(f"box arity {len(b.lo)} != classifier arity {arity}")

    def classify(self, x) -> Verdict:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.arity,):
            raise ValueError(f"feature vector has shape {x.shape}, expected ({self.arity},)")
        if not np.all(np.isfinite(x)):
            raise ValueError("feature values must be finite")
        flipped = any(b.contains(x) for b in self.boxes)
        label = (1 - self.base_label) if flipped else self.base_label
        if self.boxes:
            d = min(b.boundary_distance(x) for b in self.boxes)
            score = 1.0 - 0.5 * max(0.0, 1.0 - d / self.score_width)
        else:
            score = 1.0
        return Verdict(label=label, score=float(min(max(score, 0.5), 1.0)))

    def close(self):
        pass


class RemoteClassifier:
    """Client handle for the wire protocol; one request in flight at a time."""

    def __init__(self, host: str, port: int, timeout: float = 5.0, arity: int | None = None):
        self.host = host
        self.port = port
        self.timeout = timeout
        self.arity = arity
        self._ids = itertools.count(1)
        self._sock: socket.socket | None = None
        self._reader = None

    def _connect(self):
        if self._sock is None:
            try:
                self._sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
            except OSError as exc:
                raise TransportError(f"cannot connect to {self.host}:{self.port}: {exc}") from exc
            self._reader = self._sock.makefile("r", encoding="utf-8", newline="\n")

    def close(self):
        if self._sock is not None:
            try:
                self._reader.close()
                self._sock.close()
            except OSError:
                pass
            self._sock = None
            self._reader = None

    def __enter__(self):
        self._connect()
        return self

    def __exit__(self, *exc):
        self.close()

    def classify(self, x) -> Verdict:
        x = np.asarray(x, dtype=float)
        if self.arity is not None and x.shape != (self.arity,):
            raise ValueError(f"feature vector has shape {x.shape}, expected ({self.arity},)")
        self._connect()
        req_id = next(self._ids)
        line = json.dumps({"id": req_id, "features": [float(v) for v in x]}) + "\n"
        try:
            self._sock.sendall(line.encode("utf-8"))
            reply = self._reader.readline()
        except OSError as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if reply == "":
            raise TransportError("connection closed by server")
        try:
            obj = json.loads(reply)
        except json.JSONDecodeError as exc:
            raise TransportError(f"malformed reply: {exc}") from exc
        if not isinstance(obj, dict):
            raise TransportError("malformed reply: not an object")
        if obj.get("id") != req_id:
            raise TransportError(f"response id {obj.get('id')} does not match request id {req_id}")
        if "error" in obj:
            raise TransportError(f"server error: {obj['error']}")
        label = obj.get("label")
        score = obj.get("score")
        if label not in (0, 1) or not isinstance(score, (int, float)) or not (0.0 <= score <= 1.0):
            raise TransportError(f"malformed reply payload: {reply.strip()}")
        return Verdict(label=int(label), score=float(score))


ClassifierHandle = SyntheticClassifier | RemoteClassifier


def false_positives(handle: ClassifierHandle, test_set: LabeledSet) -> int:
    if len(test_set) == 0:
        raise ValueError("test set must be nonempty")
    count = 0
    for i in range(len(test_set)):
        try:
            pred = handle.classify(test_set.points[i]).label
        except TransportError as exc:
            raise TransportError(str(exc), item_index=i) from exc
        if pred == 1 and test_set.labels[i] == 0:
            count += 1
    return count


def false_negatives(handle: ClassifierHandle, test_set: LabeledSet) -> int:
    if len(test_set) == 0:
        raise ValueError("test set must be nonempty")
    count = 0
    for i in range(len(test_set)):
        try:
            pred = handle.classify(test_set.points[i]).label
        except TransportError as exc:
            raise TransportError(str(exc), item_index=i) from exc
        if pred == 0 and test_set.labels[i] == 1:
            count += 1
    return count


def error_rate(handle: ClassifierHandle, test_set: LabeledSet) -> float:
    return (false_positives(handle, test_set) + false_negatives(handle, test_set)) / len(test_set)
