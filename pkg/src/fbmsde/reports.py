"""Serializable result records."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True)


@dataclass
class NormReport:
    kind: str
    value: float
    n: int
    T: float
    alpha_or_mu: float | None = None

    def to_json(self) -> str:
        return dumps(asdict(self))


@dataclass
class IntegralResult:
    value: float | np.ndarray
    route: str
    mesh: float
    est_error: float

    def to_json(self) -> str:
        return dumps(asdict(self))


@dataclass
class EstimateReport:
    """Measured sides of one inequality ``lhs <= C * rhs``.

    ``implied_constant`` is ``lhs / rhs`` (0 when ``lhs == 0``); ``passed``
    compares it against ``cap`` when one is set.
    """

    name: str
    lhs: float
    rhs: float
    implied_constant: float
    passed: bool
    cap: float | None = None
    flags: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_sides(cls, name, lhs, rhs, cap=None, rtol=0.0, **meta):
        lhs, rhs = float(lhs), float(rhs)
        if lhs == 0.0:
            c = 0.0
        elif rhs > 0.0:
            c = lhs / rhs
        else:
            c = math.inf
        passed = True if cap is None else c <= cap * (1.0 + rtol)
        return cls(name, lhs, rhs, c, bool(passed), cap, [], meta)

    def to_json(self) -> str:
        return dumps(asdict(self))


@dataclass
class ConvergenceStudy:
    meshes: list
    errors: list
    fitted_order: float
    r2: float
    name: str = ""
    passed: bool = True
    flags: list = field(default_factory=list)
    std_errors: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return dumps(asdict(self))

    def to_csv(self) -> str:
        lines = ["mesh,error,std_error"]
        se = self.std_errors or [float("nan")] * len(self.meshes)
        for h, e, s in zip(self.meshes, self.errors, se):
            lines.append(f"{float(h)!r},{float(e)!r},{float(s)!r}")
        return "\n".join(lines) + "\n"
