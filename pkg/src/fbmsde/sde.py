"""Coefficients, assumption probes and the Euler scheme for mixed fBm/BM equations.

The equation is

    dX = b(t, X) dt + sigma_W(t, X) dW + sigma_H(t, X) dB^H,   X(0) = x0,

with ``X`` in R^d, ``W`` in R^r and ``B^H`` in R^m. Coefficient callables take
a time ``t`` (float) and a batch of states ``x`` of shape ``(B, d)``.
"""

from __future__ import annotations

import inspect
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import rng
from .noise import NoiseBundle, validate_hurst
from .paths import GridError, SamplePath, TimeGrid
from .reports import dumps

BLOWUP_GUARD = 1e150
CONSTANT_NAMES = ("L1", "L2", "L3", "L4", "L5", "L6", "L7", "L", "beta", "delta")


class BlowUpError(FloatingPointError):
    """Non-finite or guarded state; ``node`` is the first offending grid index."""

    def __init__(self, node: int, replica: int, value: float):
        super().__init__(f"Euler state blew up at node {node} (replica {replica}, |x|={value:.3e})")
        self.node = node
        self.replica = replica


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Coefficient maps with declared regularity constants.

    ``b(t, x) -> (B, d)``, ``sigma_w(t, x) -> (B, d, r)``,
    ``sigma_h(t, x) -> (B, d, m)`` and ``dsigma_h(t, x) -> (B, d, m, d)``
    where the last axis indexes the differentiation variable.
    """

    d: int
    r: int
    m: int
    b: Callable
    sigma_w: Callable
    sigma_h: Callable
    dsigma_h: Callable
    constants: dict
    family: str = "custom"
    params: dict = field(default_factory=dict)
    oracle: str | None = None

    def __post_init__(self):
        for k in ("beta", "delta"):
            v = self.constants.get(k, 1.0)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{k} must lie in (0, 1], got {v}")
        x = np.zeros((1, self.d))
        shapes = {
            "b": (self.b(0.0, x), (1, self.d)),
            "sigma_w": (self.sigma_w(0.0, x), (1, self.d, self.r)),
            "sigma_h": (self.sigma_h(0.0, x), (1, self.d, self.m)),
            "dsigma_h": (self.dsigma_h(0.0, x), (1, self.d, self.m, self.d)),
        }
        for name, (val, want) in shapes.items():
            if np.shape(val) != want:
                raise ValueError(f"{name} returns shape {np.shape(val)}, expected {want}")

    def spec(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}


@dataclass(frozen=True, eq=False)
class SDEProblem:
    coeffs: CoefficientSet
    x0: np.ndarray
    T: float
    hurst: float

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if x0.shape != (self.coeffs.d,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({self.coeffs.d},)")
        if not self.T > 0:
            raise ValueError(f"horizon must be positive, got {self.T}")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "hurst", validate_hurst(self.hurst))


@dataclass(frozen=True, eq=False)
class EulerRun:
    problem: SDEProblem
    grid: TimeGrid
    noise: NoiseBundle
    path: SamplePath
    wall_time: float = 0.0

    def to_csv(self) -> str:
        return self.path.to_csv()

    def manifest(self) -> dict:
        return {
            "seed": self.noise.seed,
            "H": self.problem.hurst,
            "n": self.grid.n,
            "T": self.grid.T,
            "coefficient_family": self.problem.coeffs.family,
            "params": self.problem.coeffs.params,
            "wall_time": self.wall_time,
        }

    def manifest_json(self) -> str:
        return dumps(self.manifest())


# ---------------------------------------------------------------- assumptions

@dataclass
class AssumptionCheck:
    name: str
    declared: float
    worst_ratio: float
    passed: bool
    witness: dict


@dataclass
class AssumptionReport:
    family: str
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> str:
        return dumps({"family": self.family, "passed": self.passed,
                      "checks": [c.__dict__ for c in self.checks]})


def _fro(a, axes):
    return np.sqrt(np.sum(a * a, axis=axes))


def _probe_points(g, B, d, T):
    def radial(lo, hi):
        u = g.standard_normal((B, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return u * 10.0 ** g.uniform(lo, hi, (B, 1))
    x = radial(-3, 6)
    # relative offsets keep |x - y| well above the rounding level of |x|
    y = x + radial(-4, 0) * np.maximum(1.0, np.linalg.norm(x, axis=1, keepdims=True))
    t = g.uniform(0, T, B)
    s = g.uniform(0, T, B)
    return x, y, t, s


def validate_assumptions(coeffs: CoefficientSet, probe_budget: int = 1000, seed: int = 0,
                         T: float = 1.0, rtol: float = 1e-9) -> AssumptionReport:
    """Probe every declared inequality at random ``(t, s, x, y)``.

    States are drawn with log-uniform radii in ``[1e-3, 1e6]`` so growth and
    global Lipschitz violations surface. Each check keeps its worst witness.
    """
    if probe_budget < 100:
        raise ValueError("probe_budget must be at least 100")
    g = rng.stream(seed, "probe")
    x, y, t, s = _probe_points(g, probe_budget, coeffs.d, T)
    C = {k: float(coeffs.constants.get(k, math.inf)) for k in CONSTANT_NAMES}
    C["beta"] = coeffs.constants.get("beta", 1.0)
    C["delta"] = coeffs.constants.get("delta", 1.0)

    def each(fn, *args):
        return np.stack([fn(ti, xi[None])[0] for ti, xi in zip(*args)])

    bx = each(coeffs.b, t, x)
    by = each(coeffs.b, t, y)
    wx = each(coeffs.sigma_w, t, x)
    wy = each(coeffs.sigma_w, t, y)
    hx = each(coeffs.sigma_h, t, x)
    hs = each(coeffs.sigma_h, s, x)
    dx = each(coeffs.dsigma_h, t, x)
    dy = each(coeffs.dsigma_h, t, y)
    ds = each(coeffs.dsigma_h, s, x)
    nx = np.linalg.norm(x, axis=1)
    dxy = np.linalg.norm(x - y, axis=1)
    dts = np.abs(t - s)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = {
            "Hb_lipschitz": ("L1", _fro(bx - by, 1) / dxy),
            "Hb_growth": ("L2", _fro(bx, 1) / (1 + nx)),
            "HsW_lipschitz": ("L3", _fro(wx - wy, (1, 2)) / dxy),
            "HsW_growth": ("L4", _fro(wx, (1, 2)) / (1 + nx)),
            "HsH_derivative_bound": ("L5", np.max(_fro(dx, (1, 2)), axis=1)),
            "HsH_derivative_hoelder": ("L6", np.max(_fro(dx - dy, (1, 2)), axis=1) / dxy ** C["delta"]),
            "HsH_time_hoelder": ("L7", (_fro(hx - hs, (1, 2)) + np.max(_fro(dx - ds, (1, 2)), axis=1))
                                 / dts ** C["beta"]),
            "HsH_growth": ("L", _fro(hx, (1, 2)) / (1 + nx)),
        }
    checks = []
    for name, (key, r) in ratios.items():
        r = np.where(np.isnan(r), 0.0, r)
        i = int(np.argmax(r))
        worst = float(r[i])
        ok = worst <= C[key] * (1 + rtol) + 1e-12
        checks.append(AssumptionCheck(name, C[key], worst, bool(ok),
                                      {"t": float(t[i]), "s": float(s[i]), "x": x[i].tolist(), "y": y[i].tolist()}))
    # declared derivative must match a central difference of sigma_h
    small = nx <= 10
    err = 0.0
    wit = {}
    for i in np.flatnonzero(small)[:50]:
        for j in range(coeffs.d):
            e = np.zeros(coeffs.d)
            e[j] = 1e-6 * max(1.0, nx[i])
            fd = (coeffs.sigma_h(t[i], (x[i] + e)[None]) - coeffs.sigma_h(t[i], (x[i] - e)[None]))[0] / (2 * e[j])
            gap = float(np.max(np.abs(fd - dx[i][..., j])))
            if gap > err:
                err, wit = gap, {"t": float(t[i]), "x": x[i].tolist(), "component": j}
    checks.append(AssumptionCheck("HsH_derivative_consistency", 1e-4, err, err <= 1e-4, wit))
    return AssumptionReport(coeffs.family, checks)


# ---------------------------------------------------------------- Euler scheme

def _apply(mat, inc):
    return np.einsum("bij,bj->bi", mat, inc)


def euler_paths(coeffs: CoefficientSet, x0, nodes: np.ndarray, dW: np.ndarray, dB: np.ndarray,
                guard: float = BLOWUP_GUARD) -> np.ndarray:
    """Batched left-point recurrence.

    ``dW`` has shape ``(B, n, r)`` and ``dB`` shape ``(B, n, m)``; returns
    ``(B, n + 1, d)``.
    """
    B, n = dW.shape[0], nodes.size - 1
    out = np.empty((B, n + 1, coeffs.d))
    out[:, 0] = np.broadcast_to(np.asarray(x0, dtype=float), (B, coeffs.d))
    h = np.diff(nodes)
    for i in range(n):
        x = out[:, i]
        ti = float(nodes[i])
        out[:, i + 1] = (x + coeffs.b(ti, x) * h[i]
                         + _apply(coeffs.sigma_w(ti, x), dW[:, i])
                         + _apply(coeffs.sigma_h(ti, x), dB[:, i]))
        _check(out[:, i + 1], i + 1, guard)
    return out


def _check(x, node, guard):
    a = np.abs(x)
    bad = ~np.isfinite(a) | (a > guard)
    if bad.any():
        rep = int(np.flatnonzero(bad.any(axis=1))[0])
        raise BlowUpError(node, rep, float(np.max(a[rep])))


def dense_euler_paths(coeffs: CoefficientSet, x0, base_nodes: np.ndarray, coarse_idx: np.ndarray,
                      W: np.ndarray, BH: np.ndarray, guard: float = BLOWUP_GUARD) -> np.ndarray:
    """Continuous-time Euler process of a coarse partition, sampled on a finer base grid.

    ``coarse_idx`` are positions of the partition nodes inside ``base_nodes``;
    ``W`` and ``BH`` are noise values ``(B, N + 1, r|m)`` on the base grid.
    Between partition nodes the coefficients stay frozen at the left node.
    """
    B = W.shape[0]
    out = np.empty((B, base_nodes.size, coeffs.d))
    x = np.broadcast_to(np.asarray(x0, dtype=float), (B, coeffs.d)).copy()
    out[:, 0] = x
    for a, c in zip(coarse_idx[:-1], coarse_idx[1:]):
        ta = float(base_nodes[a])
        sl = slice(a + 1, c + 1)
        dt = base_nodes[sl] - ta
        bw = coeffs.b(ta, x)
        sw = coeffs.sigma_w(ta, x)
        sh = coeffs.sigma_h(ta, x)
        out[:, sl] = (x[:, None, :] + bw[:, None, :] * dt[None, :, None]
                      + np.einsum("bij,bkj->bki", sw, W[:, sl] - W[:, a:a + 1])
                      + np.einsum("bij,bkj->bki", sh, BH[:, sl] - BH[:, a:a + 1]))
        x = out[:, c].copy()
        _check(x, int(c), guard)
    return out


def euler_solve(problem: SDEProblem, grid: TimeGrid, noise: NoiseBundle) -> EulerRun:
    """Euler approximation driven by the increments of ``noise`` on ``grid``."""
    if noise.grid != grid:
        raise GridError("noise must be sampled on the solver grid")
    c = problem.coeffs
    if noise.fbm.dim != c.m or noise.bm.dim != c.r:
        raise ValueError(f"noise dims (m={noise.fbm.dim}, r={noise.bm.dim}) do not match "
                         f"coefficients (m={c.m}, r={c.r})")
    if abs(grid.T - problem.T) > 1e-12 * problem.T:
        raise GridError(f"grid horizon {grid.T} differs from problem horizon {problem.T}")
    t0 = time.perf_counter()
    dW = np.diff(noise.bm.values, axis=0)[None]
    dB = np.diff(noise.fbm.values, axis=0)[None]
    vals = euler_paths(c, problem.x0, grid.nodes, dW, dB)[0]
    return EulerRun(problem, grid, noise, SamplePath(grid, vals), time.perf_counter() - t0)


# ---------------------------------------------------------------- oracles

ORACLES = ("drift_only", "ito_gbm", "young_exponential", "mixed_exponential")


def oracle_values(kind: str, coeffs: CoefficientSet, x0, nodes: np.ndarray,
                  W: np.ndarray | None = None, BH: np.ndarray | None = None) -> np.ndarray:
    """Exact solution at ``nodes`` for scalar closed-form families.

    ``W`` and ``BH`` are noise values of shape ``(B, n + 1)`` (first
    component); returns ``(B, n + 1)``.
    """
    p = coeffs.params
    x0 = float(np.asarray(x0).ravel()[0])
    if kind == "drift_only":
        f = lambda s: float(coeffs.b(s, np.array([[x0]]))[0, 0])
        cells = [quad(f, a, b, epsabs=1e-14, epsrel=1e-13)[0] for a, b in zip(nodes[:-1], nodes[1:])]
        return (x0 + np.concatenate([[0.0], np.cumsum(cells)]))[None]
    if kind == "ito_gbm":
        sig, mu = p["sigma"], p.get("mu", 0.0)
        return x0 * np.exp((mu - 0.5 * sig**2) * nodes[None] + sig * W)
    if kind == "young_exponential":
        return x0 * np.exp(p.get("a", 1.0) * BH)
    if kind == "mixed_exponential":
        sig = p["sigma"]
        return x0 * np.exp(sig * W - 0.5 * sig**2 * nodes[None] + p.get("a", 1.0) * BH)
    raise ValueError(f"no closed-form oracle for {kind!r}")


def closed_form_oracle(kind: str, problem: SDEProblem, noise: NoiseBundle) -> SamplePath:
    if kind not in ORACLES:
        raise ValueError(f"unsupported oracle kind {kind!r}; choose from {ORACLES}")
    vals = oracle_values(kind, problem.coeffs, problem.x0, noise.grid.nodes,
                         noise.bm.values[:, 0][None], noise.fbm.values[:, 0][None])
    return SamplePath(noise.grid, vals[0])


# ---------------------------------------------------------------- registry

def _zeros(B, *shape):
    return np.zeros((B,) + shape)


def _linear(d=1, a_b=0.0, a_w=0.0, a_h=1.0):
    eye = np.eye(d)
    return CoefficientSet(
        d, d, d,
        b=lambda t, x: a_b * x,
        sigma_w=lambda t, x: a_w * np.einsum("bi,ij->bij", x, eye),
        sigma_h=lambda t, x: a_h * np.einsum("bi,ij->bij", x, eye),
        dsigma_h=lambda t, x: np.broadcast_to(a_h * np.einsum("ij,ik->ijk", eye, eye), (x.shape[0], d, d, d)).copy(),
        constants=dict(L1=abs(a_b), L2=abs(a_b), L3=abs(a_w), L4=abs(a_w), L5=abs(a_h), L6=0.0,
                       L7=0.0, L=abs(a_h), beta=1.0, delta=1.0),
    )


def _affine(b0=0.5, b1=-1.0, w0=0.2, w1=0.3, h0=0.1, h1=0.5):
    one = lambda v: (lambda t, x: v[0] + v[1] * x)
    return CoefficientSet(
        1, 1, 1,
        b=one((b0, b1)),
        sigma_w=lambda t, x: (w0 + w1 * x)[..., None],
        sigma_h=lambda t, x: (h0 + h1 * x)[..., None],
        dsigma_h=lambda t, x: np.full((x.shape[0], 1, 1, 1), h1),
        constants=dict(L1=abs(b1), L2=max(abs(b0), abs(b1)), L3=abs(w1), L4=max(abs(w0), abs(w1)),
                       L5=abs(h1), L6=0.0, L7=0.0, L=max(abs(h0), abs(h1)), beta=1.0, delta=1.0),
    )


def _sin(a=1.0, c_b=0.5, c_w=0.3):
    return CoefficientSet(
        1, 1, 1,
        b=lambda t, x: c_b * np.cos(x),
        sigma_w=lambda t, x: (c_w * np.cos(x))[..., None],
        sigma_h=lambda t, x: (a * np.sin(x))[..., None],
        dsigma_h=lambda t, x: (a * np.cos(x))[..., None, None],
        constants=dict(L1=abs(c_b), L2=abs(c_b), L3=abs(c_w), L4=abs(c_w), L5=abs(a), L6=abs(a),
                       L7=0.0, L=abs(a), beta=1.0, delta=1.0),
    )


def _time_modulated(a0=0.5, amp=0.5, beta=0.7, c_w=0.3, T=1.0):
    """``sigma_H(t, x) = (a0 + amp t^beta) sin(x)`` with a ``beta``-Hölder modulation."""
    mod = lambda t: a0 + amp * t**beta
    top = abs(a0) + abs(amp) * T**beta
    return CoefficientSet(
        1, 1, 1,
        b=lambda t, x: -0.5 * np.sin(x),
        sigma_w=lambda t, x: np.full(x.shape + (1,), c_w),
        sigma_h=lambda t, x: (mod(t) * np.sin(x))[..., None],
        dsigma_h=lambda t, x: (mod(t) * np.cos(x))[..., None, None],
        constants=dict(L1=0.5, L2=0.5, L3=0.0, L4=abs(c_w), L5=top, L6=top, L7=math.sqrt(2) * abs(amp),
                       L=top, beta=beta, delta=1.0),
    )


def _drift_only(b0=1.0, b1=0.0, omega=1.0):
    """``b(t) = b0 + b1 cos(2 pi omega t)``; no noise."""
    return CoefficientSet(
        1, 1, 1,
        b=lambda t, x: np.full_like(x, b0 + b1 * math.cos(2 * math.pi * omega * t)),
        sigma_w=lambda t, x: _zeros(x.shape[0], 1, 1),
        sigma_h=lambda t, x: _zeros(x.shape[0], 1, 1),
        dsigma_h=lambda t, x: _zeros(x.shape[0], 1, 1, 1),
        constants=dict(L1=0.0, L2=abs(b0) + abs(b1), L3=0.0, L4=0.0, L5=0.0, L6=0.0, L7=0.0,
                       L=0.0, beta=1.0, delta=1.0),
    )


def _ito_gbm(sigma=0.5, mu=0.0):
    return CoefficientSet(
        1, 1, 1,
        b=lambda t, x: mu * x,
        sigma_w=lambda t, x: (sigma * x)[..., None],
        sigma_h=lambda t, x: _zeros(x.shape[0], 1, 1),
        dsigma_h=lambda t, x: _zeros(x.shape[0], 1, 1, 1),
        constants=dict(L1=abs(mu), L2=abs(mu), L3=abs(sigma), L4=abs(sigma), L5=0.0, L6=0.0, L7=0.0,
                       L=0.0, beta=1.0, delta=1.0),
    )


def _young_exponential(a=1.0):
    return CoefficientSet(
        1, 1, 1,
        b=lambda t, x: np.zeros_like(x),
        sigma_w=lambda t, x: _zeros(x.shape[0], 1, 1),
        sigma_h=lambda t, x: (a * x)[..., None],
        dsigma_h=lambda t, x: np.full((x.shape[0], 1, 1, 1), a),
        constants=dict(L1=0.0, L2=0.0, L3=0.0, L4=0.0, L5=abs(a), L6=0.0, L7=0.0, L=abs(a),
                       beta=1.0, delta=1.0),
    )


def _mixed_exponential(sigma=0.5, a=1.0):
    return CoefficientSet(
        1, 1, 1,
        b=lambda t, x: np.zeros_like(x),
        sigma_w=lambda t, x: (sigma * x)[..., None],
        sigma_h=lambda t, x: (a * x)[..., None],
        dsigma_h=lambda t, x: np.full((x.shape[0], 1, 1, 1), a),
        constants=dict(L1=0.0, L2=0.0, L3=abs(sigma), L4=abs(sigma), L5=abs(a), L6=0.0, L7=0.0,
                       L=abs(a), beta=1.0, delta=1.0),
    )


def _constant(c_b=1.0, c_w=0.5, c_h=0.5):
    return CoefficientSet(
        1, 1, 1,
        b=lambda t, x: np.full_like(x, c_b),
        sigma_w=lambda t, x: np.full(x.shape + (1,), c_w),
        sigma_h=lambda t, x: np.full(x.shape + (1,), c_h),
        dsigma_h=lambda t, x: _zeros(x.shape[0], 1, 1, 1),
        constants=dict(L1=0.0, L2=abs(c_b), L3=0.0, L4=abs(c_w), L5=0.0, L6=0.0, L7=0.0,
                       L=abs(c_h), beta=1.0, delta=1.0),
    )


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    factory: Callable
    oracle: str | None
    description: str


_REGISTRY = {
    e.name: e for e in [
        RegistryEntry("linear", _linear, None, "diagonal linear coefficients a_b x, a_w diag(x), a_h diag(x)"),
        RegistryEntry("affine", _affine, None, "scalar affine coefficients"),
        RegistryEntry("sin", _sin, None, "bounded smooth: c_b cos x, c_w cos x, a sin x"),
        RegistryEntry("time_modulated", _time_modulated, None, "(a0 + amp t^beta) sin x fBm coefficient"),
        RegistryEntry("drift_only", _drift_only, "drift_only", "b0 + b1 cos(2 pi omega t), no noise"),
        RegistryEntry("ito_gbm", _ito_gbm, "ito_gbm", "mu x dt + sigma x dW"),
        RegistryEntry("young_exponential", _young_exponential, "young_exponential", "a x dB^H"),
        RegistryEntry("mixed_exponential", _mixed_exponential, "mixed_exponential", "sigma x dW + a x dB^H"),
        RegistryEntry("constant", _constant, None, "additive constant coefficients"),
    ]
}


def coefficient_registry() -> dict:
    """Catalog of named coefficient families."""
    return dict(_REGISTRY)


def make_coefficients(family: str, **params) -> CoefficientSet:
    try:
        entry = _REGISTRY[family]
    except KeyError:
        raise KeyError(f"unknown coefficient family {family!r}; known: {sorted(_REGISTRY)}") from None
    sig = inspect.signature(entry.factory)
    unknown = set(params) - set(sig.parameters)
    if unknown:
        raise TypeError(f"family {family!r} has no parameters {sorted(unknown)}")
    full = {k: v.default for k, v in sig.parameters.items()}
    full.update(params)
    cs = entry.factory(**full)
    object.__setattr__(cs, "family", family)
    object.__setattr__(cs, "params", full)
    object.__setattr__(cs, "oracle", entry.oracle)
    return cs


def coefficients_from_spec(spec: dict) -> CoefficientSet:
    return make_coefficients(spec["family"], **spec.get("params", {}))


def spec_json(cs: CoefficientSet) -> str:
    return json.dumps(cs.spec(), sort_keys=True)
