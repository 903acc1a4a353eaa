"""Norms and pathwise functionals of grid-sampled functions.

All singular integrals are computed with the product-integration rule of
``_quad``: the path is treated as piecewise linear, kernel moments are exact,
and the cell touching the singular point uses the local linear model in
closed form. Discrete sups over nodes or node pairs are lower bounds for
the continuous ones.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.integrate import trapezoid

from ._backend import kernels
from ._quad import anchor_weights, left_weight_rows
from .paths import SamplePath
from .reports import NormReport

OVERFLOW_GUARD = 1e300
PAIR_CAP = 4096


class DivergenceWarning(RuntimeWarning):
    pass


def validate_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    return alpha


def validate_order(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {alpha}")
    return alpha


def _check_pairs(f: SamplePath):
    if f.grid.n > PAIR_CAP:
        raise ValueError(f"pairwise functionals are capped at n={PAIR_CAP}, got {f.grid.n}")


def _left_diffs(f: SamplePath, k: int):
    """Distances to node ``k`` going left, and the matching increments."""
    u = f.t[k] - f.t[k::-1]
    D = f.values[k] - f.values[k::-1]
    return u, D


def pointwise_alpha_norm(f: SamplePath, t: float, alpha: float) -> float:
    """``|f(t)| + int_0^t |f(t) - f(s)| / (t - s)^(alpha+1) ds`` at grid node ``t``."""
    alpha = validate_alpha(alpha)
    k = f.grid.index_of(t)
    u, D = _left_diffs(f, k)
    w = anchor_weights(u, alpha + 1.0)
    return float(np.linalg.norm(f.values[k]) + w @ np.linalg.norm(D, axis=1))


def pointwise_alpha_norms(f: SamplePath, alpha: float) -> np.ndarray:
    """``||f(t_k)||_alpha`` for every node."""
    alpha = validate_alpha(alpha)
    return np.linalg.norm(f.values, axis=1) + kernels.left_abs(f.t, f.values, alpha + 1.0, 1.0)


def pointwise_alpha_norms_batch(t: np.ndarray, X: np.ndarray, alpha: float,
                                chunk_elems: int = 4_000_000) -> np.ndarray:
    """``||X_b(t_k)||_alpha`` for a batch ``X`` of shape ``(B, n + 1, d)`` sharing nodes ``t``.

    The quadrature weights are built once and reused across the batch.
    """
    alpha = validate_alpha(alpha)
    n1 = t.size
    Wm = left_weight_rows(np.asarray(t, dtype=float), alpha + 1.0, np.arange(n1))
    out = np.empty(X.shape[:2])
    step = max(1, chunk_elems // (n1 * n1 * X.shape[2]))
    for a in range(0, X.shape[0], step):
        x = X[a:a + step]
        D = np.linalg.norm(x[:, :, None, :] - x[:, None, :, :], axis=3)
        out[a:a + step] = np.linalg.norm(x, axis=2) + np.einsum("bkj,kj->bk", D, Wm)
    return out


def alpha_infty_norm(f: SamplePath, alpha: float) -> float:
    return float(np.max(pointwise_alpha_norms(f, alpha)))


def sup_norm(f: SamplePath) -> float:
    return float(np.max(np.linalg.norm(f.values, axis=1)))


def hoelder_seminorm(f: SamplePath, mu: float) -> float:
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    _check_pairs(f)
    return float(kernels.pair_hoelder(f.t, f.values, float(mu)))


def hoelder_norm(f: SamplePath, mu: float) -> float:
    """``||f||_inf + max_{s<t} |f(t) - f(s)| / (t - s)^mu`` over grid pairs."""
    return sup_norm(f) + hoelder_seminorm(f, mu)


def one_minus_alpha_infty_norm(g: SamplePath, alpha: float) -> float:
    """``sup_{s<t} |g(t)-g(s)|/(t-s)^(1-alpha) + int_s^t |g(y)-g(s)|/(y-s)^(2-alpha) dy``."""
    alpha = validate_order(alpha)
    _check_pairs(g)
    return float(kernels.pair_owm(g.t, g.values, alpha))


def alpha_one_norm(f: SamplePath, alpha: float) -> float:
    """``int_0^T |f(s)|/s^alpha ds + int_0^T int_0^s |f(s)-f(y)|/(s-y)^(alpha+1) dy ds``."""
    alpha = validate_order(alpha)
    first = anchor_weights(f.t, alpha) @ np.linalg.norm(f.values, axis=1)
    inner = kernels.left_abs(f.t, f.values, alpha + 1.0, 1.0)
    return float(first + trapezoid(inner, f.t))


def lambda_alpha(g: SamplePath, alpha: float) -> float:
    """``sup_{s<t} |D_{t-}^{1-alpha} g_{t-}(s)| / Gamma(1 - alpha)`` over grid pairs."""
    alpha = validate_order(alpha)
    _check_pairs(g)
    raw = kernels.pair_lambda(g.t, g.values, alpha)
    return float(raw / (math.gamma(alpha) * math.gamma(1.0 - alpha)))


def _guard(value: float, what: str) -> float:
    if not np.isfinite(value) or value > OVERFLOW_GUARD:
        warnings.warn(f"{what} diverges (value {value!r}); reported as +inf", DivergenceWarning)
        return math.inf
    return float(value)


def delta_seminorm(f: SamplePath, s: float, alpha: float, delta: float) -> float:
    """``int_0^s |f(s) - f(r)|^delta / (s - r)^(alpha+1) dr`` at grid node ``s``.

    The Hölder quotient ``|f(s)-f(r)|^delta / (s-r)^delta`` is interpolated
    linearly and integrated against ``(s-r)^(delta-alpha-1)``; for
    ``delta <= alpha`` the integral diverges unless ``f`` is locally constant.
    """
    alpha = validate_alpha(alpha)
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    k = f.grid.index_of(s)
    if k == 0:
        return 0.0
    u, D = _left_diffs(f, k)
    d = np.linalg.norm(D, axis=1)
    if delta == 1.0:
        return _guard(anchor_weights(u, alpha + 1.0) @ d, "delta seminorm")
    q = np.empty_like(d)
    q[1:] = d[1:] ** delta / u[1:] ** delta
    q[0] = q[1]
    e = alpha + 1.0 - delta
    if e >= 1.0 and q[0] > 0:
        return _guard(math.inf, "delta seminorm")
    return _guard(anchor_weights(u, e) @ q, "delta seminorm")


def delta_seminorms(f: SamplePath, alpha: float, delta: float) -> np.ndarray:
    """``Delta f(t_k)`` for every node (``+inf`` where divergent)."""
    alpha = validate_alpha(alpha)
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    out = np.asarray(kernels.left_abs(f.t, f.values, alpha + 1.0, float(delta)), dtype=float)
    return np.where(out > OVERFLOW_GUARD, np.inf, out)


def lemma_delta_bound(N: float, T: float, alpha: float, eta: float, delta: float) -> float:
    """Bound ``N^delta T^(eta*delta - alpha) / (eta*delta - alpha)`` on ``Delta f`` when ``||f||_eta <= N``."""
    ex = eta * delta - alpha
    if ex <= 0:
        raise ValueError("the bound needs alpha < eta * delta")
    return N**delta * T**ex / ex


def norm_report(kind: str, f: SamplePath, value: float, param: float | None = None) -> NormReport:
    return NormReport(kind=kind, value=float(value), n=f.grid.n, T=f.grid.T, alpha_or_mu=param)
