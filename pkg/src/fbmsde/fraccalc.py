"""Riemann-Liouville integrals, Weyl derivatives and the generalized Stieltjes integral.

Sign normalization: with the Weyl derivatives written without the
``(-1)^alpha`` factors, the fractional representation used here is

    int_0^t f dg = -int_0^t D_{0+}^a f_{0+}(x) D_{t-}^{1-a} g_{t-}(x) dx + f(0) (g(t) - g(0)),

which gives ``int 1 dg = g(t) - g(0)`` and the Young chain rule.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import trapezoid

from ._backend import kernels
from ._quad import anchor_weights
from .fracnorms import alpha_one_norm, lambda_alpha, validate_order
from .paths import GridError, SamplePath, TimeGrid
from .reports import EstimateReport, IntegralResult

RTOL_GFA1 = 1e-2


class ParameterError(ValueError):
    pass


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v[0]) if v.size == 1 else v


def _node(f: SamplePath, x: float) -> int:
    return f.grid.index_of(x)


def rl_integral_left(f: SamplePath, alpha: float, x: float):
    """``I_{0+}^alpha f(x) = (1/Gamma(alpha)) int_0^x (x-y)^(alpha-1) f(y) dy``."""
    alpha = validate_order(alpha)
    k = _node(f, x)
    if k == 0:
        raise GridError("x must lie strictly to the right of the left endpoint")
    u = f.t[k] - f.t[k::-1]
    return _out(anchor_weights(u, 1.0 - alpha) @ f.values[k::-1] / math.gamma(alpha))


def rl_integral_right(f: SamplePath, alpha: float, x: float):
    """``I_{T-}^alpha f(x) = (1/Gamma(alpha)) int_x^T (y-x)^(alpha-1) f(y) dy``."""
    alpha = validate_order(alpha)
    k = _node(f, x)
    if k == f.grid.n:
        raise GridError("x must lie strictly to the left of the right endpoint")
    u = f.t[k:] - f.t[k]
    return _out(anchor_weights(u, 1.0 - alpha) @ f.values[k:] / math.gamma(alpha))


def rl_integral_left_path(f: SamplePath, alpha: float) -> SamplePath:
    """``I_{0+}^alpha f`` at every node (0 at the left endpoint)."""
    alpha = validate_order(alpha)
    vals = kernels.left_signed(f.t, f.values, 1.0 - alpha, False) / math.gamma(alpha)
    return SamplePath(f.grid, vals)


def _reflect(f: SamplePath, K: int):
    t = f.t[K] - f.t[K::-1]
    return t, np.ascontiguousarray(f.values[K::-1])


def rl_integral_right_path(f: SamplePath, alpha: float) -> SamplePath:
    alpha = validate_order(alpha)
    t, F = _reflect(f, f.grid.n)
    vals = kernels.left_signed(t, F, 1.0 - alpha, False)[::-1] / math.gamma(alpha)
    return SamplePath(f.grid, vals)


def weyl_derivative_left(f: SamplePath, alpha: float, x: float):
    """``D_{0+}^alpha f(x)`` at an interior or right-end grid node."""
    alpha = validate_order(alpha)
    k = _node(f, x)
    if k == 0:
        raise GridError("the left Weyl derivative is singular at the left endpoint")
    u = f.t[k] - f.t[k::-1]
    integral = anchor_weights(u, alpha + 1.0) @ (f.values[k] - f.values[k::-1])
    return _out((f.values[k] / u[-1] ** alpha + alpha * integral) / math.gamma(1.0 - alpha))


def weyl_derivative_left_path(f: SamplePath, alpha: float) -> np.ndarray:
    """``D_{0+}^alpha f`` at every node, shape ``(n+1, dim)``; node 0 holds NaN."""
    alpha = validate_order(alpha)
    integral = kernels.left_signed(f.t, f.values, alpha + 1.0, True)
    out = np.full_like(f.values, np.nan)
    out[1:] = (f.values[1:] / f.t[1:, None] ** alpha + alpha * integral[1:]) / math.gamma(1.0 - alpha)
    return out


def weyl_derivative_right(g: SamplePath, alpha: float, x: float, b: float | None = None,
                          centered: bool = False):
    """``D_{b-}^alpha g(x)``; with ``centered`` it acts on ``g_{b-} = g - g(b)``."""
    alpha = validate_order(alpha)
    K = g.grid.n if b is None else _node(g, b)
    k = _node(g, x)
    if k >= K:
        raise GridError("the right Weyl derivative is singular at the right endpoint")
    u = g.t[k:K + 1] - g.t[k]
    seg = g.values[k:K + 1]
    integral = anchor_weights(u, alpha + 1.0) @ (g.values[k] - seg)
    gx = g.values[k] - g.values[K] if centered else g.values[k]
    return _out((gx / u[-1] ** alpha + alpha * integral) / math.gamma(1.0 - alpha))


def weyl_derivative_right_path(g: SamplePath, alpha: float, K: int | None = None,
                               centered: bool = True) -> np.ndarray:
    """``D_{t_K-}^alpha g_{t_K-}`` at nodes ``0..K``, shape ``(K+1, dim)``; node K holds NaN."""
    alpha = validate_order(alpha)
    K = g.grid.n if K is None else K
    t, G = _reflect(g, K)
    integral = kernels.left_signed(t, G, alpha + 1.0, True)[::-1]
    base = g.values[: K + 1] - (g.values[K] if centered else 0.0)
    out = np.full((K + 1, g.dim), np.nan)
    dist = g.t[K] - g.t[:K]
    out[:K] = (base[:K] / dist[:, None] ** alpha + alpha * integral[:K]) / math.gamma(1.0 - alpha)
    return out


def _broadcast_dims(f: SamplePath, g: SamplePath):
    if f.grid != g.grid:
        raise GridError("f and g must share one grid")
    if f.dim != g.dim and 1 not in (f.dim, g.dim):
        raise ValueError(f"incompatible dimensions {f.dim} and {g.dim}")


def admissible_window(holder: tuple[float, float]) -> tuple[float, float]:
    lam, mu = holder
    if lam + mu <= 1.0:
        raise ParameterError(f"Hölder exponents {lam} + {mu} must exceed 1")
    return max(1.0 - mu, 0.0), min(lam, 1.0)


def _estimated_holder(f: SamplePath, g: SamplePath):
    from .verify import hoelder_exponent_estimate

    def est(p):
        try:
            return min(hoelder_exponent_estimate(p), 1.0)
        except ValueError:
            return 1.0
    return est(f), est(g)


def choose_alpha(f: SamplePath, g: SamplePath, alpha: float | None = None,
                 holder: tuple[float, float] | None = None) -> float:
    """Validate ``alpha`` against ``1 - mu < alpha < lambda``; default to the window midpoint."""
    if holder is None:
        if alpha is not None:
            return validate_order(alpha)
        holder = _estimated_holder(f, g)
    lo, hi = admissible_window(holder)
    if alpha is None:
        return 0.5 * (lo + hi)
    alpha = validate_order(alpha)
    if not lo < alpha < hi:
        raise ParameterError(f"alpha={alpha} outside the admissible window ({lo}, {hi})")
    return alpha


def _fractional_value(f: SamplePath, g: SamplePath, alpha: float, k: int):
    fv = f.values[: k + 1]
    gv = g.values[: k + 1]
    t = f.t[: k + 1]
    fc = SamplePath(TimeGrid(t), fv - fv[0])
    Df = weyl_derivative_left_path(fc, alpha)
    Dg = weyl_derivative_right_path(SamplePath(fc.grid, gv), 1.0 - alpha, k, centered=True)
    Df[0] = 0.0
    Dg[k] = 0.0
    integrand = Df * Dg
    return -trapezoid(integrand, t, axis=0) + fv[0] * (gv[k] - gv[0])


def stieltjes_integral_fractional(f: SamplePath, g: SamplePath, alpha: float | None = None,
                                  t: float | None = None,
                                  holder: tuple[float, float] | None = None) -> IntegralResult:
    """``int_0^t f dg`` through Weyl derivatives of ``f_{0+}`` and ``g_{t-}``.

    Works componentwise. ``est_error`` compares with the same formula on the
    every-other-node subgrid.
    """
    _broadcast_dims(f, g)
    alpha = choose_alpha(f, g, alpha, holder)
    k = f.grid.n if t is None else _node(f, t)
    if k == 0:
        return IntegralResult(_out(np.zeros(max(f.dim, g.dim))), "fractional_formula", f.grid.mesh, 0.0)
    value = _fractional_value(f, g, alpha, k)
    est = 0.0
    if k % 2 == 0 and k >= 4:
        idx = np.arange(0, k + 1, 2)
        sub = TimeGrid(f.t[idx])
        coarse = _fractional_value(SamplePath(sub, f.values[idx]), SamplePath(sub, g.values[idx]),
                                   alpha, sub.n)
        est = float(np.max(np.abs(value - coarse)))
    return IntegralResult(_out(value), "fractional_formula", f.grid.mesh, est)


def rs_cumulative(f: SamplePath, g: SamplePath) -> np.ndarray:
    """Left-point sums ``sum_{i<k} f(t_i) (g(t_{i+1}) - g(t_i))`` for every ``k``."""
    _broadcast_dims(f, g)
    inc = f.values[:-1] * np.diff(g.values, axis=0)
    out = np.zeros((f.t.size, inc.shape[1]))
    out[1:] = np.cumsum(inc, axis=0)
    return out


def stieltjes_integral_rs_sums(f: SamplePath, g: SamplePath, t: float | None = None) -> IntegralResult:
    """Left-point Riemann-Stieltjes sum; ``est_error`` is the gap to the 2x-mesh sum."""
    _broadcast_dims(f, g)
    k = f.grid.n if t is None else _node(f, t)
    fv, gv = f.values[: k + 1], g.values[: k + 1]
    value = np.sum(fv[:-1] * np.diff(gv, axis=0), axis=0) if k else np.zeros(max(f.dim, g.dim))
    est = 0.0
    if k >= 2 and k % 2 == 0:
        fc, gc = fv[::2], gv[::2]
        coarse = np.sum(fc[:-1] * np.diff(gc, axis=0), axis=0)
        est = float(np.max(np.abs(value - coarse)))
    return IntegralResult(_out(value), "riemann_stieltjes_sums", f.grid.mesh, est)


def bound_check_gfa1(f: SamplePath, g: SamplePath, alpha: float, t: float | None = None,
                     rtol: float = RTOL_GFA1) -> EstimateReport:
    """Check ``|int_0^t f dg| <= Lambda_alpha(g) ||f||_{alpha,1}``."""
    alpha = validate_order(alpha)
    res = stieltjes_integral_fractional(f, g, alpha, t)
    lhs = float(np.max(np.abs(np.atleast_1d(res.value))))
    rhs = lambda_alpha(g, alpha) * alpha_one_norm(f, alpha)
    rep = EstimateReport.from_sides("Gfa1", lhs, rhs, cap=1.0, rtol=rtol,
                                    alpha=alpha, n=f.grid.n, est_error=res.est_error)
    if not rep.passed and lhs <= rhs * (1.0 + rtol) + res.est_error:
        rep.passed = True
        rep.flags.append("within quadrature error")
    if not rep.passed:
        rep.flags.append("FAILED")
    return rep
