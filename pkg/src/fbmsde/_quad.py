"""Product-integration weights for power-singular kernels.

Every singular integral in the package has the form

    integral of v(u) * u**(-e) du   over cells [a, a + h],

where ``u`` is the distance to the singular point and ``v`` is interpolated
linearly between the cell ends. The kernel moments are integrated in closed
form, so the rule is exact whenever ``v`` is linear on each cell (in
particular for increments of piecewise-linear paths).
"""

from __future__ import annotations

import numpy as np


def _moment(a, h, c):
    """``int_a^{a+h} u**(c-1) du`` evaluated without cancellation for ``a >> h``."""
    a = np.asarray(a, dtype=float)
    h = np.asarray(h, dtype=float)
    out = np.empty(np.broadcast(a, h).shape)
    pos = a > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.log1p(np.where(pos, h / np.where(pos, a, 1.0), 0.0))
        if c == 0.0:
            far = r
            near = np.full_like(out, np.inf)
        else:
            far = np.where(pos, a, 1.0) ** c * np.expm1(c * r) / c
            near = h ** c / c if c > 0 else np.full_like(out, np.inf)
    out[...] = np.where(pos, far, near)
    return out


def cell_weights(a, h, e: float):
    """Weights ``(w_near, w_far)`` of the end values for a cell ``[a, a+h]``.

    ``w_near`` multiplies ``v(a)`` and ``w_far`` multiplies ``v(a+h)``. When
    ``a == 0`` and ``e >= 1`` the near weight is infinite; it is returned as 0
    and the caller must guarantee ``v(0) == 0``.
    """
    a = np.asarray(a, dtype=float)
    h = np.asarray(h, dtype=float)
    m1 = _moment(a, h, 2.0 - e)
    m0 = _moment(a, h, 1.0 - e)
    with np.errstate(invalid="ignore"):
        w_far = np.where(a > 0, (m1 - a * m0) / h, m1 / h)
        w_near = np.where(np.isfinite(m0), m0 - w_far, 0.0)
    return w_near, w_far


def anchor_weights(u, e: float) -> np.ndarray:
    """Node weights for ``int_0^{u[-1]} v(u) u**(-e) du`` given sorted distances ``u``.

    ``u[0]`` must be 0 (the singular point).
    """
    u = np.asarray(u, dtype=float)
    w = np.zeros_like(u)
    if u.size < 2:
        return w
    wn, wf = cell_weights(u[:-1], np.diff(u), e)
    w[:-1] += wn
    w[1:] += wf
    return w


def left_weight_rows(t: np.ndarray, e: float, rows) -> np.ndarray:
    """Dense weight rows ``W[k, j]`` for ``int_0^{t_k} v(s) (t_k - s)**(-e) ds``.

    Only rows listed in ``rows`` are built; entries with ``j > k`` are zero.
    """
    rows = np.asarray(rows)
    n1 = t.size
    W = np.zeros((rows.size, n1))
    # cell j = [t_j, t_{j+1}], near end t_{j+1} (closest to the anchor)
    tk = t[rows][:, None]
    a = tk - t[None, 1:]
    h = np.broadcast_to(np.diff(t)[None, :], a.shape)
    valid = a >= 0
    a_safe = np.where(valid, a, 1.0)
    wn, wf = cell_weights(a_safe, h, e)
    wn = np.where(valid, wn, 0.0)
    wf = np.where(valid, wf, 0.0)
    W[:, 1:] += wn
    W[:, :-1] += wf
    return W
