"""Pure numpy implementation of the O(n^2) kernels.

Mirrors the compiled module ``_ckernels`` function for function; used when
the extension is not built or when ``FBMSDE_PURE_PYTHON=1``.
"""

from __future__ import annotations

import numpy as np

from ._quad import cell_weights, left_weight_rows

_CHUNK_ELEMS = 2_000_000


def _row_chunks(n1: int, width: int):
    step = max(1, _CHUNK_ELEMS // max(1, n1 * width))
    for start in range(0, n1, step):
        yield np.arange(start, min(n1, start + step))


def left_signed(t, F, e, diff):
    """``out[k] = int_0^{t_k} v_k(s) (t_k - s)^(-e) ds`` with ``v_k = F_k - F`` or ``F``."""
    t = np.ascontiguousarray(t, dtype=float)
    F = np.ascontiguousarray(F, dtype=float)
    out = np.zeros_like(F)
    for rows in _row_chunks(t.size, F.shape[1]):
        W = left_weight_rows(t, e, rows)
        if diff:
            D = F[rows, None, :] - F[None, :, :]
            out[rows] = np.einsum("kj,kjd->kd", W, D)
        else:
            if e >= 1.0:
                raise ValueError("value integrals need an integrable kernel (e < 1)")
            out[rows] = W @ F
    return out


def left_abs(t, F, e, delta):
    """``out[k] = int_0^{t_k} |F_k - F(s)|^delta (t_k - s)^(-e) ds``.

    For ``delta != 1`` the Hölder quotient ``|F_k - F|^delta / (t_k - s)^delta``
    is interpolated instead, with kernel exponent ``e - delta``.
    """
    t = np.ascontiguousarray(t, dtype=float)
    F = np.ascontiguousarray(F, dtype=float)
    n1 = t.size
    out = np.zeros(n1)
    e_eff = e if delta == 1.0 else e - delta
    for rows in _row_chunks(n1, F.shape[1]):
        W = left_weight_rows(t, e_eff, rows)
        D = np.linalg.norm(F[rows, None, :] - F[None, :, :], axis=2)
        if delta != 1.0:
            u = t[rows, None] - t[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                Q = np.where(u > 0, D ** delta / np.where(u > 0, u, 1.0) ** delta, 0.0)
            r = np.arange(rows.size)
            inner = rows > 0
            Q[r[inner], rows[inner]] = Q[r[inner], rows[inner] - 1]
            D = Q
            if e_eff >= 1.0:
                near = D[r, rows]
                vals = np.einsum("kj,kj->k", W, D)
                out[rows] = np.where(near > 0, np.inf, vals)
                continue
        out[rows] = np.einsum("kj,kj->k", W, D)
    return out


def pair_hoelder(t, F, mu):
    """``max_{i<k} |F_k - F_i| / (t_k - t_i)^mu``."""
    t = np.asarray(t, dtype=float)
    F = np.asarray(F, dtype=float)
    best = 0.0
    for i in range(t.size - 1):
        d = np.linalg.norm(F[i + 1:] - F[i], axis=1)
        best = max(best, float(np.max(d / (t[i + 1:] - t[i]) ** mu)))
    return best


def _right_cells(t, i, e):
    u = t[i:] - t[i]
    return u, cell_weights(u[:-1], np.diff(u), e)


def pair_owm(t, F, alpha):
    """``max_{i<k} |F_k-F_i|/(t_k-t_i)^(1-alpha) + int_{t_i}^{t_k} |F(y)-F_i|/(y-t_i)^(2-alpha) dy``."""
    t = np.asarray(t, dtype=float)
    F = np.asarray(F, dtype=float)
    e = 2.0 - alpha
    best = 0.0
    for i in range(t.size - 1):
        u, (wn, wf) = _right_cells(t, i, e)
        D = np.linalg.norm(F[i:] - F[i], axis=1)
        cum = np.cumsum(wn * D[:-1] + wf * D[1:])
        val = D[1:] / u[1:] ** (1.0 - alpha) + cum
        best = max(best, float(np.max(val)))
    return best


def pair_lambda(t, F, alpha):
    """``max_{i<k} |(F_i-F_k)/(t_k-t_i)^(1-alpha) + (1-alpha) int_{t_i}^{t_k} (F_i-F(y))/(y-t_i)^(2-alpha) dy|``."""
    t = np.asarray(t, dtype=float)
    F = np.asarray(F, dtype=float)
    e = 2.0 - alpha
    best = 0.0
    for i in range(t.size - 1):
        u, (wn, wf) = _right_cells(t, i, e)
        S = F[i] - F[i:]
        cum = np.cumsum(wn[:, None] * S[:-1] + wf[:, None] * S[1:], axis=0)
        val = S[1:] / (u[1:] ** (1.0 - alpha))[:, None] + (1.0 - alpha) * cum
        best = max(best, float(np.max(np.linalg.norm(val, axis=1))))
    return best
