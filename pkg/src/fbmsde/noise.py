"""Exact-in-law sampling of fractional and standard Brownian motion on grids.

Two fBm samplers are provided: a Cholesky factorisation of the full
covariance (any grid, ``n <= CHOLESKY_CAP``) and Davies-Harte circulant
embedding of the stationary increment covariance (uniform grids only).
Multidimensional fBm has independent scalar components.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lapack

from . import rng
from .paths import GridError, SamplePath, TimeGrid

CHOLESKY_CAP = 2048
JITTER = 1e-12
CLAMP_TOL = 1e-10


class DomainError(ValueError):
    pass


class CholeskyError(np.linalg.LinAlgError):
    """Covariance factorisation failed; ``minor`` is the offending leading minor (1-based)."""

    def __init__(self, minor: int):
        super().__init__(f"covariance not positive definite at leading minor {minor}")
        self.minor = minor


class CirculantClampWarning(RuntimeWarning):
    pass


def validate_hurst(H: float, allow_half: bool = False) -> float:
    H = float(H)
    lo_ok = H >= 0.5 if allow_half else H > 0.5
    if not (lo_ok and H < 1.0):
        raise DomainError(f"H must lie in (1/2,1), got {H}")
    return H


def fbm_covariance(s, t, H: float):
    """``R_H(s, t) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2``; broadcasts over arrays."""
    H = float(H)
    if not 0.0 < H < 1.0:
        raise DomainError(f"H must lie in (0,1), got {H}")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise DomainError("fBm covariance is defined for non-negative times only")
    h2 = 2.0 * H
    out = 0.5 * (t**h2 + s**h2 - np.abs(t - s) ** h2)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _cholesky_factor(nodes_bytes: bytes, H: float) -> np.ndarray:
    t = np.frombuffer(nodes_bytes, dtype=float)[1:]
    K = fbm_covariance(t[:, None], t[None, :], H)
    L, info = lapack.dpotrf(K, lower=1, clean=1)
    if info > 0:
        bump = JITTER * np.trace(K) / K.shape[0]
        L, info = lapack.dpotrf(K + bump * np.eye(K.shape[0]), lower=1, clean=1)
        if info > 0:
            raise CholeskyError(int(info))
    L.setflags(write=False)
    return L


@lru_cache(maxsize=32)
def _circulant_sqrt_eigs(n: int, H: float) -> np.ndarray:
    """Square-rooted eigenvalues of the size-2n embedding of unit-step fGn."""
    k = np.arange(n + 1, dtype=float)
    h2 = 2.0 * H
    gamma = 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(row).real
    lo = lam.min()
    if lo < 0:
        if lo < -CLAMP_TOL * np.abs(lam).max():
            raise DomainError(f"circulant embedding has negative eigenvalue {lo:.3e}")
        warnings.warn(f"clamped circulant eigenvalue {lo:.3e} to zero", CirculantClampWarning)
        lam = np.maximum(lam, 0.0)
    out = np.sqrt(lam / lam.size)
    out.setflags(write=False)
    return out


def _check_dim(k: int, name: str) -> int:
    if int(k) < 1:
        raise DomainError(f"{name} must be >= 1, got {k}")
    return int(k)


def fbm_paths(grid: TimeGrid, H: float, m: int, seed: int, n_paths: int = 1,
              method: str = "auto", start: int = 0) -> np.ndarray:
    """Batch of fBm paths, shape ``(n_paths, n + 1, m)``.

    Path ``p`` uses substreams ``(seed, "fbm", start + p, j)``, so a batch is
    identical to the corresponding single-path calls.
    """
    H = validate_hurst(H)
    m = _check_dim(m, "m")
    if method == "auto":
        method = "cholesky" if grid.n <= CHOLESKY_CAP or not grid.uniform else "circulant"
    n = grid.n
    out = np.zeros((n_paths, n + 1, m))
    if method == "cholesky":
        if n > CHOLESKY_CAP:
            raise DomainError(f"Cholesky sampling is capped at n={CHOLESKY_CAP}, got {n}")
        L = _cholesky_factor(grid.nodes.tobytes(), H)
        Z = np.empty((n, n_paths * m))
        for p in range(n_paths):
            for j in range(m):
                Z[:, p * m + j] = rng.normals(seed, "fbm", start + p, j, n)
        out[:, 1:, :] = (L @ Z).T.reshape(n_paths, m, n).transpose(0, 2, 1)
    elif method == "circulant":
        if not grid.uniform:
            raise GridError("circulant embedding requires a uniform grid")
        sq = _circulant_sqrt_eigs(n, H)
        M = 2 * n
        Z = np.empty((n_paths * m, M), dtype=complex)
        for p in range(n_paths):
            for j in range(m):
                z = rng.normals(seed, "fbm", start + p, j, 2 * M)
                Z[p * m + j] = z[:M] + 1j * z[M:]
        fgn = np.fft.fft(sq * Z, axis=1).real[:, :n] * (grid.T / n) ** H
        out[:, 1:, :] = np.cumsum(fgn, axis=1).reshape(n_paths, m, n).transpose(0, 2, 1)
    else:
        raise ValueError(f"unknown fBm method {method!r}")
    return out


def bm_paths(grid: TimeGrid, r: int, seed: int, n_paths: int = 1, start: int = 0) -> np.ndarray:
    """Batch of standard Brownian paths, shape ``(n_paths, n + 1, r)``."""
    r = _check_dim(r, "r")
    n = grid.n
    sd = np.sqrt(grid.steps)
    out = np.zeros((n_paths, n + 1, r))
    for p in range(n_paths):
        for k in range(r):
            out[p, 1:, k] = np.cumsum(sd * rng.normals(seed, "bm", start + p, k, n))
    return out


def generate_fbm_cholesky(grid: TimeGrid, H: float, m: int, seed: int, path_index: int = 0) -> SamplePath:
    return SamplePath(grid, fbm_paths(grid, H, m, seed, 1, "cholesky", path_index)[0])


def generate_fbm_circulant(grid: TimeGrid, H: float, m: int, seed: int, path_index: int = 0) -> SamplePath:
    return SamplePath(grid, fbm_paths(grid, H, m, seed, 1, "circulant", path_index)[0])


def generate_fbm(grid: TimeGrid, H: float, m: int, seed: int, path_index: int = 0,
                 method: str = "auto") -> SamplePath:
    return SamplePath(grid, fbm_paths(grid, H, m, seed, 1, method, path_index)[0])


def generate_bm(grid: TimeGrid, r: int, seed: int, path_index: int = 0) -> SamplePath:
    return SamplePath(grid, bm_paths(grid, r, seed, 1, path_index)[0])


@dataclass(frozen=True)
class NoiseBundle:
    """Driving noises on a shared grid.

    ``fbm`` may hold any path with Hölder exponent above 1/2; the solvers only
    use its increments.
    """

    fbm: SamplePath
    bm: SamplePath
    seed: int
    hurst: float

    def __post_init__(self):
        if self.fbm.grid != self.bm.grid:
            raise GridError("fBm and BM must share one grid")
        if np.any(self.fbm.values[0] != 0) or np.any(self.bm.values[0] != 0):
            raise DomainError("noise paths must start at 0")

    @property
    def grid(self) -> TimeGrid:
        return self.fbm.grid

    def restrict(self, grid: TimeGrid) -> "NoiseBundle":
        return NoiseBundle(self.fbm.restrict(grid), self.bm.restrict(grid), self.seed, self.hurst)

    def with_bm(self, bm: SamplePath) -> "NoiseBundle":
        return NoiseBundle(self.fbm, bm, self.seed, self.hurst)


def make_noise(grid: TimeGrid, H: float, m: int, r: int, seed: int, path_index: int = 0,
               method: str = "auto") -> NoiseBundle:
    return NoiseBundle(
        generate_fbm(grid, H, m, seed, path_index, method),
        generate_bm(grid, r, seed, path_index),
        seed,
        validate_hurst(H),
    )
