"""Time grids and grid-sampled paths shared by every module."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Raised for malformed grids or queries off the grid."""


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Partition ``0 = t_0 < t_1 < ... < t_n = T``.

    Parameters
    ----------
    nodes : array_like
        Strictly increasing node times starting at zero.
    """

    nodes: np.ndarray
    uniform: bool = field(init=False, default=False)

    def __post_init__(self):
        t = np.ascontiguousarray(self.nodes, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise GridError("a grid needs at least two nodes")
        if t[0] != 0.0:
            raise GridError(f"grid must start at 0, got {t[0]!r}")
        if not np.all(np.diff(t) > 0):
            raise GridError("grid nodes must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "nodes", t)
        h = np.diff(t)
        object.__setattr__(self, "uniform", bool(np.allclose(h, t[-1] / h.size, rtol=1e-9, atol=0)))

    @classmethod
    def uniform_grid(cls, T: float, n: int) -> "TimeGrid":
        if T <= 0:
            raise GridError(f"horizon must be positive, got {T}")
        if n < 1:
            raise GridError(f"need n >= 1 cells, got {n}")
        t = np.arange(n + 1, dtype=float) * (T / n)
        t[-1] = T
        return cls(t)

    @classmethod
    def geometric_grid(cls, T: float, n: int, ratio: float | None = None) -> "TimeGrid":
        """Cells growing geometrically; ``ratio`` defaults to ``1 + 1/n``."""
        q = 1.0 + 1.0 / n if ratio is None else ratio
        if q == 1.0:
            return cls.uniform_grid(T, n)
        i = np.arange(n + 1, dtype=float)
        t = T * np.expm1(i * np.log(q)) / np.expm1(n * np.log(q))
        t[0], t[-1] = 0.0, T
        return cls(t)

    @property
    def n(self) -> int:
        """Number of cells."""
        return self.nodes.size - 1

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    def index_of(self, t: float, atol: float = 1e-12) -> int:
        """Index of node ``t``; raises if ``t`` is not a node."""
        k = int(np.searchsorted(self.nodes, t - atol * max(1.0, self.T)))
        if k >= self.nodes.size or abs(self.nodes[k] - t) > atol * max(1.0, self.T):
            raise GridError(f"time {t!r} is not a grid node")
        return k

    def project(self, t) -> np.ndarray:
        """Left-endpoint projection ``k_n(t)``: the node ``t_i`` with ``t`` in ``[t_i, t_{i+1})``."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.nodes, t, side="right") - 1
        idx = np.clip(idx, 0, self.n)
        # T itself maps to the last node
        return self.nodes[idx]

    def indices_in(self, finer: "TimeGrid") -> np.ndarray:
        """Positions of this grid's nodes inside ``finer``; raises if not nested."""
        idx = np.searchsorted(finer.nodes, self.nodes)
        idx = np.clip(idx, 0, finer.n)
        if not np.allclose(finer.nodes[idx], self.nodes, rtol=0, atol=1e-12 * max(1.0, self.T)):
            raise GridError("grid is not a subgrid of the given finer grid")
        return idx

    def subgrid(self, idx) -> "TimeGrid":
        idx = np.asarray(idx)
        return TimeGrid(self.nodes[idx])

    def coarsen(self, factor: int) -> "TimeGrid":
        if self.n % factor:
            raise GridError(f"cannot coarsen {self.n} cells by {factor}")
        return self.subgrid(np.arange(0, self.n + 1, factor))

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())

    def __repr__(self):
        kind = "uniform" if self.uniform else "nonuniform"
        return f"TimeGrid(n={self.n}, T={self.T}, {kind})"


@dataclass(frozen=True, eq=False)
class SamplePath:
    """A ``dim``-valued function sampled on every node of ``grid``.

    ``values`` has shape ``(n + 1, dim)``; one-dimensional input is promoted.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.nodes.size or v.shape[1] < 1:
            raise GridError(
                f"values of shape {v.shape} do not match grid with {self.grid.nodes.size} nodes"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: TimeGrid, func) -> "SamplePath":
        return cls(grid, np.asarray(func(grid.nodes), dtype=float))

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def at(self, t: float) -> np.ndarray:
        return self.values[self.grid.index_of(t)]

    def restrict(self, grid: TimeGrid) -> "SamplePath":
        return SamplePath(grid, self.values[grid.indices_in(self.grid)])

    def truncate(self, k: int) -> "SamplePath":
        """Path restricted to nodes ``0..k``."""
        return SamplePath(TimeGrid(self.grid.nodes[: k + 1]), self.values[: k + 1])

    def component(self, j: int) -> "SamplePath":
        return SamplePath(self.grid, self.values[:, j])

    def __add__(self, other):
        if isinstance(other, SamplePath):
            if other.grid != self.grid:
                raise GridError("paths live on different grids")
            return SamplePath(self.grid, self.values + other.values)
        return SamplePath(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, SamplePath):
            return self + SamplePath(other.grid, -other.values)
        return self + (-np.asarray(other))

    def __mul__(self, c):
        return SamplePath(self.grid, self.values * c)

    __rmul__ = __mul__

    def to_csv(self) -> str:
        """CSV text with header ``t,x1,...,xd``; floats use shortest round-trip repr."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{j + 1}" for j in range(self.dim)])
        for t, row in zip(self.t.tolist(), self.values.tolist()):
            w.writerow([repr(t)] + [repr(x) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SamplePath":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        if not header or header[0] != "t":
            raise GridError("CSV header must start with 't'")
        data = np.array([[float(x) for x in r] for r in body], dtype=float)
        return cls(TimeGrid(data[:, 0]), data[:, 1:])
