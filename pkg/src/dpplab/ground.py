"""Finite discretizations of a weighted one-dimensional ground space.

A :class:`GroundSpace` is a strictly increasing list of real grid
locations together with strictly positive cell masses.  All inner
products in the package are taken with respect to these masses,
``<u, v> = sum_x u(x) v(x) w_x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GroundSpace:
    """Grid points and positive cell masses of a discretized measure space."""

    points: np.ndarray
    weights: np.ndarray
    label: str = ""
    sqrt_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        points = _frozen_array(self.points)
        weights = _frozen_array(self.weights)
        if points.ndim != 1 or weights.ndim != 1:
            raise DimensionError("points and weights must be one-dimensional")
        if points.size < 1:
            raise ValueError("a ground space needs at least one point")
        if points.size != weights.size:
            raise DimensionError("points and weights must have equal length")
        if np.any(np.diff(points) <= 0):
            raise ValueError("points must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("all weights must be strictly positive")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "sqrt_weights", _frozen_array(np.sqrt(weights)))

    @property
    def n(self) -> int:
        return self.points.size

    def indices_in(self, lo: float, hi: float) -> tuple[int, ...]:
        """Indices of grid points lying in the closed interval [lo, hi]."""
        mask = (self.points >= lo) & (self.points <= hi)
        return tuple(int(i) for i in np.nonzero(mask)[0])

    @classmethod
    def uniform_cells(cls, lo: float, hi: float, n: int, label: str = "") -> "GroundSpace":
        """Uniform partition of (lo, hi] into n cells, points at cell midpoints."""
        h = (hi - lo) / n
        points = lo + h * (np.arange(n) + 0.5)
        return cls(points, np.full(n, h), label=label)

    @classmethod
    def geometric_cells(cls, lo: float, hi: float, n: int, label: str = "") -> "GroundSpace":
        """Geometric partition of [lo, hi] into n cells, midpoint masses."""
        edges = np.geomspace(lo, hi, n + 1)
        points = np.sqrt(edges[:-1] * edges[1:])
        return cls(points, np.diff(edges), label=label)


@dataclass(frozen=True)
class Window:
    """A subset of ground-space indices, standing in for a bounded Borel set.

    Empty windows are representable so that windowed diagnostics can report
    a zero value with a warning instead of refusing the computation.
    """

    index_set: tuple[int, ...]
    description: str = ""

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.index_set)))
        if any(i < 0 for i in idx):
            raise ValueError("window indices must be nonnegative")
        object.__setattr__(self, "index_set", idx)

    def __len__(self) -> int:
        return len(self.index_set)

    def validate(self, space: GroundSpace) -> None:
        if self.index_set and self.index_set[-1] >= space.n:
            raise DimensionError(
                f"window '{self.description}' has index {self.index_set[-1]} outside a {space.n}-point space"
            )

    def complement(self, space: GroundSpace, description: str = "") -> "Window":
        inside = set(self.index_set)
        return Window(tuple(i for i in range(space.n) if i not in inside), description)

    @classmethod
    def from_interval(cls, space: GroundSpace, lo: float, hi: float, description: str = "") -> "Window":
        return cls(space.indices_in(lo, hi), description or f"[{lo:g},{hi:g}]")

    @classmethod
    def full(cls, space: GroundSpace, description: str = "full") -> "Window":
        return cls(tuple(range(space.n)), description)


def weighted_inner(u, v, space: GroundSpace) -> float:
    """The pairing sum_x u(x) v(x) w_x on the given space."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (space.n,) or v.shape != (space.n,):
        raise DimensionError(f"vectors must have length {space.n}")
    return float(np.sum(u * v * space.weights))


def weighted_norm(u, space: GroundSpace) -> float:
    return float(np.sqrt(max(weighted_inner(u, u, space), 0.0)))
