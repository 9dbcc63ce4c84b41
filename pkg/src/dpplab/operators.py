"""Kernel operators on a weighted grid and their norm diagnostics.

Kernels are stored relative to the grid measure: ``entries[i, j]`` is
``K(x_i, x_j)``.  All spectral and determinantal work happens on the
symmetrized counting form ``Khat = W^{1/2} K W^{1/2}``, under which
composition of kernels becomes plain matrix multiplication and the
weighted inner product becomes the Euclidean one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DegenerateBasisError, DimensionError
from .ground import GroundSpace, Window

#: Gram condition number beyond which a spanning set counts as degenerate.
GRAM_CONDITION_LIMIT = 1e12
#: Residual-norm ratio matching the Gram condition limit (sqrt(1/limit)).
_RESIDUAL_RATIO_LIMIT = 1e-6
#: Tolerance for the idempotence check ||P^2 - P||_inf of projections.
PROJECTION_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """Real symmetric kernel on a ground space, stored relative to the measure."""

    space: GroundSpace
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        n = self.space.n
        if entries.shape != (n, n):
            raise DimensionError(f"kernel entries must be {n}x{n}")
        scale = max(float(np.max(np.abs(entries))), 1.0)
        if np.max(np.abs(entries - entries.T)) > 1e-8 * scale:
            raise ContractError("kernel entries are not symmetric")
        entries = (entries + entries.T) / 2.0  # exact symmetry by construction
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def counting(self) -> np.ndarray:
        """The symmetrized counting form W^{1/2} K W^{1/2} (cached)."""
        cached = self.__dict__.get("_counting")
        if cached is None:
            sw = self.space.sqrt_weights
            cached = self.entries * np.outer(sw, sw)
            cached.flags.writeable = False
            object.__setattr__(self, "_counting", cached)
        return cached

    @classmethod
    def from_counting(cls, space: GroundSpace, counting: np.ndarray) -> "KernelOperator":
        counting = np.asarray(counting, dtype=float)
        inv = 1.0 / space.sqrt_weights
        return cls(space, counting * np.outer(inv, inv))

    @classmethod
    def zero(cls, space: GroundSpace) -> "KernelOperator":
        return cls(space, np.zeros((space.n, space.n)))

    @classmethod
    def identity(cls, space: GroundSpace) -> "KernelOperator":
        """Kernel of the identity operator, K(x, y) = delta_{xy} / w_x."""
        return cls(space, np.diag(1.0 / space.weights))

    def __add__(self, other: "KernelOperator") -> "KernelOperator":
        self._check_same_space(other)
        return KernelOperator(self.space, self.entries + other.entries)

    def __sub__(self, other: "KernelOperator") -> "KernelOperator":
        self._check_same_space(other)
        return KernelOperator(self.space, self.entries - other.entries)

    def __rmul__(self, scalar: float) -> "KernelOperator":
        return KernelOperator(self.space, float(scalar) * self.entries)

    def _check_same_space(self, other: "KernelOperator") -> None:
        if other.space is not self.space and not (
            np.array_equal(other.space.points, self.space.points)
            and np.array_equal(other.space.weights, self.space.weights)
        ):
            raise DimensionError("operators live on different ground spaces")

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Apply the operator to a function on the grid (measure convention)."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise DimensionError(f"vector must have length {self.n}")
        return self.entries @ (v * self.space.weights)

    def is_projection(self, tol: float = PROJECTION_TOLERANCE) -> bool:
        khat = self.counting
        return float(np.max(np.abs(khat @ khat - khat))) < tol


@dataclass(frozen=True, eq=False)
class Subspace:
    """A list of spanning vectors on the grid, optionally orthonormal."""

    space: GroundSpace
    basis: np.ndarray
    orthonormal: bool = False

    def __post_init__(self):
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float)).copy()
        if basis.shape[1] != self.space.n:
            raise DimensionError("basis vectors must have one value per grid point")
        if self.orthonormal:
            counting = basis * self.space.sqrt_weights
            gram = counting @ counting.T
            if np.max(np.abs(gram - np.eye(basis.shape[0]))) > 1e-12:
                raise ContractError("basis flagged orthonormal but Gram matrix is not the identity")
        basis.flags.writeable = False
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True)
class OperatorNorms:
    operator_norm: float
    hs_norm: float
    trace_norm: float
    trace: float


def norms(K: KernelOperator) -> OperatorNorms:
    """Operator, Hilbert-Schmidt and trace norms of the counting form, plus the trace."""
    khat = K.counting
    singular = np.linalg.svd(khat, compute_uv=False)
    trace = float(np.sum(np.diag(K.entries) * K.space.weights))
    return OperatorNorms(
        operator_norm=float(singular[0]) if singular.size else 0.0,
        hs_norm=float(np.linalg.norm(khat)),
        trace_norm=float(np.sum(singular)),
        trace=trace,
    )


def local_trace_norm(K: KernelOperator, A: Window, B: Window) -> float:
    """Trace norm of the counting-form block chi_A Khat chi_B."""
    A.validate(K.space)
    B.validate(K.space)
    if not A.index_set or not B.index_set:
        warnings.warn("empty window in local_trace_norm, returning 0", stacklevel=2)
        return 0.0
    block = K.counting[np.ix_(A.index_set, B.index_set)]
    return float(np.sum(np.linalg.svd(block, compute_uv=False)))


def orthonormalize(basis, space: GroundSpace) -> np.ndarray:
    """Modified Gram-Schmidt in the weighted inner product, with re-orthogonalization.

    Returns the orthonormal vectors in counting coordinates (rows).  Raises
    :class:`DegenerateBasisError` when a vector is numerically dependent on
    its predecessors, i.e. when the Gram conditioning would exceed
    ``GRAM_CONDITION_LIMIT``.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.shape[1] != space.n:
        raise DimensionError("basis vectors must have one value per grid point")
    hat = basis * space.sqrt_weights
    rows = []
    for k, v in enumerate(hat):
        original = np.linalg.norm(v)
        if original == 0.0:
            raise DegenerateBasisError(k, f"basis vector {k} is zero")
        r = v.copy()
        for _ in range(2):  # second pass restores orthogonality at near-collinearity
            for q in rows:
                r -= np.dot(q, r) * q
        residual = np.linalg.norm(r)
        if residual < _RESIDUAL_RATIO_LIMIT * original:
            raise DegenerateBasisError(k)
        rows.append(r / residual)
    return np.array(rows)


def project_span(basis, space: GroundSpace) -> KernelOperator:
    """Orthogonal projection (weighted inner product) onto the span of the basis."""
    q = orthonormalize(basis, space)
    return KernelOperator.from_counting(space, q.T @ q)


def angle(v, P: KernelOperator) -> float:
    """Angle arcsin(||(I-P)v|| / ||v||) between a vector and the range of a projection."""
    if not P.is_projection():
        raise ContractError("operator is not idempotent within tolerance")
    v = np.asarray(v, dtype=float)
    if v.shape != (P.n,):
        raise DimensionError(f"vector must have length {P.n}")
    vhat = v * P.space.sqrt_weights
    vnorm = np.linalg.norm(vhat)
    if vnorm == 0.0:
        raise ValueError("angle of the zero vector is undefined")
    residual = np.linalg.norm(vhat - P.counting @ vhat)
    return float(np.arcsin(np.clip(residual / vnorm, 0.0, 1.0)))


def subspace_angle(basis_a, basis_b, space: GroundSpace) -> float:
    """Smallest principal angle between the spans of two bases."""
    qa = orthonormalize(basis_a, space)
    qb = orthonormalize(basis_b, space)
    top = np.linalg.svd(qa @ qb.T, compute_uv=False)[0]
    return float(np.arccos(np.clip(top, -1.0, 1.0)))


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Windowed trace distances of a sequence of operators to a target.

    ``distances[i, j]`` is the distance of the i-th member on the j-th
    window; ``steps`` carries the sequence labels (n values).
    """

    steps: tuple
    window_ids: tuple[str, ...]
    distances: np.ndarray
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        distances = np.asarray(self.distances, dtype=float)
        if distances.shape != (len(self.steps), len(self.window_ids)):
            raise DimensionError("distance table shape does not match steps x windows")
        distances.flags.writeable = False
        object.__setattr__(self, "distances", distances)

    def column(self, window_id: str) -> np.ndarray:
        return self.distances[:, self.window_ids.index(window_id)]

    def last_values(self) -> dict[str, float]:
        return {w: float(self.distances[-1, j]) for j, w in enumerate(self.window_ids)}

    def monotone_flags(self, strict: bool = False, tol: float = 0.0) -> dict[str, bool]:
        """Whether each window's distance column is (strictly) decreasing."""
        flags = {}
        for j, w in enumerate(self.window_ids):
            col = self.distances[:, j]
            diffs = np.diff(col)
            flags[w] = bool(np.all(diffs < tol) if strict else np.all(diffs <= tol))
        return flags

    def to_csv(self) -> str:
        lines = ["n,window_id,distance"]
        for i, step in enumerate(self.steps):
            for j, w in enumerate(self.window_ids):
                lines.append(f"{step},{w},{self.distances[i, j]:.17g}")
        return "\n".join(lines) + "\n"


def convergence_report(
    sequence: list[KernelOperator],
    target: KernelOperator,
    windows: list[Window],
    steps=None,
) -> ConvergenceReport:
    """Tabulate local trace distances of each sequence member to the target."""
    if not sequence:
        raise ValueError("empty operator sequence")
    if steps is None:
        steps = tuple(range(1, len(sequence) + 1))
    window_ids = tuple(w.description or f"w{j}" for j, w in enumerate(windows))
    table = np.empty((len(sequence), len(windows)))
    for i, K in enumerate(sequence):
        diff = K - target
        for j, w in enumerate(windows):
            table[i, j] = local_trace_norm(diff, w, w)
    return ConvergenceReport(tuple(steps), window_ids, table)
