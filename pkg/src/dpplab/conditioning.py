"""Multiplicative reweighting of projection processes.

Reweighting a projection DPP by the product functional prod_{x in X} g(x)
and renormalizing yields another determinantal process; its kernel is
``sqrt(g) P (1 + (g-1) P)^{-1} sqrt(g)``, which is itself the orthogonal
projection onto sqrt(g) applied to the range of P.  This module builds
that kernel, diagnoses when the construction is well posed, and exposes
the normalization constant in closed form.

Note on the degenerate boundary: the construction is obstructed exactly
when the range of P contains a function supported on {g = 0} (then the
margin 1 - ||sqrt(1-g) P|| vanishes).  Vanishing of 1 - g, i.e. g = 1 on
part of the space, is harmless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dpp import DppDistribution
from .errors import ConditioningImpossibleError, ContractError, DimensionError, InducibilityError
from .ground import GroundSpace, Window
from .operators import KernelOperator, project_span

#: Values of 1 - ||sqrt(1-g) P|| at or below this count as non-invertible.
MARGIN_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Per-point nonnegative weights; role 'g' (conditioning, <= 1) or 'f' (embedding)."""

    space: GroundSpace
    values: np.ndarray
    role: str = "g"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (self.space.n,):
            raise DimensionError(f"weight function needs {self.space.n} values")
        if self.role not in ("g", "f"):
            raise ValueError("role must be 'g' or 'f'")
        if np.any(values < 0):
            raise ValueError("weight-function values must be nonnegative")
        if self.role == "g" and np.any(values > 1.0):
            raise ValueError("conditioning weights must not exceed 1")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def sqrt(self) -> np.ndarray:
        return np.sqrt(self.values)

    @classmethod
    def constant(cls, space: GroundSpace, value: float, role: str = "g") -> "WeightFunction":
        return cls(space, np.full(space.n, float(value)), role)

    @classmethod
    def indicator(cls, space: GroundSpace, window: Window, role: str = "g") -> "WeightFunction":
        window.validate(space)
        values = np.zeros(space.n)
        values[list(window.index_set)] = 1.0
        return cls(space, values, role)


def psi_g(g: WeightFunction, X) -> float:
    """The multiplicative functional prod_{x in X} g(x); empty product is 1."""
    if g.role != "g":
        raise ValueError("psi_g expects a conditioning weight (role 'g')")
    occupied = sorted(X.occupied)
    return float(np.prod(g.values[occupied])) if occupied else 1.0


@dataclass(frozen=True)
class InducibilityCheck:
    norm_1mg_P: float
    sqrt_norm: float
    margin: float
    invertible: bool


def _require_projection(P: KernelOperator) -> None:
    if not P.is_projection():
        raise ContractError("operator is not a projection within tolerance")


def check_inducibility(g: WeightFunction, P: KernelOperator) -> InducibilityCheck:
    """Report ||(1-g)P||, the margin 1 - ||sqrt(1-g)P||, and the invertibility verdict."""
    _require_projection(P)
    one_minus_g = 1.0 - g.values
    phat = P.counting
    norm_full = float(np.linalg.norm(one_minus_g[:, None] * phat, 2))
    sqrt_norm = float(np.linalg.norm(np.sqrt(one_minus_g)[:, None] * phat, 2))
    margin = 1.0 - sqrt_norm
    return InducibilityCheck(norm_full, sqrt_norm, margin, margin > MARGIN_TOLERANCE)


def _range_basis_counting(P: KernelOperator) -> np.ndarray:
    """Orthonormal counting-coordinate basis of the range of a projection (columns)."""
    eigvals, eigvecs = np.linalg.eigh(P.counting)
    return eigvecs[:, eigvals > 0.5]


def induced_kernel(g: WeightFunction, P: KernelOperator) -> KernelOperator:
    """The reweighted-process kernel sqrt(g) P (1 + (g-1) P)^{-1} sqrt(g).

    Strictly positive g goes through a direct solve of 1 + (g-1)P, guarded
    by the margin check.  When g has zeros (indicator weights), the kernel
    is computed as the projection onto sqrt(g) times the range of P, which
    is the same operator and avoids inverting across the excluded region.
    """
    check = check_inducibility(g, P)
    if not check.invertible:
        raise InducibilityError(check.margin)
    sg = g.sqrt
    if np.any(g.values == 0.0):
        basis_hat = _range_basis_counting(P).T  # rows
        inv_sw = 1.0 / P.space.sqrt_weights
        weighted = (basis_hat * inv_sw) * sg  # sqrt(g) . basis, measure coordinates
        return project_span(weighted, P.space)
    phat = P.counting
    n = P.n
    system = np.eye(n) + (g.values - 1.0)[:, None] * phat
    solved = np.linalg.solve(system, phat)
    bhat = (sg[:, None] * phat @ solved) * sg
    bhat = (bhat + bhat.T) / 2.0
    return KernelOperator.from_counting(P.space, bhat)


def normalization_constant(g: WeightFunction, P: KernelOperator) -> float:
    """det(1 + (g-1) P): the mass of the reweighted, unnormalized process."""
    _require_projection(P)
    n = P.n
    system = np.eye(n) + (g.values - 1.0)[:, None] * P.counting
    return float(np.linalg.det(system))


def induced_distribution(g: WeightFunction, P: KernelOperator) -> DppDistribution:
    """The normalized reweighted process as a DPP with the induced kernel."""
    if normalization_constant(g, P) <= 1e-12:
        raise ConditioningImpossibleError("normalization constant vanishes; reweighting is degenerate")
    return DppDistribution(induced_kernel(g, P))


def reweighted_distribution(g: WeightFunction, table: dict[int, float]) -> dict[int, float]:
    """Reweight a brute-force configuration table by psi_g and renormalize."""
    n = g.space.n
    weights = {}
    for mask, p in table.items():
        w = 1.0
        for i in range(n):
            if mask >> i & 1:
                w *= g.values[i]
        weights[mask] = w * p
    total = sum(weights.values())
    if total <= 1e-12:
        raise ConditioningImpossibleError("reweighted table has vanishing total mass")
    return {mask: v / total for mask, v in weights.items()}
