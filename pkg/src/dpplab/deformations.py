"""Finite-rank deformations of projections and weighted-subspace projections.

Given a base projection Q with range L and extra vectors v_1..v_m, the
deformed projection targets L + span(v_1..v_m), built by sequential
orthogonalization of the extras (each new vector must keep a minimum
angle to the current span).  Weighting by sqrt(g) produces the projection
onto sqrt(g)(L + V), which splits as the reweighted base projection plus
a finite-rank remainder orthogonal to it.  The exhaustion suite watches
that remainder die off as indicator weights open up toward the full
space while the grid refines toward the singular endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conditioning import WeightFunction, induced_kernel
from .errors import AngleDegeneracyError, ContractError, DegenerateBasisError, DimensionError
from .ground import GroundSpace, Window, weighted_norm
from .operators import (
    ConvergenceReport,
    KernelOperator,
    Subspace,
    convergence_report,
    local_trace_norm,
    project_span,
    subspace_angle,
)

#: Default minimum angle (radians) each deformation vector must keep.
DEFAULT_MIN_ANGLE = 0.05


@dataclass(frozen=True, eq=False)
class DeformationModel:
    """Base subspace plus finitely many deformation vectors and a core window."""

    base: Subspace
    extra: np.ndarray
    core_window: Window
    min_angle: float = DEFAULT_MIN_ANGLE

    def __post_init__(self):
        extra = np.asarray(self.extra, dtype=float)
        if extra.size == 0:
            extra = np.zeros((0, self.base.space.n))
        extra = np.atleast_2d(extra).copy()
        if extra.shape[1] != self.base.space.n:
            raise DimensionError("deformation vectors must live on the base space")
        if self.min_angle <= 0:
            raise ValueError("min_angle must be positive")
        self.core_window.validate(self.base.space)
        extra.flags.writeable = False
        object.__setattr__(self, "extra", extra)
        # Enforce the independence condition at construction.
        P = project_span(self.base.basis, self.base.space)
        _extend_counting(P.counting, extra * self.base.space.sqrt_weights, self.min_angle)

    @property
    def space(self) -> GroundSpace:
        return self.base.space

    @property
    def base_projection(self) -> KernelOperator:
        return project_span(self.base.basis, self.base.space)


def _extend_counting(phat: np.ndarray, vs_hat: np.ndarray, min_angle: float) -> np.ndarray:
    """Sequentially absorb counting-coordinate vectors into a projection matrix."""
    phat = phat.copy()
    for k, vhat in enumerate(vs_hat):
        vnorm = np.linalg.norm(vhat)
        if vnorm == 0.0:
            raise AngleDegeneracyError(k, 0.0, min_angle)
        residual = vhat - phat @ vhat
        ang = float(np.arcsin(np.clip(np.linalg.norm(residual) / vnorm, 0.0, 1.0)))
        if ang < min_angle:
            raise AngleDegeneracyError(k, ang, min_angle)
        unit = residual / np.linalg.norm(residual)
        unit = unit - phat @ unit  # re-orthogonalization pass
        unit /= np.linalg.norm(unit)
        phat = phat + np.outer(unit, unit)
    return phat


def extend_projection(P: KernelOperator, vs, min_angle: float = DEFAULT_MIN_ANGLE) -> KernelOperator:
    """Projection onto range(P) plus the span of the given vectors.

    Each vector is decomposed into its component in the current span and a
    normalized residual; the residual's rank-one projection is added.  A
    vector whose angle to the current span falls below ``min_angle`` raises
    :class:`AngleDegeneracyError` naming it.
    """
    if not P.is_projection():
        raise ContractError("base operator is not a projection within tolerance")
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    if vs.shape[1] != P.n:
        raise DimensionError("deformation vectors must live on the operator's space")
    phat = _extend_counting(P.counting, vs * P.space.sqrt_weights, min_angle)
    return KernelOperator.from_counting(P.space, phat)


def perturbation_convergence_suite(
    Pn: list[KernelOperator],
    vn: list,
    P: KernelOperator,
    v,
    windows: list[Window],
    min_angle: float = DEFAULT_MIN_ANGLE,
    steps=None,
) -> ConvergenceReport:
    """Windowed trace distances of deformed projections to the deformed limit."""
    if len(Pn) != len(vn):
        raise DimensionError("need one vector list per projection in the sequence")
    target = extend_projection(P, v, min_angle)
    sequence = [extend_projection(Pk, vk, min_angle) for Pk, vk in zip(Pn, vn)]
    return convergence_report(sequence, target, windows, steps=steps)


def sqrtg_subspace_projection(model: DeformationModel, g: WeightFunction) -> KernelOperator:
    """Projection onto sqrt(g) (L + V), split as reweighted base plus remainder.

    Computed as the reweighted base projection extended by the sqrt(g)-weighted
    deformation vectors, then cross-checked against a direct projection onto
    the concatenated weighted basis.
    """
    Q = model.base_projection
    Qg = induced_kernel(g, Q)
    sg = g.sqrt
    if model.extra.shape[0] == 0:
        return Qg
    weighted_extra = model.extra * sg
    result = extend_projection(Qg, weighted_extra, model.min_angle)
    direct = project_span(np.vstack([model.base.basis * sg, weighted_extra]), model.space)
    if float(np.max(np.abs(result.counting - direct.counting))) > 1e-8:
        raise ContractError("weighted-subspace projection disagrees with the direct span computation")
    return result


@dataclass(frozen=True, eq=False)
class ExhaustionRow:
    step: object
    angle: float
    distances: tuple[float, ...]
    remainder_probe_norm: float
    angle_ok: bool
    deformation_norms: tuple[float, ...] = ()
    failed: bool = False


@dataclass(frozen=True, eq=False)
class ExhaustionReport:
    rows: tuple[ExhaustionRow, ...]
    window_ids: tuple[str, ...]
    min_angle: float
    decreasing: bool
    extras: dict = field(default_factory=dict)

    def distance_columns(self) -> np.ndarray:
        return np.array([row.distances for row in self.rows])

    def to_csv(self) -> str:
        header = "n,angle," + ",".join(f"distance_{w}" for w in self.window_ids) + ",probe_norm,angle_ok"
        lines = [header]
        for row in self.rows:
            dists = ",".join(f"{d:.17g}" for d in row.distances)
            lines.append(
                f"{row.step},{row.angle:.17g},{dists},{row.remainder_probe_norm:.17g},{int(row.angle_ok)}"
            )
        return "\n".join(lines) + "\n"


def _exhaustion_row(
    model: DeformationModel,
    window: Window,
    probe_windows: list[Window],
    probe_vector: np.ndarray,
    step,
) -> ExhaustionRow:
    """One exhaustion step: indicator weight on core + window, distances to the base."""
    space = model.space
    g = WeightFunction.indicator(space, Window(tuple(set(model.core_window.index_set) | set(window.index_set))))
    chi = g.values
    Q = model.base_projection
    nan = float("nan")
    try:
        ang = subspace_angle(model.base.basis * chi, model.extra * chi, space)
    except DegenerateBasisError:
        return ExhaustionRow(step, nan, tuple(nan for _ in probe_windows), nan, False, failed=True)
    angle_ok = ang >= model.min_angle
    try:
        Pg = sqrtg_subspace_projection(model, g)
    except (AngleDegeneracyError, ContractError):
        return ExhaustionRow(step, ang, tuple(nan for _ in probe_windows), nan, angle_ok, failed=True)
    diff = Pg - Q
    distances = tuple(local_trace_norm(diff, w, w) for w in probe_windows)
    remainder = Pg - induced_kernel(g, Q)
    probe_hat = np.asarray(probe_vector, dtype=float) * space.sqrt_weights
    probe_norm = float(np.linalg.norm(remainder.counting @ probe_hat))
    deformation_norms = tuple(weighted_norm(v, space) for v in model.extra)
    return ExhaustionRow(step, ang, distances, probe_norm, angle_ok, deformation_norms)


def exhaustion_suite(
    model: DeformationModel,
    windows: list[Window],
    probe_windows: list[Window],
    probe_vector,
    steps=None,
) -> ExhaustionReport:
    """Watch the indicator-weighted projections approach the unperturbed base.

    For each window B_n the weight is the indicator of core union B_n; rows
    report the angle between the weighted base and deformation subspaces, the
    windowed trace distances to the base projection, and the remainder's
    action on the probe vector.  Angle collapse below the model's bound is
    reported per row and the suite continues.
    """
    if steps is None:
        steps = tuple(range(1, len(windows) + 1))
    probe_vector = np.asarray(probe_vector, dtype=float)
    rows = tuple(
        _exhaustion_row(model, w, probe_windows, probe_vector, step) for step, w in zip(steps, windows)
    )
    window_ids = tuple(w.description or f"w{j}" for j, w in enumerate(probe_windows))
    ok_rows = [r for r in rows if r.angle_ok and not r.failed]
    decreasing = all(
        np.all(np.array(b.distances) <= np.array(a.distances) + 1e-12)
        for a, b in zip(ok_rows, ok_rows[1:])
    )
    return ExhaustionReport(rows, window_ids, model.min_angle, bool(decreasing))
