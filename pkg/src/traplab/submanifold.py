"""Extrinsic geometry of embedded spacelike submanifolds.

Embeddings are supplied as 2-jets of the parametrization: the chart map plus
its first and second parameter derivatives.  From those and the ambient
metric jet we build the induced metric, the shape tensor (normal projection
of ambient accelerations of the coordinate frame), the mean curvature vector
as its induced-metric trace, null normal frames in codimension two, the null
expansion scalars, and the pointwise/aggregate trapping classification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    CodimensionMismatch,
    ImmersionFailure,
    NonTimelikeOrientation,
    NotSpacelike,
    OrientationFailure,
)
from .geometry import MetricJet2, TangentVector, christoffel

MetricField = Callable[[np.ndarray], MetricJet2]
VectorField = Callable[[np.ndarray], TangentVector]

CLASSIFY_TOL = 1e-9


@dataclass
class EmbeddingJet2:
    """Parametrized submanifold with first and second parameter derivatives.

    ``chart(u)`` maps a parameter tuple to ambient chart coordinates,
    ``d_chart(u)`` returns the (ambient, sigma) Jacobian and ``dd_chart(u)``
    the (ambient, sigma, sigma) second derivatives.  ``outward`` optionally
    declares a reference ambient vector used to orient normal frames.
    """

    sigma_dim: int
    ambient_dim: int
    chart: Callable[[np.ndarray], np.ndarray]
    d_chart: Callable[[np.ndarray], np.ndarray]
    dd_chart: Callable[[np.ndarray], np.ndarray]
    sample_set: np.ndarray
    outward: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        self.sample_set = np.atleast_2d(np.asarray(self.sample_set, dtype=float))
        if self.ambient_dim - self.sigma_dim < 1:
            raise ValueError("codimension must be at least 1")

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.sigma_dim

    def at(self, u: np.ndarray):
        """Chart point, Jacobian and second derivatives at parameter u."""
        u = np.asarray(u, dtype=float)
        x = np.asarray(self.chart(u), dtype=float)
        d = np.asarray(self.d_chart(u), dtype=float)
        dd = np.asarray(self.dd_chart(u), dtype=float)
        sv = np.linalg.svd(d, compute_uv=False)
        if sv[-1] <= 1e-10 * max(sv[0], 1.0):
            raise ImmersionFailure(f"embedding Jacobian rank-deficient at u={u}")
        return x, d, dd


@dataclass
class ExtrinsicData:
    induced: np.ndarray
    induced_inv: np.ndarray
    tangent: np.ndarray
    II: np.ndarray
    H: TangentVector
    normal_basis: list[np.ndarray]
    normal_projector: np.ndarray


@dataclass
class NullFrame:
    l_plus: TangentVector
    l_minus: TangentVector


class TrappingLabel(enum.Enum):
    TRAPPED = "trapped"
    WEAKLY_TRAPPED = "weakly_trapped"
    MOTS = "mots"
    EXTREMAL = "extremal"
    NOT_WEAKLY_TRAPPED = "not_weakly_trapped"


@dataclass
class PointTrappingRecord:
    u: np.ndarray
    g_H_H: float
    g_H_X: float
    H_aux: float
    theta_plus: Optional[float] = None


@dataclass
class TrappingClass:
    label: TrappingLabel
    per_point: list[PointTrappingRecord] = field(default_factory=list)


def extrinsic_data(e: EmbeddingJet2, m_field: MetricField, u: np.ndarray) -> ExtrinsicData:
    """Induced metric, shape tensor and mean curvature vector at parameter u.

    The shape tensor is the normal projection of the ambient covariant
    acceleration of the coordinate frame; the mean curvature vector is its
    trace against the inverse induced metric, so it is independent of the
    parametrization.
    """
    x, d, dd = e.at(u)
    m = m_field(x)
    g = m.g
    induced = d.T @ g @ d
    eigs = np.linalg.eigvalsh(induced)
    if eigs.min() <= 1e-12 * max(1.0, abs(eigs.max())):
        raise NotSpacelike(f"induced metric not positive definite at u={u}")
    induced_inv = np.linalg.inv(induced)
    gam = christoffel(m)
    accel = dd + np.einsum("abc,bi,cj->aij", gam, d, d)
    p_tan = d @ induced_inv @ d.T @ g
    p_norm = np.eye(m.dim) - p_tan
    ii = np.einsum("ab,bij->aij", p_norm, accel)
    h_comps = np.einsum("ij,aij->a", induced_inv, ii)
    # orthonormal spanning set of the g-normal space, from the kernel of D^T g
    _, sv, vt = np.linalg.svd(d.T @ g)
    basis = [vt[i] for i in range(e.sigma_dim, m.dim)]
    return ExtrinsicData(
        induced=induced,
        induced_inv=induced_inv,
        tangent=d,
        II=ii,
        H=TangentVector(x, h_comps),
        normal_basis=basis,
        normal_projector=p_norm,
    )


def null_frame(
    e: EmbeddingJet2, m_field: MetricField, x_field: VectorField, u: np.ndarray
) -> NullFrame:
    """Future-directed null normal frame with g(l+, l-) = -2, l+ outward.

    Requires codimension exactly 2.  The timelike leg is the normalized
    normal projection of the time-orientation field; the spacelike leg is the
    normalized normal projection of the declared outward reference.
    """
    if e.codim != 2:
        raise CodimensionMismatch(f"null frame needs codimension 2, got {e.codim}")
    if e.outward is None:
        raise OrientationFailure("embedding declares no outward reference")
    data = extrinsic_data(e, m_field, u)
    x = data.H.base
    m = m_field(x)
    xv = x_field(x)
    x_perp = data.normal_projector @ xv.components
    q = m.inner(x_perp, x_perp)
    if q >= 0:
        raise NonTimelikeOrientation("normal projection of X is not timelike")
    n_t = x_perp / np.sqrt(-q)
    ref = np.asarray(e.outward(u), dtype=float)
    w = data.normal_projector @ ref
    w = w + m.inner(w, n_t) * n_t
    s = m.inner(w, w)
    if s <= 1e-12 * max(1.0, float(np.linalg.norm(ref)) ** 2):
        raise OrientationFailure("outward reference degenerates in the normal space")
    n_s = w / np.sqrt(s)
    return NullFrame(
        l_plus=TangentVector(x, n_t + n_s),
        l_minus=TangentVector(x, n_t - n_s),
    )


def null_expansions(
    e: EmbeddingJet2, m_field: MetricField, frame: NullFrame, u: np.ndarray
) -> tuple[float, float]:
    """Null expansion scalars (-g(H, l+), -g(H, l-)) at parameter u."""
    data = extrinsic_data(e, m_field, u)
    m = m_field(data.H.base)
    theta_p = -m.inner(data.H.components, frame.l_plus.components)
    theta_m = -m.inner(data.H.components, frame.l_minus.components)
    return float(theta_p), float(theta_m)


def trapping_classify(
    e: EmbeddingJet2,
    m_field: MetricField,
    x_field: VectorField,
    samples: Optional[Sequence[np.ndarray]] = None,
    tol: float = CLASSIFY_TOL,
) -> TrappingClass:
    """Classify the trapping type of the surface over a sample set.

    Decision order with tolerance band tol: strictly trapped everywhere,
    else extremal (H vanishes everywhere), else marginally outer trapped
    (theta_+ vanishes everywhere, codimension 2 only), else weakly trapped
    when the closed inequalities hold everywhere, else not weakly trapped.
    """
    if samples is None:
        samples = e.sample_set
    records = []
    frames_available = e.codim == 2 and e.outward is not None
    for u in samples:
        data = extrinsic_data(e, m_field, u)
        p = data.H.base
        m = m_field(p)
        xv = x_field(p)
        theta_plus = None
        if frames_available:
            try:
                frame = null_frame(e, m_field, x_field, u)
                theta_plus = -m.inner(data.H.components, frame.l_plus.components)
            except OrientationFailure:
                theta_plus = None
        records.append(
            PointTrappingRecord(
                u=np.asarray(u, dtype=float),
                g_H_H=m.inner(data.H.components, data.H.components),
                g_H_X=m.inner(data.H.components, xv.components),
                H_aux=data.H.aux_norm(),
                theta_plus=theta_plus,
            )
        )
    if all(r.g_H_H < -tol and r.g_H_X > tol for r in records):
        return TrappingClass(TrappingLabel.TRAPPED, records)
    if all(r.H_aux <= tol for r in records):
        return TrappingClass(TrappingLabel.EXTREMAL, records)
    if all(r.theta_plus is not None and abs(r.theta_plus) <= tol for r in records):
        return TrappingClass(TrappingLabel.MOTS, records)
    if all(r.g_H_H <= tol and r.g_H_X >= -tol for r in records):
        return TrappingClass(TrappingLabel.WEAKLY_TRAPPED, records)
    return TrappingClass(TrappingLabel.NOT_WEAKLY_TRAPPED, records)
