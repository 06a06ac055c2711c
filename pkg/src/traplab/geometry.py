"""Pointwise connection and curvature from metric 2-jets, and causal classification.

A metric 2-jet carries the metric components together with their first and
second coordinate derivatives at a point.  Everything downstream (curvature,
extrinsic geometry, constraint quantities) is exact algebra on these jets, so
scenarios that supply closed-form derivatives get curvature at rounding-error
accuracy.

Index conventions used throughout:

* ``dg[k, i, j]``  is the first derivative  d_k g_ij,
* ``ddg[l, k, i, j]``  is the second derivative  d_l d_k g_ij,
* ``christoffel(m)[k, i, j]``  is the connection coefficient with upper
  index first,
* ``riemann(m).R[i, j, k, l]``  is the covariant curvature component
  R(e_i, e_j, e_k, e_l)  with the sign fixed so that the quadratic form
  ``R(w, v, v, w)`` is positive on orthonormal pairs of the unit round
  sphere.

Signature is (-, +, ..., +) for Lorentzian metrics.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CollinearPair,
    NonTimelikeOrientation,
    SingularMetric,
    ZeroVector,
)

# Condition-number ceiling for metric inversion.
COND_LIMIT = 1e12

# Scale-aware band declaring g(v,v) to be zero (null vector).
NULL_TOL = 1e-10

# Tolerance for the curvature symmetry checks on the exact-jet path.
SYMMETRY_TOL = 1e-9


class Signature(enum.Enum):
    LORENTZIAN = "lorentzian"
    RIEMANNIAN = "riemannian"


class CausalClass(enum.Enum):
    TIMELIKE_FUTURE = "timelike_future"
    TIMELIKE_PAST = "timelike_past"
    NULL_FUTURE = "null_future"
    NULL_PAST = "null_past"
    SPACELIKE = "spacelike"
    ZERO = "zero"


@dataclass
class TangentVector:
    """Vector attached to a chart point; ``components`` in coordinate basis."""

    base: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.components = np.asarray(self.components, dtype=float)
        if self.base.shape != self.components.shape:
            raise ValueError("base point and components must share the dimension")

    @property
    def dim(self) -> int:
        return self.base.shape[0]

    def aux_norm(self) -> float:
        """Euclidean norm of the components (auxiliary, metric-independent)."""
        return float(np.linalg.norm(self.components))


@dataclass
class MetricJet2:
    """Metric with first and second coordinate derivatives at one point.

    Parameters
    ----------
    g : (dim, dim) array
        Metric components, symmetric.
    dg : (dim, dim, dim) array
        First derivatives, ``dg[k, i, j] = d_k g_ij``.
    ddg : (dim, dim, dim, dim) array
        Second derivatives, ``ddg[l, k, i, j] = d_l d_k g_ij``.
    signature : Signature
        Lorentzian metrics must have exactly one negative eigenvalue,
        Riemannian metrics must be positive definite.
    """

    dim: int
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    signature: Signature = Signature.LORENTZIAN

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        self.dg = np.asarray(self.dg, dtype=float)
        self.ddg = np.asarray(self.ddg, dtype=float)
        n = self.dim
        if n < 2:
            raise ValueError("dimension must be at least 2")
        if self.g.shape != (n, n) or self.dg.shape != (n, n, n) or self.ddg.shape != (n, n, n, n):
            raise ValueError("jet array shapes inconsistent with dim")
        scale = max(1.0, float(np.abs(self.g).max()))
        if np.abs(self.g - self.g.T).max() > 1e-12 * scale:
            raise ValueError("metric matrix must be symmetric")
        if np.abs(self.dg - np.swapaxes(self.dg, 1, 2)).max() > 1e-10 * max(1.0, np.abs(self.dg).max()):
            raise ValueError("dg must be symmetric in (i, j)")
        dd_scale = max(1.0, float(np.abs(self.ddg).max()))
        if np.abs(self.ddg - np.swapaxes(self.ddg, 2, 3)).max() > 1e-10 * dd_scale:
            raise ValueError("ddg must be symmetric in (i, j)")
        if np.abs(self.ddg - np.swapaxes(self.ddg, 0, 1)).max() > 1e-10 * dd_scale:
            raise ValueError("ddg must be symmetric in (k, l)")
        eigs = np.linalg.eigvalsh(self.g)
        if self.signature is Signature.LORENTZIAN:
            if int(np.sum(eigs < 0)) != 1 or int(np.sum(eigs > 0)) != n - 1:
                raise ValueError("Lorentzian metric needs exactly one negative eigenvalue")
        else:
            if eigs.min() <= 0:
                raise ValueError("Riemannian metric must be positive definite")

    @classmethod
    def flat(cls, dim: int, signature: Signature = Signature.LORENTZIAN) -> "MetricJet2":
        g = np.eye(dim)
        if signature is Signature.LORENTZIAN:
            g[0, 0] = -1.0
        return cls(dim, g, np.zeros((dim,) * 3), np.zeros((dim,) * 4), signature)

    @classmethod
    def constant(cls, g: np.ndarray, signature: Signature = Signature.LORENTZIAN) -> "MetricJet2":
        g = np.asarray(g, dtype=float)
        n = g.shape[0]
        return cls(n, g, np.zeros((n,) * 3), np.zeros((n,) * 4), signature)

    def inverse(self) -> np.ndarray:
        """Inverse metric; raises SingularMetric past the condition limit."""
        if np.linalg.cond(self.g) > COND_LIMIT:
            raise SingularMetric(f"metric condition number exceeds {COND_LIMIT:.0e}")
        return np.linalg.inv(self.g)

    def inner(self, v: np.ndarray, w: np.ndarray) -> float:
        return float(np.asarray(v) @ self.g @ np.asarray(w))


@dataclass
class CurvatureTensor:
    """Covariant (0,4) curvature components at a point."""

    R: np.ndarray
    symmetry_residual: float = field(default=0.0)

    def max_abs(self) -> float:
        return float(np.abs(self.R).max())


def christoffel(m: MetricJet2) -> np.ndarray:
    """Connection coefficients ``G[k, i, j]`` of the metric jet.

    Satisfies metric compatibility
    ``d_k g_ij = G[l, k, i] g_lj + G[l, k, j] g_il`` exactly in exact
    arithmetic.
    """
    ginv = m.inverse()
    # G^k_ij = 1/2 g^{kl} (d_i g_lj + d_j g_il - d_l g_ij)
    bracket = np.einsum("ilj->lij", m.dg) + np.einsum("jil->lij", m.dg) - m.dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, bracket)


def christoffel_derivative(m: MetricJet2) -> np.ndarray:
    """First coordinate derivatives ``dG[l, k, i, j] = d_l G^k_ij``."""
    ginv = m.inverse()
    dginv = -np.einsum("ka,lab,bm->lkm", ginv, m.dg, ginv)
    b = (
        np.einsum("imj->mij", m.dg)
        + np.einsum("jim->mij", m.dg)
        - m.dg
    )
    db = (
        np.einsum("pimj->pmij", m.ddg)
        + np.einsum("pjim->pmij", m.ddg)
        - m.ddg
    )
    return 0.5 * (
        np.einsum("pkm,mij->pkij", dginv, b) + np.einsum("km,pmij->pkij", ginv, db)
    )


def riemann(m: MetricJet2, symmetry_tol: float = SYMMETRY_TOL) -> CurvatureTensor:
    """Covariant Riemann tensor of the jet.

    The returned components satisfy antisymmetry in the first and last index
    pairs, pair symmetry, and the first Bianchi identity; the largest relative
    residual over these four checks is stored on the tensor and must not
    exceed ``symmetry_tol``.
    """
    gam = christoffel(m)
    dgam = christoffel_derivative(m)
    # R_ijk^l = d_i G^l_jk - d_j G^l_ik + G^l_ia G^a_jk - G^l_ja G^a_ik
    r_up = (
        np.einsum("iljk->ijkl", dgam)
        - np.einsum("jlik->ijkl", dgam)
        + np.einsum("lia,ajk->ijkl", gam, gam)
        - np.einsum("lja,aik->ijkl", gam, gam)
    )
    r = np.einsum("ijkm,ml->ijkl", r_up, m.g)
    scale = max(1.0, float(np.abs(r).max()))
    res = max(
        np.abs(r + np.einsum("ijlk->ijkl", r)).max(),
        np.abs(r + np.einsum("jikl->ijkl", r)).max(),
        np.abs(r - np.einsum("klij->ijkl", r)).max(),
        np.abs(r + np.einsum("iklj->ijkl", r) + np.einsum("iljk->ijkl", r)).max(),
    ) / scale
    if res > symmetry_tol:
        raise ValueError(f"curvature symmetry residual {res:.3e} exceeds {symmetry_tol:.1e}")
    return CurvatureTensor(R=r, symmetry_residual=float(res))


def ricci(m: MetricJet2, symmetry_tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Ricci tensor, the inverse-metric trace of the Riemann tensor."""
    r = riemann(m, symmetry_tol=symmetry_tol)
    return ricci_from_riemann(r, m)


def ricci_from_riemann(r: CurvatureTensor, m: MetricJet2) -> np.ndarray:
    ginv = m.inverse()
    ric = np.einsum("im,ijkm->jk", ginv, r.R)
    return 0.5 * (ric + ric.T)


def scalar_curvature(m: MetricJet2, symmetry_tol: float = SYMMETRY_TOL) -> float:
    ric = ricci(m, symmetry_tol=symmetry_tol)
    return float(np.einsum("jk,jk->", m.inverse(), ric))


def causal_classify(m: MetricJet2, v: TangentVector, x: TangentVector) -> CausalClass:
    """Classify ``v`` against the time orientation defined by timelike ``x``.

    The decision is sign based: the causal type comes from the sign of
    g(v, v) with a scale-aware zero band, and future/past from the sign of
    g(v, x).  Conformal rescaling therefore cannot change the answer.
    """
    if m.signature is not Signature.LORENTZIAN:
        raise ValueError("causal classification needs a Lorentzian metric")
    xx = m.inner(x.components, x.components)
    if xx >= -NULL_TOL * x.aux_norm() ** 2:
        raise NonTimelikeOrientation("orientation vector X is not timelike")
    aux = v.aux_norm()
    if aux <= 1e-14:
        return CausalClass.ZERO
    q = m.inner(v.components, v.components)
    s = m.inner(v.components, x.components)
    if abs(q) <= NULL_TOL * aux * aux:
        return CausalClass.NULL_FUTURE if s < 0 else CausalClass.NULL_PAST
    if q < 0:
        return CausalClass.TIMELIKE_FUTURE if s < 0 else CausalClass.TIMELIKE_PAST
    return CausalClass.SPACELIKE


def riem_quadform(r: CurvatureTensor, m: MetricJet2, w: TangentVector, v: TangentVector) -> float:
    """The scalar R(w, v, v, w).

    Rejects collinear pairs: the quadratic form vanishes identically on them
    by the curvature symmetries, so a collinear ``w`` carries no information.
    """
    if not np.array_equal(w.base, v.base):
        raise ValueError("w and v must share a base point")
    nv = v.aux_norm()
    nw = w.aux_norm()
    if nv <= 1e-14 or nw <= 1e-14:
        raise ZeroVector("quadratic form needs nonzero vectors")
    # residual of w after removing its component along v, in the aux norm
    proj = np.dot(w.components, v.components) / (nv * nv)
    residual = np.linalg.norm(w.components - proj * v.components)
    if residual <= 1e-8 * nw:
        raise CollinearPair("w is collinear with v within tolerance")
    return float(
        np.einsum("ijkl,i,j,k,l->", r.R, w.components, v.components, v.components, w.components)
    )


def lorentz_frame(m: MetricJet2, x: TangentVector) -> np.ndarray:
    """g-orthonormal frame ``E[:, a]`` with E[:, 0] future timelike along x.

    The remaining columns are spacelike and g-orthonormal; the Gram matrix of
    the returned frame is diag(-1, 1, ..., 1).
    """
    if m.signature is not Signature.LORENTZIAN:
        raise ValueError("lorentz_frame needs a Lorentzian metric")
    g = m.g
    xx = m.inner(x.components, x.components)
    if xx >= 0:
        raise NonTimelikeOrientation("frame seed vector must be timelike")
    n = m.dim
    e0 = x.components / np.sqrt(-xx)
    frame = [e0]
    # project candidates off e0 (note g(e0,e0) = -1) and Gram-Schmidt the rest
    for k in range(n):
        cand = np.eye(n)[k].astype(float)
        cand = cand + float(cand @ g @ e0) * e0
        for e in frame[1:]:
            cand = cand - float(cand @ g @ e) * e
        nrm2 = float(cand @ g @ cand)
        if nrm2 > 1e-10:
            frame.append(cand / np.sqrt(nrm2))
        if len(frame) == n:
            break
    if len(frame) != n:
        raise SingularMetric("failed to complete an orthonormal frame")
    return np.stack(frame, axis=1)


def riemannian_frame(m: MetricJet2) -> np.ndarray:
    """Orthonormal frame columns for a positive definite metric."""
    l = np.linalg.cholesky(m.g)
    return np.linalg.inv(l).T
