"""Constraint quantities and null expansions on a spatial slice.

An initial data set is a Riemannian metric jet field together with a
symmetric tensor field K carrying first derivatives.  The energy density and
energy-momentum current are

    rho = (Scal_h - |K|^2 + (tr K)^2) / 2,
    J   = div_h K - d(tr_h K),

and a two-sided hypersurface with outward unit normal nu has null expansions
theta_+- = tr_Sigma K +- H_nu, with the mean curvature scalar H_nu taken as
the tangential divergence of nu (so the round sphere in flat space has
H_nu = +2/r for the outward normal).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NotUnitNormal
from .geometry import MetricJet2, christoffel, scalar_curvature
from .submanifold import EmbeddingJet2, extrinsic_data

VACUUM_TOL = 1e-10
MOTS_TOL = 1e-9


@dataclass
class InitialData:
    """Slice geometry: Riemannian jet field plus K with first derivatives.

    ``K_field(p)`` returns ``(K, dK)`` with ``dK[k, i, j] = d_k K_ij``.
    """

    dim: int
    h_field: Callable[[np.ndarray], MetricJet2]
    K_field: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def zero_K_field(dim: int):
    k = np.zeros((dim, dim))
    dk = np.zeros((dim, dim, dim))
    return lambda p: (k, dk)


@dataclass
class ConstraintQuantities:
    rho: float
    J: np.ndarray
    vacuum: bool


def constraint_quantities(
    d: InitialData, p: np.ndarray, vacuum_tol: float = VACUUM_TOL
) -> ConstraintQuantities:
    """Energy density and current of the data at a point."""
    p = np.asarray(p, dtype=float)
    m = d.h_field(p)
    k, dk = d.K_field(p)
    k = np.asarray(k, dtype=float)
    dk = np.asarray(dk, dtype=float)
    hinv = m.inverse()
    scal = scalar_curvature(m)
    norm_k_sq = float(np.einsum("ij,kl,ik,jl->", k, k, hinv, hinv))
    tr_k = float(np.einsum("ij,ij->", hinv, k))
    rho = 0.5 * (scal - norm_k_sq + tr_k * tr_k)

    gam = christoffel(m)
    # covariant derivative (nabla_i K)_{kj}; gam[l, i, k] = Gamma^l_{ik}
    cov_dk = dk - np.einsum("lik,lj->ikj", gam, k) - np.einsum("lij,kl->ikj", gam, k)
    div_k = np.einsum("ik,ikj->j", hinv, cov_dk)
    dhinv = -np.einsum("ia,jab,bk->jik", hinv, m.dg, hinv)
    d_tr_k = np.einsum("jik,ik->j", dhinv, k) + np.einsum("ik,jik->j", hinv, dk)
    j = div_k - d_tr_k
    vacuum = abs(rho) <= vacuum_tol and float(np.linalg.norm(j)) <= vacuum_tol
    return ConstraintQuantities(rho=float(rho), J=j, vacuum=vacuum)


def initial_data_expansions(
    d: InitialData,
    e: EmbeddingJet2,
    nu: Callable[[np.ndarray], np.ndarray],
    u: np.ndarray,
) -> tuple[float, float]:
    """Null expansions (theta_+, theta_-) = tr_Sigma K +- H_nu at parameter u."""
    data = extrinsic_data(e, d.h_field, u)
    x = data.H.base
    m = d.h_field(x)
    nu_vec = np.asarray(nu(u), dtype=float)
    if abs(m.inner(nu_vec, nu_vec) - 1.0) > 1e-8:
        raise NotUnitNormal("nu is not h-unit")
    tangency = np.abs(data.tangent.T @ m.g @ nu_vec).max()
    if tangency > 1e-8 * max(1.0, float(np.abs(data.tangent).max())):
        raise NotUnitNormal("nu is not h-normal to the surface")
    k, _ = d.K_field(x)
    k_pullback = data.tangent.T @ np.asarray(k, dtype=float) @ data.tangent
    tr_sigma_k = float(np.einsum("ab,ab->", data.induced_inv, k_pullback))
    h_nu = -m.inner(nu_vec, data.H.components)
    return tr_sigma_k + h_nu, tr_sigma_k - h_nu


class MotsLabel(enum.Enum):
    OUTER_TRAPPED = "outer_trapped"
    WEAKLY_OUTER_TRAPPED = "weakly_outer_trapped"
    MOTS = "mots"
    NONE = "none"


def mots_classify(theta_plus_samples: Sequence[float], tol: float = MOTS_TOL) -> MotsLabel:
    """Aggregate outer-trapping label from sampled theta_+ values."""
    vals = np.asarray(list(theta_plus_samples), dtype=float)
    if vals.size == 0:
        raise ValueError("need at least one sample")
    if np.all(vals < -tol):
        return MotsLabel.OUTER_TRAPPED
    if np.all(np.abs(vals) <= tol):
        return MotsLabel.MOTS
    if np.all(vals <= tol):
        return MotsLabel.WEAKLY_OUTER_TRAPPED
    return MotsLabel.NONE
