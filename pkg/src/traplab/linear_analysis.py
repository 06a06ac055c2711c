"""Finite-dimensional surjectivity, codimension and projection bookkeeping.

Realizes at finite dimension the linear-algebra facts behind the genericity
machinery: a sum operator (x, y) -> Tx + Sy is surjective exactly when the
orthogonal complements of the two images intersect trivially (equivalently,
when the adjoint kernels do); preimages of subspaces satisfy the codimension
formula

    codim L^{-1}(S) = codim S - codim (S + Im L);

and the projection of the kernel of the sum operator onto the first factor
has kernel dimension dim ker S and the same index as S.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DependentBasis

RANK_RTOL = 1e-10


@dataclass
class OperatorTriple:
    """Two linear maps into a common inner-product space (the identity one)."""

    T: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        self.T = np.atleast_2d(np.asarray(self.T, dtype=float))
        self.S = np.atleast_2d(np.asarray(self.S, dtype=float))
        if self.T.shape[0] != self.S.shape[0]:
            raise ValueError("T and S must map into the same space")

    @property
    def h(self) -> int:
        return self.T.shape[0]


def _rank(a: np.ndarray, scale: float | None = None) -> int:
    """Rank with singular values cut at RANK_RTOL times the top one.

    ``scale`` overrides the reference: submatrices of orthonormal bases have
    unit-size columns, so their rank must be judged against 1, not against
    their own (possibly tiny) leading singular value.
    """
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    reference = sv[0] if scale is None else scale
    return int(np.sum(sv > RANK_RTOL * reference))


def _null_space(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the kernel, columns; (n, 0) when trivial."""
    a = np.atleast_2d(a)
    n = a.shape[1]
    if a.size == 0 or np.abs(a).max() == 0.0:
        return np.eye(n)
    u, sv, vt = np.linalg.svd(a)
    r = int(np.sum(sv > RANK_RTOL * sv[0]))
    return vt[r:].T


def _image_complement(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column space."""
    return _null_space(a.T)


def sum_surjective(tr: OperatorTriple) -> bool:
    """Whether (x, y) -> Tx + Sy covers the whole target space."""
    return _rank(np.hstack([tr.T, tr.S])) == tr.h


def perp_intersection_trivial(tr: OperatorTriple) -> bool:
    """Triviality of (Im T)^perp intersect (Im S)^perp via principal angles.

    The intersection is nontrivial exactly when some pair of directions from
    the two complements has cosine 1; with orthonormal bases A, B this is a
    unit singular value of A^T B.  An empty complement on either side makes
    the intersection trivial outright.
    """
    a = _image_complement(tr.T)
    b = _image_complement(tr.S)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return True
    cosines = np.linalg.svd(a.T @ b, compute_uv=False)
    return bool(cosines.max() < 1.0 - RANK_RTOL)


def adjoint_kernels_trivial(tr: OperatorTriple) -> bool:
    """Triviality of ker T^t intersect ker S^t (the adjoint formulation).

    Uses the rank of the stacked kernel bases: the sum of two subspaces has
    dimension ka + kb exactly when they intersect trivially.
    """
    ker_t = _null_space(tr.T.T)
    ker_s = _null_space(tr.S.T)
    if ker_t.shape[1] == 0 or ker_s.shape[1] == 0:
        return True
    return _rank(np.hstack([ker_t, ker_s])) == ker_t.shape[1] + ker_s.shape[1]


def codim_formula_check(l: np.ndarray, s_basis: np.ndarray) -> tuple[int, int]:
    """Both sides of the preimage codimension formula, as exact integers.

    Left side: codimension in the domain of the preimage of span(s_basis)
    under l.  Right side: codim span(s_basis) minus codim (span + Im l).
    """
    l = np.atleast_2d(np.asarray(l, dtype=float))
    s_basis = np.atleast_2d(np.asarray(s_basis, dtype=float))
    v, u = l.shape
    s = s_basis.shape[1]
    if _rank(s_basis) != s:
        raise DependentBasis("columns of the subspace basis are dependent")
    # preimage kernel: x with P_{S^perp} L x = 0
    perp = _image_complement(s_basis)
    lhs = _rank(perp.T @ l) if perp.shape[1] else 0
    dim_sum = _rank(np.hstack([s_basis, l]))
    rhs = (v - s) - (v - dim_sum)
    return lhs, rhs


@dataclass
class ProjectionReport:
    dim_ker_projection: int
    dim_ker_S: int
    kernel_dims_match: bool
    projection_full_rank: bool
    index_projection: int
    index_S: int
    indices_match: bool
    sum_is_surjective: bool


def projection_regularity(tr: OperatorTriple) -> ProjectionReport:
    """Bookkeeping for the first-factor projection of ker(T (+) S).

    With M = ker of the sum operator inside the product space, the
    projection to the first factor has kernel of dimension dim ker S; when
    the sum operator is surjective its index (dim kernel minus codimension
    of the image in the first factor) equals the index of S.
    """
    e = tr.T.shape[1]
    f = tr.S.shape[1]
    h = tr.h
    m_basis = _null_space(np.hstack([tr.T, tr.S]))
    proj = m_basis[:e, :]
    dim_m = m_basis.shape[1]
    rank_proj = _rank(proj, scale=1.0)
    dim_ker_proj = dim_m - rank_proj
    dim_ker_s = f - _rank(tr.S)
    surj = sum_surjective(tr)
    codim_proj_image = e - rank_proj
    index_proj = dim_ker_proj - codim_proj_image
    index_s = dim_ker_s - (h - _rank(tr.S))
    return ProjectionReport(
        dim_ker_projection=dim_ker_proj,
        dim_ker_S=dim_ker_s,
        kernel_dims_match=dim_ker_proj == dim_ker_s,
        projection_full_rank=rank_proj == e,
        index_projection=index_proj,
        index_S=index_s,
        indices_match=index_proj == index_s,
        sum_is_surjective=surj,
    )


def random_triple(rng: np.random.Generator, h: int, e: int, f: int) -> OperatorTriple:
    return OperatorTriple(T=rng.normal(size=(h, e)), S=rng.normal(size=(h, f)))
