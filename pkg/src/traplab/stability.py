"""Stability operator of marginally outer trapped surfaces on closed grids.

The operator acting on surface functions is

    L(psi) = -Lap psi + 2 <X, grad psi> + (Q + div X - |X|^2) psi,
    Q = Scal_Sigma / 2 - (J(nu) + rho) - |K_nu + K|^2 / 2,

where rho, J are the slice constraint quantities, K_nu the scalar second
fundamental form of the surface and X the surface-tangential dual of
K(nu, .).  The discretization is a second-order conservative finite
difference scheme on closed grids (periodic tensor grids for circles and
flat tori, latitude-longitude grids with staggered rows for spheres), so the
time-symmetric case produces a matrix that is exactly self-adjoint in the
quadrature inner product.

The principal eigenvalue is taken from a dense eigendecomposition as the
eigenvalue of minimal real part; the deformation check moves the surface
along its unit normal with the principal eigenfunction as velocity and
verifies the derivative identity for the outward null expansion.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateMOTS,
    EigensolverFailure,
    ResolutionTooLow,
)
from .initial_data import InitialData, constraint_quantities, initial_data_expansions
from .scenarios import SliceSurface, build_scenario
from .submanifold import EmbeddingJet2, extrinsic_data

MIN_NODES_PER_AXIS = 8
DEGENERACY_TOL = 1e-6


class GridKind(enum.Enum):
    PERIODIC_TENSOR = "periodic_tensor"
    LATLONG_SPHERE = "latlong_sphere"


@dataclass
class SurfaceGrid:
    """Closed surface grid with node coordinates and quadrature weights.

    ``metric_diag[node, axis]`` stores the diagonal induced metric; the grids
    used here (circles with arbitrary smooth parametrization, flat tori,
    round spheres in latitude-longitude coordinates) all have diagonal
    induced metrics on their natural charts.
    """

    kind: GridKind
    shape: tuple[int, ...]
    periods: tuple[float, ...]
    nodes: np.ndarray
    metric_diag: np.ndarray
    weights: np.ndarray

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(p / n for p, n in zip(self.periods, self.shape))


def _check_resolution(shape):
    for n in shape:
        if n < MIN_NODES_PER_AXIS:
            raise ResolutionTooLow(f"need at least {MIN_NODES_PER_AXIS} nodes per axis, got {shape}")


def circle_grid(
    n: int,
    period: float = 2.0 * math.pi,
    metric_values: Optional[np.ndarray] = None,
    analytic_measure: Optional[float] = None,
) -> SurfaceGrid:
    """Uniform periodic grid on a closed curve with induced metric h(u)."""
    _check_resolution((n,))
    du = period / n
    nodes = (np.arange(n) * du).reshape(-1, 1)
    h = np.ones(n) if metric_values is None else np.asarray(metric_values, dtype=float)
    weights = np.sqrt(h) * du
    if analytic_measure is not None:
        weights *= analytic_measure / weights.sum()
    return SurfaceGrid(
        kind=GridKind.PERIODIC_TENSOR,
        shape=(n,),
        periods=(period,),
        nodes=nodes,
        metric_diag=h.reshape(-1, 1),
        weights=weights,
    )


def periodic_tensor_grid(shape: tuple[int, ...], periods: tuple[float, ...]) -> SurfaceGrid:
    """Flat periodic tensor-product grid (tori with unit coordinate metric)."""
    _check_resolution(shape)
    axes = [np.arange(n) * p / n for n, p in zip(shape, periods)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    num = nodes.shape[0]
    cell = np.prod([p / n for n, p in zip(shape, periods)])
    return SurfaceGrid(
        kind=GridKind.PERIODIC_TENSOR,
        shape=tuple(shape),
        periods=tuple(periods),
        nodes=nodes,
        metric_diag=np.ones((num, len(shape))),
        weights=np.full(num, cell),
    )


def latlong_sphere_grid(n_theta: int, n_phi: int, radius: float = 1.0) -> SurfaceGrid:
    """Staggered latitude rows exclude the poles; area-exact weights."""
    _check_resolution((n_theta, n_phi))
    dtheta = math.pi / n_theta
    dphi = 2.0 * math.pi / n_phi
    thetas = (np.arange(n_theta) + 0.5) * dtheta
    phis = np.arange(n_phi) * dphi
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    nodes = np.stack([tt.ravel(), pp.ravel()], axis=1)
    metric_diag = np.stack(
        [np.full(nodes.shape[0], radius**2), (radius * np.sin(nodes[:, 0])) ** 2], axis=1
    )
    weights = radius**2 * np.sin(nodes[:, 0]) * dtheta * dphi
    weights *= 4.0 * math.pi * radius**2 / weights.sum()
    return SurfaceGrid(
        kind=GridKind.LATLONG_SPHERE,
        shape=(n_theta, n_phi),
        periods=(math.pi, 2.0 * math.pi),
        nodes=nodes,
        metric_diag=metric_diag,
        weights=weights,
    )


def grid_from_surface(surface: SliceSurface, data: InitialData, resolution: int) -> SurfaceGrid:
    """Grid matched to a one-dimensional slice surface parametrization."""
    emb = surface.embedding
    if emb.sigma_dim != 1:
        raise ValueError("grid_from_surface supports curve surfaces; use latlong_sphere_grid")
    period = surface.param_period
    du = period / resolution
    h = np.empty(resolution)
    for i in range(resolution):
        d = extrinsic_data(emb, data.h_field, np.array([i * du]))
        h[i] = d.induced[0, 0]
    return circle_grid(resolution, period, h, analytic_measure=surface.measure)


@dataclass
class StabilityCoefficients:
    """Per-node operator data: potential, drift and its divergence."""

    Q: np.ndarray
    X: np.ndarray
    divX: np.ndarray
    normX_sq: np.ndarray

    @classmethod
    def zero(cls, grid: SurfaceGrid) -> "StabilityCoefficients":
        num = grid.num_nodes
        d = grid.nodes.shape[1]
        return cls(np.zeros(num), np.zeros((num, d)), np.zeros(num), np.zeros(num))

    def shifted(self, offset: float) -> "StabilityCoefficients":
        return StabilityCoefficients(self.Q + offset, self.X, self.divX, self.normX_sq)


def stability_coefficients(
    data: InitialData, surface: SliceSurface, grid: SurfaceGrid
) -> StabilityCoefficients:
    """Assemble the geometric coefficients of the stability operator."""
    emb = surface.embedding
    num = grid.num_nodes
    pdim = grid.nodes.shape[1]
    q = np.empty(num)
    x = np.zeros((num, pdim))
    norm_x = np.zeros(num)
    for idx in range(num):
        u = grid.nodes[idx]
        ext = extrinsic_data(emb, data.h_field, u)
        p = ext.H.base
        m = data.h_field(p)
        k, _ = data.K_field(p)
        nu = np.asarray(surface.nu(u), dtype=float)
        cq = constraint_quantities(data, p)
        # scalar second fundamental form in direction nu, as a form on Sigma
        k_nu = -np.einsum("a,aij->ij", m.g @ nu, ext.II)
        k_pull = ext.tangent.T @ k @ ext.tangent
        total = k_nu + k_pull
        norm_total_sq = float(
            np.einsum("ac,bd,ab,cd->", ext.induced_inv, ext.induced_inv, total, total)
        )
        q[idx] = (
            0.5 * surface.scal_sigma(u)
            - (float(cq.J @ nu) + cq.rho)
            - 0.5 * norm_total_sq
        )
        omega = ext.tangent.T @ k @ nu
        x[idx] = ext.induced_inv @ omega
        norm_x[idx] = float(omega @ ext.induced_inv @ omega)
    div_x = _divergence_on_grid(grid, x)
    return StabilityCoefficients(Q=q, X=x, divX=div_x, normX_sq=norm_x)


def _divergence_on_grid(grid: SurfaceGrid, x: np.ndarray) -> np.ndarray:
    """(1/sqrt h) d_a (sqrt h X^a) by periodic central differences."""
    if np.abs(x).max() == 0.0:
        return np.zeros(grid.num_nodes)
    if grid.kind is not GridKind.PERIODIC_TENSOR:
        # the theta axis of a latitude-longitude grid is not periodic, so
        # central differences would wrap across the poles
        raise NotImplementedError("drift fields are supported on periodic grids only")
    sqrt_h = np.sqrt(np.prod(grid.metric_diag, axis=1))
    shape = grid.shape
    div = np.zeros(grid.num_nodes)
    for axis, (n, h) in enumerate(zip(shape, grid.spacing)):
        flux = (sqrt_h * x[:, axis]).reshape(shape)
        d = (np.roll(flux, -1, axis=axis) - np.roll(flux, 1, axis=axis)) / (2.0 * h)
        div += d.ravel() / sqrt_h
    return div


def assemble_stability_operator(grid: SurfaceGrid, coeffs: StabilityCoefficients) -> np.ndarray:
    """Dense matrix of -Lap + 2 X.grad + (Q + div X - |X|^2) on the grid."""
    _check_resolution(grid.shape)
    if grid.kind is GridKind.PERIODIC_TENSOR:
        mat = _laplacian_periodic(grid)
    else:
        mat = _laplacian_latlong(grid)
    mat = -mat
    mat += _drift_matrix(grid, coeffs.X)
    zeroth = coeffs.Q + coeffs.divX - coeffs.normX_sq
    mat[np.diag_indices_from(mat)] += zeroth
    return mat


def _axis_neighbors(shape, axis):
    """Index maps for +1 / -1 shifts along an axis of the flattened grid."""
    num = int(np.prod(shape))
    idx = np.arange(num).reshape(shape)
    plus = np.roll(idx, -1, axis=axis).ravel()
    minus = np.roll(idx, 1, axis=axis).ravel()
    return plus, minus


def _laplacian_periodic(grid: SurfaceGrid) -> np.ndarray:
    """Conservative Laplace-Beltrami for a diagonal metric on a periodic grid."""
    num = grid.num_nodes
    shape = grid.shape
    sqrt_h = np.sqrt(np.prod(grid.metric_diag, axis=1))
    mat = np.zeros((num, num))
    rows = np.arange(num)
    for axis, h in enumerate(grid.spacing):
        coeff = sqrt_h / grid.metric_diag[:, axis]
        plus, minus = _axis_neighbors(shape, axis)
        c_plus = 0.5 * (coeff + coeff[plus])
        c_minus = 0.5 * (coeff + coeff[minus])
        scale = 1.0 / (sqrt_h * h * h)
        mat[rows, plus] += scale * c_plus
        mat[rows, minus] += scale * c_minus
        mat[rows, rows] -= scale * (c_plus + c_minus)
    return mat


def _laplacian_latlong(grid: SurfaceGrid) -> np.ndarray:
    """Sphere Laplacian; the flux through the pole faces vanishes with sin(theta)."""
    n_theta, n_phi = grid.shape
    dtheta, dphi = grid.spacing
    num = grid.num_nodes
    radius_sq = grid.metric_diag[0, 0]
    theta = grid.nodes[:, 0].reshape(n_theta, n_phi)
    sin_t = np.sin(theta)
    mat = np.zeros((num, num))
    idx = np.arange(num).reshape(n_theta, n_phi)
    # theta direction: conservative flux with face values sin(theta +- dtheta/2)
    sin_face_up = np.sin(theta + 0.5 * dtheta)
    sin_face_dn = np.sin(theta - 0.5 * dtheta)
    for j in range(n_theta):
        for k in range(n_phi):
            row = idx[j, k]
            denom = radius_sq * sin_t[j, k] * dtheta * dtheta
            if j + 1 < n_theta:
                c = sin_face_up[j, k] / denom
                mat[row, idx[j + 1, k]] += c
                mat[row, row] -= c
            if j - 1 >= 0:
                c = sin_face_dn[j, k] / denom
                mat[row, idx[j - 1, k]] += c
                mat[row, row] -= c
    # phi direction: periodic second difference
    for j in range(n_theta):
        scale = 1.0 / (radius_sq * sin_t[j, 0] ** 2 * dphi * dphi)
        for k in range(n_phi):
            row = idx[j, k]
            mat[row, idx[j, (k + 1) % n_phi]] += scale
            mat[row, idx[j, (k - 1) % n_phi]] += scale
            mat[row, row] -= 2.0 * scale
    return mat


def _drift_matrix(grid: SurfaceGrid, x: np.ndarray) -> np.ndarray:
    """2 <X, grad psi> = 2 X^a d_a psi, central differences."""
    num = grid.num_nodes
    mat = np.zeros((num, num))
    if np.abs(x).max() == 0.0:
        return mat
    if grid.kind is not GridKind.PERIODIC_TENSOR:
        raise NotImplementedError("drift fields are supported on periodic grids only")
    rows = np.arange(num)
    for axis, h in enumerate(grid.spacing):
        plus, minus = _axis_neighbors(grid.shape, axis)
        c = x[:, axis] / h
        mat[rows, plus] += c
        mat[rows, minus] -= c
    return mat


@dataclass
class PrincipalEigen:
    lambda1: complex
    eigenfunction: np.ndarray
    spectrum: np.ndarray
    positivity: bool

    @property
    def lambda1_real(self) -> float:
        return float(self.lambda1.real)


def principal_eigenvalue(matrix: np.ndarray, grid: SurfaceGrid) -> PrincipalEigen:
    """Eigenvalue of minimal real part with its one-signed eigenfunction.

    Ties in the real part are broken by minimal imaginary magnitude.  The
    eigenfunction is rescaled to be real with positive mean; the positivity
    flag records whether it is strictly one-signed.
    """
    try:
        vals, vecs = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    order = np.lexsort((np.abs(vals.imag), vals.real))
    lead = order[0]
    lam = vals[lead]
    if abs(lam.imag) > 1e-8 * (1.0 + abs(lam.real)):
        raise EigensolverFailure(
            f"principal eigenvalue has non-negligible imaginary part {lam.imag:.3e}"
        )
    vec = vecs[:, lead]
    pivot = vec[np.argmax(np.abs(vec))]
    vec = (vec / pivot).real
    if vec.mean() < 0:
        vec = -vec
    scale = np.abs(vec).max()
    vec = vec / scale
    positivity = bool(vec.min() > 0.0) or bool(vec.max() < 0.0)
    return PrincipalEigen(
        lambda1=complex(lam), eigenfunction=vec, spectrum=vals, positivity=positivity
    )


def quadrature_symmetry_residual(matrix: np.ndarray, grid: SurfaceGrid) -> float:
    """Max asymmetry of the operator in the quadrature inner product."""
    wa = grid.weights[:, None] * matrix
    return float(np.abs(wa - wa.T).max() / max(1.0, np.abs(wa).max()))


# --- deformation of a MOTS along its normal --------------------------------


@dataclass
class DeformationCase:
    """Everything needed to displace a MOTS and recompute its expansion.

    ``theta_of(t, phi)`` returns the outward null expansion at every grid
    node of the surface displaced by t * phi along the outward unit normal.
    ``q_offset`` adds a constant to the potential; the expansion functional
    is extended accordingly by q_offset * t * phi so that its linearization
    matches the shifted operator.
    """

    grid: SurfaceGrid
    coefficients: StabilityCoefficients
    theta_of: Callable[[float, np.ndarray], np.ndarray]
    injectivity_scale: float = 1.0
    q_offset: float = 0.0
    label: str = ""


@dataclass
class DeformationReport:
    lambda1: float
    fd_derivative: np.ndarray
    predicted: np.ndarray
    max_rel_error: float
    displacement: float
    theta_displaced: np.ndarray
    outer_trapped_achieved: bool


def deformation_check(
    case: DeformationCase,
    eigen: Optional[PrincipalEigen] = None,
    fd_step: float = 1e-4,
    step_scale: float = 0.05,
) -> DeformationReport:
    """Verify d(theta_+)/dt = lambda_1 phi and achieve theta_+ < 0.

    The displacement sign follows the rule: move along +nu when lambda_1 < 0
    and along -nu when lambda_1 > 0, with step 0.05 times the injectivity
    scale; the report records whether the displaced surface is outer trapped
    at every node.
    """
    if eigen is None:
        matrix = assemble_stability_operator(case.grid, case.coefficients)
        eigen = principal_eigenvalue(matrix, case.grid)
    lam = eigen.lambda1_real
    if abs(lam) <= DEGENERACY_TOL:
        raise DegenerateMOTS(f"principal eigenvalue {lam:.3e} below degeneracy threshold")
    if not eigen.positivity:
        raise DegenerateMOTS("principal eigenfunction is not one-signed")
    phi = eigen.eigenfunction
    theta_plus = case.theta_of(fd_step, phi)
    theta_minus = case.theta_of(-fd_step, phi)
    fd = (theta_plus - theta_minus) / (2.0 * fd_step)
    predicted = lam * phi
    rel = np.abs(fd - predicted) / np.maximum(np.abs(predicted), 1e-300)
    t_star = step_scale * case.injectivity_scale * (1.0 if lam < 0 else -1.0)
    theta_displaced = case.theta_of(t_star, phi)
    return DeformationReport(
        lambda1=lam,
        fd_derivative=fd,
        predicted=predicted,
        max_rel_error=float(rel.max()),
        displacement=float(t_star),
        theta_displaced=theta_displaced,
        outer_trapped_achieved=bool(np.all(theta_displaced < 0.0)),
    )


def _nodal_curve_embedding(
    grid: SurfaceGrid, theta_vals: np.ndarray
) -> tuple[EmbeddingJet2, Callable[[np.ndarray], np.ndarray]]:
    """Latitude-profile curve theta(u) on the unit 2-sphere from nodal values.

    Derivatives of the profile come from periodic central differences of the
    nodal values, which is exact for the constant profiles arising from
    principal eigenfunctions of the equator.
    """
    n = grid.shape[0]
    du = grid.spacing[0]
    d_theta = (np.roll(theta_vals, -1) - np.roll(theta_vals, 1)) / (2.0 * du)
    dd_theta = (np.roll(theta_vals, -1) - 2.0 * theta_vals + np.roll(theta_vals, 1)) / du**2

    def node_index(u: np.ndarray) -> int:
        val = float(np.atleast_1d(u)[0])
        idx = int(round(val / du)) % n
        if abs(val - round(val / du) * du) > 1e-9:
            raise ValueError("nodal embedding evaluated off the grid")
        return idx

    emb = EmbeddingJet2(
        sigma_dim=1,
        ambient_dim=2,
        chart=lambda u: np.array([theta_vals[node_index(u)], float(np.atleast_1d(u)[0])]),
        d_chart=lambda u: np.array([[d_theta[node_index(u)]], [1.0]]),
        dd_chart=lambda u: np.array([[[dd_theta[node_index(u)]]], [[0.0]]]),
        sample_set=grid.nodes,
        name="displaced_equator",
    )

    def nu(u: np.ndarray) -> np.ndarray:
        i = node_index(u)
        theta = theta_vals[i]
        slope = d_theta[i]
        s2 = math.sin(theta) ** 2
        raw = np.array([1.0, -slope / s2])
        norm = math.sqrt(1.0 + slope**2 / s2)
        return raw / norm

    return emb, nu


def equator_deformation_case(
    resolution: int = 64, q_offset: float = 0.0, n_sphere: int = 2
) -> DeformationCase:
    """Deformation case for the equator of the unit-sphere slice (n = 2)."""
    if n_sphere != 2:
        raise ValueError("deformation case implemented for the 2-sphere slice")
    sc = build_scenario("einstein_cylinder", {"n": 2, "equator_samples": resolution})
    data = sc.initial_data
    surface = sc.slice_surfaces["equator"]
    grid = grid_from_surface(surface, data, resolution)
    coeffs = stability_coefficients(data, surface, grid).shifted(q_offset)

    def theta_of(t: float, phi: np.ndarray) -> np.ndarray:
        theta_vals = 0.5 * math.pi + t * phi
        emb, nu = _nodal_curve_embedding(grid, theta_vals)
        out = np.empty(grid.num_nodes)
        for i, u in enumerate(grid.nodes):
            out[i] = initial_data_expansions(data, emb, nu, u)[0]
        return out + q_offset * t * phi

    return DeformationCase(
        grid=grid,
        coefficients=coeffs,
        theta_of=theta_of,
        injectivity_scale=surface.injectivity_scale,
        q_offset=q_offset,
        label="einstein_cylinder_equator",
    )


def flat_torus_degenerate_case(resolution: int = 32) -> DeformationCase:
    """Circle in flat torus data: Q = 0 identically, principal eigenvalue 0."""
    sc = build_scenario("minkowski_torus_quotient", {"m": 2, "samples_per_axis": resolution})
    data = sc.initial_data
    surface = sc.slice_surfaces["Sigma"]
    grid = grid_from_surface(surface, data, resolution)
    coeffs = stability_coefficients(data, surface, grid)

    def theta_of(t: float, phi: np.ndarray) -> np.ndarray:
        # flat quotient: a normal displacement of the flat circle stays minimal
        return np.zeros(grid.num_nodes)

    return DeformationCase(
        grid=grid,
        coefficients=coeffs,
        theta_of=theta_of,
        injectivity_scale=surface.injectivity_scale,
        label="flat_torus_circle",
    )
