import math

import numpy as np
import pytest

from traplab.errors import DegenerateMOTS, ResolutionTooLow
from traplab.geometry import MetricJet2, Signature
from traplab.initial_data import InitialData
from traplab.scenarios import build_scenario
from traplab.stability import (
    StabilityCoefficients,
    assemble_stability_operator,
    circle_grid,
    deformation_check,
    equator_deformation_case,
    flat_torus_degenerate_case,
    grid_from_surface,
    latlong_sphere_grid,
    periodic_tensor_grid,
    principal_eigenvalue,
    quadrature_symmetry_residual,
    stability_coefficients,
)


def _circle_operator(n, q_func, x_func=None, dx_func=None):
    grid = circle_grid(n)
    s = grid.nodes[:, 0]
    q = q_func(s)
    if x_func is None:
        x = np.zeros(n)
        divx = np.zeros(n)
    else:
        x = x_func(s)
        divx = dx_func(s)
    coeffs = StabilityCoefficients(Q=q, X=x.reshape(-1, 1), divX=divx, normX_sq=x**2)
    return grid, coeffs


class TestGrids:
    def test_circle_weights_sum_to_length(self):
        grid = circle_grid(64)
        assert grid.weights.sum() == pytest.approx(2 * math.pi, rel=1e-12)

    def test_sphere_weights_sum_to_area(self):
        grid = latlong_sphere_grid(16, 32, radius=1.5)
        assert grid.weights.sum() == pytest.approx(4 * math.pi * 1.5**2, rel=1e-12)
        assert grid.weights.min() > 0

    def test_resolution_guard(self):
        with pytest.raises(ResolutionTooLow):
            circle_grid(4)
        with pytest.raises(ResolutionTooLow):
            latlong_sphere_grid(4, 16)

    def test_grid_from_equator_surface(self):
        sc = build_scenario("einstein_cylinder", {"n": 2})
        grid = grid_from_surface(sc.slice_surfaces["equator"], sc.initial_data, 32)
        assert grid.weights.sum() == pytest.approx(2 * math.pi, rel=1e-12)
        assert np.allclose(grid.metric_diag, 1.0)


class TestAssembly:
    def test_plain_laplacian_stencil(self):
        # X = 0, Q = 0 on the unit circle: the matrix is the periodic
        # second-difference stencil with smallest eigenvalue 0
        grid, coeffs = _circle_operator(16, lambda s: np.zeros_like(s))
        mat = assemble_stability_operator(grid, coeffs)
        h = grid.spacing[0]
        assert mat[0, 0] == pytest.approx(2.0 / h**2)
        assert mat[0, 1] == pytest.approx(-1.0 / h**2)
        assert mat[0, -1] == pytest.approx(-1.0 / h**2)
        eig = principal_eigenvalue(mat, grid)
        assert eig.lambda1_real == pytest.approx(0.0, abs=1e-12)
        assert eig.eigenfunction == pytest.approx(np.ones(16), rel=1e-9)

    def test_constant_potential_shifts_spectrum(self):
        grid, coeffs0 = _circle_operator(32, lambda s: np.zeros_like(s))
        mat0 = assemble_stability_operator(grid, coeffs0)
        _, coeffs_q = _circle_operator(32, lambda s: np.full_like(s, -1.0))
        mat_q = assemble_stability_operator(grid, coeffs_q)
        assert np.abs((mat_q - mat0) - (-1.0) * np.eye(32)).max() < 1e-14
        e0 = np.sort(np.linalg.eigvals(mat0).real)
        eq = np.sort(np.linalg.eigvals(mat_q).real)
        assert np.abs(eq - (e0 - 1.0)).max() < 1e-9

    def test_discrete_dispersion_matches_analytic_oracle(self):
        # full spectrum of the periodic second difference plus shift
        n = 32
        grid, coeffs = _circle_operator(n, lambda s: np.full_like(s, -1.0))
        mat = assemble_stability_operator(grid, coeffs)
        h = grid.spacing[0]
        expected = np.sort([4.0 / h**2 * math.sin(math.pi * k / n) ** 2 - 1.0 for k in range(n)])
        measured = np.sort(np.linalg.eigvals(mat).real)
        assert np.abs(measured - expected).max() < 1e-8

    def test_constant_drift_keeps_constants(self):
        # constants are eigenfunctions regardless of the drift term; the
        # eigenvalue is the assembled zeroth-order coefficient
        grid, coeffs = _circle_operator(
            32, lambda s: np.full_like(s, 0.7),
            lambda s: np.full_like(s, 0.4), lambda s: np.zeros_like(s),
        )
        zeroth = float((coeffs.Q + coeffs.divX - coeffs.normX_sq)[0])
        mat = assemble_stability_operator(grid, coeffs)
        ones = np.ones(32)
        assert np.abs(mat @ ones - zeroth * ones).max() < 1e-12
        eig = principal_eigenvalue(mat, grid)
        assert eig.lambda1_real == pytest.approx(zeroth, abs=1e-10)
        assert np.abs(eig.eigenfunction - 1.0).max() < 1e-9

    def test_equator_potential_from_geometry(self):
        case = equator_deformation_case(32)
        assert np.abs(case.coefficients.Q + 1.0).max() < 1e-12
        assert np.abs(case.coefficients.X).max() == 0.0

    def test_stability_coefficients_with_synthetic_K(self):
        # flat 2-torus slice, constant K: Q = -rho - |K restricted|^2 / 2 and
        # the drift is the K(nu, .) component along the surface
        a, b, c = 0.4, -0.3, 0.25
        k = np.array([[a, c], [c, b]])
        data = InitialData(
            dim=2,
            h_field=lambda p: MetricJet2.flat(2, Signature.RIEMANNIAN),
            K_field=lambda p: (k, np.zeros((2, 2, 2))),
        )
        sc = build_scenario("minkowski_torus_quotient", {"m": 2})
        surface = sc.slice_surfaces["Sigma"]
        grid = circle_grid(16, period=1.0)
        coeffs = stability_coefficients(data, surface, grid)
        rho = 0.5 * ((a + b) ** 2 - (a * a + 2 * c * c + b * b))
        assert np.abs(coeffs.Q - (-rho - 0.5 * b * b)).max() < 1e-12
        assert np.abs(coeffs.X[:, 0] - c).max() < 1e-12
        assert np.abs(coeffs.normX_sq - c * c).max() < 1e-12
        assert np.abs(coeffs.divX).max() < 1e-12

    def test_torus_2d_grid_flat_laplacian(self):
        grid = periodic_tensor_grid((8, 8), (1.0, 1.0))
        coeffs = StabilityCoefficients.zero(grid)
        mat = assemble_stability_operator(grid, coeffs)
        eig = principal_eigenvalue(mat, grid)
        assert eig.lambda1_real == pytest.approx(0.0, abs=1e-10)
        assert quadrature_symmetry_residual(mat, grid) < 1e-12


class TestPrincipalEigenvalue:
    def test_random_drift_operator_against_double_resolution(self, rng):
        # brute-force oracle: the same dense solve at twice the resolution
        def q_func(s):
            return -0.8 + 0.5 * np.sin(s) + 0.3 * np.cos(2 * s)

        def x_func(s):
            return 0.25 * np.cos(s)

        def dx_func(s):
            return -0.25 * np.sin(s)

        lams = {}
        for n in (64, 128, 256):
            grid, coeffs = _circle_operator(n, q_func, x_func, dx_func)
            mat = assemble_stability_operator(grid, coeffs)
            eig = principal_eigenvalue(mat, grid)
            assert abs(eig.lambda1.imag) < 1e-10
            assert eig.positivity
            lams[n] = eig.lambda1_real
        assert abs(lams[64] - lams[128]) < 4e-4
        assert abs(lams[128] - lams[256]) < 1e-4

    def test_minimal_real_part_selection(self, rng):
        grid, coeffs = _circle_operator(24, lambda s: 0.5 * np.sin(s))
        mat = assemble_stability_operator(grid, coeffs)
        eig = principal_eigenvalue(mat, grid)
        assert eig.lambda1_real <= eig.spectrum.real.min() + 1e-12

    def test_positivity_criterion_from_constructed_instance(self, rng):
        # choose psi > 0 and a positive target, then solve for the zeroth
        # coefficient so that L(psi) equals the target exactly
        n = 48
        grid = circle_grid(n)
        s = grid.nodes[:, 0]
        psi = 2.0 + np.sin(s)
        target = 0.5 + 0.3 * np.cos(s)
        base = StabilityCoefficients.zero(grid)
        lap = assemble_stability_operator(grid, base)  # pure -Laplacian
        c = (target - lap @ psi) / psi
        coeffs = StabilityCoefficients(Q=c, X=np.zeros((n, 1)), divX=np.zeros(n),
                                       normX_sq=np.zeros(n))
        mat = assemble_stability_operator(grid, coeffs)
        assert np.abs(mat @ psi - target).max() < 1e-9
        eig = principal_eigenvalue(mat, grid)
        assert eig.lambda1_real > 0.0

    def test_grid_convergence_second_order(self):
        lams = {}
        for n in (32, 64, 128):
            grid, coeffs = _circle_operator(
                n,
                lambda s: -1.0 + 0.4 * np.sin(s) + 0.2 * np.cos(2 * s),
                lambda s: 0.3 * np.cos(s),
                lambda s: -0.3 * np.sin(s),
            )
            mat = assemble_stability_operator(grid, coeffs)
            lams[n] = principal_eigenvalue(mat, grid).lambda1_real
        ratio = abs(lams[32] - lams[64]) / abs(lams[64] - lams[128])
        assert 3.5 <= ratio <= 4.5

    def test_sphere_laplacian_eigenvalue(self):
        # principal nonzero band of the unit-sphere Laplacian is l(l+1) = 2
        grid = latlong_sphere_grid(24, 48)
        coeffs = StabilityCoefficients.zero(grid)
        mat = assemble_stability_operator(grid, coeffs)
        eig = principal_eigenvalue(mat, grid)
        assert eig.lambda1_real == pytest.approx(0.0, abs=1e-10)
        spectrum = np.sort(eig.spectrum.real)
        band = spectrum[1:4]  # threefold l = 1 eigenvalue
        assert np.abs(band - 2.0).max() < 0.02

    def test_equatorial_two_sphere_in_three_sphere_slice(self):
        # geometric coefficients on the 2-d surface: Scal_Sigma = 2 and the
        # 3-sphere slice density is 3, so Q = 1 - 3 = -2 and lambda1 = -2
        sc = build_scenario("einstein_cylinder", {"n": 3})
        surface = sc.slice_surfaces["equator"]
        grid = latlong_sphere_grid(12, 24)
        coeffs = stability_coefficients(sc.initial_data, surface, grid)
        assert np.abs(coeffs.Q + 2.0).max() < 1e-10
        assert np.abs(coeffs.X).max() == 0.0
        mat = assemble_stability_operator(grid, coeffs)
        eig = principal_eigenvalue(mat, grid)
        assert eig.lambda1_real == pytest.approx(-2.0, abs=1e-9)
        assert eig.positivity
        assert quadrature_symmetry_residual(mat, grid) < 1e-9


class TestDeformation:
    def test_equator_case(self):
        rep = deformation_check(equator_deformation_case(64))
        assert rep.lambda1 == pytest.approx(-1.0, abs=1e-10)
        assert rep.max_rel_error < 2e-3
        assert rep.displacement > 0
        assert rep.outer_trapped_achieved

    def test_displaced_circle_matches_latitude_formula(self):
        # oracle: theta_+ of the circle at polar angle pi/2 + t is -tan(t)
        case = equator_deformation_case(32)
        phi = np.ones(32)
        for t in (0.05, -0.08):
            theta = case.theta_of(t, phi)
            assert np.abs(theta - (1.0 / math.tan(math.pi / 2 + t))).max() < 1e-12

    def test_shifted_potential_flips_direction(self):
        rep = deformation_check(equator_deformation_case(64, q_offset=2.0))
        assert rep.lambda1 == pytest.approx(1.0, abs=1e-10)
        assert rep.displacement < 0
        assert rep.outer_trapped_achieved
        assert rep.max_rel_error < 2e-3

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateMOTS):
            deformation_check(flat_torus_degenerate_case(32))

    def test_fd_step_robustness(self):
        rep = deformation_check(equator_deformation_case(32), fd_step=1e-3)
        assert rep.max_rel_error < 2e-3


class TestEigensolverGuards:
    def test_complex_bottom_pair_rejected(self):
        from traplab.errors import EigensolverFailure

        grid = circle_grid(8)
        # block rotation matrix: the minimal-real-part eigenvalues are a
        # genuinely complex conjugate pair
        mat = np.zeros((8, 8))
        for k in range(0, 8, 2):
            mat[k, k + 1] = 1.0
            mat[k + 1, k] = -1.0
        with pytest.raises(EigensolverFailure):
            principal_eigenvalue(mat, grid)

    def test_drift_on_sphere_grid_rejected(self):
        grid = latlong_sphere_grid(8, 8)
        num = grid.num_nodes
        coeffs = StabilityCoefficients(
            Q=np.zeros(num), X=np.ones((num, 2)), divX=np.zeros(num),
            normX_sq=np.ones(num),
        )
        with pytest.raises(NotImplementedError):
            assemble_stability_operator(grid, coeffs)
