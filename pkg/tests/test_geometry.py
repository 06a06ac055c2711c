import math

import numpy as np
import pytest

from traplab.errors import CollinearPair, NonTimelikeOrientation, SingularMetric
from traplab.geometry import (
    CausalClass,
    MetricJet2,
    Signature,
    TangentVector,
    causal_classify,
    christoffel,
    lorentz_frame,
    ricci,
    ricci_from_riemann,
    riemann,
    riem_quadform,
    scalar_curvature,
)
from traplab.scenarios import build_scenario
from traplab.verify import random_polynomial_metric_jet

from _oracles import constant_curvature_riemann, static_product_riemann

CYL = build_scenario("einstein_cylinder", {"n": 2})
SPHERE_POINT = np.array([0.0, math.pi / 4, 0.3])


def sphere_jet(theta, phi=0.3):
    """Unit round 2-sphere chart jet, from the cylinder slice field."""
    return CYL.initial_data.h_field(np.array([theta, phi]))


class TestChristoffel:
    def test_flat_jet_gives_zero(self):
        assert np.abs(christoffel(MetricJet2.flat(4))).max() == 0.0

    def test_round_sphere_value(self):
        # oracle: Gamma^theta_phiphi = -sin(theta) cos(theta), frozen at pi/4
        gam = christoffel(sphere_jet(math.pi / 4))
        assert gam[0, 1, 1] == pytest.approx(-0.5, abs=1e-12)

    def test_constant_rescaling_stays_flat(self):
        m = MetricJet2.constant(math.exp(2.0 * 0.7) * np.diag([-1.0, 1, 1, 1]))
        assert np.abs(christoffel(m)).max() == 0.0

    def test_symmetry_in_lower_indices(self, rng):
        jet = random_polynomial_metric_jet(rng, 4)
        gam = christoffel(jet)
        assert np.abs(gam - np.swapaxes(gam, 1, 2)).max() < 1e-12

    def test_metric_compatibility(self, rng):
        for _ in range(20):
            jet = random_polynomial_metric_jet(rng, 3)
            gam = christoffel(jet)
            lhs = jet.dg
            rhs = np.einsum("lki,lj->kij", gam, jet.g) + np.einsum(
                "lkj,il->kij", gam, jet.g
            )
            assert np.abs(lhs - rhs).max() < 1e-9

    def test_metric_compatibility_on_shipped_scenarios(self):
        for name in ("minkowski", "minkowski_torus_quotient", "einstein_cylinder",
                     "schwarzschild_slice_isotropic", "flrw_dust"):
            sc = build_scenario(name, {})
            for p in sc.energy_points:
                jet = sc.metric(np.asarray(p))
                gam = christoffel(jet)
                rhs = np.einsum("lki,lj->kij", gam, jet.g) + np.einsum(
                    "lkj,il->kij", gam, jet.g
                )
                scale = max(1.0, np.abs(jet.dg).max())
                assert np.abs(jet.dg - rhs).max() / scale < 1e-9

    def test_singular_metric_rejected(self):
        g = np.diag([-1.0, 1.0, 1.0, 1e-13])
        m = MetricJet2(4, g, np.zeros((4,) * 3), np.zeros((4,) * 4))
        with pytest.raises(SingularMetric):
            christoffel(m)


class TestRiemann:
    def test_flat(self):
        assert riemann(MetricJet2.flat(4)).max_abs() < 1e-10

    def test_unit_sphere_matches_constant_curvature_oracle(self):
        m = sphere_jet(1.1)
        r = riemann(m)
        expected = constant_curvature_riemann(m.g, 1.0)
        assert np.abs(r.R - expected).max() < 1e-12

    def test_cylinder_matches_product_oracle(self):
        m = CYL.metric(SPHERE_POINT)
        r = riemann(m)
        spatial = constant_curvature_riemann(m.g[1:, 1:], 1.0)
        assert np.abs(r.R - static_product_riemann(spatial, 3)).max() < 1e-12

    def test_symmetries_on_random_jets(self, rng):
        # the four curvature-like identities, 100 randomized analytic jets
        for k in range(100):
            dim = int(rng.integers(2, 5))
            sig = Signature.LORENTZIAN if k % 2 else Signature.RIEMANNIAN
            r = riemann(random_polynomial_metric_jet(rng, dim, sig))
            assert r.symmetry_residual < 1e-9


class TestRicci:
    def test_flat(self):
        assert np.abs(ricci(MetricJet2.flat(4))).max() == 0.0

    def test_einstein_cylinder(self):
        # product oracle: Ric(dt, dt) = 0 and Ric(u, u) = n - 1 = 1
        m = CYL.metric(SPHERE_POINT)
        ric = ricci(m)
        assert abs(ric[0, 0]) < 1e-12
        u = np.array([0.0, 1.0, 0.0])
        assert u @ ric @ u == pytest.approx(1.0, abs=1e-12)

    def test_unit_sphere_ricci_equals_metric(self):
        m = sphere_jet(0.9)
        assert np.abs(ricci(m) - m.g).max() < 1e-12
        assert scalar_curvature(m) == pytest.approx(2.0, abs=1e-12)

    def test_contraction_consistency(self, rng):
        for _ in range(15):
            jet = random_polynomial_metric_jet(rng, 4)
            direct = ricci(jet)
            contracted = ricci_from_riemann(riemann(jet), jet)
            scale = max(1.0, np.abs(direct).max())
            assert np.abs(direct - contracted).max() / scale < 1e-9

    def test_contraction_consistency_on_shipped_scenarios(self):
        for name in ("einstein_cylinder", "schwarzschild_slice_isotropic", "flrw_dust"):
            sc = build_scenario(name, {})
            for p in sc.energy_points:
                jet = sc.metric(np.asarray(p))
                direct = ricci(jet)
                contracted = ricci_from_riemann(riemann(jet), jet)
                scale = max(1.0, np.abs(direct).max())
                assert np.abs(direct - contracted).max() / scale < 1e-9


class TestCausalClassify:
    FLAT = MetricJet2.flat(4)
    X = TangentVector(np.zeros(4), np.array([1.0, 0, 0, 0]))

    def tv(self, *comps):
        return TangentVector(np.zeros(4), np.array(comps, dtype=float))

    def test_examples(self):
        assert causal_classify(self.FLAT, self.tv(1, 0, 0, 0), self.X) is CausalClass.TIMELIKE_FUTURE
        assert causal_classify(self.FLAT, self.tv(1, 1, 0, 0), self.X) is CausalClass.NULL_FUTURE
        assert causal_classify(self.FLAT, self.tv(0, 1, 0, 0), self.X) is CausalClass.SPACELIKE
        assert causal_classify(self.FLAT, self.tv(-2, 0, 1, 0), self.X) is CausalClass.TIMELIKE_PAST
        assert causal_classify(self.FLAT, self.tv(-1, 0, 1, 0), self.X) is CausalClass.NULL_PAST
        assert causal_classify(self.FLAT, self.tv(0, 0, 0, 0), self.X) is CausalClass.ZERO

    def test_requires_timelike_orientation(self):
        with pytest.raises(NonTimelikeOrientation):
            causal_classify(self.FLAT, self.tv(1, 0, 0, 0), self.tv(0, 1, 0, 0))

    def test_conformal_invariance(self, rng):
        # sign-based decision: rescaling cannot change any verdict
        from traplab.conformal import ScalarJet2, rescale_metric

        for _ in range(25):
            comps = rng.normal(size=4)
            kind = rng.integers(0, 3)
            if kind == 1:  # exactly null
                space = comps[1:] / np.linalg.norm(comps[1:])
                comps = np.concatenate(([1.0], space)) * rng.choice([-1.0, 1.0])
            v = TangentVector(np.zeros(4), comps)
            f = ScalarJet2(rng.normal(), rng.normal(size=4), np.zeros((4, 4)))
            before = causal_classify(self.FLAT, v, self.X)
            after = causal_classify(rescale_metric(self.FLAT, f), v, self.X)
            assert before is after


class TestQuadform:
    def test_flat_zero(self):
        m = MetricJet2.flat(4)
        r = riemann(m)
        w = TangentVector(np.zeros(4), np.array([0.0, 1, 0, 0]))
        v = TangentVector(np.zeros(4), np.array([1.0, 0, 0, 0]))
        assert riem_quadform(r, m, w, v) == 0.0

    def test_unit_sphere_orthonormal_pair(self):
        m = sphere_jet(math.pi / 4)
        r = riemann(m)
        p = np.array([math.pi / 4, 0.3])
        v = TangentVector(p, np.array([1.0, 0.0]))
        w = TangentVector(p, np.array([0.0, 1.0 / math.sin(math.pi / 4)]))
        assert riem_quadform(r, m, w, v) == pytest.approx(1.0, abs=1e-12)

    def test_cylinder_mixed_plane_vanishes(self):
        m = CYL.metric(SPHERE_POINT)
        r = riemann(m)
        v = TangentVector(SPHERE_POINT, np.array([1.0, 0, 0]))
        w = TangentVector(SPHERE_POINT, np.array([0.0, 1, 0]))
        assert abs(riem_quadform(r, m, w, v)) < 1e-12

    def test_collinear_rejected(self):
        m = MetricJet2.flat(4)
        r = riemann(m)
        v = TangentVector(np.zeros(4), np.array([1.0, 2, 0, 0]))
        w = TangentVector(np.zeros(4), 3.0 * v.components)
        with pytest.raises(CollinearPair):
            riem_quadform(r, m, w, v)

    def test_invariant_under_adding_multiples_of_v(self, rng):
        for _ in range(10):
            jet = random_polynomial_metric_jet(rng, 4)
            r = riemann(jet)
            v = TangentVector(np.zeros(4), rng.normal(size=4))
            w = TangentVector(np.zeros(4), rng.normal(size=4))
            alpha = rng.normal()
            shifted = TangentVector(np.zeros(4), w.components + alpha * v.components)
            a = riem_quadform(r, jet, w, v)
            b = riem_quadform(r, jet, shifted, v)
            assert abs(a - b) <= 1e-8 * max(1.0, abs(a))


class TestLorentzFrame:
    def test_gram_matrix(self, rng):
        for _ in range(10):
            jet = random_polynomial_metric_jet(rng, 4)
            x = TangentVector(np.zeros(4), np.array([1.0, 0.1, -0.05, 0.0]))
            frame = lorentz_frame(jet, x)
            gram = frame.T @ jet.g @ frame
            assert np.abs(gram - np.diag([-1.0, 1, 1, 1])).max() < 1e-9


class TestJetValidation:
    def test_asymmetric_metric_rejected(self):
        g = np.diag([-1.0, 1, 1, 1])
        g[0, 1] = 0.2
        with pytest.raises(ValueError):
            MetricJet2(4, g, np.zeros((4,) * 3), np.zeros((4,) * 4))

    def test_asymmetric_first_derivatives_rejected(self):
        dg = np.zeros((3,) * 3)
        dg[0, 1, 2] = 1.0
        with pytest.raises(ValueError):
            MetricJet2(3, np.diag([-1.0, 1, 1]), dg, np.zeros((3,) * 4))

    def test_wrong_signature_rejected(self):
        with pytest.raises(ValueError):
            MetricJet2(3, np.eye(3), np.zeros((3,) * 3), np.zeros((3,) * 4),
                       Signature.LORENTZIAN)
        with pytest.raises(ValueError):
            MetricJet2.constant(np.diag([-1.0, 1, 1]), Signature.RIEMANNIAN)

    def test_degenerate_embedding_rejected(self):
        from traplab.errors import ImmersionFailure
        from traplab.submanifold import EmbeddingJet2

        emb = EmbeddingJet2(
            sigma_dim=1,
            ambient_dim=3,
            chart=lambda u: np.zeros(3),
            d_chart=lambda u: np.zeros((3, 1)),
            dd_chart=lambda u: np.zeros((3, 1, 1)),
            sample_set=np.zeros((1, 1)),
        )
        with pytest.raises(ImmersionFailure):
            emb.at(np.array([0.0]))
