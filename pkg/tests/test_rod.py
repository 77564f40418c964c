"""Torsion law, curvature profiles and closure of the static Kirchhoff equations."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conformon.exceptions import ConsistencyError, DegenerateMaterialError, DomainError
from conformon.rod import (
    CaseId,
    CircularRing,
    ConformonLattice,
    RodMaterial,
    SolutionCase,
    Solitary,
    check_sigma_inequality,
    curvature_eval,
    curvature_ode_residual,
    force_field,
    frame_curvatures,
    static_residuals,
    torsion_from_twist,
    twisting_rigidity,
    zero_twist_sigma,
)

CASE_I = SolutionCase(CaseId.I, 0)
CASE_II = SolutionCase(CaseId.II, 0)
ALL_CASES = [SolutionCase(c, j) for c in CaseId for j in (0, 1)]


def random_material(rng, max_tau=3.0):
    """Valid material whose Case I and II torsions both stay below ``max_tau``."""
    while True:
        mat = RodMaterial(rng.uniform(0.05, 1.0), rng.uniform(-0.95, 0.5), rng.uniform(-1.0, 1.0))
        try:
            taus = [torsion_from_twist(mat, c) for c in (CASE_I, CASE_II)]
        except DegenerateMaterialError:
            continue
        if max(abs(t) for t in taus) < max_tau:
            return mat


class TestMaterial:
    @pytest.mark.parametrize(
        "a, sigma, b",
        [(1.0, 0.0, 1.0), (1.0, 0.5, 2.0 / 3.0), (0.5, 0.25, 2 * 0.5 / (1.25 * 1.5))],
    )
    def test_twisting_rigidity(self, a, sigma, b):
        assert twisting_rigidity(RodMaterial(a, sigma)) == pytest.approx(b, rel=1e-15)

    def test_rigidity_diverges_at_sigma_minus_one(self):
        with pytest.raises(DomainError):
            twisting_rigidity(RodMaterial(0.5, -1.0))

    @pytest.mark.parametrize("a, sigma", [(0.0, 0.1), (1.2, 0.1), (0.5, 0.6), (0.5, -1.1)])
    def test_invalid(self, a, sigma):
        with pytest.raises(DomainError):
            RodMaterial(a, sigma)

    def test_case_angles(self):
        assert SolutionCase(CaseId.I, 1).phi == pytest.approx(math.pi)
        assert SolutionCase(CaseId.II, 0).phi == pytest.approx(math.pi / 2)
        assert SolutionCase("II", 1).case_id is CaseId.II
        with pytest.raises(DomainError):
            SolutionCase(CaseId.I, 2)


class TestTorsionLaw:
    def test_case_one_example(self):
        assert torsion_from_twist(RodMaterial(1.0, 0.5, 10.0), CASE_I) == pytest.approx(-5.0)

    def test_case_two_example(self):
        assert torsion_from_twist(RodMaterial(1.0, 0.0, 1.0), CASE_II) == pytest.approx(-1.0)

    def test_degenerate_case_one(self):
        with pytest.raises(DegenerateMaterialError):
            torsion_from_twist(RodMaterial(1.0, -0.5, 0.3), CASE_I)

    @pytest.mark.parametrize("a", [0.1, 0.4, 0.77, 1.0])
    def test_degenerate_exactly_at_zero_twist_sigma(self, a):
        for case in (CASE_I, CASE_II):
            sigma = zero_twist_sigma(a, case)
            with pytest.raises(DegenerateMaterialError):
                torsion_from_twist(RodMaterial(a, sigma, 0.0), case)

    @pytest.mark.parametrize("a", [0.1, 0.4, 0.77, 1.0])
    def test_zero_twist_sigma_from_rigidity(self, a):
        # Case I needs b = 2a, Case II needs b = 2
        s1 = zero_twist_sigma(a, CASE_I)
        s2 = zero_twist_sigma(a, CASE_II)
        assert twisting_rigidity(RodMaterial(a, s1)) == pytest.approx(2 * a, rel=1e-14)
        assert twisting_rigidity(RodMaterial(a, s2)) == pytest.approx(2.0, rel=1e-14)
        assert -0.5 <= s1 < 0
        assert -1 < s2 <= -0.5

    def test_zero_twist_sigma_circular(self):
        assert zero_twist_sigma(1.0, CASE_I) == -0.5
        assert zero_twist_sigma(1.0, CASE_II) == -0.5

    def test_zero_twist_sigma_thin_limit(self):
        assert -1e-9 < zero_twist_sigma(1e-9, CASE_I) < 0

    @pytest.mark.parametrize("case", [CASE_I, CASE_II])
    def test_relation_with_rigidity(self, case):
        # (b - 2a) tau0 = b k3_0 in Case I, (b - 2) tau0 = b k3_0 in Case II
        mat = RodMaterial(0.6, 0.2, 0.9)
        tau0 = torsion_from_twist(mat, case)
        target = 2 * mat.a if case.case_id is CaseId.I else 2.0
        assert (mat.b - target) * tau0 == pytest.approx(mat.b * mat.k3_0, rel=1e-14)

    def test_sign_opposition(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            mat = RodMaterial(rng.uniform(0.01, 1), rng.uniform(1e-6, 0.5), rng.uniform(-2, 2))
            for case in (CASE_I, CASE_II):
                assert np.sign(torsion_from_twist(mat, case)) == -np.sign(mat.k3_0)

    def test_sigma_inequality_example(self):
        mat = RodMaterial(0.5, 0.25, 0.7)
        tau0 = torsion_from_twist(mat, CASE_I)
        assert -mat.k3_0 / tau0 == pytest.approx(0.875)
        assert check_sigma_inequality(mat, tau0)

    def test_sigma_inequality_false(self):
        # -k3_0 / tau0 = 2.5 > 2 sigma + 1 = 2
        assert not check_sigma_inequality(RodMaterial(1.0, 0.5, 2.5), -1.0)

    def test_sigma_inequality_needs_torsion(self):
        with pytest.raises(DomainError):
            check_sigma_inequality(RodMaterial(1.0, 0.5, 2.5), 0.0)

    def test_case_two_reverses_upper_bound(self):
        # for a < 1, Case II gives -k3_0/tau0 = (1 + sigma (1 + a)) / a > 2 sigma + 1
        mat = RodMaterial(0.5, 0.25, 1.0)
        tau0 = torsion_from_twist(mat, CASE_II)
        assert -mat.k3_0 / tau0 == pytest.approx(2.75)
        assert not check_sigma_inequality(mat, tau0)

    @given(
        st.floats(min_value=1e-3, max_value=1.0),
        st.floats(min_value=-0.99, max_value=0.5),
        st.floats(min_value=0.01, max_value=5.0) | st.floats(min_value=-5.0, max_value=-0.01),
    )
    @settings(max_examples=300, deadline=None)
    def test_case_one_inequality_property(self, a, sigma, k30):
        mat = RodMaterial(a, sigma, k30)
        try:
            tau0 = torsion_from_twist(mat, CASE_I)
        except DegenerateMaterialError:
            return
        assert check_sigma_inequality(mat, tau0)


class TestProfiles:
    def test_lattice_solitary_limit(self):
        k, _, _ = curvature_eval(ConformonLattice(1.0, 1.25, 0.5), 0.0)
        assert k == pytest.approx(2.0)

    def test_lattice_constant_at_zero_modulus(self):
        s = np.linspace(-5, 5, 11)
        k, k_s, k_ss = curvature_eval(ConformonLattice(0.0, 1.25, 0.5), s)
        np.testing.assert_allclose(k, math.sqrt(2), rtol=1e-15)
        np.testing.assert_array_equal(k_s, 0)
        np.testing.assert_array_equal(k_ss, 0)

    def test_solitary_value(self):
        k, _, _ = curvature_eval(Solitary(1.25, 0.5), 3.0)
        # 2 sech(3) from 40-digit mpmath
        assert k == pytest.approx(0.1986558548388664156580, abs=1e-15)

    def test_ring(self):
        k, k_s, k_ss = curvature_eval(CircularRing(2.0), 1.3)
        assert (k, k_s, k_ss) == (2.0, 0.0, 0.0)
        assert curvature_ode_residual(CircularRing(2.0), 7.0) == 0.0

    def test_ring_requires_zero_torsion(self):
        with pytest.raises(DomainError):
            CircularRing(2.0, tau0=0.1)

    def test_requires_positive_excess(self):
        with pytest.raises(DomainError):
            ConformonLattice(0.5, 0.25, 0.5)
        with pytest.raises(DomainError):
            Solitary(0.1, 0.5)

    def test_travelling_wave_shift(self):
        p = ConformonLattice(0.7, 2.0, 0.3, v=1.5)
        s = np.linspace(-4, 4, 9)
        moving = curvature_eval(p, s, t=2.0)[0]
        still = curvature_eval(ConformonLattice(0.7, 2.0, 0.3), s - 3.0)[0]
        np.testing.assert_allclose(moving, still, rtol=1e-15)

    def test_near_one_matches_solitary(self):
        s = np.linspace(-5, 5, 201)
        lat = curvature_eval(ConformonLattice(1 - 1e-10, 1.25, 0.5), s)
        sol = curvature_eval(Solitary(1.25, 0.5), s)
        for a, b in zip(lat, sol):
            assert np.max(np.abs(a - b)) < 1e-6

    @pytest.mark.parametrize(
        "profile",
        [
            ConformonLattice(0.75, 1.25, 0.5),
            ConformonLattice(0.3, 3.0, -1.1),
            ConformonLattice(0.999, 0.7, 0.2),
            Solitary(1.25, 0.5),
            Solitary(4.0, 1.0),
        ],
        ids=repr,
    )
    def test_ode_residual_analytic(self, profile):
        period = profile.period if math.isfinite(profile.period) else 10.0
        s = np.linspace(-period, 2 * period, 3001)
        assert np.max(np.abs(curvature_ode_residual(profile, s))) < 1e-9

    def test_ode_residual_against_finite_differences(self):
        p = ConformonLattice(0.75, 1.25, 0.5)
        s = np.linspace(0, 4 * 1.910989780751829 / p.alpha, 801)
        _, _, k_ss = p.evaluate(s)

        def err(h):
            fd = (p.evaluate(s + h)[0] - 2 * p.evaluate(s)[0] + p.evaluate(s - h)[0]) / h**2
            return np.max(np.abs(fd - k_ss))

        assert err(1e-3) < 1e-6
        assert err(2e-2) / err(1e-2) == pytest.approx(4.0, rel=0.02)

    def test_analytic_first_derivative(self):
        p = Solitary(2.0, 0.7)
        s = np.linspace(-6, 6, 121)
        h = 1e-5
        fd = (p.evaluate(s + h)[0] - p.evaluate(s - h)[0]) / (2 * h)
        np.testing.assert_allclose(p.evaluate(s)[1], fd, atol=1e-8)


class TestForces:
    def make(self, case, kappa=0.6):
        mat = RodMaterial(0.6, 0.3, -0.8)
        tau0 = torsion_from_twist(mat, case)
        return mat, ConformonLattice(kappa, tau0**2 + 1.0, tau0)

    def test_g1_vanishes_at_extremum(self):
        mat, p = self.make(CASE_I)
        ff = force_field(mat, CASE_I, p, np.array([0.0, p.period / 2]))
        np.testing.assert_allclose(ff.g1, 0.0, atol=1e-15)

    @pytest.mark.parametrize("cid", list(CaseId))
    def test_parity_flip(self, cid):
        c0, c1 = SolutionCase(cid, 0), SolutionCase(cid, 1)
        mat, p = self.make(c0)
        s = np.linspace(0, 3, 7)
        f0, f1 = force_field(mat, c0, p, s), force_field(mat, c1, p, s)
        np.testing.assert_array_equal(f1.g1, -f0.g1)
        np.testing.assert_array_equal(f1.g2, -f0.g2)
        np.testing.assert_array_equal(f1.g3, f0.g3)

    def test_tension_component(self):
        mat, p = self.make(CASE_I)
        s = np.linspace(0, 3, 7)
        k = p.evaluate(s)[0]
        ff = force_field(mat, CASE_I, p, s)
        np.testing.assert_allclose(ff.g3, mat.a * p.C2 - 0.5 * mat.a * k**2)
        mat2, p2 = self.make(CASE_II)
        ff2 = force_field(mat2, CASE_II, p2, s)
        np.testing.assert_allclose(ff2.g3, p2.C2 - 0.5 * p2.evaluate(s)[0] ** 2)

    def test_torque_components(self):
        mat, p = self.make(CASE_I)
        s = np.linspace(0, 3, 7)
        ff = force_field(mat, CASE_I, p, s)
        k1, k2, k3 = frame_curvatures(CASE_I, p, s)
        np.testing.assert_array_equal(ff.m1, k1)
        np.testing.assert_allclose(ff.m2, mat.a * k2)
        np.testing.assert_allclose(ff.m3, mat.b * (p.tau0 - mat.k3_0))

    def test_inconsistent_torsion(self):
        mat, p = self.make(CASE_I)
        wrong = ConformonLattice(p.kappa, p.C2, p.tau0 * 1.1)
        with pytest.raises(ConsistencyError):
            force_field(mat, CASE_I, wrong, 0.0)

    def test_untwisted_degenerate_material_accepts_any_torsion(self):
        a = 0.7
        mat = RodMaterial(a, zero_twist_sigma(a, CASE_II), 0.0)
        p = ConformonLattice(0.5, 2.0, 0.37)
        res = static_residuals(mat, CASE_II, p, np.linspace(0, p.period, 101))
        assert np.max(np.abs(res)) < 1e-8
        force_field(mat, CASE_II, p, 0.0)

    @pytest.mark.parametrize("case", ALL_CASES, ids=lambda c: f"{c.case_id.value}-j{c.j}")
    def test_static_closure(self, case):
        rng = np.random.default_rng(11)
        for _ in range(5):
            mat = random_material(rng)
            tau0 = torsion_from_twist(mat, case)
            p = ConformonLattice(rng.uniform(0, 0.99), tau0**2 + rng.uniform(0.5, 2), tau0)
            s = np.linspace(0, 2 * p.period, 400)
            assert np.max(np.abs(static_residuals(mat, case, p, s))) < 1e-8

    def test_static_closure_solitary_and_ring(self):
        mat = RodMaterial(0.8, 0.1, 0.4)
        tau0 = torsion_from_twist(mat, CASE_I)
        s = np.linspace(-8, 8, 401)
        assert np.max(np.abs(static_residuals(mat, CASE_I, Solitary(tau0**2 + 1, tau0), s))) < 1e-8
        ring_mat = RodMaterial(0.8, 0.1, 0.0)
        assert np.max(np.abs(static_residuals(ring_mat, CASE_II, CircularRing(2.0), s))) < 1e-8

    def test_wrong_torsion_breaks_closure(self):
        mat, p = self.make(CASE_II)
        wrong = ConformonLattice(p.kappa, p.C2, p.tau0 * 1.1)
        s = np.linspace(0, p.period, 101)
        assert np.max(np.abs(static_residuals(mat, CASE_II, wrong, s))) > 1e-3
