"""Stability classification, Routh-Hurwitz tests, Lyapunov region, persistence."""

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from harvestdyn import (
    SysState,
    classify_origin,
    classify_E1,
    classify_E2,
    classify_E3,
    eigenvalues_3x3,
    lyapunov_region_check,
    persistence_check,
    routh_hurwitz_cubic,
    jacobian,
    MissingEquilibriumError,
)
from harvestdyn.equilibria import interior_equilibrium
from harvestdyn.stability import (
    classify_blowup_boundary,
    classify_partial_boundary,
    cubic_terms_from_jacobian,
    persistence_threshold_m,
)
from harvestdyn.bifurcation import cubic_terms_closed_form

from test_model import random_params


def cardano_roots(b, c, d):
    """Roots of x^3 + b x^2 + c x + d by the trigonometric/Cardano method.

    Deliberately independent of any matrix eigenvalue routine.
    """
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0.0:
        u = -q / 2.0 + math.sqrt(disc)
        v = -q / 2.0 - math.sqrt(disc)
        u = math.copysign(abs(u) ** (1 / 3), u)
        v = math.copysign(abs(v) ** (1 / 3), v)
        real = u + v + shift
        re = -(u + v) / 2.0 + shift
        im = (u - v) * math.sqrt(3.0) / 2.0
        return [complex(real), complex(re, im), complex(re, -im)]
    if p == 0.0:
        return [complex(shift)] * 3
    r = math.sqrt(-p**3 / 27.0)
    phi = math.acos(max(-1.0, min(1.0, -q / (2.0 * r))))
    mag = 2.0 * math.sqrt(-p / 3.0)
    return [complex(mag * math.cos((phi + 2.0 * math.pi * k) / 3.0) + shift) for k in range(3)]


def char_poly_coeffs(m):
    b = -float(np.trace(m))
    c = float(
        m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    )
    d = -float(np.linalg.det(m))
    return b, c, d


class TestEigenvalues3x3:
    def test_identity(self):
        assert eigenvalues_3x3(np.eye(3)) == (1.0, 1.0, 1.0)

    def test_blowup_origin_diagonal_fig1(self, fig1):
        eigs = eigenvalues_3x3(jacobian(fig1, (0.0, 0.0, 0.0), "blowup"))
        assert sorted(z.real for z in eigs) == pytest.approx([-0.82, -0.22, -0.18])
        assert all(z.imag == 0.0 for z in eigs)

    def test_against_cardano_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(300):
            m = rng.normal(size=(3, 3))
            m = (m + m.T) / 2.0  # symmetric: all-real spectrum
            got = sorted(eigenvalues_3x3(m), key=lambda z: z.real)
            want = sorted(cardano_roots(*char_poly_coeffs(m)), key=lambda z: z.real)
            for g, w in zip(got, want):
                assert abs(g - w) < 1e-8 * max(1.0, abs(w))

    def test_characteristic_residual(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            m = rng.normal(size=(3, 3))
            scale = max(1.0, float(np.abs(m).max())) ** 3
            for lam in eigenvalues_3x3(m):
                res = np.linalg.det(m - lam * np.eye(3))
                assert abs(res) < 1e-8 * scale

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            eigenvalues_3x3([[1.0, 2.0, 3.0], [4.0, float("nan"), 6.0], [7.0, 8.0, 9.0]])


class TestRouthHurwitz:
    def test_all_positive_product_positive(self):
        assert routh_hurwitz_cubic(3.0, 3.0, 1.0) == "stable"

    def test_product_negative(self):
        assert routh_hurwitz_cubic(1.0, 1.0, 2.0) == "unstable"

    def test_agrees_with_companion_eigenvalues(self):
        rng = np.random.default_rng(43)
        checked = 0
        while checked < 1000:
            s11, s12, s13 = rng.uniform(-3.0, 3.0, size=3)
            roots = np.roots([1.0, s11, s12, s13])
            margin = float(np.max(roots.real))
            if abs(margin) < 1e-7:
                continue  # marginal cases are tie-breaking noise
            checked += 1
            verdict = routh_hurwitz_cubic(s11, s12, s13)
            assert verdict == ("stable" if margin < 0.0 else "unstable")


class TestOriginClassification:
    def test_fig1_stable_via_ratio_origin(self, fig1):
        v = classify_origin(fig1)
        assert v.verdict == "stable"
        assert v.route == "E00"
        # the inequality chain 0.53 < 0.75 < 0.93
        assert fig1.rho * fig1.c - fig1.d == pytest.approx(0.53)
        assert fig1.max_harvest_rate == pytest.approx(0.75)
        assert fig1.A == pytest.approx(0.93)

    def test_fig7_stable_via_effort_branch(self, fig7):
        v = classify_origin(fig7)
        assert v.verdict == "stable"
        assert v.route == "E100"
        e_bar = 4.514705882352941
        sat = fig7.m * fig7.q / (fig7.m1 + fig7.m2 * e_bar)
        assert sat == pytest.approx(0.136, abs=5e-4)
        assert sat < fig7.A

    def test_fig2_unstable(self, fig2):
        v = classify_origin(fig2)
        assert v.verdict == "unstable"
        assert v.route is None
        assert all(not ok for _, ok in v.governing_conditions)


class TestPreyOnlyClassification:
    def test_fig2_stable_via_prey_state(self, fig2):
        v = classify_E1(fig2)
        assert v.verdict == "stable"
        assert v.route == "E01"
        assert fig2.e + fig2.rho * fig2.c - fig2.d == pytest.approx(1.13)
        assert fig2.max_harvest_rate == pytest.approx(1.2)

    def test_fig1_unstable(self, fig1):
        assert classify_E1(fig1).verdict == "unstable"

    def test_fig4_unstable(self, fig4):
        # the ratio state exists here but does not attract
        v = classify_E1(fig4)
        assert v.verdict == "unstable"
        assert dict(v.governing_conditions)["route_E001_attracting"] is False


class TestEffortFreeClassification:
    def test_fig8_stable_with_planar_terms(self, fig8):
        with pytest.warns(UserWarning, match="closed-form"):
            v = classify_E2(fig8)
        assert v.verdict == "stable"
        s1, s2 = v.rh_terms
        assert s1 == pytest.approx(0.1, abs=1e-12)
        assert s2 == pytest.approx(0.045, abs=1e-12)
        assert all(z.real < 0 for z in v.eigenvalues)
        conds = dict(v.governing_conditions)
        assert conds["effort_entry_unprofitable"]
        # the printed closed-form trace inequality disagrees with the
        # direct sign test at these values; the direct test rules
        assert not conds["closed_form_agrees_with_direct"]

    def test_fig1_raises_when_absent(self, fig1):
        with pytest.raises(MissingEquilibriumError):
            classify_E2(fig1)

    def test_fig4_raises_when_absent(self, fig4):
        # interior existence forces effort entry to be profitable, which
        # is exactly the first instability route of the effort-free state;
        # at these values the state itself is not even admissible
        assert interior_equilibrium(fig4).exists
        lam1 = fig4.rho * (fig4.p * fig4.q * fig4.m / fig4.m2 - fig4.c)
        assert lam1 > 0.0
        with pytest.raises(MissingEquilibriumError):
            classify_E2(fig4)


class TestInteriorClassification:
    def test_fig4_stable(self, fig4):
        v = classify_E3(fig4)
        assert v.verdict == "stable"
        assert all(z.real < 0 for z in v.eigenvalues)
        assert dict(v.governing_conditions)["routh_hurwitz_stable"]

    def test_fig5_near_hopf(self, fig5):
        v = classify_E3(fig5)
        assert v.verdict in ("unstable", "marginal")
        pair = [z for z in v.eigenvalues if z.imag != 0.0]
        assert len(pair) == 2
        assert all(abs(z.real) < 5e-2 for z in pair)

    def test_raises_when_absent(self, fig8):
        with pytest.raises(MissingEquilibriumError):
            classify_E3(fig8)

    def test_matrix_terms_match_closed_form(self, fig4):
        rng = np.random.default_rng(44)
        cases = [fig4, fig4.replace(m=0.4), fig4.replace(m=0.6)]
        while len(cases) < 20:
            params = random_params(rng)
            if interior_equilibrium(params).exists:
                cases.append(params)
        for params in cases:
            e3 = interior_equilibrium(params)
            from_matrix = cubic_terms_from_jacobian(jacobian(params, e3.coords, "original"))
            closed = cubic_terms_closed_form(params)
            for a, b in zip(from_matrix, closed):
                assert abs(a - b) <= 1e-8 * max(1.0, abs(b))

    def test_hurwitz_verdict_matches_eigenvalues(self):
        rng = np.random.default_rng(45)
        checked = 0
        while checked < 300:
            params = random_params(rng)
            try:
                v = classify_E3(params)
            except MissingEquilibriumError:
                continue
            if v.verdict == "marginal":
                continue
            checked += 1
            rh = routh_hurwitz_cubic(*v.rh_terms)
            assert (rh == "stable") == (v.verdict == "stable")


class TestExclusiveStability:
    def test_at_most_one_ratio_state_attracts(self):
        rng = np.random.default_rng(46)
        for _ in range(2000):
            params = random_params(rng)
            stable = [k for k, v in classify_blowup_boundary(params).items() if v.stable]
            assert len(stable) <= 1, (params, stable)

    def test_at_most_one_prey_state_attracts(self):
        rng = np.random.default_rng(47)
        for _ in range(2000):
            params = random_params(rng)
            stable = [k for k, v in classify_partial_boundary(params).items() if v.stable]
            assert len(stable) <= 1, (params, stable)


class TestLyapunovRegion:
    def test_zero_derivative_at_equilibrium(self, fig4):
        check = lyapunov_region_check(fig4, SysState(0.44, 0.385, 0.1925))
        assert abs(check.dV_dt) < 1e-12

    def test_conditional_negativity_at_sample_point(self, fig4):
        check = lyapunov_region_check(fig4, SysState(0.5, 0.4, 0.2))
        assert check.population_floor_ok
        if check.in_region:
            assert check.dV_dt < 0.0

    def test_population_floor_violation_excludes(self, fig4):
        # total population pushed below a*y{*}/(x{*}+y{*}) = 0.56
        check = lyapunov_region_check(fig4, SysState(0.05, 0.05, 0.5))
        assert not check.population_floor_ok
        assert not check.in_region

    def test_region_membership_forces_descent(self, fig4):
        rng = np.random.default_rng(48)
        inside = 0
        for _ in range(5000):
            s = SysState(*rng.uniform(0.01, 1.5, size=3))
            check = lyapunov_region_check(fig4, s)
            if check.in_region:
                inside += 1
                assert check.dV_dt <= 1e-14
        assert inside >= 1000

    def test_requires_interior_equilibrium(self, fig1):
        with pytest.raises(MissingEquilibriumError):
            lyapunov_region_check(fig1, SysState(0.5, 0.5, 0.5))

    def test_requires_positive_state(self, fig4):
        with pytest.raises(ValueError, match="strictly positive"):
            lyapunov_region_check(fig4, SysState(0.5, 0.0, 0.5))


class TestPersistence:
    def test_threshold_is_exactly_one_third(self, fig3):
        threshold = persistence_threshold_m(fig3)
        assert threshold == Fraction(1, 3)

    def test_flips_exactly_at_threshold(self, fig3):
        eps = 1e-12
        below = persistence_check(fig3.replace(m=1.0 / 3.0 - eps))
        above = persistence_check(fig3.replace(m=1.0 / 3.0 + eps))
        assert not below.persistent
        assert above.persistent

    def test_equal_rates_not_persistent(self, fig3):
        rep = persistence_check(fig3.replace(e=0.07))
        assert not rep.conversion_exceeds_death
        assert not rep.persistent

    def test_fig4_bounds(self, fig4):
        rep = persistence_check(fig4)
        assert rep.persistent
        assert rep.y_bar == pytest.approx(0.6 / 0.07 - 1.0)
        assert rep.y_bar == pytest.approx(7.571, abs=5e-4)
