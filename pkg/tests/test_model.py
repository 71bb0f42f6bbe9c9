"""Vector fields, Jacobians and the structural invariants they must satisfy."""

import math

import numpy as np
import pytest

from harvestdyn import (
    ModelParams,
    SysState,
    BlowupState,
    PartialBlowupState,
    SingularInputError,
    vector_field,
    blowup_field,
    partial_blowup_field,
    jacobian,
    near_singular,
)
from harvestdyn.model import dissipation_bound, dissipation_weight


def fd_jacobian(params, s, system, h=1e-6):
    """Central-difference Jacobian; the independent oracle for the analytic one."""
    field = {
        "original": lambda v: vector_field(params, SysState(*v)),
        "blowup": lambda v: blowup_field(params, BlowupState(*v)),
        "partial": lambda v: partial_blowup_field(params, PartialBlowupState(*v)),
    }[system]
    j = np.zeros((3, 3))
    for k in range(3):
        step = h * max(1.0, abs(s[k]))
        sp, sm = list(s), list(s)
        sp[k] += step
        sm[k] -= step
        j[:, k] = (np.array(field(sp)) - np.array(field(sm))) / (2.0 * step)
    return j


def random_params(rng):
    return ModelParams(
        a=rng.uniform(0.2, 2.5),
        e=rng.uniform(0.1, 1.5),
        d=rng.uniform(0.02, 0.8),
        q=rng.uniform(0.1, 1.5),
        m=rng.uniform(0.05, 1.0),
        m1=rng.uniform(0.1, 1.0),
        m2=rng.uniform(0.1, 1.0),
        p=rng.uniform(0.5, 8.0),
        c=rng.uniform(0.2, 6.0),
        rho=rng.uniform(0.3, 2.0),
    )


class TestModelParams:
    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError, match="a must be"):
            ModelParams(a=0.0, e=0.6, d=0.07, q=0.6, m=0.5, m1=0.4, m2=0.4, p=6.0, c=3.0, rho=1.0)

    def test_rejects_bad_fraction(self):
        with pytest.raises(ValueError, match="m must lie"):
            ModelParams(a=1.0, e=0.6, d=0.07, q=0.6, m=1.5, m1=0.4, m2=0.4, p=6.0, c=3.0, rho=1.0)

    def test_rejects_negative_discount(self):
        with pytest.raises(ValueError, match="delta"):
            ModelParams(a=1.0, e=0.6, d=0.07, q=0.6, m=0.5, m1=0.4, m2=0.4, p=6.0, c=3.0,
                        rho=1.0, delta=-0.1)

    def test_derived_constants_track_fields(self, fig1):
        assert fig1.A == pytest.approx(0.93)
        assert fig1.B == pytest.approx(-0.47)
        bumped = fig1.replace(a=2.5)
        assert bumped.A == pytest.approx(1.43)
        assert fig1.A == pytest.approx(0.93)  # original untouched


class TestVectorField:
    def test_vanishes_at_interior_equilibrium(self, fig4):
        f = vector_field(fig4, SysState(0.44, 0.385, 0.1925))
        assert max(abs(v) for v in f) < 1e-12

    def test_prey_only_state_is_stationary(self, fig4):
        assert vector_field(fig4, SysState(1.0, 0.0, 0.0)) == (0.0, 0.0, 0.0)

    def test_prey_axis_follows_logistic_growth(self, fig4):
        f = vector_field(fig4, SysState(0.25, 0.0, 0.0))
        assert f == (pytest.approx(0.25 * 0.75), 0.0, 0.0)

    def test_matches_flow_map_derivative(self, fig1):
        # central difference of the flow map: one tiny fourth-order step
        # forward and backward from the state
        s = SysState(0.5, 0.5, 0.5)
        h = 1e-4

        def rk4(sign):
            y = np.array(s)
            k1 = np.array(vector_field(fig1, SysState(*y)))
            k2 = np.array(vector_field(fig1, SysState(*(y + sign * h / 2 * k1))))
            k3 = np.array(vector_field(fig1, SysState(*(y + sign * h / 2 * k2))))
            k4 = np.array(vector_field(fig1, SysState(*(y + sign * h * k3))))
            return y + sign * h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

        fd = (rk4(+1) - rk4(-1)) / (2 * h)
        f = np.array(vector_field(fig1, s))
        assert np.max(np.abs(fd - f) / np.maximum(np.abs(f), 1e-12)) < 1e-6

    def test_singular_at_origin(self, fig4):
        with pytest.raises(SingularInputError):
            vector_field(fig4, SysState(0.0, 0.0, 0.5))

    def test_guard_predicate(self, fig4):
        assert near_singular(fig4, SysState(1e-13, 1e-13, 0.5))
        assert near_singular(fig4, SysState(0.5, 1e-14, 1e-14))
        assert not near_singular(fig4, SysState(0.5, 0.0, 0.0))  # exact axis is regular
        assert not near_singular(fig4, SysState(0.5, 0.4, 0.2))


class TestBlowupField:
    def test_origin_always_stationary(self, fig4):
        assert blowup_field(fig4, BlowupState(0.0, 0.0, 0.0)) == (0.0, 0.0, 0.0)

    def test_effort_branch_state_is_stationary(self, fig7):
        theta = fig7.rho * fig7.c - fig7.d
        e_bar = (fig7.m1 * theta - fig7.m * fig7.q) / (
            fig7.rho * fig7.p * fig7.m * fig7.q - fig7.m2 * theta
        )
        assert e_bar == pytest.approx(4.514705882352941, abs=1e-12)
        f = blowup_field(fig7, BlowupState(0.0, 0.0, e_bar))
        assert max(abs(v) for v in f) < 1e-10

    def test_matches_chain_rule_of_original_flow(self, fig4):
        rng = np.random.default_rng(11)
        for _ in range(200):
            params = random_params(rng)
            x, y, E = rng.uniform(0.05, 2.0, size=3)
            fx, fy, fE = vector_field(params, SysState(x, y, E))
            pushforward = (
                (fx * y - x * fy) / y**2,   # d(x/y)/dt
                fy,
                (fy * E - y * fE) / E**2,   # d(y/E)/dt
            )
            got = blowup_field(params, BlowupState(x / y, y, y / E))
            for a, b in zip(pushforward, got):
                assert abs(a - b) <= 1e-8 * max(1.0, abs(a))


class TestPartialBlowupField:
    def test_prey_only_state_is_stationary(self, fig2):
        assert partial_blowup_field(fig2, PartialBlowupState(1.0, 0.0, 0.0)) == (0.0, 0.0, 0.0)

    def test_effort_ratio_state_is_stationary(self, fig4):
        # the growth margin lies between the harvest and effort ceilings here
        k = fig4.e + fig4.rho * fig4.c - fig4.d
        w_star = (fig4.m1 * k - fig4.m * fig4.q) / (
            fig4.rho * fig4.p * fig4.m * fig4.q - fig4.m2 * k
        )
        assert w_star > 0
        f = partial_blowup_field(fig4, PartialBlowupState(1.0, 0.0, w_star))
        assert max(abs(v) for v in f) < 1e-10

    def test_matches_chain_rule_of_original_flow(self, fig4):
        rng = np.random.default_rng(12)
        for _ in range(200):
            params = random_params(rng)
            x, y, E = rng.uniform(0.05, 2.0, size=3)
            fx, fy, fE = vector_field(params, SysState(x, y, E))
            pushforward = (fx, fy, (fy * E - y * fE) / E**2)
            got = partial_blowup_field(params, PartialBlowupState(x, y, y / E))
            for a, b in zip(pushforward, got):
                assert abs(a - b) <= 1e-8 * max(1.0, abs(a))

    def test_singular_when_populations_vanish(self, fig4):
        with pytest.raises(SingularInputError):
            partial_blowup_field(fig4, PartialBlowupState(0.0, 0.0, 0.5))


class TestJacobian:
    def test_blowup_origin_is_diagonal(self, fig1):
        j = jacobian(fig1, (0.0, 0.0, 0.0), "blowup")
        h = fig1.m * fig1.q / fig1.m1
        expected = np.diag([
            -fig1.A + h,
            -fig1.d - h,
            fig1.rho * fig1.c - fig1.d - h,
        ])
        assert np.allclose(j, expected, atol=1e-14)

    def test_partial_prey_state_is_upper_triangular(self, fig2):
        j = jacobian(fig2, (1.0, 0.0, 0.0), "partial")
        h = fig2.m * fig2.q / fig2.m1
        assert np.allclose(np.tril(j, -1), 0.0, atol=1e-14)
        assert np.allclose(
            np.diag(j),
            [-1.0, fig2.e - fig2.d - h, fig2.e + fig2.rho * fig2.c - fig2.d - h],
            atol=1e-14,
        )

    @pytest.mark.parametrize("system", ["original", "blowup", "partial"])
    def test_matches_central_differences(self, system):
        rng = np.random.default_rng(hash(system) % 2**32)
        for _ in range(150):
            params = random_params(rng)
            s = rng.uniform(0.05, 2.0, size=3)
            analytic = jacobian(params, s, system)
            numeric = fd_jacobian(params, s, system)
            scale = np.maximum(np.abs(analytic), 1.0)
            assert np.max(np.abs(analytic - numeric) / scale) < 1e-6

    def test_unknown_system_rejected(self, fig4):
        with pytest.raises(ValueError, match="unknown system"):
            jacobian(fig4, (0.5, 0.5, 0.5), "cartesian")

    def test_singular_input_propagates(self, fig4):
        with pytest.raises(SingularInputError):
            jacobian(fig4, (0.0, 0.0, 0.5), "original")


class TestStructuralInvariants:
    def test_positive_invariance_of_faces(self):
        # each rate is nonnegative on its own zero face
        rng = np.random.default_rng(21)
        for _ in range(300):
            params = random_params(rng)
            y, E = rng.uniform(0.01, 2.0, size=2)
            fx, _, _ = vector_field(params, SysState(0.0, y, E))
            assert fx >= 0.0
            x, E = rng.uniform(0.01, 2.0, size=2)
            _, fy, _ = vector_field(params, SysState(x, 0.0, E))
            assert fy >= 0.0
            x, y = rng.uniform(0.01, 2.0, size=2)
            _, _, fE = vector_field(params, SysState(x, y, 0.0))
            assert fE >= 0.0

    def test_dissipation_inequality_pointwise(self):
        # dW/dt + mu*W <= (1+mu)^2/4 for mu below both decay rates
        rng = np.random.default_rng(22)
        for _ in range(300):
            params = random_params(rng)
            mu, M = dissipation_bound(params)
            s = SysState(*rng.uniform(0.001, 3.0, size=3))
            fx, fy, fE = vector_field(params, s)
            dw = fx + params.a * fy / params.e + params.a * fE / (params.rho * params.e * params.p)
            w = dissipation_weight(params, s)
            assert dw + mu * w <= M + 1e-12

    def test_dissipation_bound_validates_mu(self, fig4):
        with pytest.raises(ValueError):
            dissipation_bound(fig4, mu=10.0)
