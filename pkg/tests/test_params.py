"""Parameter construction from physical constants and regime validation."""

import dataclasses

import numpy as np
import numpy.testing as npt
import pytest

from abcdsim import AbcdParams, params_from_physical, validate_generic_hamiltonian


def _raw_quadruple(theta2, lambda_p, mu_p):
    a = 0.5 * (theta2 - 1.0 / 3.0) * lambda_p
    b = 0.5 * (theta2 - 1.0 / 3.0) * (1.0 - lambda_p)
    c = 0.5 * (1.0 - theta2) * mu_p
    d = 0.5 * (1.0 - theta2) * (1.0 - mu_p)
    return a, b, c, d


class TestPhysicalConstruction:
    def test_reference_tuple(self):
        # theta^2 = 0.6, lambda = -2, mu = -1 gives b_raw = d_raw = 0.4
        theta = np.sqrt(0.6)
        p = params_from_physical(theta, -2.0, -1.0, 0.4)
        npt.assert_allclose(p.a, -2.0 / 3.0, rtol=1e-13)
        npt.assert_allclose(p.c, -0.5, rtol=1e-13)
        a1_raw = 0.5 * (3.0 * (0.6 - 1.0 / 3.0) + 1.0 - 2.0 * theta)
        npt.assert_allclose(p.a1, a1_raw / 0.4, rtol=1e-13)
        npt.assert_allclose(p.c1, (1.0 - theta) / 0.4, rtol=1e-13)
        assert p.origin == "physical"
        npt.assert_allclose(p.b, 0.4, rtol=1e-13)

    @pytest.mark.parametrize(
        "theta2, lambda_p, mu_p",
        [(0.6, -2.0, -1.0), (0.8, -2.0, -6.0), (0.5, -5.0, -1.0)],
    )
    def test_sum_rule_and_normalization(self, theta2, lambda_p, mu_p):
        a, b, c, d = _raw_quadruple(theta2, lambda_p, mu_p)
        npt.assert_allclose(a + b + c + d, 1.0 / 3.0, atol=1e-13)
        npt.assert_allclose(b, d, atol=1e-13)
        p = params_from_physical(np.sqrt(theta2), lambda_p, mu_p, b)
        npt.assert_allclose(p.a, a / b, rtol=1e-12)
        npt.assert_allclose(p.c, c / b, rtol=1e-12)
        # normalized set always satisfies the sign regime
        assert validate_generic_hamiltonian(p).ok

    def test_normalized_shifts_match_the_raw_quadruple(self):
        # a + 1 = (theta^2 - 1/3)/(2 b_raw) and c + 1 = (1 - theta^2)/(2 b_raw)
        theta2 = 0.6
        a, b, c, d = _raw_quadruple(theta2, -2.0, -1.0)
        p = params_from_physical(np.sqrt(theta2), -2.0, -1.0, b)
        npt.assert_allclose(p.a + 1.0, (theta2 - 1.0 / 3.0) / (2.0 * b), rtol=1e-12)
        npt.assert_allclose(p.c + 1.0, (1.0 - theta2) / (2.0 * b), rtol=1e-12)

    def test_degenerate_long_wave_limit_is_rejected(self):
        # theta = 0, lambda = 1 collapses b_raw to zero
        with pytest.raises(ValueError, match="b_raw"):
            params_from_physical(0.0, 1.0, -1.0, 1.0)

    def test_wrong_sign_raw_constants_are_rejected(self):
        # theta^2 = 1/2, lambda = mu = 2 flips the signs of a_raw and b_raw
        with pytest.raises(ValueError, match="a_raw|b_raw"):
            params_from_physical(np.sqrt(0.5), 2.0, 2.0, 1.0)

    def test_unequal_b_and_d_are_rejected(self):
        # theta^2 = 0.4, lambda = -3, mu = -1: b_raw = 2/15 but d_raw = 0.6
        a, b, c, d = _raw_quadruple(0.4, -3.0, -1.0)
        assert abs(b - d) > 0.1
        with pytest.raises(ValueError, match="b = d"):
            params_from_physical(np.sqrt(0.4), -3.0, -1.0, b)

    def test_supplied_b_must_match_computed_b(self):
        with pytest.raises(ValueError, match="does not match"):
            params_from_physical(np.sqrt(0.6), -2.0, -1.0, 0.5)

    @pytest.mark.parametrize("theta", [-0.1, 1.1])
    def test_theta_out_of_range(self, theta):
        with pytest.raises(ValueError, match="theta"):
            params_from_physical(theta, -2.0, -1.0, 0.4)

    def test_nonpositive_b_rejected(self):
        with pytest.raises(ValueError, match="b must be positive"):
            params_from_physical(np.sqrt(0.6), -2.0, -1.0, 0.0)


class TestValidator:
    def test_strong_dispersion_corner_passes(self):
        rep = validate_generic_hamiltonian(AbcdParams(a=-1.0, c=-1.0))
        assert rep.ok
        assert rep.violations == ()

    def test_interior_point_passes(self):
        assert validate_generic_hamiltonian(AbcdParams(a=-0.5, c=-0.2)).ok

    def test_positive_a_fails(self):
        rep = validate_generic_hamiltonian(AbcdParams(a=0.1, c=-1.0))
        assert not rep.ok
        assert "a < 0" in rep.violations

    def test_c_below_minus_one_fails(self):
        rep = validate_generic_hamiltonian(AbcdParams(a=-1.0, c=-1.5))
        assert not rep.ok
        assert "c > -1" in rep.violations

    def test_positive_c_fails(self):
        rep = validate_generic_hamiltonian(AbcdParams(a=-1.0, c=0.3))
        assert not rep.ok
        assert "c < 0" in rep.violations


class TestValueSemantics:
    def test_params_are_immutable(self):
        p = AbcdParams(a=-1.0, c=-1.0)
        with pytest.raises(dataclasses.FrozenInstanceError):
            p.a = -0.5

    def test_direct_construction_defaults(self):
        p = AbcdParams(a=-1.0, c=-0.5)
        assert p.origin == "direct"
        assert p.a1 == 0.0 and p.c1 == 0.0 and p.b == 1.0
