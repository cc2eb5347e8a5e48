import numpy as np
import pytest

from levybarrier import (LevySpec, ModelError, laplace_exponent,
                         laplace_exponent_deriv, phi_inverse, require_valid,
                         validate)


def test_laplace_exponent_brownian(brownian_spec):
    # psi(theta) = theta^2 for sigma = sqrt(2)
    for theta in (0.0, 0.5, 1.0, 3.0):
        assert laplace_exponent(brownian_spec, theta) == pytest.approx(
            theta**2, abs=1e-14)


def test_laplace_exponent_cramer_lundberg(cramer_lundberg_spec):
    # psi(2) = 2 + (1/3 - 1) = 4/3 by hand
    assert laplace_exponent(cramer_lundberg_spec, 2.0) == pytest.approx(
        4.0 / 3.0, rel=1e-14)


def test_laplace_exponent_matches_mgf_derivative(mixed_spec):
    # psi'(theta) from the closed form vs central differences of psi
    for theta in (0.3, 1.0, 2.5):
        h = 1e-6
        num = (laplace_exponent(mixed_spec, theta + h)
               - laplace_exponent(mixed_spec, theta - h)) / (2 * h)
        assert laplace_exponent_deriv(mixed_spec, theta) == pytest.approx(
            num, rel=1e-7)


def test_psi_convex_and_increasing_eventually(three_specs):
    for spec in three_specs:
        thetas = np.linspace(0.0, 8.0, 200)
        vals = np.array([laplace_exponent(spec, t) for t in thetas])
        # convexity of psi on [0, inf)
        assert np.all(np.diff(vals, 2) >= -1e-9)


def test_phi_inverse_golden_ratio(cramer_lundberg_spec):
    # psi(s) = 1 at s = (1 + sqrt(5))/2 for the unit Cramer-Lundberg model
    assert phi_inverse(cramer_lundberg_spec, 1.0) == pytest.approx(
        (1.0 + np.sqrt(5.0)) / 2.0, rel=1e-12)


def test_phi_inverse_is_right_inverse(three_specs):
    for spec in three_specs:
        for q in (0.2, 1.0, 4.0):
            s = phi_inverse(spec, q)
            assert laplace_exponent(spec, s) == pytest.approx(q, rel=1e-10)


def test_negative_theta_rejected(brownian_spec):
    with pytest.raises(ValueError):
        laplace_exponent(brownian_spec, -0.5)


def test_validate_rejects_subordinator():
    spec = LevySpec(drift_mu=1.0, sigma=0.0, jump_rate=1.0,
                    jump_mix=((1.0, 1.0),))
    diag = validate(spec)
    assert diag is not None and "subordinator" in diag
    with pytest.raises(ModelError):
        require_valid(spec)


def test_validate_rejects_bad_weights():
    spec = LevySpec(drift_mu=-1.0, sigma=0.0, jump_rate=1.0,
                    jump_mix=((0.5, 1.0), (0.2, 2.0)))
    assert validate(spec) is not None


def test_validate_rejects_degenerate():
    spec = LevySpec(drift_mu=0.0, sigma=0.0, jump_rate=0.0, jump_mix=())
    assert validate(spec) is not None


def test_validate_accepts_fixture_models(three_specs):
    for spec in three_specs:
        assert validate(spec) is None


def test_mean_matches_psi_deriv_at_zero(three_specs):
    # E[X_1] = -psi'(0+) in this parameterization
    for spec in three_specs:
        assert spec.mean == pytest.approx(
            -laplace_exponent_deriv(spec, 0.0), rel=1e-12)
