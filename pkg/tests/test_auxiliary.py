import numpy as np
import pytest

from levybarrier import (AuxProblem, ModelError, NumericsError, Z,
                         barrier_root, dominance_gap, hjb_residual,
                         make_payoff, value, value_derivative)
from levybarrier.auxiliary import ell, ell_deriv, payoff_W_integral, \
    payoff_Z_integral
from levybarrier.scale import W
from levybarrier.value_grid import value_on_grid


def test_classical_barrier_arccosh(brownian_spec, linear_payoff):
    # lam = 0, phi = 2 on the sinh model: barrier solves cosh(b) = 2
    prob = AuxProblem(spec=brownian_spec, lam=0.0, delta=1.0, phi=2.0,
                      payoff=linear_payoff)
    sol = barrier_root(prob)
    assert sol.barrier == pytest.approx(np.arccosh(2.0), abs=1e-6)


def test_classical_value_at_zero(brownian_spec, linear_payoff):
    # V(0) = -Zbar(b) - psi'(0)/q + Z(b)(Z(b)-phi)/(q W(b)) with
    # W = sinh, Z = cosh, Zbar = sinh, cosh(b) = 2: V(0) = -sqrt(3)
    prob = AuxProblem(spec=brownian_spec, lam=0.0, delta=1.0, phi=2.0,
                      payoff=linear_payoff)
    sol = barrier_root(prob)
    assert value(prob, sol.barrier, 0.0, sol.evaluator) == pytest.approx(
        -np.sqrt(3.0), abs=1e-10)


def test_lambda_zero_reduces_to_z_inverse(three_specs, linear_payoff):
    for spec in three_specs:
        for phi in (1.5, 2.0, 3.0):
            prob = AuxProblem(spec=spec, lam=0.0, delta=1.0, phi=phi,
                              payoff=linear_payoff)
            sol = barrier_root(prob)
            assert float(Z(sol.evaluator, sol.barrier)) == pytest.approx(
                phi, abs=1e-10)


def test_barrier_equation_root(twelve_cases):
    for prob in twelve_cases:
        sol = barrier_root(prob)
        ev = sol.evaluator
        assert abs(ell(ev, prob.payoff, prob.lam, prob.phi,
                       sol.barrier)) < 1e-10
        # sign change: negative below, positive above
        assert ell(ev, prob.payoff, prob.lam, prob.phi,
                   0.5 * sol.barrier) < 0
        assert ell(ev, prob.payoff, prob.lam, prob.phi,
                   1.5 * sol.barrier) > 0


def test_ell_deriv_matches_differences(mixed_spec, kinked_payoff):
    prob = AuxProblem(spec=mixed_spec, lam=0.4, delta=0.6, phi=1.8,
                      payoff=kinked_payoff)
    ev = prob.evaluator()
    h = 1e-7
    for x in (0.3, 0.8, 2.0):  # away from payoff knots
        num = (ell(ev, prob.payoff, prob.lam, prob.phi, x + h)
               - ell(ev, prob.payoff, prob.lam, prob.phi, x - h)) / (2 * h)
        assert ell_deriv(ev, prob.payoff, prob.lam, x) == pytest.approx(
            num, rel=1e-6)


def test_payoff_integrals_match_quadrature(mixed_spec, kinked_payoff):
    from scipy.integrate import quad
    from levybarrier.payoff import right_derivative
    ev = AuxProblem(spec=mixed_spec, lam=0.4, delta=0.6, phi=1.8,
                    payoff=kinked_payoff).evaluator()
    b = 2.2
    for x in (0.0, 0.4, 1.1):
        pts = [p for p in kinked_payoff.xs if 0 < p < b]
        num_w, _ = quad(lambda y: right_derivative(kinked_payoff, y)
                        * W(ev, y - x), 0.0, b, points=pts + [x], limit=300)
        assert payoff_W_integral(ev, kinked_payoff, x, b) == pytest.approx(
            num_w, rel=1e-9, abs=1e-12)
        num_z, _ = quad(lambda y: right_derivative(kinked_payoff, y)
                        * Z(ev, y - x), 0.0, b, points=pts + [x], limit=300)
        assert payoff_Z_integral(ev, kinked_payoff, x, b) == pytest.approx(
            num_z, rel=1e-9)


def test_smooth_fit_twelve_cases(twelve_cases):
    for prob in twelve_cases:
        sol = barrier_root(prob)
        b, ev = sol.barrier, sol.evaluator
        assert abs(value_derivative(prob, b, b, ev) - 1.0) <= 1e-8
        assert abs(value_derivative(prob, b, 0.0, ev) - prob.phi) <= 1e-8


def test_value_linear_branches(brownian_spec, linear_payoff):
    prob = AuxProblem(spec=brownian_spec, lam=0.0, delta=1.0, phi=2.0,
                      payoff=linear_payoff)
    sol = barrier_root(prob)
    b, ev = sol.barrier, sol.evaluator
    vb = value(prob, b, b, ev)
    assert value(prob, b, b + 0.7, ev) == pytest.approx(vb + 0.7, rel=1e-12)
    v0 = value(prob, b, 0.0, ev)
    assert value(prob, b, -0.3, ev) == pytest.approx(v0 - 2.0 * 0.3,
                                                     rel=1e-12)


def test_value_derivative_matches_differences(twelve_cases):
    for prob in twelve_cases[::3]:
        sol = barrier_root(prob)
        b, ev = sol.barrier, sol.evaluator
        h = 1e-6
        for x in np.linspace(0.1 * b, 0.9 * b, 5):
            num = (value(prob, b, x + h, ev)
                   - value(prob, b, x - h, ev)) / (2 * h)
            assert value_derivative(prob, b, float(x), ev) == pytest.approx(
                num, rel=2e-6, abs=1e-8)


def test_value_concave_with_slope_window(twelve_cases):
    for prob in twelve_cases[::2]:
        sol = barrier_root(prob)
        b, ev = sol.barrier, sol.evaluator
        xs = np.linspace(0.0, b, 120)
        d = np.array([value_derivative(prob, b, float(x), ev) for x in xs])
        assert np.all(np.diff(d) <= 1e-9)
        assert np.all(d >= 1.0 - 1e-9)
        assert np.all(d <= prob.phi + 1e-9)


def test_dominance_gap_nonnegative_nondecreasing(twelve_cases):
    for prob in twelve_cases:
        sol = barrier_root(prob)
        b = sol.barrier
        grid = np.linspace(0.0, 3.0 * b, 200)
        for factor in (0.25, 0.5, 2.0, 4.0):
            gap = dominance_gap(prob, factor * b, grid, sol.evaluator, sol)
            assert gap.min() >= -1e-9
            assert np.all(np.diff(gap) >= -1e-9)


def test_hjb_zero_inside_nonpositive_above(twelve_cases):
    for prob in twelve_cases:
        sol = barrier_root(prob)
        b, ev = sol.barrier, sol.evaluator
        for x in np.linspace(b / 50, b, 50):
            vx = value(prob, b, float(x), ev)
            assert abs(hjb_residual(prob, b, float(x), ev)) \
                <= 1e-6 * (1.0 + abs(vx))
        for x in np.linspace(1.02 * b, 2.5 * b, 50):
            assert hjb_residual(prob, b, float(x), ev) <= 1e-8


def test_hjb_nonzero_at_wrong_barrier(brownian_spec, linear_payoff):
    prob = AuxProblem(spec=brownian_spec, lam=0.0, delta=1.0, phi=2.0,
                      payoff=linear_payoff)
    sol = barrier_root(prob)
    wrong = 2.0 * sol.barrier
    # just above the suboptimal barrier the HJB inequality is violated
    assert hjb_residual(prob, wrong, 1.001 * wrong, sol.evaluator) < -1e-4 \
        or abs(hjb_residual(prob, wrong, 0.5 * wrong, sol.evaluator)) > 1e-4


def test_value_on_grid_matches_pointwise(twelve_cases):
    for prob in twelve_cases[::2]:
        sol = barrier_root(prob)
        b, ev = sol.barrier, sol.evaluator
        xs = np.linspace(0.0, 2.0 * b, 60)
        vals, derivs = value_on_grid(prob, b, xs, ev)
        ref_v = np.array([value(prob, b, float(x), ev) for x in xs])
        ref_d = np.array([value_derivative(prob, b, float(x), ev)
                          if x <= b else 1.0 for x in xs])
        assert vals == pytest.approx(ref_v, rel=1e-11, abs=1e-11)
        assert derivs == pytest.approx(ref_d, rel=1e-11, abs=1e-11)


def test_problem_validation(brownian_spec, linear_payoff):
    with pytest.raises(ModelError, match="phi"):
        AuxProblem(spec=brownian_spec, lam=0.0, delta=1.0, phi=0.9,
                   payoff=linear_payoff)
    with pytest.raises(ModelError, match="delta"):
        AuxProblem(spec=brownian_spec, lam=0.0, delta=0.0, phi=2.0,
                   payoff=linear_payoff)
    steep = make_payoff([[0.0, 0.0], [1.0, 5.0]], 1.0)
    with pytest.raises(ModelError, match="slope"):
        AuxProblem(spec=brownian_spec, lam=0.5, delta=1.0, phi=2.0,
                   payoff=steep)


def test_warm_start_agrees(mixed_spec, kinked_payoff):
    prob = AuxProblem(spec=mixed_spec, lam=0.4, delta=0.6, phi=1.8,
                      payoff=kinked_payoff)
    cold = barrier_root(prob)
    warm = barrier_root(prob, warm_start=cold.barrier * 1.05)
    assert warm.barrier == pytest.approx(cold.barrier, abs=1e-12)
