import numpy as np
import pytest

from levybarrier import (AuxProblem, LevySpec, RegimeModel, SwitchJump,
                         make_payoff)


@pytest.fixture
def brownian_spec():
    """Pure Brownian surplus with sigma = sqrt(2): W_1(x) = sinh(x)."""
    return LevySpec(drift_mu=0.0, sigma=np.sqrt(2.0), jump_rate=0.0,
                    jump_mix=())


@pytest.fixture
def cramer_lundberg_spec():
    """Drift -1, unit-rate Exp(1) upward jumps: the classical risk process."""
    return LevySpec(drift_mu=-1.0, sigma=0.0, jump_rate=1.0,
                    jump_mix=((1.0, 1.0),))


@pytest.fixture
def mixed_spec():
    """Brownian part plus a two-term hyperexponential jump mixture."""
    return LevySpec(drift_mu=-0.3, sigma=1.0, jump_rate=0.8,
                    jump_mix=((0.6, 1.5), (0.4, 3.0)))


@pytest.fixture
def three_specs(brownian_spec, cramer_lundberg_spec, mixed_spec):
    return [brownian_spec, cramer_lundberg_spec, mixed_spec]


@pytest.fixture
def linear_payoff():
    return make_payoff([[0.0, 0.0], [1.0, 1.0]], 1.0)


@pytest.fixture
def kinked_payoff():
    return make_payoff([[0.0, 0.0], [0.5, 0.6], [1.5, 1.6], [3.0, 2.6]], 0.5)


@pytest.fixture
def twelve_cases(three_specs, linear_payoff, kinked_payoff):
    """3 models x 2 payoffs x 2 phi values, with a mild payoff weight."""
    cases = []
    for spec in three_specs:
        for payoff in (linear_payoff, kinked_payoff):
            for phi in (1.5, 2.5):
                cases.append(AuxProblem(spec=spec, lam=0.3, delta=0.7,
                                        phi=phi, payoff=payoff))
    return cases


@pytest.fixture
def symmetric_two_state(brownian_spec):
    """Two identical states with zero switch jumps: must collapse to the
    single-regime problem."""
    return RegimeModel(states=("a", "b"),
                       switch_rates=np.array([[0.0, 1.0], [1.0, 0.0]]),
                       discounts=np.array([1.0, 1.0]),
                       levy=(brownian_spec, brownian_spec),
                       switch_jumps={}, phi=2.0)


@pytest.fixture
def two_state_model(brownian_spec):
    """Asymmetric two-state model with a downward switch jump."""
    stress = LevySpec(drift_mu=-0.5, sigma=0.4, jump_rate=1.0,
                      jump_mix=((1.0, 2.0),))
    return RegimeModel(
        states=("calm", "stress"),
        switch_rates=np.array([[0.0, 0.5], [1.0, 0.0]]),
        discounts=np.array([0.8, 1.2]),
        levy=(brownian_spec, stress),
        switch_jumps={(0, 1): SwitchJump("hyperexp", ((1.0, 3.0),))},
        phi=1.6)


@pytest.fixture
def three_state_model(brownian_spec, mixed_spec):
    stress = LevySpec(drift_mu=-0.5, sigma=0.4, jump_rate=1.0,
                      jump_mix=((1.0, 2.0),))
    return RegimeModel(
        states=("a", "b", "c"),
        switch_rates=np.array([[0.0, 0.4, 0.2],
                               [0.3, 0.0, 0.3],
                               [0.5, 0.1, 0.0]]),
        discounts=np.array([0.9, 1.1, 1.3]),
        levy=(brownian_spec, stress, mixed_spec),
        switch_jumps={(0, 1): SwitchJump("hyperexp", ((0.7, 2.0), (0.3, 5.0))),
                      (2, 0): SwitchJump("hyperexp", ((1.0, 4.0),))},
        phi=1.8)
