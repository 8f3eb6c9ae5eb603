import numpy as np
import pytest
from scipy.optimize import linprog

from trustshape.schemas.lp import LpSpec
from trustshape.schemas.shaping import LinearPotential
from trustshape.schemas.trust import TrustParams, TrustState
from trustshape.services.lp_service import (
    build_lp,
    sar_shaping_coefficient,
    solve_closed_form,
    verify_loss_constraint,
)
from trustshape.services.shaping_service import shaping_reward
from trustshape.services.trust_service import final_trust_line, one_step_transitions


def test_bound_for_default_search_and_rescue_budget():
    lp = build_lp(TrustParams(), 0.9, 10, 30.0)
    assert lp.bound == pytest.approx(8.60392, abs=1e-5)


def test_closed_form_saturates_loss_constraint():
    lp = build_lp(TrustParams(), 0.9, 10, 30.0)
    potential = solve_closed_form(lp)

    assert potential.a == pytest.approx(8.60392, abs=1e-5)
    assert potential.b == 0.0

    line = final_trust_line(TrustState(), TrustParams(), 10)
    report = verify_loss_constraint(potential, line, 0.9, 10, 30.0)
    assert report.satisfied
    assert report.lhs / report.rhs == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "w_s, w_f, gamma, horizon, epsilon",
    [
        (1.0, 1.0, 0.9, 10, 30.0),
        (1.0, 1.0, 0.9, 10, 300.0),
        (0.5, 2.0, 0.95, 5, 12.0),
        (3.0, 1.5, 1.0, 7, 1.0),
    ],
)
def test_closed_form_matches_linprog(w_s, w_f, gamma, horizon, epsilon):
    lp = LpSpec(w_s=w_s, w_f=w_f, gamma=gamma, horizon=horizon, epsilon=epsilon)
    potential = solve_closed_form(lp)

    result = linprog(
        c=[-w_s, w_f],
        A_ub=[[w_s, -w_f], [-w_s, w_f]],
        b_ub=[lp.bound, lp.bound],
        bounds=[(None, None), (0.0, 0.0)],
    )

    assert result.success
    assert potential.a == pytest.approx(result.x[0], rel=1e-9)
    assert lp.objective(potential.a, potential.b) == pytest.approx(-result.fun, rel=1e-9)


def test_closed_form_beats_every_feasible_grid_point():
    lp = build_lp(TrustParams(w_s=1.0, w_f=2.0), 0.8, 4, 5.0)
    potential = solve_closed_form(lp)
    best = lp.objective(potential.a, potential.b)

    grid = np.linspace(-20, 20, 81)
    for a in grid:
        for b in grid:
            if lp.is_feasible(a, b):
                assert lp.objective(a, b) <= best + 1e-9


def test_zero_budget_gives_zero_potential():
    potential = solve_closed_form(build_lp(TrustParams(), 0.9, 10, 0.0))
    assert potential.is_zero


def test_loss_constraint_flags_scaled_potential():
    lp = build_lp(TrustParams(), 0.9, 10, 30.0)
    line = final_trust_line(TrustState(alpha=6, beta=6), TrustParams(), 10)

    report = verify_loss_constraint(solve_closed_form(lp).scaled(1.5), line, 0.9, 10, 30.0)
    assert not report.satisfied


def test_loss_constraint_depends_only_on_the_potential_gap():
    line = final_trust_line(TrustState(alpha=3, beta=7), TrustParams(), 10)
    # Along the line Phi changes by N (a w_s - b w_f); a = b leaves it flat
    report = verify_loss_constraint(LinearPotential(a=50.0, b=50.0), line, 0.9, 10, 0.0)
    assert report.satisfied


def test_search_and_rescue_coefficient():
    assert sar_shaping_coefficient(0.9, 10, 30.0, 1.0) == pytest.approx(8.60392, abs=1e-5)


def test_search_and_rescue_coefficient_grows_with_budget():
    budgets = [0.0, 1.0, 30.0, 100.0, 300.0]
    coefficients = [sar_shaping_coefficient(0.9, 10, epsilon, 1.0) for epsilon in budgets]

    assert coefficients[0] == 0.0
    assert all(low < high for low, high in zip(coefficients, coefficients[1:]))


def test_search_and_rescue_coefficient_falls_with_horizon_only_below_turning_point():
    # gamma^-N / N is decreasing while N < 1 / ln(1 / gamma), about 9.49 at gamma = 0.9
    turning_point = 1.0 / np.log(1.0 / 0.9)
    short = [sar_shaping_coefficient(0.9, n, 30.0, 1.0) for n in range(1, 10)]
    long = [sar_shaping_coefficient(0.9, n, 30.0, 1.0) for n in range(10, 21)]

    assert 9 < turning_point < 10
    assert all(low > high for low, high in zip(short, short[1:]))
    assert all(low < high for low, high in zip(long, long[1:]))
    assert sar_shaping_coefficient(0.9, 20, 30.0, 1.0) == pytest.approx(12.3379, abs=1e-3)


def test_designed_reward_ignores_failure_count():
    gamma, horizon, epsilon = 0.9, 6, 30.0
    params = TrustParams(w_s=1.0, w_f=2.0)
    coefficient = sar_shaping_coefficient(gamma, horizon, epsilon, params.w_s)
    potential = solve_closed_form(build_lp(params, gamma, horizon, epsilon))

    for state, next_state in one_step_transitions(TrustState(alpha=2, beta=5), params, horizon):
        expected = coefficient * (gamma * next_state.alpha - state.alpha)
        assert shaping_reward(potential, gamma, state, next_state) == pytest.approx(expected, abs=1e-9)

        shifted = state.model_copy(update={"beta": state.beta + 7.0})
        shifted_next = next_state.model_copy(update={"beta": next_state.beta + 7.0})
        assert shaping_reward(potential, gamma, shifted, shifted_next) == pytest.approx(
            expected, abs=1e-9
        )


def test_closed_form_is_feasible_from_random_initial_states(rng):
    for _ in range(50):
        params = TrustParams(w_s=float(rng.uniform(0.1, 3.0)), w_f=float(rng.uniform(0.1, 3.0)))
        gamma = float(rng.uniform(0.5, 1.0))
        horizon = int(rng.integers(1, 15))
        epsilon = float(rng.uniform(0.0, 500.0))
        initial = TrustState(alpha=float(rng.uniform(1, 40)), beta=float(rng.uniform(1, 40)))

        potential = solve_closed_form(build_lp(params, gamma, horizon, epsilon))
        line = final_trust_line(initial, params, horizon)
        report = verify_loss_constraint(potential, line, gamma, horizon, epsilon)

        assert report.satisfied
        assert report.lhs == pytest.approx(report.rhs, rel=1e-9, abs=1e-9)
