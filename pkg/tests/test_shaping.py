import numpy as np
import pytest

from conftest import make_tabular_game
from trustshape.core.errors import ConfigInvalidError
from trustshape.models.game import PolicyRule
from trustshape.schemas.shaping import LinearPotential
from trustshape.schemas.trust import TrustParams, TrustState
from trustshape.services.game_service import evaluate_policy, solve_optimal
from trustshape.services.lp_service import build_lp, solve_closed_form
from trustshape.services.shaping_service import (
    calibration_check,
    compare_shaped,
    corollary1_bound_check,
    expected_final_potential,
    shape_game,
    shaping_reward,
    telescoping_check,
    theorem1_bound_check,
    trust_seeking_check,
)
from trustshape.services.trust_service import one_step_transitions, reachable_lattice

START = TrustState(alpha=1, beta=1)
UP = TrustState(alpha=2, beta=1)
DOWN = TrustState(alpha=1, beta=2)


@pytest.fixture
def designed():
    return solve_closed_form(build_lp(TrustParams(), 0.9, 10, 30.0))


def test_shaping_reward_of_designed_potential(designed):
    assert designed.a == pytest.approx(8.60392, abs=1e-5)
    assert shaping_reward(designed, 0.9, START, UP) == pytest.approx(6.88313, abs=1e-5)
    assert shaping_reward(designed, 0.9, START, DOWN) == pytest.approx(-0.86039, abs=1e-5)


def test_zero_potential_leaves_game_unchanged(tabular_game):
    shaped = shape_game(tabular_game, LinearPotential())

    original, _ = solve_optimal(tabular_game)
    values, _ = solve_optimal(shaped)

    for ours, theirs in zip(values.values, original.values):
        assert np.array_equal(ours, theirs)


def test_telescoping_identity_on_random_triples():
    rng = np.random.default_rng(11)

    for trial in range(120):
        spec = make_tabular_game(
            rng,
            horizon=int(rng.integers(1, 11)),
            nodes=int(rng.integers(1, 4)),
            gamma=float(rng.uniform(0.3, 1.0)),
            initial=TrustState(alpha=float(rng.uniform(1, 5)), beta=float(rng.uniform(1, 5))),
            params=TrustParams(w_s=float(rng.uniform(0.2, 2)), w_f=float(rng.uniform(0.2, 2))),
        )
        potential = LinearPotential(a=float(rng.normal()), b=float(rng.normal()))
        policy = PolicyRule.random(spec, rng)

        report = telescoping_check(spec, potential, policy)
        assert report.satisfied, (trial, report)


def test_shaped_value_differs_by_terminal_potential(tabular_game, rng):
    potential = LinearPotential(a=0.7, b=-0.2)
    policy = PolicyRule.random(tabular_game, rng)

    shaped = evaluate_policy(shape_game(tabular_game, potential), policy).initial_value
    original = evaluate_policy(tabular_game, policy).initial_value
    terminal = expected_final_potential(tabular_game, potential, policy)

    gamma_n = tabular_game.gamma**tabular_game.horizon
    assert shaped - original == pytest.approx(gamma_n * terminal - potential.of(START))


def test_loss_never_exceeds_discounted_potential_gap():
    rng = np.random.default_rng(5)

    for _ in range(40):
        spec = make_tabular_game(rng, horizon=int(rng.integers(1, 7)), nodes=2)
        potential = LinearPotential(a=float(rng.normal(scale=3)), b=float(rng.normal(scale=3)))
        comparison = compare_shaped(spec, potential)

        gap = expected_final_potential(
            spec, potential, comparison.shaped_policy
        ) - expected_final_potential(spec, potential, comparison.optimal_policy)

        assert comparison.loss >= -1e-12
        assert comparison.loss <= spec.gamma**spec.horizon * gap + 1e-9


def test_theorem1_conclusion_follows_hypothesis():
    rng = np.random.default_rng(9)

    for _ in range(40):
        spec = make_tabular_game(rng, horizon=3, nodes=2)
        potential = LinearPotential(a=float(rng.normal()), b=float(rng.normal()))
        epsilon = float(rng.uniform(0, 2))

        report = theorem1_bound_check(spec, potential, epsilon)
        if report.hypothesis.satisfied:
            assert report.conclusion.satisfied
        assert report.loss == pytest.approx(report.v_opt - report.v_original)


def test_theorem1_rejects_negative_budget(tabular_game):
    with pytest.raises(ConfigInvalidError):
        theorem1_bound_check(tabular_game, LinearPotential(a=1.0), -1.0)


@pytest.mark.parametrize("epsilon", [-0.5, float("nan"), float("inf")])
def test_corollary1_rejects_invalid_budget(designed, epsilon):
    final = reachable_lattice(START, TrustParams(), 11)
    with pytest.raises(ConfigInvalidError):
        corollary1_bound_check(designed, final, final, 0.9, 10, epsilon)


def test_corollary1_is_tight_for_designed_potential(designed):
    final = reachable_lattice(START, TrustParams(), 11)
    report = corollary1_bound_check(designed, final, final, 0.9, 10, 30.0)

    assert report.satisfied
    assert report.lhs == pytest.approx(report.rhs, rel=1e-12)


def test_corollary1_flags_oversized_potential(designed):
    final = reachable_lattice(START, TrustParams(), 11)
    report = corollary1_bound_check(designed.scaled(2.0), final, final, 0.9, 10, 30.0)

    assert not report.satisfied
    assert report.slack < 0


def test_trust_seeking_on_one_step_pairs(designed):
    report = trust_seeking_check(designed, 0.9, [(START, UP), (START, DOWN)])

    assert report.satisfied
    assert report.checked == 2


def test_trust_seeking_reports_violations_for_large_alpha(designed):
    # Once alpha > gamma w_s / (1 - gamma) a failure-free step no longer pays
    transitions = one_step_transitions(TrustState(alpha=10, beta=1), TrustParams(), 2)
    report = trust_seeking_check(designed, 0.9, transitions)

    assert not report.satisfied
    assert {violation.required for violation in report.violations} == {"nonnegative"}


def test_calibration_at_full_trust_matches_trust_seeking(designed):
    pairs = [(START, UP), (START, DOWN)]

    assert calibration_check(designed, 0.9, 1.0, pairs).satisfied


def test_calibration_penalizes_overshoot():
    potential = LinearPotential(a=-1.0, b=1.0)
    # Target 0.5 from (3, 1): moving to (3, 2) approaches it and must not be penalized
    pairs = [(TrustState(alpha=3, beta=1), TrustState(alpha=3, beta=2))]
    report = calibration_check(potential, 1.0, 0.5, pairs)

    assert report.satisfied

    with pytest.raises(ConfigInvalidError):
        calibration_check(potential, 1.0, 1.5, [])


def test_zero_potential_gives_zero_reward():
    assert shaping_reward(LinearPotential(), 0.9, START, UP) == 0.0


def test_trust_seeking_sign_examples():
    decreasing = LinearPotential(a=0.0, b=-1.0)
    assert trust_seeking_check(decreasing, 1.0, [(START, DOWN)]).satisfied

    report = trust_seeking_check(LinearPotential(), 0.9, [(START, UP), (START, DOWN)])
    assert not report.satisfied
    (violation,) = report.violations
    assert violation.next_state == DOWN
    assert violation.required == "negative"


def test_calibration_boundary_requires_nonnegative_reward():
    # (3, 1) and (1, 3) sit at equal distance from 0.5
    pair = (TrustState(alpha=3, beta=1), TrustState(alpha=1, beta=3))

    assert calibration_check(LinearPotential(a=-1.0), 1.0, 0.5, [pair]).satisfied
    assert not calibration_check(LinearPotential(a=1.0), 1.0, 0.5, [pair]).satisfied


def test_single_step_telescoping_is_exact(rng):
    spec = make_tabular_game(rng, horizon=1, nodes=2)
    report = telescoping_check(spec, LinearPotential(a=1.3, b=-0.4), PolicyRule.random(spec, rng))

    assert abs(report.lhs - report.rhs) <= 1e-12


def test_zero_budget_theorem_is_tight(tabular_game):
    report = theorem1_bound_check(tabular_game, LinearPotential(), 0.0)

    assert report.hypothesis.satisfied
    assert report.conclusion.satisfied
    assert report.conclusion.slack == 0.0


def test_shape_game_keeps_transitions_and_horizon(tabular_game, designed):
    shaped = shape_game(tabular_game, designed)

    assert shaped.horizon == tabular_game.horizon
    assert shaped.gamma == tabular_game.gamma
    assert shaped.initial == tabular_game.initial
    assert shaped.params == tabular_game.params
    assert shaped.observations is tabular_game.observations

    for stage in range(1, tabular_game.horizon + 1):
        k, alpha, beta = tabular_game.lattice(stage)
        nodes = tabular_game.observations_at(stage).nodes

        base = tabular_game.model.outcomes(stage, k, alpha, beta, nodes)
        wrapped = shaped.model.outcomes(stage, k, alpha, beta, nodes)

        assert np.array_equal(wrapped.success, base.success)
        assert not np.allclose(wrapped.reward, base.reward)
