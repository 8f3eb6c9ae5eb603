import numpy as np
import pytest

from conftest import make_tabular_game
from trustshape.core.errors import (
    ConfigInvalidError,
    InstanceTooLargeError,
    InvalidHorizonError,
    InvalidQuadratureError,
    NumericFailureError,
    UndefinedPolicyError,
)
from trustshape.models.game import GameSpec, PolicyRule, Quadrature, TabularStageModel
from trustshape.schemas.trust import TrustParams, TrustState
from trustshape.services.game_service import (
    brute_force_optimal,
    evaluate_policy,
    expected_final_trust,
    final_state_distribution,
    greedy_action,
    greedy_policy,
    occupancy_by_stage,
    reachable_final_lattice,
    reachable_support,
    solve_optimal,
)


def _constant_game(horizon: int, reward: float, success: float) -> GameSpec:
    nodes = np.array([0.5])
    return GameSpec(
        horizon=horizon,
        gamma=0.9,
        initial=TrustState(),
        params=TrustParams(),
        model=TabularStageModel(
            nodes=nodes,
            rewards=tuple(np.full((n, 1, 2), reward) for n in range(1, horizon + 1)),
            success=tuple(np.full((n, 1, 2), success) for n in range(1, horizon + 1)),
        ),
        observations=Quadrature.point(0.5),
    )


def test_quadrature_rejects_bad_weights():
    with pytest.raises(InvalidQuadratureError):
        Quadrature(nodes=np.array([0.2, 0.8]), weights=np.array([0.5, 0.6]))

    with pytest.raises(InvalidQuadratureError):
        Quadrature(nodes=np.array([0.2, 0.8]), weights=np.array([1.5, -0.5]))

    with pytest.raises(InvalidQuadratureError):
        Quadrature(nodes=np.array([]), weights=np.array([]))


def test_game_spec_validates_horizon_and_discount():
    with pytest.raises(InvalidHorizonError):
        _constant_game(0, 1.0, 0.5)

    with pytest.raises(ConfigInvalidError):
        GameSpec(
            horizon=1,
            gamma=1.5,
            initial=TrustState(),
            params=TrustParams(),
            model=_constant_game(1, 1.0, 0.5).model,
            observations=Quadrature.point(0.5),
        )


def test_terminal_values_are_zero(tabular_game):
    values, _ = solve_optimal(tabular_game)

    assert values.horizon == tabular_game.horizon
    assert np.array_equal(values.values[-1], np.zeros(tabular_game.horizon + 1))
    assert [len(stage) for stage in values.values] == list(range(1, tabular_game.horizon + 2))


def test_constant_rewards_give_geometric_value():
    spec = _constant_game(3, 2.0, 0.5)
    values, _ = solve_optimal(spec)

    assert values.initial_value == pytest.approx(2.0 * (1 + 0.9 + 0.81))


def test_ties_resolve_to_action_zero():
    _, policy = solve_optimal(_constant_game(3, 1.0, 0.3))

    for stage_actions in policy.actions:
        assert not stage_actions.any()


def test_optimal_value_dominates_every_constant_policy(tabular_game):
    values, policy = solve_optimal(tabular_game)

    for action in (0, 1):
        constant = evaluate_policy(tabular_game, PolicyRule.constant(tabular_game, action))
        assert constant.initial_value <= values.initial_value + 1e-12

    assert evaluate_policy(tabular_game, policy).initial_value == pytest.approx(values.initial_value)


def test_greedy_policy_against_optimal_values_is_optimal(tabular_game):
    values, policy = solve_optimal(tabular_game)
    greedy = greedy_policy(tabular_game, values)

    for ours, theirs in zip(greedy.actions, policy.actions):
        assert np.array_equal(ours, theirs)

    node = tabular_game.observations.nodes[1]
    assert greedy_action(tabular_game, values, 2, 1, node) == policy.actions[1][1, 1]


def test_solver_matches_exhaustive_enumeration():
    rng = np.random.default_rng(7)

    for trial in range(60):
        horizon = 1 + trial % 2
        spec = make_tabular_game(rng, horizon=horizon, nodes=2, gamma=float(rng.uniform(0.5, 1.0)))
        values, _ = solve_optimal(spec)

        assert abs(values.initial_value - brute_force_optimal(spec)) <= 1e-9


def test_brute_force_refuses_large_instances(tabular_game):
    with pytest.raises(InstanceTooLargeError):
        brute_force_optimal(tabular_game, cap=2**10)


def test_policy_with_wrong_shape_is_undefined(tabular_game):
    short = PolicyRule(actions=PolicyRule.constant(tabular_game, 0).actions[:-1])
    with pytest.raises(UndefinedPolicyError):
        evaluate_policy(tabular_game, short)

    wrong = PolicyRule(actions=tuple(np.zeros((1, 1), dtype=np.int8) for _ in range(4)))
    with pytest.raises(UndefinedPolicyError):
        evaluate_policy(tabular_game, wrong)


def test_model_with_invalid_success_probability_fails():
    spec = _constant_game(2, 1.0, 1.2)
    with pytest.raises(NumericFailureError):
        solve_optimal(spec)


def test_occupancy_is_a_distribution_on_each_lattice(tabular_game, rng):
    policy = PolicyRule.random(tabular_game, rng)
    occupancy = occupancy_by_stage(tabular_game, policy)

    assert len(occupancy) == tabular_game.horizon + 1
    for stage, distribution in enumerate(occupancy, start=1):
        assert distribution.shape == (stage,)
        assert distribution.sum() == pytest.approx(1.0)
        assert np.all(distribution >= 0)


def test_certain_success_ends_on_top_lattice_point():
    spec = _constant_game(3, 0.0, 1.0)
    policy = PolicyRule.constant(spec, 0)

    assert np.array_equal(final_state_distribution(spec, policy), [0.0, 0.0, 0.0, 1.0])
    assert np.array_equal(reachable_support(spec, policy), [3])
    assert expected_final_trust(spec, policy) == pytest.approx(4 / 5)
    assert [point.as_tuple() for point in reachable_final_lattice(spec, policy).points] == [(4.0, 1.0)]


def _one_step_game(rewards, success, gamma: float = 0.9) -> GameSpec:
    return GameSpec(
        horizon=1,
        gamma=gamma,
        initial=TrustState(),
        params=TrustParams(),
        model=TabularStageModel(
            nodes=np.array([0.5]),
            rewards=(np.array([[rewards]], dtype=float),),
            success=(np.array([[success]], dtype=float),),
        ),
        observations=Quadrature.point(0.5),
    )


def test_single_step_game_is_greedy():
    spec = _one_step_game([-6.0, -50.0], [0.3, 0.3])
    values, policy = solve_optimal(spec)

    assert values.initial_value == -6.0
    assert policy.actions[0][0, 0] == 0
    assert evaluate_policy(spec, PolicyRule.constant(spec, 1)).initial_value == -50.0
    assert brute_force_optimal(spec) == -6.0
    assert np.allclose(final_state_distribution(spec, policy), [0.7, 0.3])


def test_zero_discount_policy_is_stagewise_greedy(rng):
    spec = make_tabular_game(rng, horizon=4, nodes=3, gamma=0.0)
    _, policy = solve_optimal(spec)

    for stage, actions in enumerate(policy.actions, start=1):
        rewards = spec.model.rewards[stage - 1]
        assert np.array_equal(actions, (rewards[..., 1] > rewards[..., 0]).astype(np.int8))


def test_random_policies_never_beat_the_solver():
    rng = np.random.default_rng(21)

    for _ in range(30):
        spec = make_tabular_game(rng, horizon=int(rng.integers(1, 5)), nodes=2)
        best = solve_optimal(spec)[0].initial_value
        policy = PolicyRule.random(spec, rng)
        assert evaluate_policy(spec, policy).initial_value <= best + 1e-9


def test_values_stay_within_discounted_reward_range():
    rng = np.random.default_rng(5)

    for _ in range(20):
        spec = make_tabular_game(
            rng, horizon=int(rng.integers(1, 8)), nodes=2, gamma=float(rng.uniform(0.0, 1.0))
        )
        rewards = spec.model.rewards
        low = min(float(table.min()) for table in rewards)
        high = max(float(table.max()) for table in rewards)

        values, _ = solve_optimal(spec)
        for stage in range(1, spec.horizon + 1):
            remaining = sum(spec.gamma**j for j in range(spec.horizon - stage + 1))
            assert np.all(values.values[stage - 1] >= low * remaining - 1e-9)
            assert np.all(values.values[stage - 1] <= high * remaining + 1e-9)
