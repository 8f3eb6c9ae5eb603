import dataclasses
import logging
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from pydantic import ValidationError

from trustshape.core.errors import ConfigInvalidError
from trustshape.models.game import GameSpec, PolicyRule, StageOutcome, StageRealization, ValueTable
from trustshape.schemas.shaping import (
    BoundReport,
    ConstraintReport,
    LinearPotential,
    ShapingBudget,
    TheoremReport,
    TransitionViolation,
)
from trustshape.schemas.trust import TrustLattice, TrustParams, TrustState
from trustshape.services.game_service import evaluate_policy, final_state_distribution, solve_optimal
from trustshape.services.trust_service import expected_trust

logger = logging.getLogger(__name__)

# "< 0" in the sign constraints is enforced with this margin
STRICT_MARGIN = 1e-12
TELESCOPING_TOLERANCE = 1e-8


def shaping_reward(
    potential: LinearPotential, gamma: float, state: TrustState, next_state: TrustState
) -> float:
    return gamma * potential.of(next_state) - potential.of(state)


def _budget(epsilon: float) -> float:
    try:
        return ShapingBudget(epsilon=epsilon).epsilon
    except ValidationError as exc:
        raise ConfigInvalidError(f"epsilon must be a finite number >= 0, got {epsilon}") from exc


def _discount_inverse(gamma: float, horizon: int) -> float:
    return np.inf if gamma == 0.0 else gamma ** (-horizon)


# =====================================================
# SHAPED GAME
# =====================================================

@dataclass(frozen=True, eq=False)
class ShapedStageModel:
    """Adds R^t = gamma * Phi(s') - Phi(s) to a base stage model; transitions untouched."""

    base: object
    potential: LinearPotential
    gamma: float
    params: TrustParams

    def _shaping(self, alpha: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        here = self.potential(alpha, beta)
        up = self.gamma * self.potential(alpha + self.params.w_s, beta) - here
        down = self.gamma * self.potential(alpha, beta + self.params.w_f) - here
        return up, down

    def outcomes(self, stage, k, alpha, beta, observations) -> StageOutcome:
        outcome = self.base.outcomes(stage, k, alpha, beta, observations)
        up, down = self._shaping(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))

        success = np.asarray(outcome.success, dtype=float)
        reward = (
            np.asarray(outcome.reward, dtype=float)
            + success * up[:, None, None]
            + (1.0 - success) * down[:, None, None]
        )
        return StageOutcome(reward=reward, success=outcome.success)

    def realize(self, stage, k, alpha, beta, observations, actions, rng) -> StageRealization:
        realization = self.base.realize(stage, k, alpha, beta, observations, actions, rng)
        up, down = self._shaping(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))
        shaping = np.where(realization.success, up, down)

        return dataclasses.replace(
            realization, shaping_reward=realization.shaping_reward + shaping
        )


def shape_game(spec: GameSpec, potential: LinearPotential, gamma: float | None = None) -> GameSpec:
    gamma = spec.gamma if gamma is None else gamma
    return dataclasses.replace(
        spec,
        model=ShapedStageModel(
            base=spec.model, potential=potential, gamma=gamma, params=spec.params
        ),
    )


def expected_final_potential(spec: GameSpec, potential: LinearPotential, policy: PolicyRule) -> float:
    distribution = final_state_distribution(spec, policy)
    _, alpha, beta = spec.lattice(spec.horizon + 1)
    return float(distribution @ potential(alpha, beta))


# =====================================================
# CERTIFICATES
# =====================================================

def telescoping_check(spec: GameSpec, potential: LinearPotential, policy: PolicyRule) -> BoundReport:
    shaped = shape_game(spec, potential)

    lhs = evaluate_policy(shaped, policy).initial_value - evaluate_policy(spec, policy).initial_value
    rhs = spec.gamma**spec.horizon * expected_final_potential(
        spec, potential, policy
    ) - potential.of(spec.initial)

    return BoundReport.equal("telescoping", lhs, rhs, tolerance=TELESCOPING_TOLERANCE)


@dataclass(frozen=True)
class ShapingComparison:
    """Optimal solutions of the original and shaped games, plus the shaped optimum scored in the original."""

    optimal_values: ValueTable
    optimal_policy: PolicyRule
    shaped_values: ValueTable
    shaped_policy: PolicyRule
    original_values: ValueTable

    @property
    def loss(self) -> float:
        return self.optimal_values.initial_value - self.original_values.initial_value


def compare_shaped(
    spec: GameSpec,
    potential: LinearPotential,
    optimal: tuple[ValueTable, PolicyRule] | None = None,
) -> ShapingComparison:
    optimal_values, optimal_policy = optimal if optimal is not None else solve_optimal(spec)
    shaped_values, shaped_policy = solve_optimal(shape_game(spec, potential))

    return ShapingComparison(
        optimal_values=optimal_values,
        optimal_policy=optimal_policy,
        shaped_values=shaped_values,
        shaped_policy=shaped_policy,
        original_values=evaluate_policy(spec, shaped_policy),
    )


def theorem1_bound_check(
    spec: GameSpec,
    potential: LinearPotential,
    epsilon: float,
    comparison: ShapingComparison | None = None,
) -> TheoremReport:
    epsilon = _budget(epsilon)
    comparison = comparison or compare_shaped(spec, potential)

    shaped_expectation = expected_final_potential(spec, potential, comparison.shaped_policy)
    optimal_expectation = expected_final_potential(spec, potential, comparison.optimal_policy)

    hypothesis = BoundReport.at_most(
        "theorem1_hypothesis",
        shaped_expectation - optimal_expectation,
        _discount_inverse(spec.gamma, spec.horizon) * epsilon,
    )
    conclusion = BoundReport.at_most("theorem1_conclusion", comparison.loss, epsilon)

    if not hypothesis.satisfied:
        logger.info(
            "Loss-bound hypothesis fails at %s (lhs=%.6g, rhs=%.6g)",
            spec.initial.as_tuple(),
            hypothesis.lhs,
            hypothesis.rhs,
        )

    return TheoremReport(
        initial=spec.initial,
        epsilon=epsilon,
        hypothesis=hypothesis,
        conclusion=conclusion,
        v_opt=comparison.optimal_values.initial_value,
        v_shaped=comparison.shaped_values.initial_value,
        v_original=comparison.original_values.initial_value,
    )


def corollary1_bound_check(
    potential: LinearPotential,
    reachable_shaped: TrustLattice,
    reachable_orig: TrustLattice,
    gamma: float,
    horizon: int,
    epsilon: float,
) -> BoundReport:
    epsilon = _budget(epsilon)
    highest = max(potential.of(state) for state in reachable_shaped.points)
    lowest = min(potential.of(state) for state in reachable_orig.points)

    return BoundReport.at_most(
        "corollary1", highest - lowest, _discount_inverse(gamma, horizon) * epsilon
    )


def _sign_check(
    name: str,
    potential: LinearPotential,
    gamma: float,
    transitions: Iterable[tuple[TrustState, TrustState]],
    rewarded,
) -> ConstraintReport:
    violations = []
    checked = 0

    for state, next_state in transitions:
        checked += 1
        reward = shaping_reward(potential, gamma, state, next_state)

        if rewarded(state, next_state):
            if reward < 0.0:
                violations.append(
                    TransitionViolation(
                        state=state, next_state=next_state, reward=reward, required="nonnegative"
                    )
                )
        elif reward > -STRICT_MARGIN:
            violations.append(
                TransitionViolation(
                    state=state, next_state=next_state, reward=reward, required="negative"
                )
            )

    return ConstraintReport(
        name=name, satisfied=not violations, checked=checked, violations=violations
    )


def trust_seeking_check(
    potential: LinearPotential,
    gamma: float,
    transitions: Iterable[tuple[TrustState, TrustState]],
) -> ConstraintReport:
    return _sign_check(
        "trust_seeking",
        potential,
        gamma,
        transitions,
        lambda state, next_state: expected_trust(next_state) >= expected_trust(state),
    )


def calibration_check(
    potential: LinearPotential,
    gamma: float,
    t_star: float,
    transitions: Iterable[tuple[TrustState, TrustState]],
) -> ConstraintReport:
    if not 0.0 <= t_star <= 1.0:
        raise ConfigInvalidError(f"Calibration target must lie in [0, 1], got {t_star}")

    def moves_closer(state: TrustState, next_state: TrustState) -> bool:
        return abs(expected_trust(next_state) - t_star) <= abs(expected_trust(state) - t_star)

    return _sign_check("calibration", potential, gamma, transitions, moves_closer)
