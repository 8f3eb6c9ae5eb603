import dataclasses
import logging
from dataclasses import dataclass

import numpy as np

from trustshape.core.config import settings
from trustshape.core.errors import InstanceTooLargeError, NumericFailureError
from trustshape.models.game import GameSpec, PolicyRule, Quadrature, StageOutcome, ValueTable
from trustshape.schemas.trust import TrustLattice, TrustState

logger = logging.getLogger(__name__)

SUCCESS_TOLERANCE = 1e-12
OCCUPANCY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class StageTable:
    stage: int
    k: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    observations: Quadrature
    outcome: StageOutcome


def _checked_outcome(spec: GameSpec, stage: int, k, alpha, beta, observations: np.ndarray) -> StageOutcome:
    outcome = spec.model.outcomes(stage, k, alpha, beta, observations)
    reward = np.asarray(outcome.reward, dtype=float)
    success = np.asarray(outcome.success, dtype=float)

    expected_shape = (k.size, observations.size, 2)
    if reward.shape != expected_shape or success.shape != expected_shape:
        raise NumericFailureError(
            f"Stage {stage} model returned shapes {reward.shape}/{success.shape}, expected {expected_shape}"
        )

    if not np.all(np.isfinite(reward)):
        raise NumericFailureError(f"Non-finite stage reward at stage {stage}")

    if not np.all(np.isfinite(success)) or np.any(success < -SUCCESS_TOLERANCE) or np.any(
        success > 1.0 + SUCCESS_TOLERANCE
    ):
        raise NumericFailureError(f"Success probability outside [0, 1] at stage {stage}")

    return StageOutcome(reward=reward, success=np.clip(success, 0.0, 1.0))


def stage_tables(spec: GameSpec) -> list[StageTable]:
    """Stage models evaluated on every reachable node, stages 1..N."""
    tables = []

    for stage in range(1, spec.horizon + 1):
        k, alpha, beta = spec.lattice(stage)
        observations = spec.observations_at(stage)
        outcome = _checked_outcome(spec, stage, k, alpha, beta, observations.nodes)
        tables.append(
            StageTable(
                stage=stage,
                k=k,
                alpha=alpha,
                beta=beta,
                observations=observations,
                outcome=outcome,
            )
        )

    return tables


def _q_values(outcome: StageOutcome, next_values: np.ndarray, gamma: float) -> np.ndarray:
    up = next_values[1:, None, None]
    down = next_values[:-1, None, None]
    continuation = outcome.success * up + (1.0 - outcome.success) * down
    return outcome.reward + gamma * continuation


def _argmax_actions(q: np.ndarray) -> np.ndarray:
    # Ties resolve to action 0
    return (q[..., 1] > q[..., 0]).astype(np.int8)


def _terminal_values(spec: GameSpec) -> np.ndarray:
    return np.zeros(spec.horizon + 1)


# =====================================================
# BACKWARD RECURSION
# =====================================================

def solve_optimal(spec: GameSpec) -> tuple[ValueTable, PolicyRule]:
    tables = stage_tables(spec)

    values: list[np.ndarray] = [np.empty(0)] * (spec.horizon + 1)
    values[spec.horizon] = _terminal_values(spec)
    actions: list[np.ndarray] = [np.empty((0, 0), dtype=np.int8)] * spec.horizon

    for table in reversed(tables):
        q = _q_values(table.outcome, values[table.stage], spec.gamma)
        chosen = _argmax_actions(q)
        best = np.where(chosen == 1, q[..., 1], q[..., 0])

        actions[table.stage - 1] = chosen
        values[table.stage - 1] = best @ table.observations.weights

    logger.debug("Solved N=%d game, V_1(s_1)=%.6f", spec.horizon, values[0][0])

    return ValueTable(values=tuple(values)), PolicyRule(actions=tuple(actions))


def _evaluate(spec: GameSpec, tables: list[StageTable], policy: PolicyRule) -> ValueTable:
    values: list[np.ndarray] = [np.empty(0)] * (spec.horizon + 1)
    values[spec.horizon] = _terminal_values(spec)

    for table in reversed(tables):
        chosen = policy.table(table.stage, (table.k.size, table.observations.size))
        q = _q_values(table.outcome, values[table.stage], spec.gamma)
        taken = np.take_along_axis(q, chosen[..., None].astype(np.intp), axis=2)[..., 0]
        values[table.stage - 1] = taken @ table.observations.weights

    return ValueTable(values=tuple(values))


def evaluate_policy(spec: GameSpec, policy: PolicyRule) -> ValueTable:
    return _evaluate(spec, stage_tables(spec), policy)


def greedy_policy(spec: GameSpec, values: ValueTable) -> PolicyRule:
    """Per-node argmax of the one-step lookahead against ``values``."""
    actions = []

    for table in stage_tables(spec):
        q = _q_values(table.outcome, values.values[table.stage], spec.gamma)
        actions.append(_argmax_actions(q))

    return PolicyRule(actions=tuple(actions))


# =====================================================
# STAGE-ONE CONDITIONING
# =====================================================

def condition_first_stage(spec: GameSpec, observation: float) -> GameSpec:
    """Same game with the stage-1 observation fixed to ``observation``."""
    return dataclasses.replace(spec, first_observations=Quadrature.point(observation))


def _node_q_values(
    spec: GameSpec, values: ValueTable, stage: int, k: int, observation: float
) -> np.ndarray:
    lattice_k, alpha, beta = spec.lattice(stage)
    index = np.array([k])
    outcome = _checked_outcome(
        spec, stage, index, alpha[index], beta[index], np.array([observation], dtype=float)
    )
    next_values = values.values[stage][k : k + 2]
    return _q_values(outcome, next_values, spec.gamma)[0, 0]


def stage_one_q_values(spec: GameSpec, values: ValueTable, observation: float) -> np.ndarray:
    """Q_1(s_1, o, a) for a caller-supplied observation, both actions."""
    return _node_q_values(spec, values, 1, 0, observation)


def greedy_action(
    spec: GameSpec, values: ValueTable, stage: int, k: int, observation: float
) -> int:
    q = _node_q_values(spec, values, stage, k, observation)
    return int(q[1] > q[0])


# =====================================================
# FORWARD OCCUPANCY
# =====================================================

def occupancy_by_stage(spec: GameSpec, policy: PolicyRule) -> list[np.ndarray]:
    occupancy = [np.array([1.0])]

    for table in stage_tables(spec):
        chosen = policy.table(table.stage, (table.k.size, table.observations.size))
        success = np.take_along_axis(
            table.outcome.success, chosen[..., None].astype(np.intp), axis=2
        )[..., 0]
        p_success = success @ table.observations.weights

        current = occupancy[-1]
        following = np.zeros(table.stage + 1)
        following[1:] += current * p_success
        following[:-1] += current * (1.0 - p_success)

        if abs(following.sum() - 1.0) > OCCUPANCY_TOLERANCE:
            raise NumericFailureError(
                f"Occupancy at stage {table.stage + 1} sums to {following.sum()!r}"
            )

        occupancy.append(following)

    return occupancy


def final_state_distribution(spec: GameSpec, policy: PolicyRule) -> np.ndarray:
    """Probability of each stage-(N+1) lattice index under ``policy``."""
    return occupancy_by_stage(spec, policy)[-1]


def reachable_support(spec: GameSpec, policy: PolicyRule) -> np.ndarray:
    return np.flatnonzero(final_state_distribution(spec, policy) > 0.0)


def reachable_final_lattice(spec: GameSpec, policy: PolicyRule) -> TrustLattice:
    """Stage-(N+1) trust states that ``policy`` reaches with positive probability."""
    _, alpha, beta = spec.lattice(spec.horizon + 1)
    points = tuple(
        TrustState(alpha=float(alpha[k]), beta=float(beta[k])) for k in reachable_support(spec, policy)
    )
    return TrustLattice(initial=spec.initial, params=spec.params, stage=spec.horizon + 1, points=points)


def expected_final_trust(spec: GameSpec, policy: PolicyRule) -> float:
    distribution = final_state_distribution(spec, policy)
    _, alpha, beta = spec.lattice(spec.horizon + 1)
    return float(distribution @ (alpha / (alpha + beta)))


# =====================================================
# EXHAUSTIVE ORACLE
# =====================================================

def brute_force_optimal(spec: GameSpec, cap: int | None = None) -> float:
    cap = settings.BRUTE_FORCE_CAP if cap is None else cap
    tables = stage_tables(spec)

    shapes = [(table.k.size, table.observations.size) for table in tables]
    sizes = [rows * cols for rows, cols in shapes]
    total_bits = sum(sizes)

    if 2**total_bits > cap:
        raise InstanceTooLargeError(
            f"{2**total_bits} deterministic policies exceed the enumeration cap of {cap}"
        )

    offsets = np.cumsum([0] + sizes)
    shifts = np.arange(total_bits)
    best = -np.inf

    for code in range(2**total_bits):
        bits = ((code >> shifts) & 1).astype(np.int8)
        policy = PolicyRule(
            actions=tuple(
                bits[offsets[i] : offsets[i + 1]].reshape(shape) for i, shape in enumerate(shapes)
            )
        )
        best = max(best, _evaluate(spec, tables, policy).initial_value)

    logger.debug("Enumerated %d policies, best V_1=%.6f", 2**total_bits, best)
    return float(best)
