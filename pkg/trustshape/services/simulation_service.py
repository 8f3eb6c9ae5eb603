import logging
from dataclasses import dataclass

import numpy as np

from trustshape.core.config import settings
from trustshape.core.errors import ConfigInvalidError
from trustshape.models.game import GameSpec, PolicyRule
from trustshape.schemas.game import McEstimate, Trajectory, TrajectoryStep
from trustshape.services.trust_service import update_trust
from trustshape.utils.rng import substream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RolloutStatistics:
    value: McEstimate
    final_trust: McEstimate


def _optional(value: int) -> int | None:
    return None if value < 0 else int(value)


def simulate_rollout(spec: GameSpec, policy: PolicyRule, rng: np.random.Generator) -> Trajectory:
    steps = []
    state = spec.initial
    k = 0

    for stage in range(1, spec.horizon + 1):
        observations = spec.observations_at(stage)
        rule = policy.table(stage, (stage, observations.size))

        m = int(rng.choice(observations.size, p=observations.weights))
        action = int(rule[k, m])
        _, alpha, beta = spec.lattice(stage)

        realization = spec.model.realize(
            stage,
            np.array([k]),
            alpha[k : k + 1],
            beta[k : k + 1],
            observations.nodes[m : m + 1],
            np.array([action], dtype=np.int8),
            rng,
        )
        performance = 1.0 if bool(realization.success[0]) else 0.0
        next_state = update_trust(state, performance, spec.params)

        steps.append(
            TrajectoryStep(
                stage=stage,
                state=state,
                observation=float(observations.nodes[m]),
                robot_action=action,
                human_action=_optional(realization.human_action[0]),
                threat=_optional(realization.threat[0]),
                performance=performance,
                task_reward=float(realization.task_reward[0]),
                shaping_reward=float(realization.shaping_reward[0]),
                next_state=next_state,
            )
        )

        state = next_state
        k += int(performance)

    return Trajectory(steps=steps)


def _rollout_block(
    spec: GameSpec, policy: PolicyRule, size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Discounted reward totals and final success counts for ``size`` rollouts."""
    k = np.zeros(size, dtype=np.intp)
    totals = np.zeros(size)

    for stage in range(1, spec.horizon + 1):
        observations = spec.observations_at(stage)
        rule = policy.table(stage, (stage, observations.size))
        _, alpha, beta = spec.lattice(stage)

        m = rng.choice(observations.size, size=size, p=observations.weights)
        actions = rule[k, m]
        realization = spec.model.realize(
            stage, k, alpha[k], beta[k], observations.nodes[m], actions, rng
        )

        totals += spec.gamma ** (stage - 1) * (realization.task_reward + realization.shaping_reward)
        k += realization.success.astype(np.intp)

    return totals, k


def estimate_mean(samples: np.ndarray, seed: int) -> McEstimate:
    samples = np.asarray(samples, dtype=float)
    count = samples.size
    std_error = float(samples.std(ddof=1) / np.sqrt(count)) if count > 1 else 0.0
    return McEstimate(mean=float(samples.mean()), std_error=std_error, samples=count, seed=seed)


def mc_rollout_statistics(
    spec: GameSpec,
    policy: PolicyRule,
    samples: int,
    seed: int,
    block_size: int | None = None,
) -> RolloutStatistics:
    if samples < 1:
        raise ConfigInvalidError(f"samples must be >= 1, got {samples}")

    block_size = block_size or settings.MC_BLOCK_SIZE
    totals = []
    finals = []

    # Block b always draws from substream (seed, b), so the split into blocks fixes the result
    for block, start in enumerate(range(0, samples, block_size)):
        size = min(block_size, samples - start)
        block_totals, block_k = _rollout_block(spec, policy, size, substream(seed, block))
        totals.append(block_totals)
        finals.append(block_k)

    totals_all = np.concatenate(totals)
    k_all = np.concatenate(finals)

    _, alpha, beta = spec.lattice(spec.horizon + 1)
    final_trust = (alpha / (alpha + beta))[k_all]

    logger.debug("Simulated %d rollouts with seed %d", samples, seed)

    return RolloutStatistics(
        value=estimate_mean(totals_all, seed),
        final_trust=estimate_mean(final_trust, seed),
    )


def mc_estimate_value(spec: GameSpec, policy: PolicyRule, samples: int, seed: int) -> McEstimate:
    return mc_rollout_statistics(spec, policy, samples, seed).value


def mc_estimate_final_trust(
    spec: GameSpec, policy: PolicyRule, samples: int, seed: int
) -> McEstimate:
    return mc_rollout_statistics(spec, policy, samples, seed).final_trust
