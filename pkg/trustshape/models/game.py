"""Numeric containers for the robot-side decision process.

Fixing the human policy inside the two-player game leaves a finite-horizon
decision process over the trust lattice. Nodes are addressed by the integer
pair (stage n, success count k); the robot additionally sees a per-stage
observation drawn from a discrete quadrature.
"""

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from trustshape.core.errors import (
    ConfigInvalidError,
    InvalidHorizonError,
    InvalidQuadratureError,
    UndefinedPolicyError,
)
from trustshape.schemas.trust import TrustParams, TrustState


@dataclass(frozen=True, eq=False)
class Quadrature:
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)

        if nodes.size == 0 or nodes.shape != weights.shape:
            raise InvalidQuadratureError(
                f"Nodes and weights must be non-empty and aligned, got {nodes.shape} and {weights.shape}"
            )

        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise InvalidQuadratureError("Quadrature weights must be finite and nonnegative")

        if abs(weights.sum() - 1.0) > 1e-9:
            raise InvalidQuadratureError(f"Quadrature weights sum to {weights.sum()!r}, expected 1")

        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def point(cls, value: float) -> "Quadrature":
        return cls(nodes=np.array([value]), weights=np.array([1.0]))

    @property
    def size(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class StageOutcome:
    """Expected immediate reward and success probability, shape (K, M, 2)."""

    reward: np.ndarray
    success: np.ndarray


@dataclass(frozen=True)
class StageRealization:
    """One sampled step per rollout. ``threat``/``human_action`` are -1 when the model has none."""

    task_reward: np.ndarray
    success: np.ndarray
    threat: np.ndarray
    human_action: np.ndarray
    shaping_reward: np.ndarray


class StageModel(Protocol):
    def outcomes(
        self,
        stage: int,
        k: np.ndarray,
        alpha: np.ndarray,
        beta: np.ndarray,
        observations: np.ndarray,
    ) -> StageOutcome: ...

    def realize(
        self,
        stage: int,
        k: np.ndarray,
        alpha: np.ndarray,
        beta: np.ndarray,
        observations: np.ndarray,
        actions: np.ndarray,
        rng: np.random.Generator,
    ) -> StageRealization: ...


@dataclass(frozen=True)
class GameSpec:
    horizon: int
    gamma: float
    initial: TrustState
    params: TrustParams
    model: StageModel
    observations: Quadrature
    # Stage-1 observation law; None means the same quadrature as later stages
    first_observations: Quadrature | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise InvalidHorizonError(f"Horizon must be >= 1, got {self.horizon}")

        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigInvalidError(f"Discount must lie in [0, 1], got {self.gamma}")

    def observations_at(self, stage: int) -> Quadrature:
        if stage == 1 and self.first_observations is not None:
            return self.first_observations
        return self.observations

    def lattice(self, stage: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        k = np.arange(stage)
        alpha = self.initial.alpha + self.params.w_s * k
        beta = self.initial.beta + self.params.w_f * (stage - 1 - k)
        return k, alpha, beta


@dataclass(frozen=True)
class ValueTable:
    """``values[n - 1][k]`` is V_n at lattice index k; the last entry is stage N+1 (zeros)."""

    values: tuple[np.ndarray, ...]

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    def at(self, stage: int, k: int) -> float:
        return float(self.values[stage - 1][k])

    @property
    def initial_value(self) -> float:
        return float(self.values[0][0])


@dataclass(frozen=True)
class PolicyRule:
    """``actions[n - 1]`` has shape (n, M_n): the action at lattice index k and observation node m."""

    actions: tuple[np.ndarray, ...]

    @classmethod
    def constant(cls, spec: GameSpec, action: int) -> "PolicyRule":
        return cls(
            actions=tuple(
                np.full((n, spec.observations_at(n).size), action, dtype=np.int8)
                for n in range(1, spec.horizon + 1)
            )
        )

    @classmethod
    def random(cls, spec: GameSpec, rng: np.random.Generator) -> "PolicyRule":
        return cls(
            actions=tuple(
                rng.integers(0, 2, size=(n, spec.observations_at(n).size)).astype(np.int8)
                for n in range(1, spec.horizon + 1)
            )
        )

    def table(self, stage: int, expected_shape: tuple[int, int]) -> np.ndarray:
        if stage > len(self.actions):
            raise UndefinedPolicyError(f"Policy has no rule for stage {stage}")

        actions = self.actions[stage - 1]
        if actions.shape != expected_shape:
            raise UndefinedPolicyError(
                f"Policy rule at stage {stage} covers {actions.shape}, reachable nodes need {expected_shape}"
            )

        return actions


@dataclass(frozen=True, eq=False)
class TabularStageModel:
    """Stage model given by explicit per-stage arrays over (k, observation node, action).

    ``rewards[n - 1]`` and ``success[n - 1]`` have shape (n, M, 2); observations
    are matched to the sorted ``nodes`` exactly, so only quadrature nodes are supported.
    """

    nodes: np.ndarray
    rewards: tuple[np.ndarray, ...]
    success: tuple[np.ndarray, ...]

    def _node_index(self, observations: np.ndarray) -> np.ndarray:
        index = np.searchsorted(self.nodes, observations)
        index = np.clip(index, 0, self.nodes.size - 1)
        if not np.array_equal(self.nodes[index], observations):
            raise UndefinedPolicyError("Tabular stage model only knows its own observation nodes")
        return index

    def outcomes(self, stage, k, alpha, beta, observations) -> StageOutcome:
        m = self._node_index(np.asarray(observations))
        rewards = self.rewards[stage - 1][np.ix_(k, m)]
        success = self.success[stage - 1][np.ix_(k, m)]
        return StageOutcome(reward=rewards, success=success)

    def realize(self, stage, k, alpha, beta, observations, actions, rng) -> StageRealization:
        m = self._node_index(np.asarray(observations))
        p = self.success[stage - 1][k, m, actions]
        success = rng.random(k.size) < p
        size = k.size

        return StageRealization(
            task_reward=self.rewards[stage - 1][k, m, actions].astype(float),
            success=success,
            threat=np.full(size, -1, dtype=np.int8),
            human_action=np.full(size, -1, dtype=np.int8),
            shaping_reward=np.zeros(size),
        )
