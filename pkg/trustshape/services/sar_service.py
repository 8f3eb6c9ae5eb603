"""Search-and-rescue scenario.

At each site a threat eta ~ Bern(d) is present with unknown danger d ~ U[0, 1].
The robot sees its estimate d_r ~ Beta(kappa_r d, kappa_r (1 - d)) and recommends
gear (a_r = 1) or not; the human follows the recommendation with probability
equal to expected trust and does the opposite otherwise. The robot succeeds when
its recommendation matches the threat.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import beta as beta_dist

from trustshape.core.errors import ConfigInvalidError, NumericFailureError
from trustshape.models.game import GameSpec, Quadrature, StageOutcome, StageRealization
from trustshape.schemas.game import Trajectory, TrajectoryStep
from trustshape.schemas.sar import CostTable, SarConfig, SiteSample, ThreatMode, sar_config_problems
from trustshape.schemas.shaping import LinearPotential
from trustshape.schemas.trust import TrustState
from trustshape.services.trust_service import expected_trust, update_trust
from trustshape.utils.quadrature import unit_interval_rule

logger = logging.getLogger(__name__)

MIN_BETA_SHAPE = 1e-6
ESTIMATE_CLIP = 1e-12


def _beta_shapes(kappa: float, danger):
    danger = np.asarray(danger, dtype=float)
    return (
        np.maximum(kappa * danger, MIN_BETA_SHAPE),
        np.maximum(kappa * (1.0 - danger), MIN_BETA_SHAPE),
    )


def _check_config(config: SarConfig) -> None:
    problems = sar_config_problems(config)
    if problems:
        raise ConfigInvalidError("; ".join(problems))


# =====================================================
# REWARDS AND HUMAN MODEL
# =====================================================

def task_reward(eta: int, a_h: int, table: CostTable, w_health: float, w_time: float) -> float:
    health, time = table.cost(eta, a_h)
    return -w_health * health - w_time * time


def compliance_probability(state: TrustState) -> float:
    return expected_trust(state)


def myopic_indifference_threshold(config: SarConfig) -> float:
    """Threat probability at which both one-step recommendations earn the same reward.

    The reward gap scales with (2c - 1), so the threshold is the same for every
    compliance c != 1/2; below it a trusting human should be told not to wear gear.
    """
    rewards = config.cost_table.reward_matrix(config.w_health, config.w_time)
    clear_gap = rewards[0, 0] - rewards[0, 1]
    threat_gap = rewards[1, 0] - rewards[1, 1]

    if clear_gap == threat_gap:
        raise NumericFailureError("Cost table makes both recommendations equivalent")

    return float(clear_gap / (clear_gap - threat_gap))


# =====================================================
# DANGER ESTIMATES
# =====================================================

def danger_rule(count: int) -> Quadrature:
    nodes, weights = unit_interval_rule(count)
    return Quadrature(nodes=nodes, weights=weights)


def _estimate_log_likelihood(estimates: np.ndarray, danger: np.ndarray, kappa: float) -> np.ndarray:
    """log f(d_r | d) with rows over estimates and columns over danger nodes."""
    a, b = _beta_shapes(kappa, danger)
    return beta_dist.logpdf(estimates[:, None], a[None, :], b[None, :])


def threat_probability(
    d_r,
    mode: ThreatMode,
    kappa_r: float,
    quadrature: Quadrature | None = None,
):
    """P(eta = 1 | d_r): the estimate itself, or the posterior mean E[d | d_r] under d ~ U[0, 1]."""
    scalar = np.ndim(d_r) == 0
    estimates = np.atleast_1d(np.asarray(d_r, dtype=float))

    if mode == "plugin":
        result = estimates.copy()
    elif mode == "bayes":
        quadrature = quadrature or danger_rule(64)
        log_joint = _estimate_log_likelihood(estimates, quadrature.nodes, kappa_r) + np.log(
            quadrature.weights
        )
        normalizer = logsumexp(log_joint, axis=1)

        if not np.all(np.isfinite(normalizer)):
            raise NumericFailureError("Posterior normalizer underflowed for the danger estimate")

        result = np.exp(logsumexp(log_joint + np.log(quadrature.nodes), axis=1) - normalizer)
    else:
        raise ConfigInvalidError(f"Unknown threat-probability mode {mode!r}")

    return float(result[0]) if scalar else result


def observation_quadrature(config: SarConfig) -> Quadrature:
    """Marginal law of d_r on interior Gauss-Legendre nodes, with d integrated out."""
    danger = danger_rule(config.danger_nodes)
    nodes, weights = unit_interval_rule(config.estimate_nodes)

    log_marginal = logsumexp(
        _estimate_log_likelihood(nodes, danger.nodes, config.kappa_r) + np.log(danger.weights),
        axis=1,
    )
    if not np.all(np.isfinite(log_marginal)):
        raise NumericFailureError("Marginal density of the danger estimate is not finite")

    mass = weights * np.exp(log_marginal - log_marginal.max())
    return Quadrature(nodes=nodes, weights=mass / mass.sum())


# =====================================================
# STAGE MODEL
# =====================================================

@dataclass(frozen=True, eq=False)
class SarStageModel:
    config: SarConfig
    _threat_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "_rewards",
            self.config.cost_table.reward_matrix(self.config.w_health, self.config.w_time),
        )
        object.__setattr__(self, "_danger", danger_rule(self.config.danger_nodes))

    def threat(self, observations: np.ndarray, cache: bool = True) -> np.ndarray:
        observations = np.asarray(observations, dtype=float)
        if self.config.threat_mode == "plugin":
            return observations

        if not cache:
            return threat_probability(observations, "bayes", self.config.kappa_r, self._danger)

        # Solvers ask repeatedly for the same quadrature nodes
        key = observations.tobytes()
        if key not in self._threat_cache:
            self._threat_cache[key] = threat_probability(
                observations, "bayes", self.config.kappa_r, self._danger
            )
        return self._threat_cache[key]

    def outcomes(self, stage, k, alpha, beta, observations) -> StageOutcome:
        compliance = (np.asarray(alpha) / (np.asarray(alpha) + np.asarray(beta)))[:, None]
        observations = np.asarray(observations, dtype=float)
        # Single-point lookups come from field decisions and are not worth caching
        q = self.threat(observations, cache=observations.size > 1)[None, :]
        rewards = self._rewards

        by_action = []
        success = []
        for action in (0, 1):
            followed = compliance * rewards[:, action][:, None, None]
            opposed = (1.0 - compliance) * rewards[:, 1 - action][:, None, None]
            per_threat = followed + opposed  # (eta, K, 1)
            by_action.append(q * per_threat[1] + (1.0 - q) * per_threat[0])
            success.append(np.broadcast_to(q if action == 1 else 1.0 - q, by_action[-1].shape))

        return StageOutcome(reward=np.stack(by_action, axis=-1), success=np.stack(success, axis=-1))

    def realize(self, stage, k, alpha, beta, observations, actions, rng) -> StageRealization:
        size = np.size(k)
        compliance = np.asarray(alpha) / (np.asarray(alpha) + np.asarray(beta))
        q = self.threat(observations, cache=False)
        actions = np.asarray(actions, dtype=np.int8)

        threat = (rng.random(size) < q).astype(np.int8)
        complies = rng.random(size) < compliance
        human_action = np.where(complies, actions, 1 - actions).astype(np.int8)

        return StageRealization(
            task_reward=self._rewards[threat, human_action],
            success=actions == threat,
            threat=threat,
            human_action=human_action,
            shaping_reward=np.zeros(size),
        )


def expected_stage_outcome(
    state: TrustState, d_r: float, a_r: int, config: SarConfig
) -> tuple[float, float]:
    """(expected task reward, success probability) for one state, estimate and recommendation."""
    outcome = SarStageModel(config).outcomes(
        1, np.array([0]), np.array([state.alpha]), np.array([state.beta]), np.array([d_r])
    )
    return float(outcome.reward[0, 0, a_r]), float(outcome.success[0, 0, a_r])


def build_sar_game(config: SarConfig) -> GameSpec:
    _check_config(config)

    return GameSpec(
        horizon=config.horizon,
        gamma=config.gamma,
        initial=config.initial_trust,
        params=config.trust,
        model=SarStageModel(config),
        observations=observation_quadrature(config),
    )


# =====================================================
# GENERATIVE SITES
# =====================================================

def sample_site(rng: np.random.Generator, config: SarConfig) -> SiteSample:
    d = float(rng.uniform())
    eta = int(rng.random() < d)
    d_h = float(rng.beta(*_beta_shapes(config.kappa_h, d)))
    d_r = float(rng.beta(*_beta_shapes(config.kappa_r, d)))

    return SiteSample(
        d=d,
        eta=eta,
        d_h=min(max(d_h, ESTIMATE_CLIP), 1.0 - ESTIMATE_CLIP),
        d_r=min(max(d_r, ESTIMATE_CLIP), 1.0 - ESTIMATE_CLIP),
    )


DecisionRule = Callable[[int, int, float], int]


def simulate_field_episode(
    config: SarConfig,
    decide: DecisionRule,
    rng: np.random.Generator,
    potential: LinearPotential | None = None,
) -> Trajectory:
    """One mission in the generative site model; ``decide(stage, k, d_r)`` picks a_r."""
    rewards = config.cost_table.reward_matrix(config.w_health, config.w_time)
    state = config.initial_trust
    steps = []
    k = 0

    for stage in range(1, config.horizon + 1):
        site = sample_site(rng, config)
        action = int(decide(stage, k, site.d_r))
        human_action = action if rng.random() < compliance_probability(state) else 1 - action

        performance = 1.0 if action == site.eta else 0.0
        next_state = update_trust(state, performance, config.trust)
        shaping = 0.0
        if potential is not None:
            shaping = config.gamma * potential.of(next_state) - potential.of(state)

        steps.append(
            TrajectoryStep(
                stage=stage,
                state=state,
                observation=site.d_r,
                robot_action=action,
                human_action=human_action,
                threat=site.eta,
                performance=performance,
                task_reward=float(rewards[site.eta, human_action]),
                shaping_reward=shaping,
                next_state=next_state,
                danger=site.d,
                human_estimate=site.d_h,
            )
        )

        state = next_state
        k += int(performance)

    return Trajectory(steps=steps)
