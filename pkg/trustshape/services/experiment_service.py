import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path


from trustshape import __version__
from trustshape.core.config import settings
from trustshape.models.game import GameSpec, PolicyRule, ValueTable
from trustshape.schemas.experiment import (
    EpsilonSummary,
    EpsilonVerification,
    ExperimentConfig,
    LpReport,
    LpRow,
    McCheck,
    PolicyChoice,
    PolicySimulation,
    RunMetadata,
    SimulationReport,
    StateCertificates,
    SweepRow,
    SweepSummary,
    VerifyReport,
)
from trustshape.schemas.game import McEstimate
from trustshape.schemas.shaping import LinearPotential
from trustshape.schemas.trust import TrustState
from trustshape.services.game_service import (
    condition_first_stage,
    evaluate_policy,
    expected_final_trust,
    greedy_action,
    reachable_final_lattice,
    solve_optimal,
    stage_one_q_values,
)
from trustshape.services.lp_service import (
    build_lp,
    sar_shaping_coefficient,
    solve_closed_form,
    verify_loss_constraint,
)
from trustshape.services.sar_service import build_sar_game, simulate_field_episode
from trustshape.services.shaping_service import (
    calibration_check,
    compare_shaped,
    corollary1_bound_check,
    shape_game,
    telescoping_check,
    theorem1_bound_check,
    trust_seeking_check,
)
from trustshape.services.simulation_service import (
    estimate_mean,
    mc_rollout_statistics,
    simulate_rollout,
)
from trustshape.services.trust_service import (
    final_trust_line,
    one_step_transitions,
)
from trustshape.utils.output import canonical_hash, ensure_directory, write_csv, write_json, write_jsonl
from trustshape.utils.rng import substream

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("alpha_1", "beta_1", "epsilon", "action_1", "v_shaped", "v_original", "v_opt", "loss")
LOSS_TOLERANCE = 1e-6

# Substream keys, kept apart from the Monte-Carlo block keys
LOG_STREAM = 101
FIELD_STREAM = 202


def run_metadata(config: ExperimentConfig) -> RunMetadata:
    return RunMetadata(
        config_hash=canonical_hash(config),
        seed=config.seed,
        version=__version__,
        grid=config.grid,
        threat_mode=config.sar.threat_mode,
        first_observation=config.sar.first_observation,
        condition_first_stage=config.condition_first_stage,
    )


def game_for(config: ExperimentConfig, initial: TrustState) -> GameSpec:
    sar = config.sar.model_copy(update={"initial_trust": initial})
    spec = build_sar_game(sar)

    if config.condition_first_stage:
        spec = condition_first_stage(spec, config.sar.first_observation)

    return spec


def designed_potential(config: ExperimentConfig, epsilon: float) -> LinearPotential:
    lp = build_lp(config.sar.trust, config.sar.gamma, config.sar.horizon, epsilon)
    return solve_closed_form(lp).scaled(config.potential_scale)


def _first_action(spec: GameSpec, values: ValueTable, observation: float) -> int:
    q = stage_one_q_values(spec, values, observation)
    return int(q[1] > q[0])


# =====================================================
# SWEEP
# =====================================================

@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    summary: SweepSummary


def _sweep_point(config: ExperimentConfig, alpha: float, beta: float) -> list[SweepRow]:
    spec = game_for(config, TrustState(alpha=alpha, beta=beta))
    optimal = solve_optimal(spec)
    rows = []

    for epsilon in config.epsilons:
        potential = designed_potential(config, epsilon)
        comparison = compare_shaped(spec, potential, optimal=optimal)
        shaped_spec = shape_game(spec, potential)

        rows.append(
            SweepRow(
                alpha_1=alpha,
                beta_1=beta,
                epsilon=epsilon,
                action_1=_first_action(
                    shaped_spec, comparison.shaped_values, config.sar.first_observation
                ),
                v_shaped=comparison.shaped_values.initial_value,
                v_original=comparison.original_values.initial_value,
                v_opt=comparison.optimal_values.initial_value,
                loss=comparison.loss,
            )
        )

    return rows


def _sweep_column(config: ExperimentConfig, alpha: float) -> list[SweepRow]:
    rows = []
    for beta in config.grid.beta_values():
        rows.extend(_sweep_point(config, float(alpha), float(beta)))
    return rows


def _summarize(config: ExperimentConfig, rows: list[SweepRow]) -> SweepSummary:
    summaries = []

    for epsilon in config.epsilons:
        selected = [row for row in rows if row.epsilon == epsilon]
        max_loss = max(row.loss for row in selected)
        summaries.append(
            EpsilonSummary(
                epsilon=epsilon,
                grid_points=len(selected),
                action0_fraction=sum(row.action_1 == 0 for row in selected) / len(selected),
                max_loss=max_loss,
                loss_within_budget=max_loss <= epsilon + LOSS_TOLERANCE,
            )
        )

    return SweepSummary(metadata=run_metadata(config), epsilons=summaries)


def run_sweep(config: ExperimentConfig) -> SweepResult:
    alphas = [float(alpha) for alpha in config.grid.alpha_values()]
    logger.info(
        "Sweeping %d x %d grid over epsilons %s",
        len(alphas),
        len(config.grid.beta_values()),
        config.epsilons,
    )

    if settings.WORKERS > 1:
        with ProcessPoolExecutor(max_workers=settings.WORKERS) as pool:
            columns = list(pool.map(partial(_sweep_column, config), alphas))
    else:
        columns = [_sweep_column(config, alpha) for alpha in alphas]

    rows = sorted(
        (row for column in columns for row in column),
        key=lambda row: (row.epsilon, row.alpha_1, row.beta_1),
    )
    summary = _summarize(config, rows)

    for item in summary.epsilons:
        logger.info(
            "epsilon=%g: action-0 fraction %.3f, max loss %.6g",
            item.epsilon,
            item.action0_fraction,
            item.max_loss,
        )

    return SweepResult(rows=rows, summary=summary)


def write_sweep(result: SweepResult, out_dir: Path) -> list[Path]:
    ensure_directory(out_dir)
    paths = [
        write_csv(out_dir / "sweep.csv", SWEEP_COLUMNS, result.rows),
        write_json(out_dir / "sweep.summary.json", result.summary),
    ]
    logger.info("Wrote %s", ", ".join(str(path) for path in paths))
    return paths


# =====================================================
# VERIFY
# =====================================================

def _policy_for(
    choice: PolicyChoice,
    spec: GameSpec,
    optimal_policy: PolicyRule,
    shaped_policy: PolicyRule | None = None,
) -> PolicyRule:
    if choice == "optimal":
        return optimal_policy
    if choice == "shaped-optimal":
        return shaped_policy
    return PolicyRule.constant(spec, 0 if choice == "always-0" else 1)


def _mc_check(
    config: ExperimentConfig, spec: GameSpec, choice: PolicyChoice, policy: PolicyRule
) -> McCheck:
    exact = evaluate_policy(spec, policy).initial_value
    estimate = mc_rollout_statistics(spec, policy, config.samples, config.seed).value

    return McCheck(
        policy=choice,
        initial=spec.initial,
        exact=exact,
        estimate=estimate,
        agrees=estimate.agrees_with(exact),
    )


def _state_certificates(
    config: ExperimentConfig, initial: TrustState, epsilon: float, potential: LinearPotential
) -> StateCertificates:
    sar = config.sar
    spec = game_for(config, initial)
    comparison = compare_shaped(spec, potential)

    transitions = one_step_transitions(initial, sar.trust, sar.horizon)

    calibration = None
    if config.calibration_target is not None:
        calibration = calibration_check(
            potential, sar.gamma, config.calibration_target, transitions
        )

    return StateCertificates(
        initial=initial,
        loss_constraint=verify_loss_constraint(
            potential,
            final_trust_line(initial, sar.trust, sar.horizon),
            sar.gamma,
            sar.horizon,
            epsilon,
        ),
        corollary1=corollary1_bound_check(
            potential,
            reachable_final_lattice(spec, comparison.shaped_policy),
            reachable_final_lattice(spec, comparison.optimal_policy),
            sar.gamma,
            sar.horizon,
            epsilon,
        ),
        theorem1=theorem1_bound_check(spec, potential, epsilon, comparison=comparison),
        telescoping=[
            telescoping_check(spec, potential, comparison.optimal_policy),
            telescoping_check(spec, potential, comparison.shaped_policy),
        ],
        trust_seeking=trust_seeking_check(potential, sar.gamma, transitions),
        calibration=calibration,
    )


def run_verify(config: ExperimentConfig) -> VerifyReport:
    spec = game_for(config, config.sar.initial_trust)
    _, optimal_policy = solve_optimal(spec)

    baseline = [
        _mc_check(config, spec, choice, _policy_for(choice, spec, optimal_policy))
        for choice in ("optimal", "always-0", "always-1")
    ]

    epsilons = []
    for epsilon in config.epsilons:
        potential = designed_potential(config, epsilon)
        states = [
            _state_certificates(config, initial, epsilon, potential)
            for initial in config.verify_initial_states
        ]

        _, shaped_policy = solve_optimal(shape_game(spec, potential))
        shaped_check = _mc_check(config, spec, "shaped-optimal", shaped_policy)

        passed = all(state.passed for state in states) and shaped_check.agrees
        logger.info("epsilon=%g certificates %s", epsilon, "pass" if passed else "FAIL")

        epsilons.append(
            EpsilonVerification(
                epsilon=epsilon,
                potential=potential,
                states=states,
                monte_carlo=shaped_check,
                passed=passed,
            )
        )

    passed = all(item.passed for item in epsilons) and all(check.agrees for check in baseline)

    return VerifyReport(
        metadata=run_metadata(config),
        passed=passed,
        monte_carlo=baseline,
        epsilons=epsilons,
    )


def write_verify(report: VerifyReport, out_dir: Path) -> Path:
    ensure_directory(out_dir)
    path = write_json(out_dir / "verify.json", report)
    logger.info("Wrote %s", path)
    return path


# =====================================================
# SIMULATE
# =====================================================

@dataclass(frozen=True)
class SimulationResult:
    report: SimulationReport
    trajectories: list[str]


def _field_estimate(
    config: ExperimentConfig,
    decide,
    potential: LinearPotential | None,
    stream: int,
) -> tuple[McEstimate, McEstimate] | tuple[None, None]:
    if config.field_episodes == 0:
        return None, None

    values = []
    trust = []
    for episode in range(config.field_episodes):
        trajectory = simulate_field_episode(
            config.sar, decide, substream(config.seed, FIELD_STREAM, stream, episode), potential
        )
        values.append(trajectory.discounted_reward(config.sar.gamma, include_shaping=False))
        final = trajectory.final_state
        trust.append(final.alpha / (final.alpha + final.beta))

    return estimate_mean(values, config.seed), estimate_mean(trust, config.seed)


def _decision_rule(choice: PolicyChoice, spec: GameSpec, values: ValueTable | None):
    if choice in ("always-0", "always-1"):
        action = 0 if choice == "always-0" else 1
        return lambda stage, k, observation: action

    return lambda stage, k, observation: greedy_action(spec, values, stage, k, observation)


def run_simulate(config: ExperimentConfig, choice: PolicyChoice) -> SimulationResult:
    initial = config.sar.initial_trust
    spec = game_for(config, initial)
    optimal_values, optimal_policy = solve_optimal(spec)

    if choice == "shaped-optimal":
        plans = [(epsilon, designed_potential(config, epsilon)) for epsilon in config.epsilons]
    else:
        plans = [(None, None)]

    runs = []
    trajectories = []

    for index, (epsilon, potential) in enumerate(plans):
        decision_spec, decision_values = spec, optimal_values
        shaped_policy = None
        if potential is not None:
            decision_spec = shape_game(spec, potential)
            decision_values, shaped_policy = solve_optimal(decision_spec)

        policy = _policy_for(choice, spec, optimal_policy, shaped_policy)
        statistics = mc_rollout_statistics(spec, policy, config.samples, config.seed)
        field_value, field_trust = _field_estimate(
            config, _decision_rule(choice, decision_spec, decision_values), potential, index
        )

        runs.append(
            PolicySimulation(
                policy=choice,
                epsilon=epsilon,
                value_exact=evaluate_policy(spec, policy).initial_value,
                value=statistics.value,
                final_trust_exact=expected_final_trust(spec, policy),
                final_trust=statistics.final_trust,
                field_value=field_value,
                field_final_trust=field_trust,
            )
        )

        for episode in range(config.trajectory_log_count):
            trajectory = simulate_rollout(
                spec, policy, substream(config.seed, LOG_STREAM, index, episode)
            )
            record = {"policy": choice, "epsilon": epsilon, "episode": episode}
            trajectories.append(
                '{"run": %s, "trajectory": %s}'
                % (json.dumps(record, separators=(",", ":")), trajectory.model_dump_json())
            )

        logger.info(
            "%s%s: MC value %.4f +/- %.4f, final trust %.4f",
            choice,
            "" if epsilon is None else f" (epsilon={epsilon:g})",
            statistics.value.mean,
            statistics.value.std_error,
            statistics.final_trust.mean,
        )

    report = SimulationReport(metadata=run_metadata(config), initial=initial, runs=runs)
    return SimulationResult(report=report, trajectories=trajectories)


def write_simulation(result: SimulationResult, out_dir: Path) -> Path:
    ensure_directory(out_dir)
    report = result.report
    lines = [
        '{"metadata": %s}' % report.metadata.model_dump_json(),
        *result.trajectories,
        '{"summary": %s}' % report.model_dump_json(exclude={"metadata"}),
    ]
    path = write_jsonl(out_dir / "rollouts.jsonl", lines)
    logger.info("Wrote %s", path)
    return path


# =====================================================
# LP
# =====================================================

def run_lp(config: ExperimentConfig) -> LpReport:
    sar = config.sar
    line = final_trust_line(sar.initial_trust, sar.trust, sar.horizon)
    rows = []

    for epsilon in config.epsilons:
        lp = build_lp(sar.trust, sar.gamma, sar.horizon, epsilon)
        potential = designed_potential(config, epsilon)

        rows.append(
            LpRow(
                epsilon=epsilon,
                bound=lp.bound,
                a=potential.a,
                b=potential.b,
                objective=lp.objective(potential.a, potential.b),
                coefficient=sar_shaping_coefficient(sar.gamma, sar.horizon, epsilon, sar.trust.w_s),
                loss_constraint=verify_loss_constraint(
                    potential, line, sar.gamma, sar.horizon, epsilon
                ),
            )
        )

    return LpReport(metadata=run_metadata(config), rows=rows)
