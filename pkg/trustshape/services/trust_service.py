import math

import numpy as np

from trustshape.core.errors import (
    InvalidHorizonError,
    InvalidPerformanceError,
    InvalidStageError,
    InvalidStateError,
)
from trustshape.schemas.trust import FinalTrustLine, TrustLattice, TrustParams, TrustState


def check_state(state: TrustState) -> TrustState:
    alpha, beta = state.alpha, state.beta

    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise InvalidStateError(f"Trust state must be finite, got ({alpha}, {beta})")

    if alpha < 1 or beta < 1:
        raise InvalidStateError(
            f"Trust state requires alpha >= 1 and beta >= 1, got ({alpha}, {beta})"
        )

    return state


def update_trust(state: TrustState, p: float, params: TrustParams) -> TrustState:
    check_state(state)

    if not 0.0 <= p <= 1.0:
        raise InvalidPerformanceError(f"Performance must lie in [0, 1], got {p}")

    return TrustState(
        alpha=state.alpha + params.w_s * p,
        beta=state.beta + params.w_f * (1.0 - p),
    )


def expected_trust(state: TrustState) -> float:
    check_state(state)
    return state.alpha / (state.alpha + state.beta)


def lattice_arrays(
    initial: TrustState, params: TrustParams, stage: int
) -> tuple[np.ndarray, np.ndarray]:
    """(alpha, beta) of every lattice point at ``stage`` as arrays indexed by k."""
    k = np.arange(stage, dtype=float)
    alpha = initial.alpha + params.w_s * k
    beta = initial.beta + params.w_f * (stage - 1 - k)
    return alpha, beta


def reachable_lattice(initial: TrustState, params: TrustParams, stage: int) -> TrustLattice:
    check_state(initial)

    if stage < 1:
        raise InvalidStageError(f"Stage must be >= 1, got {stage}")

    alpha, beta = lattice_arrays(initial, params, stage)
    points = tuple(
        TrustState(alpha=float(a), beta=float(b)) for a, b in zip(alpha, beta)
    )

    return TrustLattice(initial=initial, params=params, stage=stage, points=points)


def final_trust_line(initial: TrustState, params: TrustParams, horizon: int) -> FinalTrustLine:
    check_state(initial)

    if horizon < 1:
        raise InvalidHorizonError(f"Horizon must be >= 1, got {horizon}")

    return FinalTrustLine(initial=initial, params=params, horizon=horizon)


def contains_point(line: FinalTrustLine, state: TrustState, tol: float = 1e-9) -> bool:
    # Each coordinate admits a window of t; the point is on the segment iff the
    # two windows and [0, N] share a value
    t_alpha = (state.alpha - line.initial.alpha) / line.params.w_s
    t_beta = line.horizon - (state.beta - line.initial.beta) / line.params.w_f
    slack_alpha = tol / line.params.w_s
    slack_beta = tol / line.params.w_f

    low = max(t_alpha - slack_alpha, t_beta - slack_beta, 0.0)
    high = min(t_alpha + slack_alpha, t_beta + slack_beta, float(line.horizon))
    return low <= high


def one_step_transitions(
    initial: TrustState, params: TrustParams, horizon: int
) -> list[tuple[TrustState, TrustState]]:
    """Every (s, s_up) and (s, s_down) pair leaving the lattices of stages 1..N."""
    if horizon < 1:
        raise InvalidHorizonError(f"Horizon must be >= 1, got {horizon}")

    transitions = []
    for stage in range(1, horizon + 1):
        for state in reachable_lattice(initial, params, stage).points:
            transitions.append((state, update_trust(state, 1.0, params)))
            transitions.append((state, update_trust(state, 0.0, params)))

    return transitions
