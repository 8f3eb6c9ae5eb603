from trustshape.schemas.lp import LpSpec
from trustshape.schemas.shaping import BoundReport, LinearPotential
from trustshape.schemas.trust import FinalTrustLine, TrustParams


def build_lp(params: TrustParams, gamma: float, horizon: int, epsilon: float) -> LpSpec:
    # Phi linear on the final-trust line: max - min = N * |a w_s - b w_f|
    return LpSpec(w_s=params.w_s, w_f=params.w_f, gamma=gamma, horizon=horizon, epsilon=epsilon)


def solve_closed_form(lp: LpSpec) -> LinearPotential:
    # With b = 0 the objective is the constrained quantity itself, so the upper bound is attained
    return LinearPotential(a=lp.bound / lp.w_s, b=0.0)


def verify_loss_constraint(
    potential: LinearPotential,
    line: FinalTrustLine,
    gamma: float,
    horizon: int,
    epsilon: float,
) -> BoundReport:
    start, end = line.endpoints
    values = (potential(*start), potential(*end))

    return BoundReport.at_most(
        "loss_constraint", max(values) - min(values), gamma ** (-horizon) * epsilon
    )


def sar_shaping_coefficient(gamma: float, horizon: int, epsilon: float, w_s: float) -> float:
    """c such that R^t(alpha, beta, alpha', beta') = c * (gamma * alpha' - alpha)."""
    return gamma ** (-horizon) * epsilon / (horizon * w_s)
