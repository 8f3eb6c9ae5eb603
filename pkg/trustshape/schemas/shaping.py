from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from trustshape.schemas.trust import TrustState


class LinearPotential(BaseModel):
    """Phi(alpha, beta) = a * alpha + b * beta."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    a: float = Field(0.0, allow_inf_nan=False)
    b: float = Field(0.0, allow_inf_nan=False)

    def __call__(self, alpha, beta):
        return self.a * alpha + self.b * beta

    def of(self, state: TrustState) -> float:
        return self(state.alpha, state.beta)

    def scaled(self, factor: float) -> "LinearPotential":
        return LinearPotential(a=self.a * factor, b=self.b * factor)

    @property
    def is_zero(self) -> bool:
        return self.a == 0.0 and self.b == 0.0


class ShapingBudget(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(..., ge=0, allow_inf_nan=False)


class BoundReport(BaseModel):
    """lhs <= rhs (``le``) or lhs == rhs (``eq``) within ``tolerance``; slack = rhs - lhs."""

    model_config = ConfigDict(frozen=True)

    name: str
    lhs: float
    rhs: float
    relation: Literal["le", "eq"] = "le"
    tolerance: float
    satisfied: bool
    slack: float

    @classmethod
    def at_most(cls, name: str, lhs: float, rhs: float, tolerance: float = 1e-9) -> "BoundReport":
        return cls(
            name=name,
            lhs=lhs,
            rhs=rhs,
            relation="le",
            tolerance=tolerance,
            satisfied=bool(lhs <= rhs + tolerance),
            slack=rhs - lhs,
        )

    @classmethod
    def equal(cls, name: str, lhs: float, rhs: float, tolerance: float = 1e-8) -> "BoundReport":
        return cls(
            name=name,
            lhs=lhs,
            rhs=rhs,
            relation="eq",
            tolerance=tolerance,
            satisfied=bool(abs(lhs - rhs) <= tolerance),
            slack=rhs - lhs,
        )


class TheoremReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    initial: TrustState
    epsilon: float
    hypothesis: BoundReport
    conclusion: BoundReport
    v_opt: float
    v_shaped: float
    v_original: float

    @property
    def loss(self) -> float:
        return self.v_opt - self.v_original


class TransitionViolation(BaseModel):
    model_config = ConfigDict(frozen=True)

    state: TrustState
    next_state: TrustState
    reward: float
    required: Literal["nonnegative", "negative"]


class ConstraintReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    satisfied: bool
    checked: int
    violations: list[TransitionViolation] = []
