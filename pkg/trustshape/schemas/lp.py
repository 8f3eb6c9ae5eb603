from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class LpSpec(BaseModel):
    """max a*w_s - b*w_f  s.t.  -bound <= a*w_s - b*w_f <= bound, bound = gamma^-N * eps / N."""

    model_config = ConfigDict(frozen=True)

    w_s: float = Field(..., gt=0)
    w_f: float = Field(..., gt=0)
    gamma: float = Field(..., gt=0, le=1)
    horizon: int = Field(..., ge=1)
    epsilon: float = Field(..., ge=0)
    normalization: Literal["b_zero"] = "b_zero"

    @property
    def bound(self) -> float:
        return self.gamma ** (-self.horizon) * self.epsilon / self.horizon

    def objective(self, a: float, b: float) -> float:
        return a * self.w_s - b * self.w_f

    def is_feasible(self, a: float, b: float, tol: float = 1e-12) -> bool:
        return abs(self.objective(a, b)) <= self.bound + tol
