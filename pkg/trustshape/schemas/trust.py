from pydantic import BaseModel, ConfigDict, Field


class TrustParams(BaseModel):
    """Unit experience gains of the experience-based trust model."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    w_s: float = Field(1.0, gt=0)
    w_f: float = Field(1.0, gt=0)


class TrustState(BaseModel):
    """Experience pair (alpha, beta); trust is Beta(alpha, beta)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(1.0, ge=1)
    beta: float = Field(1.0, ge=1)

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha, self.beta)


class TrustLattice(BaseModel):
    """Trust states reachable at a stage, indexed by success count k."""

    model_config = ConfigDict(frozen=True)

    initial: TrustState
    params: TrustParams
    stage: int = Field(..., ge=1)
    points: tuple[TrustState, ...]

    def point(self, k: int) -> TrustState:
        return self.points[k]


class FinalTrustLine(BaseModel):
    """Segment t in [0, N] -> (alpha_1 + w_s t, beta_1 + w_f (N - t))."""

    model_config = ConfigDict(frozen=True)

    initial: TrustState
    params: TrustParams
    horizon: int = Field(..., ge=1)

    def at(self, t: float) -> tuple[float, float]:
        return (
            self.initial.alpha + self.params.w_s * t,
            self.initial.beta + self.params.w_f * (self.horizon - t),
        )

    @property
    def endpoints(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return self.at(0.0), self.at(float(self.horizon))
