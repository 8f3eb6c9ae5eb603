from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from trustshape.core.config import settings
from trustshape.schemas.game import McEstimate
from trustshape.schemas.sar import SarConfig, ThreatMode
from trustshape.schemas.shaping import BoundReport, ConstraintReport, LinearPotential, TheoremReport
from trustshape.schemas.trust import TrustState

PolicyChoice = Literal["optimal", "shaped-optimal", "always-0", "always-1"]


class GridSpec(BaseModel):
    """Initial-trust grid [alpha_min, alpha_max] x [beta_min, beta_max] with a shared step."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha_min: float = Field(1.0, ge=1)
    alpha_max: float = 11.0
    beta_min: float = Field(1.0, ge=1)
    beta_max: float = 11.0
    step: float = Field(0.25, gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> "GridSpec":
        if self.alpha_max < self.alpha_min or self.beta_max < self.beta_min:
            raise ValueError("grid upper bounds must not be below the lower bounds")
        return self

    def _axis(self, lower: float, upper: float) -> np.ndarray:
        count = int(np.floor((upper - lower) / self.step + 1e-9)) + 1
        return np.round(lower + self.step * np.arange(count), 12)

    def alpha_values(self) -> np.ndarray:
        return self._axis(self.alpha_min, self.alpha_max)

    def beta_values(self) -> np.ndarray:
        return self._axis(self.beta_min, self.beta_max)


def _default_verify_states() -> list[TrustState]:
    return [
        TrustState(alpha=1.0, beta=1.0),
        TrustState(alpha=4.0, beta=1.0),
        TrustState(alpha=1.0, beta=4.0),
        TrustState(alpha=6.0, beta=6.0),
    ]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    sar: SarConfig = SarConfig()
    epsilons: list[float] = [0.0, 30.0, 100.0, 300.0]
    grid: GridSpec = GridSpec()
    output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    seed: int = Field(0, ge=0)
    samples: int = Field(200_000, ge=1)
    # Stage-1 quantities use the observed d_r_1 instead of the d_r marginal
    condition_first_stage: bool = True
    verify_initial_states: list[TrustState] = Field(default_factory=_default_verify_states)
    calibration_target: Optional[float] = Field(None, gt=0, lt=1)
    # Multiplies the designed potential; 1.0 leaves it as designed
    potential_scale: float = Field(1.0, ge=0)
    trajectory_log_count: int = Field(20, ge=0)
    field_episodes: int = Field(2000, ge=0)

    @field_validator("epsilons")
    @classmethod
    def _budgets(cls, value: list[float]) -> list[float]:
        if not value:
            raise ValueError("at least one epsilon is required")
        if any(epsilon < 0 for epsilon in value):
            raise ValueError("epsilon entries must be >= 0")
        return value

    @property
    def threat_mode(self) -> ThreatMode:
        return self.sar.threat_mode


# =====================================================
# OUTPUT RECORDS
# =====================================================

class RunMetadata(BaseModel):
    config_hash: str
    seed: int
    version: str
    grid: GridSpec
    threat_mode: ThreatMode
    first_observation: float
    condition_first_stage: bool


class SweepRow(BaseModel):
    alpha_1: float
    beta_1: float
    epsilon: float
    action_1: int
    v_shaped: float
    v_original: float
    v_opt: float
    loss: float


class EpsilonSummary(BaseModel):
    epsilon: float
    grid_points: int
    action0_fraction: float
    max_loss: float
    loss_within_budget: bool


class SweepSummary(BaseModel):
    metadata: RunMetadata
    epsilons: list[EpsilonSummary]


class McCheck(BaseModel):
    policy: PolicyChoice
    initial: TrustState
    exact: float
    estimate: McEstimate
    agrees: bool


class StateCertificates(BaseModel):
    initial: TrustState
    loss_constraint: BoundReport
    corollary1: BoundReport
    theorem1: TheoremReport
    telescoping: list[BoundReport]
    # Informational: the designed potential only fixes the up-versus-down gap
    trust_seeking: ConstraintReport
    calibration: Optional[ConstraintReport] = None

    @property
    def passed(self) -> bool:
        return (
            self.loss_constraint.satisfied
            and self.corollary1.satisfied
            and self.theorem1.hypothesis.satisfied
            and self.theorem1.conclusion.satisfied
            and all(report.satisfied for report in self.telescoping)
        )


class EpsilonVerification(BaseModel):
    epsilon: float
    potential: LinearPotential
    states: list[StateCertificates]
    monte_carlo: McCheck
    passed: bool


class VerifyReport(BaseModel):
    metadata: RunMetadata
    passed: bool
    monte_carlo: list[McCheck]
    epsilons: list[EpsilonVerification]


class PolicySimulation(BaseModel):
    policy: PolicyChoice
    epsilon: Optional[float] = None
    value_exact: float
    value: McEstimate
    final_trust_exact: float
    final_trust: McEstimate
    field_value: Optional[McEstimate] = None
    field_final_trust: Optional[McEstimate] = None


class SimulationReport(BaseModel):
    metadata: RunMetadata
    initial: TrustState
    runs: list[PolicySimulation]


class LpRow(BaseModel):
    epsilon: float
    bound: float
    a: float
    b: float
    objective: float
    coefficient: float
    loss_constraint: BoundReport


class LpReport(BaseModel):
    metadata: RunMetadata
    rows: list[LpRow]
