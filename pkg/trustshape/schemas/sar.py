from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from trustshape.schemas.trust import TrustParams, TrustState

ThreatMode = Literal["plugin", "bayes"]

CostPair = tuple[float, float]


class CostTable(BaseModel):
    """(health cost, time cost) for each (threat, gear) outcome."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    threat_gear: CostPair = (1.0, 300.0)
    threat_no_gear: CostPair = (100.0, 50.0)
    clear_gear: CostPair = (0.0, 250.0)
    clear_no_gear: CostPair = (0.0, 30.0)

    @field_validator("threat_gear", "threat_no_gear", "clear_gear", "clear_no_gear")
    @classmethod
    def _nonnegative(cls, value: CostPair) -> CostPair:
        if min(value) < 0:
            raise ValueError("costs must be nonnegative")
        return value

    def cost(self, eta: int, a_h: int) -> CostPair:
        if eta == 1:
            return self.threat_gear if a_h == 1 else self.threat_no_gear
        return self.clear_gear if a_h == 1 else self.clear_no_gear

    def reward_matrix(self, w_health: float, w_time: float) -> np.ndarray:
        """R[eta, a_h] = -w_H * health - w_T * time."""
        matrix = np.empty((2, 2))
        for eta in (0, 1):
            for a_h in (0, 1):
                health, time = self.cost(eta, a_h)
                matrix[eta, a_h] = -w_health * health - w_time * time
        return matrix


def sar_config_problems(config: "SarConfig") -> list[str]:
    problems = []

    if config.kappa_h < 1:
        problems.append(f"kappa_h must be >= 1, got {config.kappa_h}")
    if config.kappa_r <= config.kappa_h:
        problems.append(
            f"kappa_r must exceed kappa_h, got kappa_r={config.kappa_r}, kappa_h={config.kappa_h}"
        )
    if config.w_health < 0 or config.w_time < 0:
        problems.append("weights w_health and w_time must be >= 0")
    if not 0 < config.gamma <= 1:
        problems.append(f"gamma must lie in (0, 1], got {config.gamma}")
    if config.horizon < 1:
        problems.append(f"horizon must be >= 1, got {config.horizon}")
    if config.danger_nodes < 2 or config.estimate_nodes < 2:
        problems.append("danger_nodes and estimate_nodes must be >= 2")
    if not 0 < config.first_observation < 1:
        problems.append(f"first_observation must lie in (0, 1), got {config.first_observation}")

    return problems


class SarConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kappa_h: float = 2.0
    kappa_r: float = 20.0
    w_health: float = 1.0
    w_time: float = 0.2
    cost_table: CostTable = CostTable()
    gamma: float = 0.9
    horizon: int = 10
    trust: TrustParams = TrustParams()
    initial_trust: TrustState = TrustState(alpha=1.0, beta=1.0)
    threat_mode: ThreatMode = "plugin"
    danger_nodes: int = 64
    estimate_nodes: int = 64
    # Robot's danger estimate at the first site
    first_observation: float = 0.06

    @model_validator(mode="after")
    def _check_invariants(self) -> "SarConfig":
        problems = sar_config_problems(self)
        if problems:
            raise ValueError("; ".join(problems))
        return self


class SiteSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    d: float = Field(..., ge=0, le=1)
    eta: int = Field(..., ge=0, le=1)
    d_h: float = Field(..., gt=0, lt=1)
    d_r: float = Field(..., gt=0, lt=1)
