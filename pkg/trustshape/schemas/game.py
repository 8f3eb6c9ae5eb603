from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from trustshape.schemas.trust import TrustState


class TrajectoryStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    stage: int
    state: TrustState
    observation: float
    robot_action: int
    human_action: Optional[int] = None
    threat: Optional[int] = None
    performance: float
    task_reward: float
    shaping_reward: float = 0.0
    next_state: TrustState

    # Present only for field episodes drawn from the generative site model
    danger: Optional[float] = None
    human_estimate: Optional[float] = None


class Trajectory(BaseModel):
    steps: list[TrajectoryStep]

    @property
    def final_state(self) -> TrustState:
        return self.steps[-1].next_state

    def discounted_reward(self, gamma: float, include_shaping: bool = True) -> float:
        total = 0.0
        for step in self.steps:
            reward = step.task_reward + (step.shaping_reward if include_shaping else 0.0)
            total += gamma ** (step.stage - 1) * reward
        return total


class McEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    std_error: float = Field(..., ge=0)
    samples: int = Field(..., ge=1)
    seed: int

    def agrees_with(self, exact: float, z: float = 3.0) -> bool:
        return abs(self.mean - exact) <= z * self.std_error + 1e-12
