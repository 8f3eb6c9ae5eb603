from trustshape.models.game import (
    GameSpec,
    PolicyRule,
    Quadrature,
    StageModel,
    StageOutcome,
    StageRealization,
    TabularStageModel,
    ValueTable,
)

__all__ = [
    "GameSpec",
    "PolicyRule",
    "Quadrature",
    "StageModel",
    "StageOutcome",
    "StageRealization",
    "TabularStageModel",
    "ValueTable",
]
