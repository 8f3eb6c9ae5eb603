import numpy as np
import pytest

from trustshape.models.game import GameSpec, Quadrature, TabularStageModel
from trustshape.schemas.experiment import ExperimentConfig, GridSpec
from trustshape.schemas.sar import SarConfig
from trustshape.schemas.trust import TrustParams, TrustState


def make_tabular_game(
    rng: np.random.Generator,
    horizon: int,
    nodes: int = 2,
    gamma: float = 0.9,
    initial: TrustState | None = None,
    params: TrustParams | None = None,
) -> GameSpec:
    """Random game with explicit per-stage reward and success tables."""
    points = np.sort(rng.uniform(0.05, 0.95, size=nodes))
    weights = rng.dirichlet(np.ones(nodes))

    rewards = tuple(rng.normal(size=(n, nodes, 2)) for n in range(1, horizon + 1))
    success = tuple(rng.uniform(size=(n, nodes, 2)) for n in range(1, horizon + 1))

    return GameSpec(
        horizon=horizon,
        gamma=gamma,
        initial=initial or TrustState(),
        params=params or TrustParams(),
        model=TabularStageModel(nodes=points, rewards=rewards, success=success),
        observations=Quadrature(nodes=points, weights=weights),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def tabular_game(rng):
    return make_tabular_game(rng, horizon=4, nodes=3)


@pytest.fixture
def sar_config():
    return SarConfig()


@pytest.fixture
def small_sar_config():
    return SarConfig(horizon=4, danger_nodes=16, estimate_nodes=8)


@pytest.fixture
def small_experiment(tmp_path):
    return ExperimentConfig(
        grid=GridSpec(alpha_min=1, alpha_max=11, beta_min=1, beta_max=11, step=2.5),
        output_dir=str(tmp_path / "out"),
        samples=2000,
        verify_initial_states=[TrustState(alpha=1, beta=1), TrustState(alpha=4, beta=1)],
        trajectory_log_count=3,
        field_episodes=20,
    )
