from brainbench.graph_models.gnn import (
    ARCHITECTURES,
    DEFAULT_DENSITY,
    GNNSpec,
    GraphNet,
    build_graph_net,
    gnn_forward,
    residual_augment,
)
from brainbench.graph_models.sweep import SweepResult, density_sweep, run_seeds
from brainbench.graph_models.train import (
    TrainConfig,
    Trainer,
    TrainHistory,
    TrainingDiverged,
    fit_model,
    train,
)
