from .losses import (
    CorefContractError,
    LossBreakdown,
    coref_loss,
    flow_loss,
    joint_loss,
    nll_loss,
)
from .loop import TrainingConfig, TrainResult, train, write_training_log

__all__ = [
    "CorefContractError",
    "LossBreakdown",
    "coref_loss",
    "flow_loss",
    "joint_loss",
    "nll_loss",
    "TrainingConfig",
    "TrainResult",
    "train",
    "write_training_log",
]
