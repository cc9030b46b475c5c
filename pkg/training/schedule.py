import torch

from .config import TrainConfig


def lr_at(epoch: int, config: TrainConfig) -> float:
    """Step schedule: the base rate halves every ``halving_period`` epochs."""
    if epoch < 0:
        raise ValueError(f"Epoch must be >= 0, got {epoch}")
    return config.learning_rate * 0.5 ** (epoch // config.halving_period)


def set_learning_rate(optimizer: torch.optim.Optimizer, learning_rate: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = learning_rate
