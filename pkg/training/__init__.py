"""Supervised training on gap-simulated sequences."""

from .augment import Augmentation, apply_augmentation, sample_augmentation
from .batch import TrainingBatch, collate_sequences
from .config import TrainConfig
from .dataset import GapSimulatedDataset
from .loss import pad_flags_from_lengths, sequence_l1_loss
from .schedule import lr_at
from .trainer import FitResult, Trainer, TrainState, load_train_state, save_train_state

__all__ = [
    "Augmentation",
    "apply_augmentation",
    "sample_augmentation",
    "TrainingBatch",
    "collate_sequences",
    "TrainConfig",
    "GapSimulatedDataset",
    "pad_flags_from_lengths",
    "sequence_l1_loss",
    "lr_at",
    "FitResult",
    "Trainer",
    "TrainState",
    "load_train_state",
    "save_train_state",
]
