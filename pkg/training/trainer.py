import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import pandas as pd
import torch
from torch.utils.data import DataLoader

from core.exceptions import TrainingError
from models.checkpoint import save_checkpoint
from models.network import TemporalAttentionUNet

from .batch import TrainingBatch, collate_sequences
from .config import TrainConfig
from .dataset import GapSimulatedDataset
from .loss import sequence_l1_loss
from .schedule import lr_at, set_learning_rate

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["epoch", "train_loss", "val_loss", "lr", "wall_time"]


@dataclass
class TrainState:
    """Everything besides the weights needed to resume a run.

    Attributes:
        epoch: Index of the next epoch to run
        best_val_loss: Lowest validation loss seen
        best_epoch: Epoch that reached ``best_val_loss``
        bad_epochs: Consecutive epochs without sufficient improvement
        history: Log rows of the epochs run so far
    """

    epoch: int = 0
    best_val_loss: float = math.inf
    best_epoch: int = -1
    bad_epochs: int = 0
    history: List[Dict[str, float]] = field(default_factory=list)


@dataclass
class FitResult:
    checkpoint_path: Optional[Path]
    log: pd.DataFrame
    state: TrainState
    stopped_early: bool


def resolve_device(name: str) -> torch.device:
    if name == "auto":
        return torch.device("cuda" if torch.cuda.is_available() else "cpu")
    return torch.device(name)


class Trainer:
    """Adam optimization of the network on gap-simulated sequences."""

    def __init__(self, model: TemporalAttentionUNet, config: TrainConfig):
        self.config = config
        self.device = resolve_device(config.device)
        self.model = model.to(self.device)
        self.optimizer = torch.optim.Adam(
            self.model.parameters(),
            lr=config.learning_rate,
            betas=tuple(config.betas),
            weight_decay=config.weight_decay,
        )
        self.state = TrainState()

    def _loader(self, dataset: GapSimulatedDataset, shuffle: bool) -> DataLoader:
        generator = torch.Generator()
        generator.manual_seed(self.config.seed * 1_000_003 + self.state.epoch)
        return DataLoader(
            dataset,
            batch_size=self.config.batch_size,
            shuffle=shuffle,
            generator=generator,
            collate_fn=collate_sequences,
            num_workers=self.config.num_workers,
        )

    def _loss(self, batch: TrainingBatch) -> torch.Tensor:
        batch = batch.to(self.device)
        prediction, _ = self.model(batch.images, batch.days)
        loss = sequence_l1_loss(prediction, batch.target, batch.pad_flags)
        if not torch.isfinite(loss):
            raise TrainingError(
                f"Non-finite loss at epoch {self.state.epoch}",
                {"sample_ids": ", ".join(batch.sample_ids)},
            )
        return loss

    def train_epoch(self, dataset: GapSimulatedDataset) -> float:
        """
        Run one pass over ``dataset`` with fresh gaps for epoch ``state.epoch``.

        Returns:
            Mean training loss over sequences

        Raises:
            TrainingError: On a non-finite loss, naming the batch's samples
        """
        learning_rate = lr_at(self.state.epoch, self.config)
        set_learning_rate(self.optimizer, learning_rate)
        dataset.set_epoch(self.state.epoch)

        self.model.train()
        total, count = 0.0, 0
        for batch in self._loader(dataset, shuffle=True):
            loss = self._loss(batch)
            self.optimizer.zero_grad()
            loss.backward()
            self.optimizer.step()
            total += loss.item() * len(batch)
            count += len(batch)
            logger.debug(f"Epoch {self.state.epoch} batch {batch.sample_ids}: loss {loss.item():.6f}")
        return total / count

    def validation_loss(self, dataset: GapSimulatedDataset) -> float:
        """Mean loss over a split with fixed gaps, without updating weights."""
        self.model.eval()
        total, count = 0.0, 0
        with torch.no_grad():
            for batch in self._loader(dataset, shuffle=False):
                loss = self._loss(batch)
                total += loss.item() * len(batch)
                count += len(batch)
        return total / count

    def fit(
        self,
        train_set: GapSimulatedDataset,
        val_set: GapSimulatedDataset,
        checkpoint_path: Union[str, Path],
        log_path: Optional[Union[str, Path]] = None,
        state_path: Optional[Union[str, Path]] = None,
        on_epoch: Optional[Callable[[Dict[str, float]], None]] = None,
    ) -> FitResult:
        """
        Train until validation stops improving or ``max_epochs`` is reached.

        The weights with the lowest validation loss are written to
        ``checkpoint_path``. Training stops once the validation loss has
        failed to improve by more than ``min_delta`` for more than
        ``patience`` consecutive epochs.

        Args:
            train_set: Training split
            val_set: Validation split, disjoint from ``train_set``
            checkpoint_path: Best-weights checkpoint file
            log_path: CSV training log, appended one row per epoch
            state_path: Resume file refreshed after every epoch
            on_epoch: Called with each log row

        Returns:
            FitResult with the checkpoint path, log and final state

        Raises:
            TrainingError: Empty or overlapping splits
        """
        if len(train_set) == 0 or len(val_set) == 0:
            raise TrainingError("Training needs non-empty train and validation splits")
        overlap = sorted(set(train_set.sample_ids) & set(val_set.sample_ids))
        if overlap:
            raise TrainingError(
                "Train and validation splits share samples", {"sample_ids": ", ".join(overlap[:5])}
            )

        checkpoint_path = Path(checkpoint_path)
        stopped_early = False
        while self.state.epoch < self.config.max_epochs:
            started = time.perf_counter()
            epoch = self.state.epoch
            train_loss = self.train_epoch(train_set)
            val_loss = self.validation_loss(val_set)
            row = {
                "epoch": epoch,
                "train_loss": train_loss,
                "val_loss": val_loss,
                "lr": lr_at(epoch, self.config),
                "wall_time": time.perf_counter() - started,
            }
            self.state.history.append(row)
            if log_path is not None:
                append_log_row(log_path, row)

            if val_loss < self.state.best_val_loss - self.config.min_delta:
                self.state.best_val_loss = val_loss
                self.state.best_epoch = epoch
                self.state.bad_epochs = 0
                save_checkpoint(
                    self.model, checkpoint_path, extra={"epoch": epoch, "val_loss": val_loss}
                )
            else:
                self.state.bad_epochs += 1

            logger.info(
                f"Epoch {epoch}: train {train_loss:.5f}, val {val_loss:.5f}, "
                f"lr {row['lr']:.2e}, best epoch {self.state.best_epoch}"
            )
            self.state.epoch += 1
            if state_path is not None:
                save_train_state(state_path, self)
            if on_epoch is not None:
                on_epoch(row)

            if self.state.bad_epochs > self.config.patience:
                logger.info(f"Validation loss converged, stopping after epoch {epoch}")
                stopped_early = True
                break

        return FitResult(
            checkpoint_path=checkpoint_path if checkpoint_path.exists() else None,
            log=pd.DataFrame(self.state.history, columns=LOG_COLUMNS),
            state=self.state,
            stopped_early=stopped_early,
        )


def append_log_row(path: Union[str, Path], row: Dict[str, Any]) -> None:
    """Append one row to the CSV training log, writing the header on first use."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row], columns=LOG_COLUMNS)
    frame.to_csv(path, mode="a", header=not path.exists(), index=False)


def save_train_state(path: Union[str, Path], trainer: Trainer) -> Path:
    """Serialize weights, optimizer moments, schedule position and torch rng."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "model": trainer.model.state_dict(),
            "model_config": trainer.model.config.model_dump(),
            "optimizer": trainer.optimizer.state_dict(),
            "state": asdict(trainer.state),
            "torch_rng": torch.get_rng_state(),
        },
        path,
    )
    return path


def load_train_state(path: Union[str, Path], trainer: Trainer) -> TrainState:
    """Restore a trainer in place from :func:`save_train_state` output."""
    payload = torch.load(Path(path), map_location=trainer.device, weights_only=False)
    if payload["model_config"] != trainer.model.config.model_dump():
        raise TrainingError(
            "Train state was written for a different model configuration", {"path": str(path)}
        )
    trainer.model.load_state_dict(payload["model"])
    trainer.optimizer.load_state_dict(payload["optimizer"])
    trainer.state = TrainState(**payload["state"])
    torch.set_rng_state(payload["torch_rng"].cpu())
    logger.info(f"Resumed training state at epoch {trainer.state.epoch} from {path}")
    return trainer.state
