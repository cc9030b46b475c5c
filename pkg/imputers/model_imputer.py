import logging
from typing import Any, Dict

from core.base_imputer import ImputationResult, Imputer
from core.component_factory import ComponentFactory
from core.datamodel import SampleRecord
from core.exceptions import ConfigError
from inference.imputation import impute_sequence
from models.checkpoint import checkpoint_id, load_checkpoint

logger = logging.getLogger(__name__)


class ModelImputer(Imputer):
    """Imputation with a trained TemporalAttentionUNet.

    Config keys: ``checkpoint`` (path) or ``model`` (an in-memory network),
    ``window_length`` (default 10) and ``device`` (default ``cpu``).
    """

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.window_length = int(config.get("window_length", 10))
        if config.get("model") is not None:
            self.model = config["model"]
            self.checkpoint_id = None
        elif config.get("checkpoint"):
            self.model, extra = load_checkpoint(config["checkpoint"], config.get("device", "cpu"))
            self.checkpoint_id = checkpoint_id(config["checkpoint"])
            logger.info(f"Loaded checkpoint {config['checkpoint']} ({self.checkpoint_id}, {extra})")
        else:
            raise ConfigError("The model imputer needs a checkpoint", {"field": "checkpoint"})

    @property
    def name(self) -> str:
        return "model"

    @property
    def description(self) -> str:
        return (
            "Temporal-attention U-Net regressing every pixel of every frame, "
            "with sliding windows for sequences longer than the training window."
        )

    @property
    def alters_valid_pixels(self) -> bool:
        return True

    def impute(self, record: SampleRecord) -> ImputationResult:
        result = impute_sequence(self.model, record, self.window_length)
        result.metadata.update({"method": self.name, "checkpoint_id": self.checkpoint_id})
        return result


ComponentFactory.register_imputer("model", ModelImputer)
