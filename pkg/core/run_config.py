"""Validated run configuration shared by every CLI command."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from gapsim.gaps import GapSpec
from gapsim.synthetic import SyntheticSceneParams
from models.config import ModelConfig
from providers.yaml_config_provider import DEFAULT_CONFIG_PATHS
from training.config import TrainConfig

from .component_factory import ComponentFactory
from .datamodel import SPLITS
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

DATA_ROOT_ENV = "SEQFILL_DATA_ROOT"
DEFAULT_DATA_ROOT = "./data"

Method = Literal["last", "closest", "linear", "model"]


class DataConfig(BaseModel):
    """Dataset locations. Relative directories live under ``root``."""

    model_config = ConfigDict(extra="forbid")

    root: Optional[Path] = None
    clean_dir: str = "clean"
    masked_dir: str = "masked"
    imputed_dir: str = "imputed"

    def split_dir(self, kind: Literal["clean", "masked", "imputed"], split: str) -> Path:
        directory = {"clean": self.clean_dir, "masked": self.masked_dir, "imputed": self.imputed_dir}[kind]
        return Path(self.root) / directory / split


class SynthConfig(SyntheticSceneParams):
    """Scene parameters plus the size and split of a synthetic dataset."""

    num_samples: int = Field(100, ge=1)
    val_fraction: float = Field(0.15, ge=0.0, lt=1.0)
    test_fraction: float = Field(0.15, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def _fractions_leave_training_data(self) -> "SynthConfig":
        if self.val_fraction + self.test_fraction >= 1.0:
            raise ValueError("val_fraction + test_fraction must leave samples for training")
        return self

    def scene_params(self) -> SyntheticSceneParams:
        return SyntheticSceneParams(**self.model_dump(include=set(SyntheticSceneParams.model_fields)))

    def split_counts(self) -> Dict[str, int]:
        val = int(round(self.num_samples * self.val_fraction))
        test = int(round(self.num_samples * self.test_fraction))
        return {"train": self.num_samples - val - test, "val": val, "test": test}


class InferenceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    window_length: Optional[int] = Field(None, ge=1)
    split: str = "test"
    export_attention: bool = True
    max_attention_exports: int = Field(5, ge=0)


class EvaluationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    methods: List[Method] = ["last", "closest", "linear", "model"]
    splits: List[str] = ["test"]
    plot: bool = True


class LoggingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    level: str = "INFO"
    format: Optional[str] = None
    file: Optional[Path] = None
    max_file_size: int = Field(10 * 1024 * 1024, ge=1)
    backup_count: int = Field(5, ge=0)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: Path = Path("./runs")
    checkpoint: Optional[Path] = None

    @property
    def checkpoint_path(self) -> Path:
        return self.checkpoint if self.checkpoint is not None else self.dir / "checkpoint.seqfill"


class RunConfig(BaseModel):
    """All sections of a run; unknown keys are rejected.

    A top-level ``seed`` overrides the seeds of the ``synth``, ``gaps`` and
    ``train`` sections.
    """

    model_config = ConfigDict(extra="forbid")

    data: DataConfig = Field(default_factory=DataConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    gaps: GapSpec = Field(default_factory=GapSpec)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    inference: InferenceConfig = Field(default_factory=InferenceConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _propagate_seed_and_resolve(self) -> "RunConfig":
        if self.seed is not None:
            self.synth.seed = self.seed
            self.gaps.seed = self.seed
            self.train.seed = self.seed

        for split in self.evaluation.splits + [self.inference.split]:
            if split not in SPLITS:
                raise ValueError(f"Unknown split tag: {split}")

        root = self.data.root or Path(os.environ.get(DATA_ROOT_ENV, DEFAULT_DATA_ROOT))
        self.data.root = Path(root).expanduser().resolve()
        if self.gaps.mask_pool:
            self.gaps.mask_pool = str((self.data.root / self.gaps.mask_pool).resolve())
        self.output.dir = self.output.dir.expanduser().resolve()
        if self.output.checkpoint is not None:
            self.output.checkpoint = self.output.checkpoint.expanduser().resolve()
        if self.logging.file is not None:
            self.logging.file = self.logging.file.expanduser().resolve()
        return self

    @property
    def window_length(self) -> int:
        return self.inference.window_length or self.train.window_length


def load_run_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    extra_paths: Sequence[Union[str, Path]] = (),
) -> RunConfig:
    """
    Merge flags, ``SEQFILL_*`` environment variables and YAML files into a RunConfig.

    Args:
        config_path: User config file, merged over the packaged defaults
        overrides: Nested mapping of command-line values
        extra_paths: Further YAML files merged before ``config_path``

    Returns:
        Validated RunConfig with resolved paths

    Raises:
        ConfigError: ``config_path`` does not exist or a file fails to parse
        pydantic.ValidationError: Unknown keys or invalid values
    """
    paths: List[str] = list(DEFAULT_CONFIG_PATHS) + [str(p) for p in extra_paths]
    if config_path is not None:
        if not Path(config_path).exists():
            raise ConfigError(f"Config file not found: {config_path}", {"field": "--config"})
        paths.append(str(config_path))

    provider = ComponentFactory.create_config_provider(paths, overrides=overrides)
    merged = provider.as_dict()
    logger.debug(f"Merged configuration sections: {sorted(merged)}")
    return RunConfig.model_validate(merged)
