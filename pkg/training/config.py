from typing import Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field


class TrainConfig(BaseModel):
    """Optimization settings.

    ``learning_rate`` may be 0, which freezes the weights; useful for
    checking that an epoch leaves the model untouched.
    """

    model_config = ConfigDict(extra="forbid")

    window_length: int = Field(10, ge=1)
    batch_size: int = Field(3, ge=1)
    learning_rate: float = Field(2e-4, ge=0.0)
    halving_period: int = Field(50, ge=1)
    weight_decay: float = Field(0.0, ge=0.0)
    betas: Tuple[float, float] = (0.9, 0.999)
    max_epochs: int = Field(200, ge=1)
    patience: int = Field(10, ge=0)
    min_delta: float = Field(1e-5, ge=0.0)
    augment: bool = True
    num_workers: int = Field(0, ge=0)
    device: Literal["cpu", "cuda", "auto"] = "cpu"
    seed: int = 0
