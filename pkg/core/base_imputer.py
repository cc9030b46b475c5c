from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .datamodel import SampleRecord, validate_sample
from .exceptions import SampleValidationError


@dataclass
class ImputationResult:
    """Represents the output of one imputation run on a single sequence.

    Attributes:
        values: Gap-free volume (T, C_out, H, W) over the reconstruct channels
        unfilled: Boolean (H, W) map of pixels that had no valid observation
            anywhere in the sequence and could not be filled
        attention: Per-window attention volumes, for methods that produce them
        metadata: Method-specific provenance (window plan, checkpoint id, ...)
    """

    values: np.ndarray
    unfilled: Optional[np.ndarray] = None
    attention: Optional[List[np.ndarray]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def num_unfilled(self) -> int:
        return 0 if self.unfilled is None else int(np.count_nonzero(self.unfilled))


class Imputer(ABC):
    """Abstract base class for sequence imputation methods."""

    @property
    @abstractmethod
    def name(self) -> str:
        """
        Get the registry name of this method.

        Returns:
            Method name (e.g. ``linear``)
        """
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """
        Get a description of how this method fills gaps.

        Returns:
            Method description
        """
        pass

    @abstractmethod
    def impute(self, record: SampleRecord) -> ImputationResult:
        """
        Fill the missing observations of an imprinted record.

        Args:
            record: Record whose mask marks missing pixels with 0

        Returns:
            ImputationResult holding the reconstruct channels of every frame
        """
        pass

    @property
    def alters_valid_pixels(self) -> bool:
        """Whether the method may change pixels that were observed."""
        return False

    def validate_input(self, record: SampleRecord) -> None:
        """
        Validate a record before imputation.

        Args:
            record: Record to check

        Raises:
            SampleValidationError: If the record breaks a data-model invariant
        """
        report = validate_sample(record)
        if not report.passed:
            raise SampleValidationError(
                f"Sample {record.sample_id} cannot be imputed by {self.name}",
                {"sample_id": record.sample_id, "violations": "; ".join(report.violations)},
            )

    def __str__(self) -> str:
        return f"{self.name}: {self.description}"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}')"


class ImputerRegistry:
    """Ordered collection of imputation methods to compare."""

    def __init__(self):
        self._imputers: Dict[str, Imputer] = {}

    def register_imputer(self, imputer: Imputer) -> None:
        self._imputers[imputer.name] = imputer

    def unregister_imputer(self, name: str) -> bool:
        """
        Remove a method from the registry.

        Returns:
            True if the method was found and removed, False otherwise
        """
        return self._imputers.pop(name, None) is not None

    def get_imputer(self, name: str) -> Optional[Imputer]:
        return self._imputers.get(name)

    def list_imputers(self) -> List[str]:
        return list(self._imputers.keys())

    def get_all_imputers(self) -> List[Imputer]:
        return list(self._imputers.values())

    def __len__(self) -> int:
        return len(self._imputers)
