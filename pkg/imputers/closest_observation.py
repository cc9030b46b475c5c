from typing import Any, Dict, Optional

from core.base_imputer import ImputationResult, Imputer
from core.component_factory import ComponentFactory
from core.datamodel import SampleRecord

from .temporal_fill import fill_gaps


class ClosestObservationImputer(Imputer):
    """Copies the valid observation nearest in acquisition days."""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}

    @property
    def name(self) -> str:
        return "closest"

    @property
    def description(self) -> str:
        return (
            "Copies the previous or next valid observation of each pixel, whichever "
            "is closer in days; the earlier one on ties."
        )

    def impute(self, record: SampleRecord) -> ImputationResult:
        values, unfilled = fill_gaps(record, "closest")
        return ImputationResult(values=values, unfilled=unfilled, metadata={"method": self.name})


ComponentFactory.register_imputer("closest", ClosestObservationImputer)
