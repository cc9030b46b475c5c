from typing import Any, Dict, Optional

from core.base_imputer import ImputationResult, Imputer
from core.component_factory import ComponentFactory
from core.datamodel import SampleRecord

from .temporal_fill import fill_gaps


class LastObservationImputer(Imputer):
    """Carries the most recent valid observation forward."""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}

    @property
    def name(self) -> str:
        return "last"

    @property
    def description(self) -> str:
        return (
            "Copies the last valid observation of each pixel into the following gaps; "
            "leading gaps take the first valid observation."
        )

    def impute(self, record: SampleRecord) -> ImputationResult:
        values, unfilled = fill_gaps(record, "last")
        return ImputationResult(values=values, unfilled=unfilled, metadata={"method": self.name})


ComponentFactory.register_imputer("last", LastObservationImputer)
