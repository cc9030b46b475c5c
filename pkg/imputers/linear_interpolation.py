from typing import Any, Dict, Optional

from core.base_imputer import ImputationResult, Imputer
from core.component_factory import ComponentFactory
from core.datamodel import SampleRecord

from .temporal_fill import fill_gaps


class LinearInterpolationImputer(Imputer):
    """Interpolates linearly in time between the surrounding valid observations."""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}

    @property
    def name(self) -> str:
        return "linear"

    @property
    def description(self) -> str:
        return (
            "Interpolates each pixel linearly over the day span between the previous "
            "and next valid observation; gaps at either end take the nearest value."
        )

    def impute(self, record: SampleRecord) -> ImputationResult:
        values, unfilled = fill_gaps(record, "linear")
        return ImputationResult(values=values, unfilled=unfilled, metadata={"method": self.name})


ComponentFactory.register_imputer("linear", LinearInterpolationImputer)
