"""Core seqfill components: data model, errors, configuration and registries."""

from .base_config_provider import ConfigProvider
from .base_imputer import ImputationResult, Imputer, ImputerRegistry
from .component_factory import ComponentFactory
from .datamodel import DatasetManifest, SampleRecord, make_record, validate_sample
from .exceptions import SeqfillError

__all__ = [
    "ConfigProvider",
    "ImputationResult",
    "Imputer",
    "ImputerRegistry",
    "ComponentFactory",
    "DatasetManifest",
    "SampleRecord",
    "make_record",
    "validate_sample",
    "SeqfillError",
]
