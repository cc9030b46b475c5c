"""Provider implementations for seqfill."""

from .filesystem_sample_store import FileSystemSampleStore, load_sample, save_sample
from .yaml_config_provider import YAMLConfigProvider, save_config

__all__ = [
    "FileSystemSampleStore",
    "load_sample",
    "save_sample",
    "YAMLConfigProvider",
    "save_config",
]
