import copy
import os
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Mapping, Optional


class ConfigProvider(ABC):
    """Abstract base class for configuration providers."""

    @abstractmethod
    def get_config(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value by key.

        Args:
            key: Configuration key (dot notation, e.g., 'train.batch_size')
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        pass

    @abstractmethod
    def has_config(self, key: str) -> bool:
        """
        Check if a configuration key exists.

        Args:
            key: Configuration key to check

        Returns:
            True if key exists, False otherwise
        """
        pass

    @abstractmethod
    def get_section(self, section: str) -> Dict[str, Any]:
        """
        Get an entire configuration section.

        Args:
            section: Section name

        Returns:
            Dictionary containing section configuration
        """
        pass

    @abstractmethod
    def list_sections(self) -> List[str]:
        """List the top-level sections this provider knows about."""
        pass

    def as_dict(self) -> Dict[str, Any]:
        """Materialize every section into one nested dictionary."""
        return {section: self.get_section(section) for section in self.list_sections()}


def deep_merge(target: Dict[str, Any], source: Mapping[str, Any]) -> Dict[str, Any]:
    """Deep merge source into target (source wins) and return target."""
    for key, value in source.items():
        if key in target and isinstance(target[key], dict) and isinstance(value, Mapping):
            deep_merge(target[key], value)
        else:
            target[key] = copy.deepcopy(value)
    return target


def _get_nested(data: Mapping[str, Any], key_path: str, default: Any = None) -> Any:
    current: Any = data
    for key in key_path.split("."):
        if isinstance(current, Mapping) and key in current:
            current = current[key]
        else:
            return default
    return current


def _set_nested(data: Dict[str, Any], key_path: str, value: Any) -> None:
    keys = key_path.split(".")
    current = data
    for key in keys[:-1]:
        if not isinstance(current.get(key), dict):
            current[key] = {}
        current = current[key]
    current[keys[-1]] = value


class DictConfigProvider(ConfigProvider):
    """Configuration held in a nested dictionary (defaults, flag overrides)."""

    def __init__(self, data: Optional[Mapping[str, Any]] = None):
        self.data: Dict[str, Any] = copy.deepcopy(dict(data or {}))

    def get_config(self, key: str, default: Any = None) -> Any:
        return _get_nested(self.data, key, default)

    def set_config(self, key: str, value: Any) -> None:
        _set_nested(self.data, key, value)

    def has_config(self, key: str) -> bool:
        marker = object()
        return _get_nested(self.data, key, marker) is not marker

    def get_section(self, section: str) -> Dict[str, Any]:
        value = _get_nested(self.data, section, {})
        return copy.deepcopy(value) if isinstance(value, dict) else {}

    def list_sections(self) -> List[str]:
        return sorted(self.data.keys())

    def as_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.data)


class CompositeConfigProvider(ConfigProvider):
    """Configuration provider that chains multiple providers with precedence."""

    def __init__(self, providers: List[ConfigProvider]):
        """
        Initialize with ordered list of providers (highest precedence first).

        Args:
            providers: List of config providers in precedence order
        """
        self.providers = providers

    def get_config(self, key: str, default: Any = None) -> Any:
        """Get config value from first provider that has it."""
        for provider in self.providers:
            if provider.has_config(key):
                return provider.get_config(key, default)
        return default

    def has_config(self, key: str) -> bool:
        """Check if any provider has the key."""
        return any(provider.has_config(key) for provider in self.providers)

    def get_section(self, section: str) -> Dict[str, Any]:
        """Deep-merge a section from all providers (highest precedence wins)."""
        result: Dict[str, Any] = {}
        for provider in reversed(self.providers):
            deep_merge(result, provider.get_section(section))
        return result

    def list_sections(self) -> List[str]:
        sections = set()
        for provider in self.providers:
            sections.update(provider.list_sections())
        return sorted(sections)

    def as_dict(self) -> Dict[str, Any]:
        merged: Dict[str, Any] = {}
        for provider in reversed(self.providers):
            deep_merge(merged, provider.as_dict())
        return merged


class EnvironmentConfigProvider(ConfigProvider):
    """
    Configuration provider that reads from environment variables.

    A key path maps to ``<prefix><SECTION>__<KEY>`` in upper case, e.g.
    ``train.batch_size`` is read from ``SEQFILL_TRAIN__BATCH_SIZE``.
    """

    SEPARATOR = "__"

    def __init__(self, prefix: str = "SEQFILL_", environ: Optional[Mapping[str, str]] = None):
        """
        Initialize with optional environment variable prefix.

        Args:
            prefix: Prefix for environment variables
            environ: Mapping to read instead of ``os.environ`` (tests)
        """
        self.prefix = prefix
        self.environ = environ if environ is not None else os.environ

    def _env_key(self, key: str) -> str:
        """Convert config key to environment variable name."""
        return f"{self.prefix}{key.replace('.', self.SEPARATOR).upper()}"

    @staticmethod
    def _coerce(value: str) -> Any:
        """Convert string values to bool, int or float where possible."""
        if value.lower() in ("true", "false"):
            return value.lower() == "true"
        for cast in (int, float):
            try:
                return cast(value)
            except ValueError:
                pass
        return value

    def _entries(self) -> Dict[str, Any]:
        entries: Dict[str, Any] = {}
        for env_key, value in self.environ.items():
            if not env_key.startswith(self.prefix):
                continue
            path = env_key[len(self.prefix) :]
            if self.SEPARATOR not in path:
                continue
            config_key = path.lower().replace(self.SEPARATOR, ".")
            entries[config_key] = self._coerce(value)
        return entries

    def get_config(self, key: str, default: Any = None) -> Any:
        """Get config from environment variable."""
        value = self.environ.get(self._env_key(key))
        return default if value is None else self._coerce(value)

    def has_config(self, key: str) -> bool:
        """Check if environment variable exists."""
        return self._env_key(key) in self.environ

    def get_section(self, section: str) -> Dict[str, Any]:
        """Get all environment variables for a section as a nested dictionary."""
        result: Dict[str, Any] = {}
        prefix = f"{section}."
        for config_key, value in self._entries().items():
            if config_key.startswith(prefix):
                _set_nested(result, config_key[len(prefix) :], value)
        return result

    def list_sections(self) -> List[str]:
        return sorted({key.split(".", 1)[0] for key in self._entries()})
