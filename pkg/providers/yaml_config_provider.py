import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import yaml

from core.base_config_provider import ConfigProvider, deep_merge
from core.exceptions import ConfigError

logger = logging.getLogger(__name__)

PACKAGE_CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"
DEFAULT_CONFIG_PATHS = (
    str(PACKAGE_CONFIG_DIR / "default.yaml"),
    "./config/local.yaml",
)


class YAMLConfigProvider(ConfigProvider):
    """YAML file-based configuration provider."""

    def __init__(self, config_paths: Optional[Sequence[Union[str, Path]]] = None):
        """
        Initialize YAML config provider.

        Args:
            config_paths: YAML file paths to load (later files override earlier
                ones). Defaults to the packaged ``config/default.yaml`` followed
                by an optional ``./config/local.yaml``.
        """
        self.config_data: Dict[str, Any] = {}

        if config_paths is None:
            config_paths = DEFAULT_CONFIG_PATHS

        self.config_paths: List[str] = [str(p) for p in config_paths]
        self.loaded_paths: List[str] = []
        self._load_configs()

    def _read(self, config_path: str) -> Dict[str, Any]:
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(
                f"Failed to parse config file {config_path}", {"error": e}
            ) from e
        if not isinstance(data, dict):
            raise ConfigError(
                f"Config file {config_path} must hold a mapping of sections",
                {"found": type(data).__name__},
            )
        return data

    def _load_configs(self) -> None:
        """Load configuration from YAML files."""
        for config_path in self.config_paths:
            if not Path(config_path).exists():
                logger.debug(f"Config file {config_path} not present, skipped")
                continue
            deep_merge(self.config_data, self._read(config_path))
            self.loaded_paths.append(config_path)
            logger.debug(f"Loaded config file {config_path}")

    def _get_nested_value(self, key_path: str, default: Any = None) -> Any:
        """Get value from nested dictionary using dot notation."""
        current: Any = self.config_data
        for key in key_path.split("."):
            if isinstance(current, dict) and key in current:
                current = current[key]
            else:
                return default
        return current

    def get_config(self, key: str, default: Any = None) -> Any:
        """Get a configuration value by key."""
        return self._get_nested_value(key, default)

    def has_config(self, key: str) -> bool:
        """Check if a configuration key exists."""
        marker = object()
        return self._get_nested_value(key, marker) is not marker

    def get_section(self, section: str) -> Dict[str, Any]:
        """Get an entire configuration section."""
        section_data = self._get_nested_value(section, {})
        return dict(section_data) if isinstance(section_data, dict) else {}

    def list_sections(self) -> List[str]:
        return sorted(self.config_data.keys())

    def as_dict(self) -> Dict[str, Any]:
        return dict(self.config_data)


def save_config(data: Dict[str, Any], output_path: Union[str, Path]) -> Path:
    """
    Save a configuration mapping to a YAML file.

    Sections keep their insertion order so the file reads like the defaults.

    Args:
        data: Configuration sections, as plain YAML-serializable values
        output_path: Path where to save the configuration

    Returns:
        Path of the written file
    """
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False, indent=2)
    logger.debug(f"Wrote config file {path}")
    return path


# Register with factory
from core.component_factory import ComponentFactory  # noqa: E402

ComponentFactory.register_config_provider("yaml", YAMLConfigProvider)
