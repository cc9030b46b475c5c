import importlib
import logging
from typing import Any, Dict, Iterable, List, Mapping, Optional, Type

from .base_config_provider import (
    CompositeConfigProvider,
    ConfigProvider,
    DictConfigProvider,
    EnvironmentConfigProvider,
)
from .base_imputer import Imputer, ImputerRegistry

logger = logging.getLogger(__name__)

IMPLEMENTATION_MODULES = (
    "imputers.last_observation",
    "imputers.closest_observation",
    "imputers.linear_interpolation",
    "imputers.model_imputer",
    "providers.yaml_config_provider",
)


class ComponentFactory:
    """Factory for creating components based on configuration."""

    # Registry of available implementations
    _imputer_registry: Dict[str, Type[Imputer]] = {}
    _config_provider_registry: Dict[str, Type[ConfigProvider]] = {}

    @classmethod
    def register_imputer(cls, name: str, implementation: Type[Imputer]) -> None:
        """Register an imputation method."""
        cls._imputer_registry[name] = implementation
        logger.debug(f"Registered imputer: {name}")

    @classmethod
    def register_config_provider(
        cls, name: str, implementation: Type[ConfigProvider]
    ) -> None:
        """Register a config provider implementation."""
        cls._config_provider_registry[name] = implementation
        logger.debug(f"Registered config provider: {name}")

    @classmethod
    def create_imputer(cls, config: Mapping[str, Any]) -> Imputer:
        """
        Create an imputer instance based on configuration.

        Args:
            config: Configuration mapping with a 'type' key

        Returns:
            Imputer instance

        Raises:
            ValueError: If the imputer type is not registered
        """
        imputer_type = config.get("type", "linear")

        if imputer_type not in cls._imputer_registry:
            raise ValueError(f"Unknown imputer type: {imputer_type}")

        implementation = cls._imputer_registry[imputer_type]
        return implementation(dict(config))

    @classmethod
    def create_imputer_registry(
        cls, imputer_configs: Iterable[Mapping[str, Any]]
    ) -> ImputerRegistry:
        """
        Create a registry holding one instance per configured method.

        Args:
            imputer_configs: Configurations, each with a 'type' key

        Returns:
            ImputerRegistry in configuration order

        Raises:
            ValueError: If any imputer type is not registered
        """
        registry = ImputerRegistry()
        for imputer_config in imputer_configs:
            registry.register_imputer(cls.create_imputer(imputer_config))
        return registry

    @classmethod
    def create_config_provider(
        cls,
        config_paths: Optional[List[str]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
        defaults: Optional[Mapping[str, Any]] = None,
    ) -> ConfigProvider:
        """
        Create the layered configuration used by every command.

        Precedence, highest first: flag overrides, ``SEQFILL_*`` environment
        variables, YAML files, built-in defaults.

        Args:
            config_paths: YAML files to merge (later files win)
            overrides: Values given on the command line
            defaults: Built-in fallback values

        Returns:
            CompositeConfigProvider
        """
        yaml_provider_cls = cls._config_provider_registry.get("yaml")
        if yaml_provider_cls is None:
            importlib.import_module("providers.yaml_config_provider")
            yaml_provider_cls = cls._config_provider_registry["yaml"]

        providers: List[ConfigProvider] = [
            DictConfigProvider(overrides),
            EnvironmentConfigProvider(),
            yaml_provider_cls(config_paths),
            DictConfigProvider(defaults),
        ]
        return CompositeConfigProvider(providers)

    @classmethod
    def auto_register_implementations(cls) -> None:
        """Import the implementation modules so they register themselves."""
        for module_name in IMPLEMENTATION_MODULES:
            try:
                importlib.import_module(module_name)
            except ImportError as e:
                logger.warning(f"Implementation {module_name} not available: {e}")
        logger.debug(f"Registered imputers: {sorted(cls._imputer_registry)}")

    @classmethod
    def list_available_implementations(cls) -> Dict[str, list]:
        """
        List all available implementations by category.

        Returns:
            Dictionary mapping component types to available implementations
        """
        return {
            "imputers": list(cls._imputer_registry.keys()),
            "config_providers": list(cls._config_provider_registry.keys()),
        }
