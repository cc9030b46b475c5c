"""
Unit tests for the exception hierarchy and logging setup.
"""

import logging
import logging.handlers

import pytest
from rich.logging import RichHandler

from core.exceptions import (
    ChecksumError,
    ConfigError,
    ContainerError,
    EmptyMaskPoolError,
    GapSimulationError,
    MissingPayloadError,
    SampleNotFoundError,
    SeqfillError,
    TrainingError,
)
from core.logging_config import configure_logging


class TestExceptions:
    """Test the exception hierarchy."""

    def test_context_in_message(self):
        error = ConfigError("Bad value", {"field": "train.batch_size"})

        assert str(error) == "Bad value (field=train.batch_size)"
        assert error.context == {"field": "train.batch_size"}

    def test_plain_message(self):
        assert str(TrainingError("Loss diverged")) == "Loss diverged"

    @pytest.mark.parametrize(
        "error_cls, builtin",
        [
            (MissingPayloadError, FileNotFoundError),
            (SampleNotFoundError, KeyError),
            (ConfigError, ValueError),
            (TrainingError, RuntimeError),
            (EmptyMaskPoolError, GapSimulationError),
            (ChecksumError, ContainerError),
        ],
    )
    def test_builtin_bases(self, error_cls, builtin):
        error = error_cls("message")
        assert isinstance(error, builtin)
        assert isinstance(error, SeqfillError)

    def test_key_error_message_not_quoted(self):
        assert str(SampleNotFoundError("Sample x missing")) == "Sample x missing"


class TestConfigureLogging:
    """Test root logger configuration."""

    def test_level_and_console_handler(self):
        root = configure_logging({"level": "warning"})

        assert root.level == logging.WARNING
        assert any(isinstance(h, RichHandler) for h in root.handlers)

    def test_file_handler(self, temp_dir):
        log_file = f"{temp_dir}/logs/run.log"
        root = configure_logging({"level": "INFO", "file": log_file, "backup_count": 2})
        logging.getLogger("seqfill.test").info("hello file")

        handlers = [h for h in root.handlers if isinstance(h, logging.handlers.RotatingFileHandler)]
        assert len(handlers) == 1
        handlers[0].flush()
        with open(log_file) as f:
            assert "hello file" in f.read()
        configure_logging({"level": "WARNING"})

    def test_reconfiguration_replaces_handlers(self):
        configure_logging({"level": "INFO"})
        root = configure_logging({"level": "INFO"})

        assert sum(isinstance(h, RichHandler) for h in root.handlers) == 1
