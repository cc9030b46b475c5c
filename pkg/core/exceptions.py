"""Exception hierarchy for the seqfill toolkit.

Every error derives from :class:`SeqfillError` and, where it makes sense, from
the builtin exception a caller would naturally catch (``ValueError``,
``FileNotFoundError``, ``KeyError``, ``RuntimeError``).
"""

from typing import Any, Dict, Optional


class SeqfillError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} ({details})"


class SampleValidationError(SeqfillError, ValueError):
    """A sample or raw volume violates the data-model contract."""


class ContainerError(SeqfillError):
    """Base class for on-disk container problems."""


class MissingPayloadError(ContainerError, FileNotFoundError):
    """A header or payload file of a container is absent."""


class HeaderError(ContainerError):
    """The container header is unreadable or incomplete."""


class ShapeMismatchError(ContainerError):
    """Payload size does not match the shape declared in the header."""


class ChecksumError(ContainerError):
    """Payload bytes do not match the checksum stored in the header."""


class SampleNotFoundError(ContainerError, KeyError):
    """A manifest references a sample that cannot be found."""

    def __str__(self) -> str:
        # KeyError would otherwise repr() the message
        return SeqfillError.__str__(self)


class GapSimulationError(SeqfillError, ValueError):
    """Invalid input to cloud filtering, gap simulation or scene synthesis."""


class EmptyMaskPoolError(GapSimulationError):
    """Gap sampling was requested from a pool without masks."""


class ModelShapeError(SeqfillError, ValueError):
    """Tensor shapes are incompatible with the network configuration."""


class AugmentationError(SeqfillError, ValueError):
    """A requested augmentation cannot be applied to the batch."""


class TrainingError(SeqfillError, RuntimeError):
    """Training cannot continue (non-finite loss, empty split, ...)."""


class EmptyDomainError(SeqfillError, ValueError):
    """An evaluation domain (pixels or frames) is empty."""


class ConfigError(SeqfillError, ValueError):
    """Run configuration is invalid or inconsistent."""
