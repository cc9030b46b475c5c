"""Command-line interface for seqfill."""

from .main import SeqfillCLI

__all__ = ["SeqfillCLI"]
