#!/usr/bin/env python3
"""
seqfill - Main entry point

Usage:
    python -m seqfill synth --num-samples 300
    python -m seqfill simulate
    python -m seqfill train --max-epochs 60
    python -m seqfill evaluate --methods last,closest,linear,model
    python -m seqfill --help
"""

import sys
from pathlib import Path

# Add current directory to Python path for directory-based execution
sys.path.insert(0, str(Path(__file__).parent))

from cli.main import main  # noqa: E402

if __name__ == "__main__":
    main()
