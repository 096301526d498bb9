#!/usr/bin/env python3
"""
Run a pipeline command from the repository root

    python scripts/run_pipeline.py pipeline --config configs/two_class_sirv.json
"""

import sys
from pathlib import Path

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent / "src"))

from cli import main

if __name__ == "__main__":
    sys.exit(main())
