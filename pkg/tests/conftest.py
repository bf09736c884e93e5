"""Make the sibling oracle helpers importable from any invocation dir."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
