"""Paths to the bundled topology and population fixtures."""
from __future__ import annotations

from pathlib import Path

_DATA_DIR = Path(__file__).parent


def bundled_topology() -> Path:
    """GraphML of the bundled 37-node European backbone."""
    return _DATA_DIR / "geant2012.graphml"


def bundled_population() -> Path:
    """Population grid of European metro areas near the backbone nodes."""
    return _DATA_DIR / "population_geant.txt"
