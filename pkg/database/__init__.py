"""Shipped data: the Fermi-contact fixture and run presets under runs/."""

from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent
RUNS_DIR = DATA_DIR / "runs"
