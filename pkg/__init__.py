"""diamond-surface-spins package initializer.

The toolkit lives in the top-level packages crystal, hyperfine, spindynamics,
kinetics and fileio; main.py is the command-line entry point.
"""

__all__ = [
    "crystal",
    "hyperfine",
    "spindynamics",
    "kinetics",
    "fileio",
    "database",
]

__version__ = "0.1.0"
