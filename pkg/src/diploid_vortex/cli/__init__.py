"""
Command line interface.
"""

from diploid_vortex.cli.main import app, main, run_command

__all__ = ["app", "main", "run_command"]
