"""Controllability, observability, stabilization and LQR for linear systems."""

from ._core import *  # noqa: F401,F403
from ._core import LinctlError, LtiSystem, ToleranceConfig, run_cli

__all__ = [name for name in dir() if not name.startswith("_")]
