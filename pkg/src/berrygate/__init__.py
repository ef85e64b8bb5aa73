"""Simulation and analysis toolkit for ultrafast chirped-pulse geometric
gates on atomic clock-state qubits."""

from ._kernels import BACKEND_NAME as kernel_backend  # noqa: F401

__version__ = "0.1.0"
