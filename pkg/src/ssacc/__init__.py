"""Secrecy and covertness analysis for a RIS-aided link with a cooperative jammer."""
from ssacc._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
