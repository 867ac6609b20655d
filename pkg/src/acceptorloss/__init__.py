"""Acceptor-induced dielectric loss in superconducting resonators on silicon."""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402
