"""Exact-derivative verification engine for a time-periodic vacuum metric."""

__version__ = "0.1.0"

from ._backend import name as backend_name, set_backend  # noqa: E402

__all__ = ["__version__", "backend_name", "set_backend"]
