"""Exact computer algebra for the instanton R-matrix and its gl(N) relatives."""

from ._backend import BACKEND
from .ring import MultiPoly, RatFunc, parse, series_expand, substitute

__version__ = "0.1.0"

__all__ = ["BACKEND", "MultiPoly", "RatFunc", "parse", "series_expand", "substitute", "__version__"]
