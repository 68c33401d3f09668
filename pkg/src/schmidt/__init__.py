"""Exact-arithmetic engine for Schmidt games on the circle R/Z."""

from .errors import SchmidtError
from .theta import ThetaSpec

__version__ = "0.1.0"

__all__ = ["SchmidtError", "ThetaSpec", "__version__"]
