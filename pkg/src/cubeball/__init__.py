"""Sum of squares of uniform random variables: cube/ball volumes and applications."""

from .quad import ContourParams, RngState
from .volume import BoxSpec, CdfEstimate, SeriesParams, cdf

__all__ = ["BoxSpec", "CdfEstimate", "ContourParams", "RngState", "SeriesParams", "cdf"]
__version__ = "0.1.0"
