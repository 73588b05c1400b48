"""Information-theoretic aesthetic measure for simple grayscale patterns."""

__version__ = "0.1.0"

from .imageio import GrayImage, load_image, save_image
from .levels import LevelPyramid, build_pyramid, gradient
from .measures import (AestheticScore, Histogram, LevelStats, energy_bin, histogram,
                       log_multiplicity_exact, log_multiplicity_stirling, scale_stats, score,
                       shannon_entropy)

__all__ = [
    "GrayImage", "load_image", "save_image",
    "LevelPyramid", "build_pyramid", "gradient",
    "AestheticScore", "Histogram", "LevelStats", "energy_bin", "histogram",
    "log_multiplicity_exact", "log_multiplicity_stirling", "scale_stats", "score",
    "shannon_entropy",
]
