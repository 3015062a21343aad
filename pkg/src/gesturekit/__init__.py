"""Hand-gesture recognition toolkit.

Color-keyed segmentation, moment-based CamShift tracking,
gesture-volume preprocessing, a from-scratch CNN classifier trained
with Nesterov-accelerated gradient, two-network probability fusion,
and a Bernoulli-decoder VAE for reconstruction.
"""

from . import datasets, generative, imaging, neuralnet, pnm, preprocess, tracking
from .errors import (
    DegenerateFusionError,
    EmptyRegionError,
    FormatError,
    GestureKitError,
    InvalidInputError,
    LostTrackError,
    NumericError,
    UnsupportedConfigError,
)

__version__ = "0.1.0"

__all__ = [
    "datasets",
    "generative",
    "imaging",
    "neuralnet",
    "pnm",
    "preprocess",
    "tracking",
    "GestureKitError",
    "InvalidInputError",
    "FormatError",
    "EmptyRegionError",
    "LostTrackError",
    "NumericError",
    "DegenerateFusionError",
    "UnsupportedConfigError",
    "__version__",
]
