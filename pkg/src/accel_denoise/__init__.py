"""Denoising of stationary accelerometer recordings.

The package simulates paired noisy / reference accelerometer data, offers
signal-processing, nearest-neighbour and recurrent-network denoisers behind
one estimator interface, and scores them by reconstruction error and by
roll/pitch leveling accuracy.
"""

from .base import BaseDenoiser
from .benchmark import BenchmarkConfig, desk_config, run_benchmark
from .exceptions import (
    AccelDenoiseError,
    ConfigError,
    DivergenceError,
    InvalidArgumentError,
    InvalidDataError,
    ParseError,
)
from .knn import KnnDenoiser
from .metrics import compare, mae, psnr, rae, rmse
from .nn import RecurrentDenoiser
from .sca import angular_error, evaluate_sca, pitch_from_f, roll_from_f, suppression_ratio
from .sim import EulerAngles, NoiseSpec, Recording, SimConfig, build_dataset, gravity_projection
from .sp import (
    DwtDenoiser,
    IdentityDenoiser,
    MovingAverageDenoiser,
    SavitzkyGolayDenoiser,
)

__version__ = "0.1.0"

__all__ = [
    "AccelDenoiseError",
    "BaseDenoiser",
    "BenchmarkConfig",
    "ConfigError",
    "DivergenceError",
    "DwtDenoiser",
    "EulerAngles",
    "IdentityDenoiser",
    "InvalidArgumentError",
    "InvalidDataError",
    "KnnDenoiser",
    "MovingAverageDenoiser",
    "NoiseSpec",
    "ParseError",
    "Recording",
    "RecurrentDenoiser",
    "SavitzkyGolayDenoiser",
    "SimConfig",
    "angular_error",
    "build_dataset",
    "compare",
    "desk_config",
    "evaluate_sca",
    "gravity_projection",
    "mae",
    "pitch_from_f",
    "psnr",
    "rae",
    "rmse",
    "roll_from_f",
    "run_benchmark",
    "suppression_ratio",
]
