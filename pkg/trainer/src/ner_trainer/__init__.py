"""Token-classification training companion for the nersynth data pipeline."""

from .config import TrainConfig
from .predict import predict
from .train import train

__version__ = "0.1.0"

__all__ = ["TrainConfig", "predict", "train", "__version__"]
