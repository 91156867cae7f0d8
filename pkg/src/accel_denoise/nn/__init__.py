"""Recurrent denoisers implemented directly on numpy."""

from .cells import gru_step, lstm_step, rnn_step, sigmoid
from .estimator import RecurrentDenoiser, load_checkpoint, save_checkpoint
from .model import KINDS, RecurrentModel, backward, forward, init_model, loss_and_grad, mse_loss
from .train import LossCurve, TrainConfig, train

__all__ = [
    "KINDS",
    "LossCurve",
    "RecurrentDenoiser",
    "RecurrentModel",
    "TrainConfig",
    "backward",
    "forward",
    "gru_step",
    "init_model",
    "load_checkpoint",
    "loss_and_grad",
    "lstm_step",
    "mse_loss",
    "rnn_step",
    "save_checkpoint",
    "sigmoid",
    "train",
]
