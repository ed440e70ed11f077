"""Dense numeric core: activations, a reverse-mode tape, Adam, grad checks."""

from .functional import leaky_relu, logsumexp, relu, softmax
from .gradcheck import GradReport, grad_check
from .optim import AdamState, adam_step
from .tape import Tensor

__all__ = [
    "AdamState",
    "GradReport",
    "Tensor",
    "adam_step",
    "grad_check",
    "leaky_relu",
    "logsumexp",
    "relu",
    "softmax",
]
