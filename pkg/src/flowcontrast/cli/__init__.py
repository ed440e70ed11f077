"""Command-line pipeline: synth, preprocess, train, embed, eval, gradcheck."""

from .config import RunConfig

__all__ = ["RunConfig"]
