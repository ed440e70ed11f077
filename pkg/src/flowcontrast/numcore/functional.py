"""Plain ndarray activations used across the package.

These are the forward definitions; the tape in :mod:`.tape` reuses them so
analytic gradients and finite-difference checks always see the same math.
"""

import numpy as np


def softmax(xs) -> np.ndarray:
    """Numerically stable softmax of a 1-D array.

    The maximum entry is subtracted before exponentiation so large logits
    cannot overflow. Output entries are positive and sum to 1.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise ValueError("softmax of an empty vector is undefined")
    shifted = xs - xs.max()
    exps = np.exp(shifted)
    return exps / exps.sum()


def relu(xs) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(np.asarray(xs, dtype=np.float64), 0.0)


def leaky_relu(xs, slope: float = 0.2) -> np.ndarray:
    """Elementwise x for x > 0, slope * x otherwise."""
    xs = np.asarray(xs, dtype=np.float64)
    return np.where(xs > 0.0, xs, slope * xs)


def logsumexp(xs: np.ndarray, axis=None):
    """Stable log(sum(exp(xs))) along ``axis``."""
    xs = np.asarray(xs, dtype=np.float64)
    if axis is None:
        m = np.max(xs)
        if not np.isfinite(m):
            m = 0.0
        return float(np.log(np.sum(np.exp(xs - m))) + m)
    m = np.max(xs, axis=axis, keepdims=True)
    # -inf rows (all entries -inf) would produce nan through the subtraction
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(xs - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)
