"""Adam optimizer over named parameter dictionaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    """Moment accumulators and step counter for Adam.

    Accumulators are keyed by parameter name and zero-initialized on first
    use; ``step`` counts completed updates and drives bias correction.
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState) -> dict:
    """One bias-corrected Adam update; returns new parameter arrays.

    ``params`` and ``grads`` are name -> ndarray dictionaries with matching
    shapes. The state is updated in place (step incremented once per call);
    the input parameter arrays are left untouched.
    """
    state.step += 1
    t = state.step
    out = {}
    for name in params:
        p = params[name]
        if name not in grads:
            raise ValueError(f"adam_step: missing gradient for {name!r}")
        g = np.asarray(grads[name], dtype=p.dtype)
        if g.shape != p.shape:
            raise ValueError(
                f"adam_step: shape mismatch for {name!r}: {p.shape} vs {g.shape}"
            )
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p)
            v = np.zeros_like(p)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        state.m[name] = m
        state.v[name] = v
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        out[name] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return out
