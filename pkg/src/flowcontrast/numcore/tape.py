"""Minimal reverse-mode tape over float64 ndarrays.

Only the operations the encoder, generator, and contrastive loss actually
need are provided; there is no general broadcasting. Every operation
records a vector-Jacobian product, and :meth:`Tensor.backward` walks the
tape once from a scalar output. Analytic gradients produced here are
verified against central finite differences by
:func:`flowcontrast.numcore.grad_check`.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import functional as F


class Tensor:
    """An ndarray plus the tape bookkeeping needed for backward().

    Leaves are created with :func:`leaf` (or by lifting a constant inside
    an op); interior nodes carry the parents and the vjp closure of the op
    that produced them.
    """

    __slots__ = ("data", "grad", "parents", "_vjp")

    def __init__(self, data, parents: Sequence["Tensor"] = (), vjp: Callable | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.parents = tuple(parents)
        self._vjp = vjp

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def backward(self) -> None:
        """Accumulate gradients of this scalar into every tensor on the tape."""
        if self.data.ndim != 0:
            raise ValueError("backward() requires a scalar output")
        order = _toposort(self)
        for node in order:
            node.grad = np.zeros_like(node.data)
        self.grad = np.ones_like(self.data)
        for node in order:
            if node._vjp is None:
                continue
            parent_grads = node._vjp(node.grad)
            for parent, g in zip(node.parents, parent_grads):
                if g is not None:
                    parent.grad = parent.grad + g

    # -- scalar-friendly operators (used for loss assembly) --------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError("tensor/tensor division is not on the tape; divide by a scalar")
        return mul(self, 1.0 / float(other))

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, leaf={self._vjp is None})"


def leaf(data) -> Tensor:
    """Wrap an ndarray as a tape leaf (gradient will accumulate into it)."""
    return Tensor(data)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _toposort(root: Tensor) -> list[Tensor]:
    """Return nodes in reverse-topological (output first) order."""
    seen: set[int] = set()
    order: list[Tensor] = []
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    order.reverse()
    return order


# -- arithmetic -----------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "add")
    a_scalar, b_scalar = a.data.ndim == 0, b.data.ndim == 0

    def vjp(g):
        return (g.sum() if a_scalar and not b_scalar else g,
                g.sum() if b_scalar and not a_scalar else g)

    return Tensor(a.data + b.data, (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "sub")
    a_scalar, b_scalar = a.data.ndim == 0, b.data.ndim == 0

    def vjp(g):
        return (g.sum() if a_scalar and not b_scalar else g,
                -(g.sum()) if b_scalar and not a_scalar else -g)

    return Tensor(a.data - b.data, (a, b), vjp)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "mul")
    a_scalar, b_scalar = a.data.ndim == 0, b.data.ndim == 0

    def vjp(g):
        ga = g * b.data
        gb = g * a.data
        return (ga.sum() if a_scalar and not b_scalar else ga,
                gb.sum() if b_scalar and not a_scalar else gb)

    return Tensor(a.data * b.data, (a, b), vjp)


def _check_elementwise(a: Tensor, b: Tensor, op: str) -> None:
    if a.data.ndim != 0 and b.data.ndim != 0 and a.data.shape != b.data.shape:
        raise ValueError(f"{op}: shape mismatch {a.data.shape} vs {b.data.shape}")


def matmul(a, b) -> Tensor:
    """Matrix/vector product for 2D@2D, 2D@1D, 1D@2D and 1D@1D operands."""
    a, b = as_tensor(a), as_tensor(b)
    na, nb = a.data.ndim, b.data.ndim
    if na == 2 and nb == 2:
        def vjp(g):
            return g @ b.data.T, a.data.T @ g
    elif na == 2 and nb == 1:
        def vjp(g):
            return np.outer(g, b.data), a.data.T @ g
    elif na == 1 and nb == 2:
        def vjp(g):
            return b.data @ g, np.outer(a.data, g)
    elif na == 1 and nb == 1:
        def vjp(g):
            return g * b.data, g * a.data
    else:
        raise ValueError(f"matmul: unsupported ranks {na} and {nb}")
    return Tensor(a.data @ b.data, (a, b), vjp)


def transpose(a: Tensor) -> Tensor:
    a = as_tensor(a)

    def vjp(g):
        return (g.T,)

    return Tensor(a.data.T, (a,), vjp)


def tsum(a: Tensor, axis: int | None = None) -> Tensor:
    """Sum of all entries (axis=None) or along one axis of a 2D tensor."""
    a = as_tensor(a)
    if axis is None:
        def vjp(g):
            return (np.full_like(a.data, float(g)),)

        return Tensor(a.data.sum(), (a,), vjp)
    if a.data.ndim != 2 or axis not in (0, 1):
        raise ValueError("axis sums are only defined for 2D tensors, axis in {0,1}")

    def vjp(g):
        return (np.repeat(np.expand_dims(g, axis), a.data.shape[axis], axis=axis),)

    return Tensor(a.data.sum(axis=axis), (a,), vjp)


# -- structure ops --------------------------------------------------------


def take_rows(a: Tensor, idx) -> Tensor:
    """Gather rows (or entries of a 1D tensor); duplicates allowed."""
    a = as_tensor(a)
    idx = np.asarray(idx, dtype=np.intp)

    def vjp(g):
        out = np.zeros_like(a.data)
        np.add.at(out, idx, g)
        return (out,)

    return Tensor(a.data[idx], (a,), vjp)


def slice1d(a: Tensor, start: int, stop: int) -> Tensor:
    a = as_tensor(a)

    def vjp(g):
        out = np.zeros_like(a.data)
        out[start:stop] = g
        return (out,)

    return Tensor(a.data[start:stop], (a,), vjp)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    sizes = [p.data.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor(np.concatenate([p.data for p in parts], axis=axis), parts, vjp)


def stack_rows(rows: Sequence[Tensor]) -> Tensor:
    rows = [as_tensor(r) for r in rows]

    def vjp(g):
        return tuple(g[i] for i in range(len(rows)))

    return Tensor(np.stack([r.data for r in rows]), rows, vjp)


# -- nonlinearities -------------------------------------------------------


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0.0

    def vjp(g):
        return (g * mask,)

    return Tensor(F.relu(a.data), (a,), vjp)


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    a = as_tensor(a)
    scale = np.where(a.data > 0.0, 1.0, slope)

    def vjp(g):
        return (g * scale,)

    return Tensor(F.leaky_relu(a.data, slope), (a,), vjp)


def softmax(a: Tensor) -> Tensor:
    """Softmax of a 1D tensor."""
    a = as_tensor(a)
    s = F.softmax(a.data)

    def vjp(g):
        return (s * (g - float(g @ s)),)

    return Tensor(s, (a,), vjp)


def exp(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)

    def vjp(g):
        return (g * out,)

    return Tensor(out, (a,), vjp)


def log(a: Tensor) -> Tensor:
    a = as_tensor(a)

    def vjp(g):
        return (g / a.data,)

    return Tensor(np.log(a.data), (a,), vjp)


def clamp_min(a: Tensor, floor: float) -> Tensor:
    """max(a, floor); gradient is zero where the clamp is active."""
    a = as_tensor(a)
    mask = a.data > floor

    def vjp(g):
        return (g * mask,)

    return Tensor(np.maximum(a.data, floor), (a,), vjp)


# -- geometry helpers -----------------------------------------------------

_NORM_FLOOR = 1e-12


def row_normalize(a: Tensor) -> Tensor:
    """Scale each row to unit Euclidean norm; all-zero rows stay zero.

    The zero-row branch is locally constant, so its gradient is zero, which
    matches the convention that cosine similarity against a zero vector
    is defined as 0.
    """
    a = as_tensor(a)
    norms = np.linalg.norm(a.data, axis=1)
    safe = np.where(norms > _NORM_FLOOR, norms, 1.0)
    mask = (norms > _NORM_FLOOR).astype(np.float64)
    out = (a.data / safe[:, None]) * mask[:, None]

    def vjp(g):
        dot = np.sum(out * g, axis=1)
        return ((g - out * dot[:, None]) * (mask / safe)[:, None],)

    return Tensor(out, (a,), vjp)


def outer_abs_diff(x: Tensor, y: Tensor) -> Tensor:
    """Matrix of |x_i - y_j| for 1D tensors x, y (sign-zero subgradient at ties)."""
    x, y = as_tensor(x), as_tensor(y)
    diff = x.data[:, None] - y.data[None, :]
    sign = np.sign(diff)

    def vjp(g):
        gs = g * sign
        return (gs.sum(axis=1), -gs.sum(axis=0))

    return Tensor(np.abs(diff), (x, y), vjp)


def mul_colvec(a: Tensor, v: Tensor) -> Tensor:
    """Scale row i of 2D tensor ``a`` by v[i]."""
    a, v = as_tensor(a), as_tensor(v)

    def vjp(g):
        return (g * v.data[:, None], np.sum(g * a.data, axis=1))

    return Tensor(a.data * v.data[:, None], (a, v), vjp)
