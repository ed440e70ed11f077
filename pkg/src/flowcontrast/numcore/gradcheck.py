"""Finite-difference verification of analytic gradients.

Every trainable path in the package must pass this harness: the callable
under test returns both the loss value and its analytic gradients, and the
harness compares those gradients against central differences computed from
value-only evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import GradCheckError

ValueAndGrad = Callable[[dict], tuple[float, dict]]


@dataclass
class GradReport:
    """Per-parameter and global maximum relative gradient errors."""

    perturbation: float
    per_param: dict = field(default_factory=dict)
    max_rel_error: float = 0.0

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_rel_error < tol

    def summary(self) -> str:
        lines = [
            f"{name}: max rel error {err:.3e}"
            for name, err in sorted(self.per_param.items())
        ]
        lines.append(f"global max rel error {self.max_rel_error:.3e}")
        return "\n".join(lines)


def grad_check(
    value_and_grad: ValueAndGrad,
    params: dict,
    perturbation: float = 1e-5,
    noise_floor: float = 1e-8,
) -> GradReport:
    """Compare analytic gradients with central finite differences.

    ``value_and_grad(params)`` must return ``(loss, grads)`` where grads is
    a name -> ndarray dict matching ``params``. Relative error per
    coordinate is |a - n| / (|a| + |n| + 1e-12), except that differences
    below ``noise_floor`` count as zero: central differences carry
    roundoff of order |loss| * eps / perturbation, so coordinates whose
    true gradient is structurally zero (or tiny) would otherwise read as
    large relative errors.

    Raises :class:`GradCheckError` if any probed loss value is non-finite,
    naming the offending parameter coordinate.
    """
    base_value, analytic = value_and_grad(params)
    if not math.isfinite(base_value):
        raise GradCheckError("loss is non-finite at the base point")

    report = GradReport(perturbation=perturbation)
    h = float(perturbation)
    for name in sorted(params):
        p = np.asarray(params[name], dtype=np.float64)
        a = np.asarray(analytic[name], dtype=np.float64)
        if a.shape != p.shape:
            raise GradCheckError(f"analytic gradient shape mismatch for {name!r}")
        worst = 0.0
        flat = p.reshape(-1)
        for i in range(flat.size):
            probe = dict(params)
            bumped = flat.copy()
            bumped[i] += h
            probe[name] = bumped.reshape(p.shape)
            f_plus, _ = value_and_grad(probe)
            bumped[i] -= 2.0 * h
            probe[name] = bumped.reshape(p.shape)
            f_minus, _ = value_and_grad(probe)
            if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
                raise GradCheckError(f"non-finite loss while perturbing {name!r}[{i}]")
            numeric = (f_plus - f_minus) / (2.0 * h)
            ana = a.reshape(-1)[i]
            gap = abs(ana - numeric)
            err = 0.0 if gap <= noise_floor else gap / (abs(ana) + abs(numeric) + 1e-12)
            worst = max(worst, err)
        report.per_param[name] = float(worst)
        report.max_rel_error = max(report.max_rel_error, float(worst))
    return report
