"""Polarization indices and the shift Φ(z) - Φ(s) between prejudice and outcome."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

METRICS = ("p1", "p2", "p3", "p4", "ndi", "gdi")
# serialization order of the delta table
TABLE_COLUMNS = ("p1", "p2", "p3", "p4", "ndi", "gdi")
POLARIZING_TOL = 1e-12


def _vec(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValidationError("opinion vector must be one-dimensional")
    return x


def ndi(x, W) -> float:
    """Σ_ij w_ij (x_i - x_j)^2 over the arcs of W."""
    x = _vec(x)
    W = np.asarray(W, dtype=float)
    if W.shape != (x.size, x.size):
        raise ValidationError("W and x dimensions disagree")
    x2 = x * x
    # expanded form avoids building the n x n difference matrix
    val = x2 @ W.sum(axis=1) - 2.0 * x @ (W @ x) + W.sum(axis=0) @ x2
    return float(max(val, 0.0))


def gdi(x, chunk: int = 2048) -> float:
    """Σ_{i<j} (x_i - x_j)^2 over all node pairs."""
    x = _vec(x)
    total = 0.0
    for start in range(0, x.size, chunk):
        block = x[start:start + chunk]
        diff = block[:, None] - x[None, :]
        total += float((diff * diff).sum())
    return total / 2.0


def p1(x) -> float:
    """Squared distance of x from its mean vector."""
    x = _vec(x)
    c = x - x.mean()
    return float(c @ c)


def p2(x) -> float:
    x = _vec(x)
    return float(x @ x) / x.size


def p3(x) -> float:
    x = _vec(x)
    return float(x @ x)


def p4(x) -> float:
    return float(np.abs(_vec(x)).sum())


def metric_value(name: str, x, W=None) -> float:
    if name == "ndi":
        if W is None:
            raise ValidationError("NDI needs the influence matrix")
        return ndi(x, W)
    funcs = {"p1": p1, "p2": p2, "p3": p3, "p4": p4, "gdi": gdi}
    if name not in funcs:
        raise ValidationError(f"unknown metric {name!r}")
    return funcs[name](x)


@dataclass(frozen=True)
class MetricsBundle:
    ndi: float
    gdi: float
    p1: float
    p2: float
    p3: float
    p4: float
    total_opinion: float

    def as_dict(self):
        return {m: getattr(self, m) for m in METRICS}


def metrics_bundle(x, W) -> MetricsBundle:
    """All six indices of one opinion vector.

    NDI uses the influence weights of W on its nonzero arcs; GDI runs over
    every unordered pair of nodes.
    """
    x = _vec(x)
    return MetricsBundle(ndi(x, W), gdi(x), p1(x), p2(x), p3(x), p4(x), float(x.sum()))


@dataclass(frozen=True)
class ShiftReport:
    """Per-metric Φ(z) - Φ(s), the choice shift Σz - Σs, and polarizing flags."""

    delta: dict
    choice_shift: float
    before: MetricsBundle
    after: MetricsBundle

    @property
    def polarizing(self) -> dict:
        return {m: d > POLARIZING_TOL for m, d in self.delta.items()}

    def row(self):
        return [self.delta[m] for m in TABLE_COLUMNS] + [self.choice_shift]


def shift_report(s, z, W) -> ShiftReport:
    s, z = _vec(s), _vec(z)
    if s.shape != z.shape:
        raise ValidationError("s and z dimensions disagree")
    a, b = metrics_bundle(s, W), metrics_bundle(z, W)
    delta = {m: getattr(b, m) - getattr(a, m) for m in METRICS}
    return ShiftReport(delta, float(z.sum() - s.sum()), a, b)


def invariant_gap(x) -> float:
    """P1 - P3 + P4^2 / n. Nonnegative, and zero when all entries share a sign."""
    x = _vec(x)
    return p1(x) - p3(x) + p4(x) ** 2 / x.size
