"""Tests deciding whether a configured model can polarize, by metric class.

Metric classes:

* ``absolute``   P2, P3
* ``total``      P4
* ``dispersion`` P1, GDI
* ``local``      NDI
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ValidationError
from .metrics import p1
from .models import NAIVE_TOL, ModelConfig, ResponseMatrix, map_vfj_to_gfj
from .spectral import SIGMA_TOL, SpectralBasis

CONDITION_TOL = 1e-9


class Verdict(str, Enum):
    POLARIZING = "polarizing"
    DEPOLARIZING = "depolarizing"
    SUFFICIENT_HOLDS = "sufficient_holds"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConditionVerdict:
    """Outcome of one condition test.

    ``metric_class`` lists the classes the verdict covers, ``witness`` is
    the lowest-index node breaking the condition (if any), ``residuals``
    holds the per-node values of the tested expression.
    """

    metric_class: tuple
    verdict: Verdict
    witness: int | None = None
    residuals: np.ndarray | None = None
    guarantee: str | None = None
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "class": "+".join(self.metric_class),
            "verdict": self.verdict.value,
            "witness": self.witness,
            "residuals": None if self.residuals is None else [float(r) for r in self.residuals],
            "guarantee": self.guarantee,
            **{k: v for k, v in self.detail.items() if isinstance(v, (int, float, str, bool))},
        }


@dataclass(frozen=True)
class DoublyStochasticResult:
    holds: bool
    max_deviation: float
    norm1: float
    norm2: float

    def __bool__(self):
        return self.holds


def doubly_stochastic_test(H, tol: float = CONDITION_TOL) -> DoublyStochasticResult:
    """Check that every column of a row-stochastic H sums to 1.

    ‖H‖_1 and ‖H‖_2 are reported too; both equal 1 exactly when H is
    doubly stochastic.
    """
    Hm = H.H if isinstance(H, ResponseMatrix) else np.asarray(H, dtype=float)
    cols = Hm.sum(axis=0)
    dev = float(np.abs(cols - 1).max())
    return DoublyStochasticResult(dev <= tol, dev, float(np.abs(Hm).sum(axis=0).max()),
                                  float(np.linalg.norm(Hm, 2)))


def _scan(residuals, scale):
    bad = np.flatnonzero(np.abs(residuals) > CONDITION_TOL * (1 + scale))
    return (int(bad[0]) if bad.size else None)


ABS_TOTAL = ("absolute", "total")


def gfj_condition_scan(cfg: ModelConfig) -> ConditionVerdict:
    """Column-sum condition for P2/P3/P4 polarizability of a gFJ model.

    With no naive node, H is doubly stochastic exactly when
    Σ_j λ_j w_ji / (1 - λ_j) = λ_i / (1 - λ_i) for every node i. A naive
    node always makes the model polarizing.
    """
    if cfg.variant != "gfj":
        raise ValidationError("gfj_condition_scan needs a gfj config")
    lam, W = cfg.lambdas, cfg.W
    naive = np.flatnonzero(lam >= 1 - NAIVE_TOL)
    if naive.size:
        return ConditionVerdict(ABS_TOTAL, Verdict.POLARIZING, int(naive[0]),
                                detail={"reason": "naive node present"})
    r = lam / (1 - lam)
    lhs = W.T @ r
    res = lhs - r
    w = _scan(res, np.abs(lhs) + np.abs(r))
    if w is None:
        return ConditionVerdict(ABS_TOTAL, Verdict.DEPOLARIZING, None, res)
    return ConditionVerdict(ABS_TOTAL, Verdict.POLARIZING, w, res)


def _is_symmetric(A):
    return np.allclose(A, A.T, rtol=0, atol=1e-12)


def vfj_rfj_condition(cfg: ModelConfig) -> ConditionVerdict:
    """Column-sum condition written directly in social weights.

    vFJ: Σ_{j≠i} ŵ_ij / ŵ_ii - Σ_{j≠i} ŵ_ji / ŵ_jj must vanish at every
    node, with stubborn terms contributing 0. rFJ: out-weight minus
    in-weight must vanish. On an undirected graph with equal self-weights
    the model never polarizes in any metric.
    """
    if cfg.variant == "gfj":
        raise ValidationError("use gfj_condition_scan for gfj configs")
    A, sw = cfg.W, cfg.self_weights
    d = A.sum(axis=1)
    zero_self = np.flatnonzero((sw <= 0) & (d > 0))
    if zero_self.size:
        return ConditionVerdict(ABS_TOTAL, Verdict.POLARIZING, int(zero_self[0]),
                                detail={"reason": "naive node present"})
    if cfg.variant == "rfj":
        out_term, in_term = d, A.sum(axis=0)
    else:
        inv = np.where(np.isinf(sw), 0.0, 1.0 / np.where(sw > 0, sw, 1.0))
        out_term = d * inv
        in_term = A.T @ inv
    res = out_term - in_term
    w = _scan(res, np.abs(out_term) + np.abs(in_term))
    guarantee = None
    if _is_symmetric(A) and (cfg.variant == "rfj" or np.all(sw == sw[0])):
        guarantee = "undirected with identical self-weights: never polarizing in any metric"
    if w is None:
        return ConditionVerdict(ABS_TOTAL, Verdict.DEPOLARIZING, None, res, guarantee)
    return ConditionVerdict(ABS_TOTAL, Verdict.POLARIZING, w, res)


def absolute_total_verdict(cfg: ModelConfig) -> ConditionVerdict:
    if cfg.variant == "gfj":
        return gfj_condition_scan(cfg)
    return vfj_rfj_condition(cfg)


def local_verdict(cfg: ModelConfig) -> ConditionVerdict:
    """NDI class: reported as depolarizing for every converged model.

    This is the published claim, not a per-instance proof; see the README
    for a small directed counterexample where NDI grows.
    """
    return ConditionVerdict(("local",), Verdict.DEPOLARIZING, guarantee="claimed for all converged models")


@dataclass(frozen=True)
class DispersionCheck:
    verdict: Verdict
    lhs: float
    rhs: float
    delta_p1: float

    def as_verdict(self) -> ConditionVerdict:
        return ConditionVerdict(("dispersion",), self.verdict,
                                detail={"lhs": self.lhs, "rhs": self.rhs, "delta_p1": self.delta_p1})


def p1_gdi_sufficient_test(basis: SpectralBasis, alpha) -> DispersionCheck:
    """Sufficient condition for the P1/GDI shift at s = Bα to be positive.

    Holds when Σα_i²(σ_i² - 1) is positive and at least
    (1/n) [Σ|α_i|(σ_i² - 1)⟨|v_i|,1⟩] [Σ|α_i|(σ_i² + 1)⟨|v_i|,1⟩].
    The P1 shift itself is returned as a direct cross-check.
    """
    alpha = np.asarray(alpha, dtype=float)
    sig2 = basis.sigmas ** 2
    mass = np.abs(basis.B).sum(axis=0)
    lhs = float(np.sum(alpha ** 2 * (sig2 - 1)))
    a = float(np.sum(np.abs(alpha) * (sig2 - 1) * mass))
    b = float(np.sum(np.abs(alpha) * (sig2 + 1) * mass))
    rhs = a * b / basis.n
    s = basis.B @ alpha
    dp1 = p1(basis.H @ s) - p1(s)
    ok = basis.sigmas[0] > 1 + SIGMA_TOL and lhs > CONDITION_TOL and lhs >= rhs
    return DispersionCheck(Verdict.SUFFICIENT_HOLDS if ok else Verdict.INCONCLUSIVE, lhs, rhs, dp1)


def naive_group_limit(cfg: ModelConfig, tau: float, naive_prejudices):
    """Outcome when naive nodes hold arbitrary prejudices and all others hold τ.

    Returns
    -------
    z : ndarray
        The predicted outcome τ·1.
    s : ndarray
        The prejudice vector that realizes this setting.
    """
    g = map_vfj_to_gfj(cfg)
    naive = g.lambdas >= 1 - NAIVE_TOL
    vals = np.asarray(naive_prejudices, dtype=float)
    if vals.shape != (int(naive.sum()),):
        raise ValidationError(f"expected {int(naive.sum())} naive prejudices, got {vals.size}")
    if naive.all():
        raise ValidationError("every node is naive; the outcome is not determined by τ")
    if not -1 <= tau <= 1 or np.any(np.abs(vals) > 1):
        raise ValidationError("opinions must lie in [-1, 1]")
    s = np.full(g.n, float(tau))
    s[naive] = vals
    return np.full(g.n, float(tau)), s
