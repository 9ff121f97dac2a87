"""Friedkin-Johnsen model variants, response matrices and steady states.

Three variants are supported:

* ``gfj``  z_i <- (1 - λ_i) s_i + λ_i Σ_j w_ij z_j, with W row-stochastic;
* ``vfj``  social weights ŵ_ij plus a self-weight ŵ_ii per node
  (``inf`` for a stubborn node);
* ``rfj``  ``vfj`` with every self-weight equal to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import ConvergenceError, ValidationError
from .graph import SocialGraph, as_opinion, row_normalize

VARIANTS = ("gfj", "vfj", "rfj")
NAIVE_TOL = 1e-12
RADIUS_MARGIN = 1e-10


def _square(M, name):
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be a square matrix")
    if np.any(np.isnan(M)):
        raise ValidationError(f"{name} contains NaN")
    return M


@dataclass(frozen=True)
class ModelConfig:
    """One configured model.

    For ``gfj``, ``W`` is the influence matrix and ``lambdas`` the
    susceptibilities. For ``vfj``/``rfj``, ``W`` holds the social weights
    ŵ_ij (diagonal ignored) and ``self_weights`` the ŵ_ii.
    """

    variant: str
    W: np.ndarray
    lambdas: np.ndarray | None = None
    self_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        W = _square(self.W, "W")
        n = W.shape[0]
        if np.any(W < 0):
            raise ValidationError("weights must be nonnegative")
        if self.variant == "gfj":
            if not np.allclose(W.sum(axis=1), 1.0, rtol=0, atol=1e-12):
                raise ValidationError("influence matrix must be row-stochastic")
            lam = np.asarray(self.lambdas, dtype=float)
            if lam.shape != (n,) or np.any(np.isnan(lam)) or np.any(lam < 0) or np.any(lam > 1):
                raise ValidationError("lambdas must be a length-n vector in [0, 1]")
            object.__setattr__(self, "lambdas", lam)
        else:
            W = W.copy()
            np.fill_diagonal(W, 0.0)
            if self.variant == "rfj":
                sw = np.ones(n)
            else:
                sw = np.asarray(self.self_weights if self.self_weights is not None else np.ones(n), dtype=float)
            if sw.shape != (n,) or np.any(np.isnan(sw)) or np.any(sw < 0):
                raise ValidationError("self_weights must be a length-n nonnegative vector")
            object.__setattr__(self, "self_weights", sw)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @classmethod
    def gfj(cls, W, lambdas):
        return cls("gfj", W, lambdas=lambdas)

    @classmethod
    def vfj(cls, social, self_weights):
        return cls("vfj", social, self_weights=self_weights)

    @classmethod
    def rfj(cls, social):
        return cls("rfj", social)

    @classmethod
    def from_graph(cls, g: SocialGraph, variant: str, lambdas=None):
        """Build a config from a social graph.

        ``gfj`` row-normalizes the off-diagonal weights; ``vfj`` takes the
        graph's self-weights, defaulting to 1 where none are declared.
        """
        if variant == "gfj":
            if lambdas is None:
                raise ValidationError("gfj needs susceptibilities")
            return cls.gfj(row_normalize(g), getattr(lambdas, "lambdas", lambdas))
        A = g.adjacency()
        if variant == "rfj":
            return cls.rfj(A)
        sw = g.self_weights if g.self_weights is not None else np.ones(g.n)
        return cls.vfj(A, sw)


def map_vfj_to_gfj(cfg: ModelConfig) -> ModelConfig:
    """Rewrite a ``vfj``/``rfj`` config as the equivalent ``gfj`` config.

    λ_i = d_i / (ŵ_ii + d_i) and w_ij = ŵ_ij / d_i with d_i = Σ_k ŵ_ik.
    A stubborn node gets λ_i = 0 and an identity row in W.
    """
    if cfg.variant == "gfj":
        return cfg
    A, sw = cfg.W, cfg.self_weights
    n = cfg.n
    d = A.sum(axis=1)
    stub = np.isinf(sw)
    lam = np.zeros(n)
    W = np.zeros_like(A)
    for i in range(n):
        if stub[i]:
            W[i, i] = 1.0
            continue
        if d[i] <= 0:
            if sw[i] <= 0:
                raise ValidationError(f"node {i} has no neighbours and zero self-weight")
            # no one to listen to: behaves as stubborn
            W[i, i] = 1.0
            continue
        lam[i] = d[i] / (sw[i] + d[i])
        W[i] = A[i] / d[i]
    return ModelConfig.gfj(W, lam)


@dataclass(frozen=True)
class ConvergenceVerdict:
    converges: bool
    radius: float
    bound: float

    def __bool__(self):
        return self.converges


def convergence_check(cfg: ModelConfig, max_iter: int = 5000) -> ConvergenceVerdict:
    """Decide whether ρ(ΛW) < 1 - 1e-10.

    The Gershgorin row bound settles the common case. Otherwise a power
    iteration on ΛW + I brackets ρ between the min and max Collatz-Wielandt
    ratios; if the bracket straddles the threshold a dense eigenvalue
    computation decides.
    """
    g = map_vfj_to_gfj(cfg)
    M = g.lambdas[:, None] * g.W
    thr = 1 - RADIUS_MARGIN
    bound = float(M.sum(axis=1).max())
    if bound < thr:
        return ConvergenceVerdict(True, bound, bound)

    S = M + np.eye(g.n)
    x = np.ones(g.n)
    lo, hi = 0.0, bound
    for _ in range(max_iter):
        y = S @ x
        r = y / x
        lo, hi = max(lo, r.min() - 1), min(hi, r.max() - 1)
        if hi < thr or lo >= thr or hi - lo < 1e-13:
            break
        x = y / y.max()
        x = np.maximum(x, 1e-300)
    if hi < thr:
        return ConvergenceVerdict(True, hi, bound)
    if lo >= thr:
        return ConvergenceVerdict(False, lo, bound)
    rho = float(np.abs(np.linalg.eigvals(M)).max())
    return ConvergenceVerdict(rho < thr, rho, bound)


@dataclass(frozen=True)
class ResponseMatrix:
    """Matrix H with z = H s, plus the gFJ form of the model that produced it."""

    H: np.ndarray
    variant: str
    naive_set: tuple
    W: np.ndarray
    lambdas: np.ndarray

    @property
    def n(self) -> int:
        return self.H.shape[0]


def _gfj_matrix(g: ModelConfig) -> np.ndarray:
    n = g.n
    I = np.eye(n)
    lu = lu_factor(I - g.lambdas[:, None] * g.W, check_finite=True)
    return lu_solve(lu, np.diag(1.0 - g.lambdas))


def _vfj_matrix(cfg: ModelConfig) -> np.ndarray:
    A, sw = cfg.W, cfg.self_weights
    n = cfg.n
    stub = np.isinf(sw)
    d = A.sum(axis=1)
    M = np.diag(d + np.where(stub, 0.0, sw)) - A
    rhs = np.diag(np.where(stub, 0.0, sw))
    for i in np.flatnonzero(stub | (d <= 0)):
        M[i] = 0.0
        M[i, i] = 1.0
        rhs[i, i] = 1.0
    return lu_solve(lu_factor(M), rhs)


def build_response_matrix(cfg: ModelConfig, check: bool = True) -> ResponseMatrix:
    """Steady-state response matrix for any variant.

    gFJ: H = (I - ΛW)^-1 (I - Λ); vFJ: H = (D + Ã - A)^-1 Ã; rFJ: H = (L + I)^-1.
    Raises ConvergenceError when ρ(ΛW) is not certified below 1.
    """
    g = map_vfj_to_gfj(cfg)
    if check:
        v = convergence_check(g)
        if not v.converges:
            raise ConvergenceError(f"spectral radius of ΛW is {v.radius:.12g}, not below 1", residual=v.radius)
    with np.errstate(divide="raise", invalid="raise", over="raise"):
        try:
            if cfg.variant == "gfj":
                H = _gfj_matrix(g)
            elif cfg.variant == "vfj":
                H = _vfj_matrix(cfg)
            else:
                L = np.diag(cfg.W.sum(axis=1)) - cfg.W
                H = lu_solve(lu_factor(L + np.eye(cfg.n)), np.eye(cfg.n))
        except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            raise ConvergenceError(f"linear solve failed: {exc}") from exc
    if not np.all(np.isfinite(H)):
        raise ConvergenceError("response matrix is not finite")
    naive = tuple(int(i) for i in np.flatnonzero(g.lambdas >= 1 - NAIVE_TOL))
    if naive:
        H[:, list(naive)] = 0.0
    return ResponseMatrix(H, cfg.variant, naive, g.W, g.lambdas)


def steady_state(H: ResponseMatrix | np.ndarray, s) -> np.ndarray:
    """Final opinions z = H s."""
    Hm = H.H if isinstance(H, ResponseMatrix) else np.asarray(H, dtype=float)
    s = as_opinion(s, Hm.shape[0])
    return np.clip(Hm @ s, -1.0, 1.0)


def iterate_dynamics(cfg: ModelConfig, s, tol: float = 1e-10, max_iter: int = 100_000):
    """Run z(k+1) = (I - Λ) s + ΛW z(k) from z(0) = s.

    Stops when the step size is below ``tol`` and the tail bound
    d_k q / (1 - q), with q the last contraction ratio, is too.

    Returns
    -------
    z : ndarray
    iterations : int
    """
    g = map_vfj_to_gfj(cfg)
    s = as_opinion(s, g.n)
    M = g.lambdas[:, None] * g.W
    base = (1 - g.lambdas) * s
    z = s.copy()
    prev = None
    d = np.inf
    for k in range(1, max_iter + 1):
        z_new = base + M @ z
        d = np.abs(z_new - z).max()
        z = z_new
        if d == 0:
            return z, k
        if d <= tol and prev is not None:
            q = min(d / prev, 1 - 1e-6)
            if d * q / (1 - q) <= tol:
                return z, k
        prev = d
    raise ConvergenceError(f"no convergence after {max_iter} iterations", residual=d, last=z)


def trajectory(cfg: ModelConfig, s, tol: float = 1e-10, max_steps: int = 1000):
    """Opinion vectors z(0) = s, z(1), ... until the step size is below ``tol``.

    Unlike :func:`iterate_dynamics` this never raises on non-convergence,
    so it also covers the λ = 1 regime.

    Returns
    -------
    states : list of ndarray
    converged : bool
    """
    g = map_vfj_to_gfj(cfg)
    s = as_opinion(s, g.n)
    M = g.lambdas[:, None] * g.W
    base = (1 - g.lambdas) * s
    states = [s.copy()]
    z = s
    for _ in range(max_steps):
        z_new = base + M @ z
        done = np.abs(z_new - z).max() <= tol
        states.append(z_new)
        z = z_new
        if done:
            return states, True
    return states, False
