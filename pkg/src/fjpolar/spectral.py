"""Eigenbasis of HᵀH and construction of polarizing prejudice vectors.

All candidates live in the positive box [0, 1]^n; negating a candidate
gives the same P2/P3/P4 shift.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import minimize

from .errors import NotPolarizing, NumericalError, Unavailable, ValidationError
from .metrics import metric_value
from .models import ResponseMatrix

SIGMA_TOL = 1e-9
BOX_TOL = 1e-12


def _matrix(H):
    return H.H if isinstance(H, ResponseMatrix) else np.asarray(H, dtype=float)


@dataclass(frozen=True)
class SpectralBasis:
    """Singular values of H (descending) and eigenvectors of HᵀH as columns of B."""

    sigmas: np.ndarray
    B: np.ndarray
    H: np.ndarray

    @property
    def n(self) -> int:
        return self.sigmas.size

    def vector(self, i: int) -> np.ndarray:
        return self.B[:, i]

    def coefficients(self, s) -> np.ndarray:
        return self.B.T @ np.asarray(s, dtype=float)

    def strictly_above_one(self) -> np.ndarray:
        return np.flatnonzero(self.sigmas > 1 + SIGMA_TOL)

    def equal_to_one(self) -> np.ndarray:
        return np.flatnonzero(np.abs(self.sigmas - 1) <= SIGMA_TOL)


def spectral_basis(H, tol: float = 1e-8) -> SpectralBasis:
    """Eigendecomposition of the symmetric matrix HᵀH.

    Each eigenvector is flipped so its largest-magnitude entry is positive;
    the leading one is made entrywise nonnegative.
    """
    Hm = _matrix(H)
    if not np.all(np.isfinite(Hm)):
        raise NumericalError("H contains non-finite entries")
    G = Hm.T @ Hm
    G = 0.5 * (G + G.T)
    evals, evecs = np.linalg.eigh(G)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    for k in range(evecs.shape[1]):
        v = evecs[:, k]
        if v[np.argmax(np.abs(v))] < 0:
            evecs[:, k] = -v
    v1 = evecs[:, 0]
    if v1.sum() < 0:
        v1 = -v1
    if v1.min() >= -1e-10:
        v1 = np.clip(v1, 0.0, None)
        v1 /= np.linalg.norm(v1)
    evecs[:, 0] = v1
    resid = np.abs(G @ evecs - evecs * evals).max() if evals.size else 0.0
    if resid > tol * max(1.0, evals[0]):
        raise NumericalError(f"eigen-decomposition residual {resid:.3g}")
    return SpectralBasis(np.sqrt(np.clip(evals, 0.0, None)), evecs, Hm)


def shift(H, s, metric: str = "p3", W=None) -> float:
    """Φ(Hs) - Φ(s) for one metric."""
    Hm = _matrix(H)
    s = np.asarray(s, dtype=float)
    if W is None and isinstance(H, ResponseMatrix):
        W = H.W
    return metric_value(metric, Hm @ s, W) - metric_value(metric, s, W)


@dataclass
class Candidate:
    """A prejudice vector with how it was produced.

    ``provenance`` is one of ``exact``, ``heuristic``, ``multistart``, and
    ``certified`` tells whether the construction guarantees optimality for
    its own problem.
    """

    name: str
    s: np.ndarray
    provenance: str = "exact"
    certified: bool = True
    info: dict = field(default_factory=dict)


def candidate_b2_1(basis: SpectralBasis) -> Candidate:
    """Unit leading eigenvector v_1; its P3 shift is σ_1² - 1."""
    if basis.sigmas[0] <= 1 + SIGMA_TOL:
        raise NotPolarizing("largest singular value does not exceed 1")
    s = basis.vector(0).copy()
    pred = basis.sigmas[0] ** 2 - 1
    got = shift(basis.H, s, "p3")
    if abs(got - pred) > 1e-8:
        raise NumericalError(f"P3 shift {got} disagrees with σ_1² - 1 = {pred}")
    return Candidate("s_B2_1", s, info={"predicted_p3": pred})


def candidate_b2_t(basis: SpectralBasis) -> Candidate:
    """v_1 scaled so its largest entry is 1."""
    base = candidate_b2_1(basis)
    t = 1.0 / base.s.max()
    s = np.clip(t * base.s, 0.0, 1.0)
    return Candidate("s_B2_t", s, info={"t": t, "predicted_p3": t * t * base.info["predicted_p3"]})


def candidate_b1_1(H) -> Candidate:
    """Standard basis vector on the column of H with the largest sum."""
    Hm = _matrix(H)
    col = Hm.sum(axis=0)
    j = int(np.argmax(col))
    if col[j] <= 1 + SIGMA_TOL:
        raise NotPolarizing("no column sum exceeds 1")
    s = np.zeros(Hm.shape[0])
    s[j] = 1.0
    got = shift(Hm, s, "p4")
    if abs(got - (col[j] - 1)) > 1e-9:
        raise NumericalError("P4 shift disagrees with the column sum")
    return Candidate("s_B1_1", s, info={"column": j, "predicted_p4": col[j] - 1})


def candidate_lp_p4(basis: SpectralBasis) -> Candidate:
    """Maximizer of the P4 shift over the box.

    On [0,1]^n the shift is linear, Σ_j s_j (Hᵀ1 - 1)_j, so the optimum sets
    s_j = 1 exactly where that coefficient is positive.
    """
    c = basis.B @ ((basis.sigmas ** 2 - 1) * basis.B.sum(axis=0))
    s = (c > BOX_TOL).astype(float)
    return Candidate("s_max_p4", s, info={"coefficients": c})


# ----------------------------------------------------------------------------
# maximizing a quadratic over a polytope


def _quad(alpha, w):
    return float(np.sum(w * alpha * alpha))


def _subspace_vertices(V, w, limit):
    """Best vertex of {α : 0 <= Vα <= 1}, or None when there are too many."""
    n, k = V.shape
    if comb(n, k) * 2 ** k > limit:
        return None
    rhs = np.array(list(itertools.product((0.0, 1.0), repeat=k))).T  # k x 2^k
    best, best_val = None, -np.inf
    rows = list(itertools.combinations(range(n), k))
    for start in range(0, len(rows), 4096):
        idx = np.array(rows[start:start + 4096])
        blocks = V[idx]  # m x k x k
        ok = np.abs(np.linalg.det(blocks)) > 1e-12
        if not ok.any():
            continue
        sol = np.linalg.solve(blocks[ok], np.broadcast_to(rhs, (ok.sum(),) + rhs.shape))
        alphas = np.moveaxis(sol, 1, 2).reshape(-1, k)
        s = alphas @ V.T
        feas = np.all((s >= -1e-9) & (s <= 1 + 1e-9), axis=1)
        if not feas.any():
            continue
        vals = (alphas[feas] ** 2) @ w
        i = int(np.argmax(vals))
        if vals[i] > best_val + 1e-13:
            best_val, best = vals[i], alphas[feas][i]
    return best


def _subspace_multistart(V, w, starts, rng, restarts):
    n, k = V.shape
    cons = [{"type": "ineq", "fun": lambda a: V @ a, "jac": lambda a: V},
            {"type": "ineq", "fun": lambda a: 1 - V @ a, "jac": lambda a: -V}]
    seeds = list(starts)
    for _ in range(restarts):
        seeds.append(V.T @ rng.random(n))
    best, best_val = None, -np.inf
    for a0 in seeds:
        res = minimize(lambda a: -_quad(a, w), a0, jac=lambda a: -2 * w * a,
                       constraints=cons, method="SLSQP", options={"maxiter": 500, "ftol": 1e-14})
        a = res.x
        s = V @ a
        if np.all(s >= -1e-8) and np.all(s <= 1 + 1e-8):
            val = _quad(a, w)
            if val > best_val + 1e-13:
                best, best_val = a, val
    return best


def candidate_subspace_qp(basis: SpectralBasis, mode: str = "gt", vertex_limit: int = 2_000_000,
                          restarts: int = 32, seed: int = 0) -> Candidate:
    """Best prejudice inside the span of eigenvectors with σ > 1.

    Maximizes Σ α_i² (σ_i² - 1) subject to 0 <= Bα <= 1 with α supported
    on that span. Vertices are enumerated when their count is below
    ``vertex_limit`` (certified), otherwise SLSQP runs from several starts.

    ``mode="ge"`` adds the σ = 1 eigenvectors, which leave the P3 shift
    unchanged, and uses them to push up the P4 shift.
    """
    if mode not in ("gt", "ge"):
        raise ValidationError("mode must be 'gt' or 'ge'")
    idx = basis.strictly_above_one()
    if mode == "ge":
        try:
            base = candidate_subspace_qp(basis, "gt", vertex_limit, restarts, seed)
        except Unavailable:
            base = candidate_b2_t(basis)
        return _augment_with_unit_directions(basis, base)
    if idx.size < 2:
        raise Unavailable("fewer than two singular values exceed 1")
    V = basis.B[:, idx]
    w = basis.sigmas[idx] ** 2 - 1
    alpha = _subspace_vertices(V, w, vertex_limit)
    certified = alpha is not None
    if alpha is None:
        start = V.T @ candidate_b2_t(basis).s
        alpha = _subspace_multistart(V, w, [start], np.random.default_rng(seed), restarts)
        if alpha is None:
            raise Unavailable("subspace solver found no feasible point")
    s = np.clip(V @ alpha, 0.0, 1.0)
    b2t = candidate_b2_t(basis).s
    if shift(basis.H, s) < shift(basis.H, b2t) - 1e-9:
        raise NumericalError("subspace optimum below the scaled leading eigenvector")
    return Candidate("s_V_gt1", s, "exact" if certified else "multistart", certified,
                     {"dimension": int(idx.size)})


def _augment_with_unit_directions(basis, base):
    Hm = basis.H
    s = base.s.copy()
    for k in basis.equal_to_one():
        u = basis.vector(k)
        lo, hi = -np.inf, np.inf
        for si, ui in zip(s, u):
            if ui > BOX_TOL:
                lo, hi = max(lo, -si / ui), min(hi, (1 - si) / ui)
            elif ui < -BOX_TOL:
                lo, hi = max(lo, (1 - si) / ui), min(hi, -si / ui)
        if not lo <= hi:
            continue
        # P4 shift is piecewise linear in γ, so its maximum sits at a kink or an end
        Hs, Hu = Hm @ s, Hm @ u
        pts = [lo, hi, 0.0]
        with np.errstate(divide="ignore", invalid="ignore"):
            pts += list(-Hs / Hu) + list(-s / u)
        pts = sorted({p for p in pts if np.isfinite(p) and lo <= p <= hi})
        vals = [shift(Hm, np.clip(s + g * u, 0, 1), "p4") for g in pts]
        top = max(vals)
        g = min((p for p, v in zip(pts, vals) if v >= top - 1e-13), key=abs)
        s = np.clip(s + g * u, 0.0, 1.0)
    name = "s_V_ge1"
    return Candidate(name, s, base.provenance, base.certified,
                     {**base.info, "unit_directions": int(basis.equal_to_one().size)})


# ----------------------------------------------------------------------------
# global search over the box


def _kkt_search(Q):
    """Global max of sᵀQs over [0,1]^n by enumerating KKT points.

    Every coordinate is at 0, at 1, or free; free coordinates solve
    Q_FF s_F = -Q_FB s_B, and only free blocks with Q_FF negative
    semidefinite can hold a local maximum.
    """
    n = Q.shape[0]
    best_val, best = 0.0, np.zeros(n)
    for r in range(n + 1):
        for F in itertools.combinations(range(n), r):
            F = list(F)
            Bd = [i for i in range(n) if i not in F]
            if F:
                QFF = Q[np.ix_(F, F)]
                if np.linalg.eigvalsh(QFF).max() > 1e-12:
                    continue
            bounds = np.array(list(itertools.product((0.0, 1.0), repeat=len(Bd))), dtype=float)
            bounds = bounds.reshape(2 ** len(Bd), len(Bd))
            S = np.zeros((bounds.shape[0], n))
            S[:, Bd] = bounds
            if F:
                rhs = -(Q[np.ix_(F, Bd)] @ bounds.T)
                sol, *_ = np.linalg.lstsq(QFF, rhs, rcond=None)
                S[:, F] = sol.T
                ok = np.all((sol >= -1e-10) & (sol <= 1 + 1e-10), axis=0)
                ok &= np.abs(QFF @ sol - rhs).max(axis=0) <= 1e-9
                S = np.clip(S[ok], 0.0, 1.0)
            if S.shape[0] == 0:
                continue
            vals = np.einsum("ij,jk,ik->i", S, Q, S)
            i = int(np.argmax(vals))
            if vals[i] > best_val + 1e-13:
                best_val, best = float(vals[i]), S[i]
    return best


def _coordinate_ascent(Q, s, sweeps=200):
    s = s.copy()
    for _ in range(sweeps):
        moved = 0.0
        for i in range(s.size):
            # f(s + t e_i) = f(s) + 2 t (Qs)_i + t^2 Q_ii
            g = Q[i] @ s
            a = Q[i, i]
            opts = [0.0, 1.0]
            if a < 0:
                opts.append(min(1.0, max(0.0, s[i] - g / a)))
            vals = [2 * (x - s[i]) * g + (x - s[i]) ** 2 * a for x in opts]
            j = int(np.argmax(vals))
            if vals[j] > 1e-15:
                moved = max(moved, abs(opts[j] - s[i]))
                s[i] = opts[j]
        if moved < 1e-13:
            break
    return s


def _multistart_box(Q, starts, rng, restarts):
    L = 2 * max(np.abs(np.linalg.eigvalsh(Q)).max(), 1e-12)
    seeds = list(starts) + [rng.random(Q.shape[0]) for _ in range(restarts)]
    best_val, best = -np.inf, None
    for s in seeds:
        s = np.clip(s, 0, 1)
        for _ in range(500):
            s_new = np.clip(s + (2 * Q @ s) / L, 0, 1)
            if np.abs(s_new - s).max() < 1e-12:
                break
            s = s_new
        s = _coordinate_ascent(Q, s)
        val = s @ Q @ s
        if val > best_val + 1e-13:
            best_val, best = val, s
    return best


def global_p23_search(basis: SpectralBasis, budget: int = 64, n_exact_limit: int = 12,
                      seed: int = 0) -> Candidate:
    """Maximize the P3 (equivalently P2) shift sᵀ(HᵀH - I)s over [0,1]^n.

    Exact for n <= ``n_exact_limit`` by KKT enumeration; beyond that,
    projected gradient ascent from ``budget`` random starts plus the known
    candidates, polished by coordinate ascent and not certified.
    """
    if basis.sigmas[0] <= 1 + SIGMA_TOL:
        raise NotPolarizing("largest singular value does not exceed 1")
    if budget <= 0:
        raise Unavailable("search budget is zero")
    Hm = basis.H
    Q = Hm.T @ Hm - np.eye(basis.n)
    Q = 0.5 * (Q + Q.T)
    if basis.n <= n_exact_limit:
        s = _kkt_search(Q)
        return Candidate("s_max_p23", s, "exact", True)
    starts = [candidate_b2_t(basis).s]
    try:
        starts.append(candidate_subspace_qp(basis, "gt", restarts=4).s)
    except (Unavailable, NumericalError):
        pass
    s = _multistart_box(Q, starts, np.random.default_rng(seed), budget)
    return Candidate("s_max_p23", s, "multistart", False)


# ----------------------------------------------------------------------------
# the eigenvector-walk heuristic


def _concordant(x):
    return bool(np.all(x >= -BOX_TOL) or np.all(x <= BOX_TOL))


def _step_to_face(s, d):
    """Largest γ >= 0 with s + γd in the box."""
    g = np.inf
    for si, di in zip(s, d):
        if di > BOX_TOL:
            g = min(g, (1 - si) / di)
        elif di < -BOX_TOL:
            g = min(g, -si / di)
    return 0.0 if not np.isfinite(g) else max(g, 0.0)


def heuristic_v_gt1(basis: SpectralBasis) -> Candidate:
    """Walk from the scaled leading eigenvector along the other σ > 1 directions.

    At each round, with O the entries at 1 and Z the entries at 0, the
    lowest-index unused eigenvector whose entries are sign-concordant on O
    and on Z is chosen and oriented to be nonnegative on O. The walk
    s - βv then moves with β <= 0 if v >= 0 on Z, with β >= 0 if v <= 0
    on Z, and tries both if Z is empty or v vanishes there. Each move runs
    until the first box face; if no entry is then at 1 the vector is
    rescaled by its maximum. A move is kept only when the P3 shift grows.
    """
    Hm = basis.H
    s = candidate_b2_t(basis).s
    best = shift(Hm, s)
    remaining = [int(i) for i in basis.strictly_above_one() if i != 0]
    log = []
    while remaining:
        O = np.abs(s - 1) <= BOX_TOL
        Z = np.abs(s) <= BOX_TOL
        pick = next((i for i in remaining
                     if _concordant(basis.vector(i)[O]) and _concordant(basis.vector(i)[Z])), None)
        if pick is None:
            break
        remaining.remove(pick)
        v = basis.vector(pick).copy()
        if O.any() and np.all(v[O] <= BOX_TOL) and np.any(v[O] < -BOX_TOL):
            v = -v
        dirs = []
        vz = v[Z]
        if not Z.any() or np.all(np.abs(vz) <= BOX_TOL):
            dirs = [("beta_negative", v), ("beta_positive", -v)]
        elif np.all(vz >= -BOX_TOL):
            dirs = [("beta_negative", v)]
        else:
            dirs = [("beta_positive", -v)]
        trial = None
        for label, d in dirs:
            g = _step_to_face(s, d)
            if g <= 0:
                continue
            cand = np.clip(s + g * d, 0.0, 1.0)
            if cand.max() < 1 - BOX_TOL and cand.max() > 0:
                cand = cand / cand.max()
            val = shift(Hm, cand)
            if trial is None or val > trial[0]:
                trial = (val, cand, label, g)
        if trial is not None and trial[0] > best + 1e-15:
            best, s = trial[0], trial[1]
            log.append({"eigenvector": pick, "path": trial[2], "step": float(trial[3]), "p3_shift": float(best)})
    return Candidate("s_V_gt1_heu", s, "heuristic", False, {"steps": log})


# ----------------------------------------------------------------------------
# oracles


def brute_force_max(H, metric: str = "p3", grid: int = 20, W=None,
                    max_points: int = 5_000_000, max_vertices: int = 2 ** 20, chunk: int = 65536):
    """Best shift over the grid {0, 1/g, ..., 1}^n together with all box vertices.

    Points are visited in lexicographic order and the first maximum wins.
    ``grid=1`` enumerates vertices only.

    Returns
    -------
    s : ndarray
    value : float
    """
    Hm = _matrix(H)
    n = Hm.shape[0]
    if W is None and isinstance(H, ResponseMatrix):
        W = H.W
    if grid < 1:
        raise ValidationError("grid must be at least 1")
    if (grid + 1) ** n > max_points:
        if grid > 1 or 2 ** n > max_vertices:
            raise Unavailable(f"{(grid + 1) ** n} grid points exceed the limit")
    levels = np.linspace(0.0, 1.0, grid + 1)

    def values(S):
        Z = S @ Hm.T
        if metric in ("p2", "p3"):
            out = (Z * Z).sum(1) - (S * S).sum(1)
            return out / n if metric == "p2" else out
        if metric == "p4":
            return np.abs(Z).sum(1) - np.abs(S).sum(1)
        if metric in ("p1", "gdi"):
            out = ((Z - Z.mean(1, keepdims=True)) ** 2).sum(1) - ((S - S.mean(1, keepdims=True)) ** 2).sum(1)
            return out * n if metric == "gdi" else out
        if metric == "ndi":
            if W is None:
                raise ValidationError("NDI needs the influence matrix")
            return np.array([metric_value("ndi", z, W) - metric_value("ndi", x, W) for z, x in zip(Z, S)])
        raise ValidationError(f"unknown metric {metric!r}")

    best_val, best = -np.inf, None
    it = itertools.product(levels, repeat=n)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        S = np.array(block)
        vals = values(S)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best = float(vals[i]), S[i].copy()
    return best, best_val


def concordance_lift(s) -> np.ndarray:
    """Entrywise |s|; never lowers the P2, P3 or P4 shift."""
    return np.abs(np.asarray(s, dtype=float))


# ----------------------------------------------------------------------------


CANDIDATE_NAMES = ("s_B2_1", "s_B2_t", "s_V_gt1", "s_V_ge1", "s_V_gt1_heu", "s_max_p23", "s_B1_1", "s_max_p4")


def all_candidates(basis: SpectralBasis, names=CANDIDATE_NAMES, budget: int = 64, seed: int = 0) -> dict:
    """Compute the requested candidates; unavailable ones map to their reason string."""
    makers = {
        "s_B2_1": lambda: candidate_b2_1(basis),
        "s_B2_t": lambda: candidate_b2_t(basis),
        "s_V_gt1": lambda: candidate_subspace_qp(basis, "gt", seed=seed),
        "s_V_ge1": lambda: candidate_subspace_qp(basis, "ge", seed=seed),
        "s_V_gt1_heu": lambda: heuristic_v_gt1(basis),
        "s_max_p23": lambda: global_p23_search(basis, budget=budget, seed=seed),
        "s_B1_1": lambda: candidate_b1_1(basis.H),
        "s_max_p4": lambda: candidate_lp_p4(basis),
    }
    out = {}
    for name in names:
        if name not in makers:
            raise ValidationError(f"unknown candidate {name!r}")
        try:
            out[name] = makers[name]()
        except (NotPolarizing, Unavailable) as exc:
            out[name] = str(exc)
    return out
