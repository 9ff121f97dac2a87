"""Social graphs, influence matrices, PageRank and susceptibility profiles."""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConvergenceError, ValidationError

STUBBORN = np.inf  # self-weight marker for a node that never moves


@dataclass(frozen=True)
class SocialGraph:
    """Weighted social graph on nodes ``0..n-1``.

    Attributes
    ----------
    n : int
    edges : tuple of (i, j, w)
        Directed arcs. An undirected graph stores both directions.
    directed : bool
    self_weights : ndarray or None
        Per-node self-weight; ``STUBBORN`` (inf) marks a stubborn node.
    labels : tuple
        Original node identifiers, indexed by compacted id.
    """

    n: int
    edges: tuple
    directed: bool = False
    self_weights: np.ndarray | None = None
    labels: tuple = field(default=())

    def __post_init__(self):
        if self.n <= 0:
            raise ValidationError("graph has no nodes")
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"edge ({i}, {j}) has an index outside [0, {self.n})")
            if i == j:
                raise ValidationError(f"self-loop on node {i}; declare it as a self-weight")
            if not w >= 0:
                raise ValidationError(f"edge ({i}, {j}) has negative weight {w}")
            if (i, j) in seen:
                raise ValidationError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        if not self.directed:
            arcs = {(i, j): w for i, j, w in self.edges}
            for (i, j), w in arcs.items():
                if arcs.get((j, i)) != w:
                    raise ValidationError(f"undirected graph missing reverse arc of ({i}, {j}) with equal weight")
        if self.self_weights is not None:
            sw = np.asarray(self.self_weights, dtype=float)
            if sw.shape != (self.n,):
                raise ValidationError("self_weights must have one entry per node")
            if np.any(sw < 0) or np.any(np.isnan(sw)):
                raise ValidationError("self_weights must be nonnegative")
            object.__setattr__(self, "self_weights", sw)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.n)))

    def adjacency(self) -> np.ndarray:
        """Dense matrix of social weights with a zero diagonal."""
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = w
        return A


def _open_text(source):
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return source, False
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        return open(source, "r", encoding="utf-8"), True
    if isinstance(source, str):
        return io.StringIO(source), False
    raise ValidationError(f"cannot read edge list from {source!r}")


def _parse_label(tok):
    try:
        return int(tok)
    except ValueError:
        return tok


def load_edge_list(source, directed: bool = False) -> SocialGraph:
    """Parse an ``i j [w]`` edge list.

    Fields are split on whitespace or commas, a missing weight means 1.0,
    and lines starting with ``#`` are skipped. A line ``i i w`` sets the
    self-weight of node ``i`` (``inf`` marks it stubborn). Nodes that only
    appear in self-loops are isolated and dropped; ids are compacted in
    sorted order of the original labels.

    Parameters
    ----------
    source : str, path or text stream
        A path, a text stream, or the edge-list text itself.
    directed : bool
        Undirected lists are symmetrized, and listing a pair in both
        orientations counts as a duplicate.

    Returns
    -------
    SocialGraph
    """
    fh, close = _open_text(source)
    arcs = {}
    selfw = {}
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = [t for t in re.split(r"[\s,]+", line) if t]
            if len(toks) not in (2, 3):
                raise ValidationError(f"line {lineno}: expected 'i j [w]', got {line!r}")
            a, b = _parse_label(toks[0]), _parse_label(toks[1])
            try:
                w = float(toks[2]) if len(toks) == 3 else 1.0
            except ValueError:
                raise ValidationError(f"line {lineno}: bad weight {toks[2]!r}") from None
            if np.isnan(w) or w < 0:
                raise ValidationError(f"line {lineno}: negative or invalid weight {w}")
            if a == b:
                if a in selfw:
                    raise ValidationError(f"line {lineno}: duplicate self-weight for {a!r}")
                selfw[a] = w
                continue
            if np.isinf(w):
                raise ValidationError(f"line {lineno}: infinite weight is only allowed on self-loops")
            key = (a, b) if directed else tuple(sorted((a, b), key=str))
            if key in arcs:
                raise ValidationError(f"line {lineno}: duplicate edge {a!r} {b!r}")
            arcs[key] = w
    finally:
        if close:
            fh.close()

    used = {x for key in arcs for x in key}
    if not used:
        raise ValidationError("edge list contains no edges")
    labels = sorted(used, key=lambda x: (isinstance(x, str), x))
    index = {lab: k for k, lab in enumerate(labels)}
    edges = []
    for (a, b), w in arcs.items():
        edges.append((index[a], index[b], w))
        if not directed:
            edges.append((index[b], index[a], w))
    edges.sort()
    sw = None
    if selfw:
        sw = np.zeros(len(labels))
        for lab, w in selfw.items():
            if lab in index:
                sw[index[lab]] = w
    return SocialGraph(len(labels), tuple(edges), directed, sw, tuple(labels))


def load_karate() -> SocialGraph:
    """The 34-node karate club graph shipped with the package."""
    text = resources.files("fjpolar").joinpath("data/karate.txt").read_text()
    return load_edge_list(text, directed=False)


def row_normalize(g: SocialGraph | np.ndarray, include_self_weights: bool = False) -> np.ndarray:
    """Row-stochastic influence matrix ``w_ij = ŵ_ij / Σ_k ŵ_ik``.

    Self-weights enter the diagonal only when ``include_self_weights`` is
    set; otherwise ``w_ii = 0``.
    """
    if isinstance(g, SocialGraph):
        A = g.adjacency()
        if include_self_weights and g.self_weights is not None:
            if np.any(np.isinf(g.self_weights)):
                raise ValidationError("infinite self-weight cannot be row-normalized")
            A[np.diag_indices(g.n)] = g.self_weights
    else:
        A = np.array(g, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError("weight matrix must be square")
        if np.any(A < 0):
            raise ValidationError("weights must be nonnegative")
    rows = A.sum(axis=1)
    bad = np.flatnonzero(rows <= 0)
    if bad.size:
        raise ValidationError(f"node {bad[0]} has zero out-weight")
    return A / rows[:, None]


def pagerank(g: SocialGraph, damping: float = 0.85, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """PageRank by power iteration on the row-normalized graph.

    Dangling nodes spread their mass uniformly. Iteration stops once the
    L1 change between successive vectors drops below ``tol``.
    """
    if not 0 < damping < 1:
        raise ValidationError("damping must lie in (0, 1)")
    n = g.n
    A = g.adjacency()
    out = A.sum(axis=1)
    dangling = out == 0
    P = np.divide(A, out[:, None], out=np.zeros_like(A), where=~dangling[:, None])
    x = np.full(n, 1.0 / n)
    err = np.inf
    for _ in range(max_iter):
        leak = x[dangling].sum()
        x_new = damping * (x @ P + leak / n) + (1 - damping) / n
        x_new /= x_new.sum()
        err = np.abs(x_new - x).sum()
        x = x_new
        if err < tol:
            return x
    raise ConvergenceError(f"PageRank did not converge in {max_iter} iterations", residual=err, last=x)


@dataclass(frozen=True)
class SusceptibilityProfile:
    lambdas: np.ndarray
    scheme: str
    constant: float | None = None

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or np.any(lam < 0) or np.any(lam > 1) or np.any(np.isnan(lam)):
            raise ValidationError("susceptibilities must lie in [0, 1]")
        object.__setattr__(self, "lambdas", lam)


SCHEMES = ("constant", "pagerank", "pagerank-inv", "explicit")


def _rescale(x, eps):
    lo, hi = x.min(), x.max()
    if np.isclose(hi, lo, rtol=0, atol=1e-15 * max(1.0, abs(hi))):
        raise ValidationError("centrality is constant; use the constant scheme instead")
    return eps + (1 - 2 * eps) * (x - lo) / (hi - lo)


def build_susceptibility(centrality, scheme: str = "pagerank", epsilon: float = 0.01,
                         constant: float | None = None) -> SusceptibilityProfile:
    """Map centrality scores to susceptibilities.

    ``pagerank`` rescales ``C`` affinely onto ``[epsilon, 1 - epsilon]``,
    ``pagerank-inv`` does the same with ``1 / C``, ``constant`` ignores
    the scores and uses ``constant`` for every node, and ``explicit``
    takes the values as given.
    """
    c = np.asarray(centrality, dtype=float)
    if scheme == "constant":
        if constant is None or not 0 <= constant <= 1:
            raise ValidationError("constant scheme needs a value in [0, 1]")
        return SusceptibilityProfile(np.full(c.shape[0], float(constant)), scheme, float(constant))
    if scheme == "explicit":
        return SusceptibilityProfile(c.copy(), scheme)
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}")
    if not 0 < epsilon < 0.5:
        raise ValidationError("epsilon must lie in (0, 0.5)")
    if np.any(c <= 0):
        raise ValidationError("centrality scores must be positive")
    x = c if scheme == "pagerank" else 1.0 / c
    return SusceptibilityProfile(_rescale(x, epsilon), scheme)


def read_susceptibility_file(source, n: int) -> SusceptibilityProfile:
    """Read ``index lambda`` pairs; every node must be listed once."""
    fh, close = _open_text(source)
    lam = np.full(n, np.nan)
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = [t for t in re.split(r"[\s,]+", line) if t]
            if len(toks) != 2:
                raise ValidationError(f"line {lineno}: expected 'index lambda'")
            try:
                i, v = int(toks[0]), float(toks[1])
            except ValueError:
                raise ValidationError(f"line {lineno}: cannot parse {line!r}") from None
            if not 0 <= i < n:
                raise ValidationError(f"line {lineno}: index {i} out of range")
            lam[i] = v
    finally:
        if close:
            fh.close()
    if np.any(np.isnan(lam)):
        raise ValidationError(f"no susceptibility given for node {np.flatnonzero(np.isnan(lam))[0]}")
    return SusceptibilityProfile(lam, "explicit")


def as_opinion(values, n: int | None = None, tol: float = 1e-9) -> np.ndarray:
    """Validate an opinion vector against [-1, 1] and clamp float noise."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ValidationError("opinion vector must be one-dimensional")
    if n is not None and x.shape[0] != n:
        raise ValidationError(f"opinion vector has length {x.shape[0]}, expected {n}")
    if np.any(np.isnan(x)) or np.any(np.abs(x) > 1 + tol):
        raise ValidationError("opinions must lie in [-1, 1]")
    return np.clip(x, -1.0, 1.0)
