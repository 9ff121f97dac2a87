"""Command-line front end.

Usage: ``python -m fjpolar <command> --graph PATH [options]`` where
command is one of analyze, arrows, simulate, conditions, dump-matrices.
``--graph karate`` loads the bundled karate club graph.

Exit codes: 0 success, 2 validation error, 3 numerical or convergence
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .conditions import (absolute_total_verdict, doubly_stochastic_test, local_verdict,
                         p1_gdi_sufficient_test)
from .errors import ConvergenceError, NumericalError, ValidationError
from .graph import (build_susceptibility, load_edge_list, load_karate, pagerank,
                    read_susceptibility_file)
from .metrics import TABLE_COLUMNS, shift_report
from .models import ModelConfig, build_response_matrix, trajectory
from .spectral import CANDIDATE_NAMES, Candidate, all_candidates, spectral_basis

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
HEADER = ["candidate", "dP1", "dP2", "dP3", "dP4", "dNDI", "dGDI", "choice_shift"]
MASK64 = (1 << 64) - 1


def splitmix64(seed: int):
    """Infinite stream of 64-bit outputs of the splitmix64 generator."""
    state = seed & MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


def uniform_baseline(n: int, seed: int) -> np.ndarray:
    """n uniforms in [0, 1) from the top 53 bits of splitmix64."""
    gen = splitmix64(seed)
    return np.array([(next(gen) >> 11) * 2.0 ** -53 for _ in range(n)])


@dataclass
class RunConfig:
    graph: str
    directed: bool = False
    variant: str = "gfj"
    lam: str = "const:0.8"
    epsilon: float = 0.01
    candidates: tuple = CANDIDATE_NAMES
    seed: int = 42
    out: str | None = None
    fmt: str = "csv"


def _candidate_name(tok):
    tok = tok.strip()
    full = tok if tok.startswith("s_") else "s_" + tok
    lookup = {c.lower(): c for c in CANDIDATE_NAMES + ("s_unif",)}
    if full.lower() not in lookup:
        raise ValidationError(f"unknown candidate {tok!r}")
    return lookup[full.lower()]


def _load_graph(cfg: RunConfig):
    if cfg.graph == "karate":
        return load_karate()
    if not os.path.exists(cfg.graph):
        raise FileNotFoundError(cfg.graph)
    return load_edge_list(cfg.graph, directed=cfg.directed)


def _susceptibility(scheme: str, g, epsilon):
    kind, _, arg = scheme.partition(":")
    if kind == "const":
        try:
            c = float(arg)
        except ValueError:
            raise ValidationError(f"bad constant in --lambda {scheme!r}") from None
        return build_susceptibility(np.ones(g.n), "constant", constant=c)
    if kind in ("pagerank", "pagerank-inv"):
        return build_susceptibility(pagerank(g), kind, epsilon)
    if kind == "file":
        if not os.path.exists(arg):
            raise FileNotFoundError(arg)
        return read_susceptibility_file(arg, g.n)
    raise ValidationError(f"unknown --lambda scheme {scheme!r}")


def _model(cfg: RunConfig):
    g = _load_graph(cfg)
    lam = _susceptibility(cfg.lam, g, cfg.epsilon) if cfg.variant == "gfj" else None
    model = ModelConfig.from_graph(g, cfg.variant, lam)
    return g, model, build_response_matrix(model)


def _read_vector(path, n):
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    vals = {}
    order = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.replace(",", " ").split()
            try:
                if len(toks) == 1:
                    order.append(float(toks[0]))
                elif len(toks) == 2:
                    vals[int(toks[0])] = float(toks[1])
                else:
                    raise ValueError
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: expected 'value' or 'index value'") from None
    if vals and order:
        raise ValidationError(f"{path}: mixes indexed and plain lines")
    if vals:
        if sorted(vals) != list(range(n)):
            raise ValidationError(f"{path}: need one value for each of {n} nodes")
        return np.array([vals[i] for i in range(n)])
    if len(order) != n:
        raise ValidationError(f"{path}: has {len(order)} values, graph has {n} nodes")
    return np.array(order)


def _fmt(x):
    return f"{x:.6g}"


def _emit(cfg: RunConfig, name: str, text: str):
    if cfg.out is None:
        sys.stdout.write(text)
        return
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, name), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _check_row(name, rep, n):
    d = rep.delta
    for a, b in ((d["gdi"], n * d["p1"]), (d["p3"], n * d["p2"])):
        if abs(a - b) > 1e-9 * (1 + abs(a) + abs(b)):
            raise NumericalError(f"row {name}: metric identities violated ({a} vs {b})")


def _candidate_vectors(cfg, R, names):
    basis = spectral_basis(R)
    wanted = [c for c in names if c != "s_unif"]
    found = all_candidates(basis, wanted, seed=cfg.seed)
    out = {}
    if "s_unif" in names:
        out["s_unif"] = Candidate("s_unif", uniform_baseline(R.n, cfg.seed), "random", False)
    out.update(found)
    return basis, out


def cmd_analyze(cfg: RunConfig) -> int:
    g, model, R = _model(cfg)
    names = ("s_unif",) + tuple(c for c in cfg.candidates if c != "s_unif")
    basis, cands = _candidate_vectors(cfg, R, names)
    rows, skipped, vectors = [], {}, {}
    for name, c in cands.items():
        if isinstance(c, str):
            skipped[name] = c
            continue
        rep = shift_report(c.s, R.H @ c.s, R.W)
        _check_row(name, rep, R.n)
        rows.append((name, rep))
        vectors[name] = {"s": c.s.tolist(), "delta": {m: rep.delta[m] for m in TABLE_COLUMNS},
                         "provenance": c.provenance, "certified": c.certified}
    verdict = absolute_total_verdict(model)
    conditions = {
        "absolute_total": verdict.as_dict(),
        "local": local_verdict(model).as_dict(),
        "doubly_stochastic": bool(doubly_stochastic_test(R)),
        "dispersion": {name: p1_gdi_sufficient_test(basis, basis.coefficients(cands[name].s)).as_verdict().as_dict()
                       for name, _ in rows if name != "s_unif"},
        "unavailable": skipped,
    }
    if verdict.guarantee:
        sys.stderr.write(f"never polarizing: {verdict.guarantee}\n")
    if cfg.fmt == "json":
        table = [{"candidate": name, **{f"d{m}": rep.delta[m] for m in TABLE_COLUMNS},
                  "choice_shift": rep.choice_shift} for name, rep in rows]
        _emit(cfg, "deltas.json", json.dumps(table, indent=2) + "\n")
    else:
        _emit(cfg, "deltas.csv", _csv_text([HEADER] + [[name] + [_fmt(v) for v in rep.row()] for name, rep in rows]))
    if cfg.out is not None:
        _emit(cfg, "conditions.json", json.dumps(conditions, indent=2) + "\n")
        _emit(cfg, "candidates.json", json.dumps(vectors, indent=2) + "\n")
    return EXIT_OK


def cmd_arrows(cfg: RunConfig, candidate: str | None, prejudice: str | None) -> int:
    g, model, R = _model(cfg)
    if prejudice:
        s = _read_vector(prejudice, R.n)
        label = "file"
    else:
        label = _candidate_name(candidate or "s_B2_t")
        _, cands = _candidate_vectors(cfg, R, (label,))
        c = cands[label]
        if isinstance(c, str):
            raise ValidationError(f"candidate {label} unavailable: {c}")
        s = c.s
    z = R.H @ s
    rows = [["node", "prejudice", "final", "lambda"]]
    for i in range(R.n):
        rows.append([str(g.labels[i]), _fmt(s[i]), _fmt(z[i]), _fmt(R.lambdas[i])])
    rows.append(["mean_initial", _fmt(s.mean()), "", ""])
    rows.append(["mean_final", "", _fmt(z.mean()), ""])
    _emit(cfg, f"arrows_{label}.csv", _csv_text(rows))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, prejudice: str, steps: int, tol: float) -> int:
    g = _load_graph(cfg)
    lam = _susceptibility(cfg.lam, g, cfg.epsilon) if cfg.variant == "gfj" else None
    model = ModelConfig.from_graph(g, cfg.variant, lam)
    s = _read_vector(prejudice, g.n)
    states, ok = trajectory(model, s, tol, steps)
    rows = [["step", "status"] + [f"x{i}" for i in range(g.n)]]
    for k, z in enumerate(states):
        status = ("converged" if ok else "not_converged") if k == len(states) - 1 else ""
        rows.append([str(k), status] + [_fmt(v) for v in z])
    if not ok:
        sys.stderr.write(f"warning: no convergence within {steps} steps\n")
    _emit(cfg, "trajectory.csv", _csv_text(rows))
    return EXIT_OK


def cmd_conditions(cfg: RunConfig) -> int:
    g, model, R = _model(cfg)
    verdict = absolute_total_verdict(model)
    ds = doubly_stochastic_test(R)
    out = {
        "absolute_total": verdict.as_dict(),
        "local": local_verdict(model).as_dict(),
        "doubly_stochastic": {"holds": ds.holds, "max_deviation": ds.max_deviation,
                              "norm1": ds.norm1, "norm2": ds.norm2},
    }
    if verdict.guarantee:
        sys.stderr.write(f"never polarizing: {verdict.guarantee}\n")
    _emit(cfg, "conditions.json", json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def cmd_dump(cfg: RunConfig) -> int:
    g, model, R = _model(cfg)
    fmt = lambda M: _csv_text([[repr(float(v)) for v in row] for row in M])
    if cfg.out is None:
        sys.stdout.write("# H\n" + fmt(R.H) + "# W\n" + fmt(R.W))
        return EXIT_OK
    _emit(cfg, "H.csv", fmt(R.H))
    _emit(cfg, "W.csv", fmt(R.W))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fjpolar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--graph", required=True, help="edge-list path, or 'karate'")
        sp.add_argument("--directed", action="store_true")
        sp.add_argument("--variant", choices=("gfj", "vfj", "rfj"), default="gfj")
        sp.add_argument("--lambda", dest="lam", default="const:0.8",
                        help="const:<c>, pagerank, pagerank-inv or file:<path>")
        sp.add_argument("--epsilon", type=float, default=0.01)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--out", default=None, help="output directory (default: stdout)")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    a = sub.add_parser("analyze", help="shift table for every candidate plus a uniform baseline")
    common(a)
    a.add_argument("--candidates", default=",".join(CANDIDATE_NAMES))
    r = sub.add_parser("arrows", help="per-node prejudice and final opinion")
    common(r)
    r.add_argument("--candidate", default="s_B2_t")
    r.add_argument("--prejudice", default=None, help="file of opinions instead of a candidate")
    s = sub.add_parser("simulate", help="iterate the dynamics and write the trajectory")
    common(s)
    s.add_argument("--prejudice", required=True)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--tol", type=float, default=1e-10)
    c = sub.add_parser("conditions", help="polarizability verdicts")
    common(c)
    d = sub.add_parser("dump-matrices", help="write H and W as CSV")
    common(d)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.graph, args.directed, args.variant, args.lam, args.epsilon,
                        seed=args.seed, out=args.out, fmt=args.fmt)
        if args.command == "analyze":
            cfg.candidates = tuple(_candidate_name(t) for t in args.candidates.split(",") if t.strip())
            return cmd_analyze(cfg)
        if args.command == "arrows":
            return cmd_arrows(cfg, args.candidate, args.prejudice)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.prejudice, args.steps, args.tol)
        if args.command == "conditions":
            return cmd_conditions(cfg)
        return cmd_dump(cfg)
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    except (ConvergenceError, NumericalError) as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO
