"""
Shift table on the karate club graph
====================================

Susceptibilities come from PageRank in three ways: constant 0.8,
proportional to PageRank and proportional to its inverse. For each, every
candidate prejudice is pushed through the model and the six polarization
shifts are printed.
"""

import numpy as np

import fjpolar as fp

g = fp.load_karate()
C = fp.pagerank(g)
cols = ("p1", "p2", "p3", "p4", "ndi", "gdi")

for scheme in ("constant", "pagerank", "pagerank-inv"):
    prof = fp.build_susceptibility(C, scheme, constant=0.8 if scheme == "constant" else None)
    cfg = fp.ModelConfig.from_graph(g, "gfj", prof)
    R = fp.build_response_matrix(cfg)
    basis = fp.spectral_basis(R)
    print(f"\n{scheme}: {basis.strictly_above_one().size} singular values above 1")
    print(f"{'candidate':12s}" + "".join(f"{c:>9s}" for c in cols))
    for name, c in fp.all_candidates(basis).items():
        if isinstance(c, str):
            print(f"{name:12s}  n/a ({c})")
            continue
        rep = fp.shift_report(c.s, R.H @ c.s, R.W)
        print(f"{name:12s}" + "".join(f"{rep.delta[m]:9.3f}" for m in cols))

###############################################################################
# Neighbour disagreement falls in every row, and the undirected rFJ variant
# never polarizes at all.
rfj = fp.ModelConfig.from_graph(g, "rfj")
print("\nrFJ:", fp.absolute_total_verdict(rfj).guarantee)
