"""
Eigenvector walk on four nodes
==============================

The heuristic starts from the leading eigenvector of HᵀH scaled to touch 1
and walks along the other eigenvectors whose singular value exceeds 1,
stopping at the first face of the box each time.
"""

import numpy as np

import fjpolar as fp

social = np.array([[1, 4, 0, 1], [1, 8, 0, 3], [4, 1, 1, 0], [0, 0, 8, 1]], dtype=float)
W = social / social.sum(axis=1, keepdims=True)
R = fp.build_response_matrix(fp.ModelConfig.gfj(W, [0.9, 0.1, 0.1, 0.5]))
basis = fp.spectral_basis(R)
print("sigma:", np.round(basis.sigmas, 5))

start = fp.candidate_b2_t(basis)
print("start", np.round(start.s, 5), round(fp.shift(R, start.s), 6))

heu = fp.heuristic_v_gt1(basis)
for step in heu.info["steps"]:
    print("step", step)
print("final", np.round(heu.s, 5), round(fp.shift(R, heu.s), 6))

###############################################################################
# The exact search over the whole box does better still.
best = fp.global_p23_search(basis)
print("global", np.round(best.s, 5), round(fp.shift(R, best.s), 6))
