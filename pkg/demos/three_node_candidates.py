"""
Polarizing prejudices on three nodes
====================================

A naive node A, a half-susceptible node B and a stubborn node C, all
linked with weight 0.5. We look for the prejudice vector that pushes the
final opinions furthest towards the extreme 1.
"""

import numpy as np

import fjpolar as fp

W = np.full((3, 3), 0.5)
np.fill_diagonal(W, 0.0)
cfg = fp.ModelConfig.gfj(W, [1.0, 0.5, 0.0])
R = fp.build_response_matrix(cfg)

# the naive node has no say in the outcome: its column of H is zero
print(np.round(R.H, 4))

###############################################################################
# One singular value of H exceeds 1, so the model can polarize in P2/P3.
basis = fp.spectral_basis(R)
print("singular values:", np.round(basis.sigmas, 4))

###############################################################################
# The leading eigenvector, its rescaled version and the exact box optimum.
for c in (fp.candidate_b2_1(basis), fp.candidate_b2_t(basis), fp.global_p23_search(basis)):
    z = fp.steady_state(R, c.s)
    print(f"{c.name:10s} s={np.round(c.s, 3)} z={np.round(z, 3)} dP3={fp.shift(R, c.s):.4f}")

###############################################################################
# A brute-force grid search agrees with the exact search up to the grid step.
s, v = fp.brute_force_max(R, "p3", grid=20)
print("grid optimum:", s, round(v, 4))
