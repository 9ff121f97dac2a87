"""
When neighbour disagreement grows
=================================

Node 0 is naive and copies node 1, which mostly keeps its own prejudice.
Node 2 is stubborn, yet it still has an arc towards node 0. Once nodes 0
and 1 agree, the arc 2 -> 0 carries a larger gap than before, and the
neighbour disagreement index rises.
"""

import numpy as np

import fjpolar as fp
from fjpolar.metrics import ndi

W = np.array([[0, 1, 0], [1, 0, 0], [1, 0, 0.0]])
cfg = fp.ModelConfig.gfj(W, [1.0, 0.2, 0.0])
s = np.array([-0.6, -0.9, 0.7])
z = fp.steady_state(fp.build_response_matrix(cfg), s)
print("z =", z)
print(f"NDI(s) = {ndi(s, W):.3f}  NDI(z) = {ndi(z, W):.3f}")
