"""
The two-parameter bipartite family
==================================

A walk through validity, robustness and witnesses on the smallest example:
two parties, one qubit in and one qubit out each.
"""

# %%
import numpy as np

from causalsep import BI, is_valid_process, random_robustness, verify_witness
from causalsep.catalog import make_S_etas, make_W_etas
from causalsep.catalog.processes import make_sep_decomposition_etas
from causalsep.scan import scan_slice, write_csv

# %%
# W is valid inside the unit disk of (eta1, eta2)
for eta in [(0.8, 0.6), (0.9, 0.9)]:
    rep = is_valid_process(make_W_etas(*eta), BI, normalized=True)
    print(eta, "valid" if rep.valid else "invalid", f"min eigenvalue {rep.min_eigenvalue:+.4f}")

# %%
# Random robustness is the l1 excess over one
for eta in [(0.8, 0.6), (1 / np.sqrt(2), 1 / np.sqrt(2)), (0.3, -0.4)]:
    rep = random_robustness(make_W_etas(*eta))
    print(f"eta={eta}  r*={rep.r_star:+.6f}  |eta1|+|eta2|-1={abs(eta[0]) + abs(eta[1]) - 1:+.6f}"
          f"  threshold={rep.visibility_threshold:.4f}")

# %%
# The dual returns an optimal witness with a certificate; the closed-form
# witness only depends on the signs of eta
rep = random_robustness(make_W_etas(0.8, 0.6))
print("solver witness verifies:", verify_witness(rep.witness).valid)
S = make_S_etas(0.8, 0.6)
print("closed form verifies:", verify_witness(S, tol=1e-12).valid)

# %%
# Inside the square |eta1| + |eta2| <= 1 the process splits into two orders
dec = make_sep_decomposition_etas(0.3, -0.5)
print("weights", dec.weights, "reassembly error", np.abs(dec.total().matrix - make_W_etas(0.3, -0.5).matrix).max())

# %%
# A coarse slice through the (eta1, eta2) plane: x maps to eta1 / 2, y to eta2
anchors = [make_W_etas(0, 1), make_W_etas(1, 0), make_W_etas(-1, 0)]
print(write_csv(scan_slice(anchors, 5)))
