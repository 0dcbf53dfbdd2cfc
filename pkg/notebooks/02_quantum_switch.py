"""
The quantum switch
==================

Robustness of the switch against white noise, the role of the control state,
and mixtures with the depolarised and dephased versions. Each tripartite
solve takes a few seconds.
"""

# %%
import numpy as np

from causalsep import TRI, generalized_robustness, random_robustness, robustness_at_visibility
from causalsep.catalog import KET0, KET1, PLUS, make_noise, make_S_family, make_switch, mixture
from causalsep.tensor import hs_inner

switch = make_switch()

# %%
rep = random_robustness(switch)
print(f"r* = {rep.r_star:.6f}, visibility threshold = {rep.visibility_threshold:.6f}")
print(f"duality gap {rep.duality_gap:.1e}, decomposition weights {np.round(rep.decomposition.weights(), 4)}")

# %%
# The target state does not matter
for name, psi in [("|0>", KET0), ("|1>", KET1), ("|+>", PLUS)]:
    print(name, f"{random_robustness(make_switch(psi)).r_star:.6f}")

# %%
# Worst-case noise gives a smaller number
print(f"generalized robustness {generalized_robustness(switch).value:.5f}")

# %%
# Mixing with the depolarised or dephased switch never reaches separability
# for v > 0, although the robustness vanishes as v -> 0
noises = {k: make_noise(k) for k in ("depol", "deph")}
for v in (0.1, 0.5, 1.0):
    row = [robustness_at_visibility(switch, noises[k], v).random_robustness for k in noises]
    print(f"v={v:.1f}  depol {row[0]:.5f}  deph {row[1]:.5f}")

# %%
# The analytic witness family certifies every v > 0 exactly
for v in (0.03, 0.2, 0.6):
    S = make_S_family(v).op
    print(v, hs_inner(S, mixture(switch, noises["depol"], v)), -(3 - v) * v**2 / 2,
          hs_inner(S, mixture(switch, noises["deph"], v)), -v**2)
print("white noise on the family witness:", hs_inner(make_S_family(0.6).op, TRI.white_noise()))
