"""
Restricted witnesses and simulated measurements
===============================================

Witnesses that Alice and Bob can evaluate with unitaries alone, a Charlie
restricted to one basis, and a Monte-Carlo run of the instrument statistics.
"""

# %%
from causalsep import construct_witness, verify_witness
from causalsep.born import compile_witness, measure_witness, sample_outcomes
from causalsep.catalog import make_noise, make_S_switch, make_S_tilde, make_switch
from causalsep.robustness import constraint_residuals, threshold_from_value, unitary_restriction_constraints
from causalsep.spaces import TRI
from causalsep.tensor import hs_inner

switch = make_switch()

# %%
# The unitary-restricted witness has the same threshold for the three noise models
for kind in ("white", "depol", "deph"):
    S, value = construct_witness(switch, make_noise(kind), "unitary")
    print(f"{kind:6s} value {value:.5f} threshold {threshold_from_value(value):.5f}")

res = constraint_residuals(S, unitary_restriction_constraints(TRI))
print("marginal constraints", {k: f"{v:.1e}" for k, v in res.items()})

# %%
S, value = construct_witness(switch, None, "charlie-x")
print(f"Charlie in the X basis only: threshold {threshold_from_value(value):.5f}")

# %%
# The four-decimal tabulated witnesses still verify at a loose tolerance
for S in (make_S_switch(), make_S_tilde()):
    rep = verify_witness(S, tol=5e-3)
    print(S.name, f"tr[S W] = {hs_inner(S.op, switch):.4f}", "valid" if rep.valid else "invalid",
          f"residual {rep.worst_residual:.1e}")

# %%
# Instrument statistics: measure-and-prepare settings for the general witness,
# unitaries for the restricted one
d = compile_witness(make_S_switch())
print("settings", d.n_settings, "exact Born sum", measure_witness(d, switch))
run = sample_outcomes(switch, d, 10**6, seed=7)
print(f"Monte-Carlo {run.estimate:.4f} +- {run.stderr:.4f} (seed {run.seed})")

d_u = compile_witness(make_S_tilde(), mode="unitary")
print("unitary settings", d_u.n_settings, "value", measure_witness(d_u, switch))
