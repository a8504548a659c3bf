"""Recovery conditions on a tiny problem, side by side with what the solver does."""

import numpy as np

from lqanalysis.certify import dnspq_check, drip_delta, omega_rip_delta
from lqanalysis.instances import make_instance
from lqanalysis.solver import SolverConfig, solve
from lqanalysis.theory import threshold_table

for row in threshold_table():
    print(f"q={row.q} t={row.t}: delta_({row.order_multiplier:g}k) < {row.threshold:.6f}")

inst = make_instance(5, 8, 6, 5, seed=3)
print("D-RIP  by order:", np.round([drip_delta(inst.X, inst.op, s).delta for s in range(1, 9)], 3))
print("Omega-RIP by l: ", np.round([omega_rip_delta(inst.X, inst.op, l).delta for l in range(1, 6)], 3))

T = inst.profile.support
for q in (0.5, 0.7, 1.0):
    ver = dnspq_check(inst.X, inst.op, q, len(T), support=T)
    res = solve(inst, SolverConfig(q=q))
    print(f"q={q}: NSP {ver.verdict.value} (margin {ver.margin:.3g}), solver error {res.relative_error:.2e}")
