"""Recover one cosparse vector from 80 random measurements and dump the result.

Run from the repository root:  python3 demos/recovery.py [out_dir]
"""

import sys

from lqanalysis.experiments import run_recovery_demo

out = sys.argv[1] if len(sys.argv) > 1 else "demo_out/recovery"

for sigma in (0.0, 0.01):
    rep = run_recovery_demo(m=80, n=144, d=120, l=99, q=0.7, sigma=sigma, seed=0)
    tr = rep.result.trace
    print(f"sigma={sigma}: {tr.iterations} sweeps, {tr.termination.value}, "
          f"relative error {rep.relative_error:.3e}")
    for line in rep.trace_lines()[:5]:
        print("   ", line)

rep.write(out)
print(f"true vs estimate written to {out}/recovery.csv")
