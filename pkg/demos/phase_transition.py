"""Success rate against the number of measurements for q = 0.7 and q = 1.

A reduced version of the full sweep (10 repetitions per point) that runs in
under a minute and writes phase.svg and phase.csv.
"""

import sys
from pathlib import Path

from lqanalysis.experiments import LambdaPolicy, PhaseGrid, emit_plot, run_phase_transition

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out/phase")
out.mkdir(parents=True, exist_ok=True)

grid = PhaseGrid("m", range(60, 101, 10), 99, q_values=(0.7, 1.0), reps=10,
                 lambda_policy=LambdaPolicy(1e-4))
res = run_phase_transition(grid)
for q in grid.q_values:
    print(f"q={q}: " + "  ".join(f"m={m}:{r:.1f}" for m, r in zip(grid.axis_values, res.curve(q))))
emit_plot(res, out / "phase.svg")
print(f"plot written to {out / 'phase.svg'}")
