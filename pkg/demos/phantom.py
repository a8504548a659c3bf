"""Phantom reconstruction from radial Fourier lines with a 2-D gradient penalty.

Finds the fewest lines giving an exact 32x32 reconstruction for each q, then
compares SNR under noise at the q = 1 line count.
"""

import sys

from lqanalysis.experiments import minimal_exact_lines, run_phantom

out = sys.argv[1] if len(sys.argv) > 1 else "demo_out/phantom"

need = {q: minimal_exact_lines(q, range(2, 13)) for q in (0.7, 1.0)}
for q, lines in need.items():
    print(f"q={q}: exact from {lines} lines")

lines = need[1.0]
for q in (0.7, 1.0):
    rep = run_phantom(32, 32, lines, q, sigma=0.01, lam=1e-3, seed=0)
    print(f"q={q}, {lines} lines, sigma=0.01: SNR {rep.snr_db:.1f} dB")
    rep.write(out)
