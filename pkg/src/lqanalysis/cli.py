"""Command-line entry point: ``python -m lqanalysis <command> [options]``.

Options may also come from ``--config file.json``, a flat object whose keys
are option names (``"lam": 1e-3``); flags given on the command line win.
Exit status is 0 on success, 2 for an infeasible or invalid configuration
and 1 for anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .certify import dnspq_check, drip_delta, omega_rip_delta
from .errors import (
    ConditionViolated,
    EmptyModel,
    InfeasibleCosparsity,
    InfeasibleRegime,
    InvalidInput,
    InvalidShape,
    TooLarge,
    UndefinedRegime,
)
from .experiments import (
    LambdaPolicy,
    PhaseGrid,
    emit_plot,
    minimal_exact_lines,
    run_phantom,
    run_phase_transition,
    run_recovery_demo,
)
from .instances import build_operator, child_seeds, make_design_matrix
from .theory import Mode, threshold_table

INFEASIBLE = (ConditionViolated, EmptyModel, InfeasibleCosparsity, InfeasibleRegime, InvalidInput,
              InvalidShape, TooLarge, UndefinedRegime)

DEFAULTS = {
    "common": {"seed": 0, "out": None},
    "recover": {"m": 80, "n": 144, "d": 120, "l": 99, "q": 0.7, "sigma": 0.0, "lam": 1e-4,
                "operator": "parseval"},
    "phase": {"axis": "m", "values": "60:100:5", "fixed": 99, "n": 144, "d": 120, "sigma": 0.0,
              "qs": "0.7,1.0", "reps": 20, "lam": "1e-4", "workers": 1},
    "phantom": {"size": 32, "lines": 8, "q": 0.7, "sigma": 0.0, "lam": 1e-4, "scan": None},
    "thresholds": {"mode": "Noiseless"},
    "certify": {"m": 5, "n": 8, "d": 6, "q": 0.7, "k": 2, "s": 2, "l": 4, "budget": 2000,
                "operator": "parseval"},
}


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _int_list(text: str) -> list[int]:
    """``"60:100:5"`` (inclusive) or ``"90,95,100"``."""
    if ":" in text:
        a, b, *step = (int(p) for p in text.split(":"))
        return list(range(a, b + 1, step[0] if step else 1))
    return [int(p) for p in text.split(",") if p]


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--config", default=argparse.SUPPRESS, help="flat JSON file of options")

    p = argparse.ArgumentParser(prog="lqanalysis", parents=[common],
                                description="l_q-analysis recovery toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    r = sub.add_parser("recover", parents=[common], help="solve one synthetic instance")
    for name in ("m", "n", "d", "l"):
        r.add_argument(f"--{name}", type=int, default=S)
    for name in ("q", "sigma", "lam"):
        r.add_argument(f"--{name}", type=float, default=S)
    r.add_argument("--operator", choices=["parseval", "fd1d", "identity"], default=S)

    ph = sub.add_parser("phase", parents=[common], help="success-rate sweep over m or l")
    ph.add_argument("--axis", choices=["m", "l"], default=S)
    ph.add_argument("--values", default=S, help='"start:stop:step" (inclusive) or a comma list')
    ph.add_argument("--fixed", type=int, default=S, help="l for an m-sweep, m for an l-sweep")
    for name in ("n", "d", "reps", "workers"):
        ph.add_argument(f"--{name}", type=int, default=S)
    ph.add_argument("--sigma", type=float, default=S)
    ph.add_argument("--qs", default=S, help="comma-separated q values")
    ph.add_argument("--lam", default=S, help='penalty weight, or "grid" for the oracle grid search')

    pt = sub.add_parser("phantom", parents=[common], help="phantom reconstruction")
    pt.add_argument("--size", type=int, choices=[16, 32], default=S)
    pt.add_argument("--lines", type=int, default=S)
    for name in ("q", "sigma", "lam"):
        pt.add_argument(f"--{name}", type=float, default=S)
    pt.add_argument("--scan", default=S, help="line counts to scan for the smallest exact one")

    th = sub.add_parser("thresholds", parents=[common], help="RIP threshold table")
    th.add_argument("--mode", choices=["Noiseless", "Noisy"], default=S)

    c = sub.add_parser("certify", parents=[common], help="brute-force RIP and NSP on a tiny instance")
    for name in ("m", "n", "d", "k", "s", "l", "budget"):
        c.add_argument(f"--{name}", type=int, default=S)
    c.add_argument("--q", type=float, default=S)
    c.add_argument("--operator", choices=["parseval", "fd1d", "identity"], default=S)
    return p


def _options(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS["common"])
    opts.update(DEFAULTS[args.command])
    given = vars(args)
    if "config" in given:
        try:
            cfg = json.loads(Path(given["config"]).read_text())
        except (OSError, ValueError) as exc:
            raise InvalidInput(f"cannot read config {given['config']}: {exc}") from None
        if not isinstance(cfg, dict):
            raise InvalidInput("config must be a flat JSON object")
        unknown = set(cfg) - set(opts)
        if unknown:
            raise InvalidInput(f"unknown config keys for {args.command}: {sorted(unknown)}")
        opts.update(cfg)
    opts.update({k: v for k, v in given.items() if k not in ("config", "command")})
    return opts


def cmd_recover(o, out):
    rep = run_recovery_demo(o["m"], o["n"], o["d"], o["l"], o["q"], o["sigma"], o["seed"], o["lam"],
                            o["operator"])
    for line in rep.trace_lines():
        print(line, file=out)
    print(f"termination {rep.result.trace.termination.value}", file=out)
    print(f"relative_error {_fmt(rep.relative_error)}", file=out)
    print(f"success {rep.result.success}", file=out)
    if o["out"]:
        rep.write(o["out"])


def cmd_phase(o, out):
    lam = str(o["lam"])
    policy = LambdaPolicy.grid_search() if lam == "grid" else LambdaPolicy(float(lam))
    qs = [float(v) for v in str(o["qs"]).split(",") if v]
    grid = PhaseGrid(o["axis"], _int_list(str(o["values"])), int(o["fixed"]), int(o["n"]), int(o["d"]),
                     float(o["sigma"]), tuple(qs), int(o["reps"]), policy, int(o["seed"]))
    res = run_phase_transition(grid, workers=int(o["workers"]))
    print(f"{o['axis']:>5} " + " ".join(f"q={q!r:>6}" for q in qs), file=out)
    for v in grid.axis_values:
        print(f"{v:>5} " + " ".join(f"{res.cell(v, q).success_rate:>8.3f}" for q in qs), file=out)
    for q in qs:
        print(f"first {o['axis']} with >= 90% success at q={q!r}: {_fmt(res.first_reaching(q))}", file=out)
    if o["out"]:
        Path(o["out"]).mkdir(parents=True, exist_ok=True)
        emit_plot(res, Path(o["out"]) / "phase.svg")


def cmd_phantom(o, out):
    size = int(o["size"])
    if o["scan"]:
        lines = _int_list(str(o["scan"]))
        best = minimal_exact_lines(o["q"], lines, size, o["lam"])
        print(f"smallest exact line count at q={o['q']!r}: {_fmt(best)}", file=out)
        return
    rep = run_phantom(size, size, int(o["lines"]), o["q"], o["sigma"], o["lam"], o["seed"])
    for key in ("lines", "m", "l_target", "q", "sigma", "lam", "relative_error", "snr_db", "iterations", "exact"):
        print(f"{key} {_fmt(getattr(rep, key))}", file=out)
    if o["out"]:
        rep.write(o["out"])


def cmd_thresholds(o, out):
    rows = threshold_table(mode=Mode(o["mode"]))
    header = ("q", "t", "kappa", "rho", "rip_order", "threshold")
    print("  ".join(f"{h:>20}" for h in header), file=out)
    for r in rows:
        vals = (r.q, r.t, r.kappa, r.rho, r.order_multiplier, r.threshold)
        print("  ".join(f"{_fmt(v):>20}" for v in vals), file=out)
    if o["out"]:
        Path(o["out"]).mkdir(parents=True, exist_ok=True)
        with open(Path(o["out"]) / "thresholds.csv", "w") as fh:
            fh.write(",".join(header) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(v) for v in (r.q, r.t, r.kappa, r.rho, r.order_multiplier, r.threshold)) + "\n")


def cmd_certify(o, out):
    s_op, s_x = child_seeds(int(o["seed"]), 2)
    op = build_operator(o["operator"], int(o["n"]), int(o["d"]), s_op)
    X = make_design_matrix(int(o["m"]), op.d, s_x)
    budget = int(o["budget"])
    dr = drip_delta(X, op, int(o["s"]))
    print(f"drip_delta s={dr.order} delta={_fmt(dr.delta)} support={dr.extremal_support}", file=out)
    try:
        om = omega_rip_delta(X, op, int(o["l"]))
        print(f"omega_rip_delta l={om.order} delta={_fmt(om.delta)} cosupport={om.extremal_support}", file=out)
    except EmptyModel as exc:
        print(f"omega_rip_delta l={o['l']}: {exc}", file=out)
    ver = dnspq_check(X, op, float(o["q"]), int(o["k"]), budget=budget, seed=int(o["seed"]))
    print(f"nsp q={o['q']!r} k={o['k']} verdict={ver.verdict.value} method={ver.method.value} "
          f"margin={_fmt(ver.margin)}", file=out)
    if ver.witness_T is not None:
        print(f"witness_T {ver.witness_T}", file=out)
        print("witness_v " + " ".join(_fmt(v) for v in ver.witness_v), file=out)


COMMANDS = {
    "recover": cmd_recover,
    "phase": cmd_phase,
    "phantom": cmd_phantom,
    "thresholds": cmd_thresholds,
    "certify": cmd_certify,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = _parser().parse_args(argv)
    try:
        COMMANDS[args.command](_options(args), out)
    except INFEASIBLE as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level guard maps crashes to status 1
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
