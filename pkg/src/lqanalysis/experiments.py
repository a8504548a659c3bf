"""Desk-scale recovery experiments: phase transitions, single demos and the phantom.

Every trial draws its instance from a seed derived from ``(base_seed,
axis_value, rep)``. The q index is deliberately left out, so all q values in
a cell see the same instances and their success counts compare pairwise.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InfeasibleCosparsity, InvalidInput, IoError
from .instances import make_instance, make_phantom_task
from .solver import SUCCESS_RTOL, RecoveryResult, SolverConfig, coirlq, solve

LAMBDA_GRID = tuple(float(v) for v in np.logspace(-5, 0, 11))
DEFAULT_Q_VALUES = (0.1, 0.3, 0.5, 0.7, 0.8, 1.0)
PHANTOM_EXACT_RTOL = 1e-3
ZERO_TOL = 1e-9


class SweepAxis(str, Enum):
    SAMPLES = "m"
    COSPARSITY = "l"


@dataclass(frozen=True)
class LambdaPolicy:
    """Either a fixed penalty weight or an oracle grid search over `LAMBDA_GRID`.

    The grid search picks the weight with the smallest error against the
    ground truth, so it measures the best case rather than a usable tuning rule.
    """

    value: float | None = 1e-4

    @classmethod
    def grid_search(cls) -> "LambdaPolicy":
        return cls(None)

    @property
    def is_grid_search(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class PhaseGrid:
    """A sweep over m (with l fixed) or over l (with m fixed).

    `fixed` holds the count that does not move: l for an m-sweep and m for
    an l-sweep.
    """

    sweep_axis: SweepAxis
    axis_values: tuple
    fixed: int
    n: int = 144
    d: int = 120
    sigma: float = 0.0
    q_values: tuple = DEFAULT_Q_VALUES
    reps: int = 100
    lambda_policy: LambdaPolicy = field(default_factory=LambdaPolicy)
    base_seed: int = 0
    operator: str = "parseval"

    def __post_init__(self):
        object.__setattr__(self, "sweep_axis", SweepAxis(self.sweep_axis))
        object.__setattr__(self, "axis_values", tuple(int(v) for v in self.axis_values))
        object.__setattr__(self, "q_values", tuple(float(q) for q in self.q_values))
        if self.reps < 1:
            raise InvalidInput("reps must be >= 1")
        if not self.axis_values or any(b <= a for a, b in zip(self.axis_values, self.axis_values[1:])):
            raise InvalidInput("axis_values must be non-empty and strictly increasing")
        if not self.q_values or not all(0.0 < q <= 1.0 for q in self.q_values):
            raise InvalidInput("every q must lie in (0, 1]")

    def sizes(self, axis_value: int) -> tuple[int, int]:
        """``(m, l)`` for one point of the sweep."""
        if self.sweep_axis is SweepAxis.SAMPLES:
            return axis_value, self.fixed
        return self.fixed, axis_value


def trial_seed(base_seed: int, axis_value: int, rep: int) -> int:
    ss = np.random.SeedSequence([int(base_seed), int(axis_value), int(rep)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class PhaseCell:
    axis_value: int
    q: float
    success_count: int
    reps: int
    skipped: int
    mean_relative_error: float
    mean_iterations: float

    @property
    def success_rate(self) -> float:
        done = self.reps - self.skipped
        return self.success_count / done if done else math.nan


@dataclass(frozen=True)
class PhaseResult:
    grid: PhaseGrid
    cells: tuple

    def cell(self, axis_value: int, q: float) -> PhaseCell:
        for c in self.cells:
            if c.axis_value == axis_value and c.q == q:
                return c
        raise KeyError((axis_value, q))

    def curve(self, q: float) -> list[float]:
        return [self.cell(v, q).success_rate for v in self.grid.axis_values]

    def counts(self, q: float) -> list[int]:
        return [self.cell(v, q).success_count for v in self.grid.axis_values]

    def first_reaching(self, q: float, rate: float = 0.9) -> float:
        """Smallest axis value whose success rate is at least `rate`; inf if none."""
        for v in self.grid.axis_values:
            if self.cell(v, q).success_rate >= rate:
                return v
        return math.inf


def solve_with_policy(inst, q: float, policy: LambdaPolicy, base: SolverConfig | None = None) -> RecoveryResult:
    base = base or SolverConfig()
    if not policy.is_grid_search:
        return solve(inst, _with(base, q=q, lam=policy.value))
    best = None
    for lam in LAMBDA_GRID:
        res = solve(inst, _with(base, q=q, lam=lam))
        if best is None or res.relative_error < best.relative_error:
            best = res
    return best


def _with(cfg: SolverConfig, **kw) -> SolverConfig:
    fields = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    fields.update(kw)
    return SolverConfig(**fields)


def _run_point(args):
    grid, axis_value, rep = args
    m, l = grid.sizes(axis_value)
    seed = trial_seed(grid.base_seed, axis_value, rep)
    try:
        inst = make_instance(m, grid.n, grid.d, l, sigma=grid.sigma, seed=seed, operator=grid.operator)
    except InfeasibleCosparsity:
        return axis_value, None
    out = []
    for q in grid.q_values:
        res = solve_with_policy(inst, q, grid.lambda_policy)
        out.append((q, res.success, res.relative_error, res.trace.iterations))
    return axis_value, out


def run_phase_transition(grid: PhaseGrid, workers: int = 1) -> PhaseResult:
    """Tally successes for every (axis value, q) cell of the grid.

    Trials whose cosparsity cannot be realized are counted as skipped. The
    result does not depend on `workers`.
    """
    jobs = [(grid, v, r) for v in grid.axis_values for r in range(grid.reps)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            outputs = list(pool.map(_run_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        outputs = [_run_point(j) for j in jobs]

    tally = {(v, q): [0, 0, 0.0, 0] for v in grid.axis_values for q in grid.q_values}
    for v, out in outputs:
        if out is None:
            for q in grid.q_values:
                tally[v, q][1] += 1
            continue
        for q, ok, err, iters in out:
            t = tally[v, q]
            t[0] += int(ok)
            t[2] += err
            t[3] += iters
    cells = []
    for v in grid.axis_values:
        for q in grid.q_values:
            succ, skipped, err, iters = tally[v, q]
            done = grid.reps - skipped
            cells.append(PhaseCell(v, q, succ, grid.reps, skipped,
                                   err / done if done else math.nan,
                                   iters / done if done else math.nan))
    return PhaseResult(grid, tuple(cells))


# --- single-instance demo ---------------------------------------------------


@dataclass(frozen=True)
class RecoveryReport:
    instance: object
    result: RecoveryResult
    q: float
    lam: float

    @property
    def relative_error(self) -> float:
        return self.result.relative_error

    def trace_lines(self) -> list[str]:
        tr = self.result.trace
        return [f"{k} F={tr.F_values[k]!r} eps={tr.epsilons[k]!r} dbeta={tr.delta_beta_inf[k]!r}"
                for k in range(len(tr.F_values))]

    def write(self, directory) -> Path:
        out = _ensure_dir(directory)
        rows = zip(range(self.instance.d), self.instance.beta_star, self.result.beta_hat)
        _write_csv(out / "recovery.csv", ["index", "true", "estimate"],
                   ([i, repr(float(a)), repr(float(b))] for i, a, b in rows))
        self.result.trace.to_csv(out / "trace.csv")
        return out


def run_recovery_demo(m: int = 80, n: int = 144, d: int = 120, l: int = 99, q: float = 0.7,
                      sigma: float = 0.0, seed: int = 0, lam: float = 1e-4,
                      operator: str = "parseval") -> RecoveryReport:
    inst = make_instance(m, n, d, l, sigma=sigma, seed=seed, operator=operator)
    res = solve(inst, SolverConfig(q=q, lam=lam))
    return RecoveryReport(inst, res, q, lam)


# --- phantom ----------------------------------------------------------------


def snr_db(truth, estimate) -> float:
    truth = np.asarray(truth, dtype=float)
    err = np.linalg.norm(np.asarray(estimate, dtype=float) - truth)
    if err == 0.0:
        return math.inf
    return float(20.0 * math.log10(np.linalg.norm(truth) / err))


@dataclass(frozen=True)
class PhantomReport:
    h: int
    w: int
    lines: int
    q: float
    sigma: float
    lam: float
    m: int
    l_target: int
    relative_error: float
    snr_db: float
    iterations: int
    image: np.ndarray
    estimate: np.ndarray

    @property
    def exact(self) -> bool:
        return self.relative_error <= PHANTOM_EXACT_RTOL

    def write(self, directory) -> Path:
        out = _ensure_dir(directory)
        stem = f"phantom_{self.h}x{self.w}_L{self.lines}_q{self.q!r}"
        write_pgm(out / f"{stem}.pgm", self.estimate)
        rows = ([repr(float(v)) for v in row] for row in self.estimate)
        _write_csv(out / f"{stem}.csv", None, rows)
        return out


def run_phantom(h: int = 32, w: int = 32, lines: int = 8, q: float = 0.7, sigma: float = 0.0,
                lam: float = 1e-4, seed: int = 0) -> PhantomReport:
    """Reconstruct the phantom from radial Fourier samples by 2-D FD analysis.

    The cosparsity handed to the solver is the true number of zero image
    gradients.
    """
    if h != w or h not in (16, 32):
        raise InvalidInput("phantom runs support h = w in {16, 32}")
    if lines < 2:
        raise InvalidInput("need at least 2 radial lines")
    task = make_phantom_task(h, w, lines, sigma=sigma, seed=seed)
    l = int(np.sum(np.abs(task.op.D @ task.beta_star) <= ZERO_TOL))
    res = coirlq(task.X, task.y, task.op, SolverConfig(q=q, lam=lam), l_target=l,
                 beta_true=task.beta_star)
    return PhantomReport(h, w, lines, q, sigma, lam, task.X.shape[0], l, res.relative_error,
                         snr_db(task.beta_star, res.beta_hat), res.trace.iterations,
                         task.image, res.beta_hat.reshape(h, w))


def minimal_exact_lines(q: float, candidates, h: int = 32, lam: float = 1e-4) -> float:
    """First line count in `candidates` (scanned upward) giving an exact noiseless reconstruction."""
    for lines in sorted(candidates):
        if run_phantom(h, h, lines, q, 0.0, lam).exact:
            return lines
    return math.inf


def write_pgm(path, image) -> None:
    """Plain-text 8-bit PGM; values are clipped to [0, 1]."""
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    levels = np.rint(img * 255).astype(int)
    body = "\n".join(" ".join(str(v) for v in row) for row in levels)
    _write_text(path, f"P2\n{img.shape[1]} {img.shape[0]}\n255\n{body}\n")


# --- plots ------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f")


def phase_rows(result: PhaseResult):
    for c in result.cells:
        yield [c.axis_value, repr(c.q), repr(c.success_rate), repr(c.mean_relative_error),
               repr(c.mean_iterations)]


def emit_plot(result: PhaseResult, path) -> Path:
    """Write an SVG success-rate chart at `path` and its data next to it as CSV."""
    if not result.cells:
        raise InvalidInput("empty phase result")
    path = Path(path)
    _write_csv(path.with_suffix(".csv"),
               ["axis_value", "q", "success_rate", "mean_rel_err", "mean_iters"], phase_rows(result))
    _write_text(path, _svg(result))
    return path


def _svg(result: PhaseResult) -> str:
    W, H, pad = 480, 320, 48
    xs = result.grid.axis_values
    lo, hi = xs[0], xs[-1]
    span = hi - lo or 1

    def px(v):
        return pad + (W - 2 * pad) * ((v - lo) / span if hi > lo else 0.5)

    def py(r):
        return H - pad - (H - 2 * pad) * (0.0 if math.isnan(r) else r)

    axis = result.grid.sweep_axis.value
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
        f'<text x="{W / 2:.1f}" y="{H - 12}" text-anchor="middle" font-size="12">{axis}</text>',
        f'<text x="14" y="{H / 2:.1f}" font-size="12" transform="rotate(-90 14 {H / 2:.1f})" '
        'text-anchor="middle">success rate</text>',
    ]
    for v in xs:
        parts.append(f'<text x="{px(v):.2f}" y="{H - pad + 14}" text-anchor="middle" font-size="9">{v}</text>')
    for r in (0.0, 0.5, 1.0):
        parts.append(f'<text x="{pad - 6}" y="{py(r) + 3:.2f}" text-anchor="end" font-size="9">{r}</text>')
    for i, q in enumerate(result.grid.q_values):
        color = _COLORS[i % len(_COLORS)]
        pts = [(px(v), py(r)) for v, r in zip(xs, result.curve(q))]
        if len(pts) > 1:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{color}"/>')
        parts.append(f'<text x="{W - pad + 4}" y="{pad + 14 * i}" font-size="10" fill="{color}">q={q!r}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --- io helpers -------------------------------------------------------------


def _ensure_dir(directory) -> Path:
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from None
    return out


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def _write_csv(path, header, rows) -> None:
    try:
        with open(Path(path), "w", newline="") as fh:
            wr = csv.writer(fh)
            if header:
                wr.writerow(header)
            wr.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


__all__ = [
    "LAMBDA_GRID",
    "LambdaPolicy",
    "PhaseCell",
    "PhaseGrid",
    "PhaseResult",
    "PhantomReport",
    "RecoveryReport",
    "SweepAxis",
    "emit_plot",
    "minimal_exact_lines",
    "run_phantom",
    "run_phase_transition",
    "run_recovery_demo",
    "snr_db",
    "solve_with_policy",
    "trial_seed",
    "write_pgm",
]
