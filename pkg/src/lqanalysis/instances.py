"""Synthetic recovery problems: Gaussian designs, cosparse targets, phantoms."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InfeasibleCosparsity, InvalidInput, InvalidShape
from .numerics import null_space_basis
from .operators import (
    AnalysisOperator,
    CosupportProfile,
    cosparsity,
    make_fd_1d,
    make_fd_2d,
    make_identity,
    make_random_parseval_frame,
    read_matrix_csv,
    write_matrix_csv,
)

MAX_REDRAWS = 100
# entries of the default target have this RMS; large enough that the lam-induced
# bias of the penalized solution stays far below the 1e-4 success threshold
TARGET_RMS = 10.0


def child_seeds(seed: int, count: int) -> list[int]:
    """Independent 64-bit seeds derived from one parent seed."""
    ss = np.random.SeedSequence(seed)
    return [int(s.generate_state(1, np.uint64)[0]) for s in ss.spawn(count)]


def make_design_matrix(m: int, d: int, seed: int) -> np.ndarray:
    """m x d standard Gaussian matrix with every column scaled to unit norm."""
    if m < 1 or d < 1:
        raise InvalidShape("m and d must be >= 1")
    X = np.random.default_rng(seed).standard_normal((m, d))
    return X / np.linalg.norm(X, axis=0)


def make_cosparse_vector(op: AnalysisOperator, l: int, seed: int):
    """Draw a unit-norm vector annihilated by `l` randomly chosen rows of D.

    Returns ``(beta, profile)``. Cosupports with a trivial null space are
    redrawn up to 100 times before InfeasibleCosparsity is raised.
    """
    if not 1 <= l <= op.n:
        raise InvalidInput(f"cosparsity l={l} outside [1, {op.n}]")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REDRAWS):
        rows = np.sort(rng.choice(op.n, size=l, replace=False))
        W = null_space_basis(op.D[rows], 1e-10)
        if W.shape[1] == 0:
            continue
        beta = W @ rng.standard_normal(W.shape[1])
        norm = np.linalg.norm(beta)
        if norm == 0.0:
            continue
        beta = beta / norm
        return beta, cosparsity(op, beta)
    raise InfeasibleCosparsity(f"no {l}-row cosupport of this operator has a nontrivial null space")


def observe(X, beta, sigma: float, seed: int) -> np.ndarray:
    """Noisy measurements ``X beta + sigma * g`` with g standard normal."""
    if sigma < 0:
        raise InvalidInput("sigma must be non-negative")
    X = np.asarray(X, dtype=float)
    y = X @ np.asarray(beta, dtype=float)
    if sigma > 0:
        y = y + sigma * np.random.default_rng(seed).standard_normal(X.shape[0])
    return y


@dataclass(frozen=True)
class ProblemInstance:
    X: np.ndarray
    y: np.ndarray
    beta_star: np.ndarray
    op: AnalysisOperator
    sigma: float
    profile: CosupportProfile
    seed: int
    l: int

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.op.n


def build_operator(kind: str, n: int, d: int, seed: int) -> AnalysisOperator:
    if kind == "parseval":
        return make_random_parseval_frame(n, d, seed)
    if kind == "identity":
        return make_identity(d)
    if kind == "fd1d":
        return make_fd_1d(d)
    raise InvalidInput(f"unknown operator kind {kind!r}")


def make_instance(
    m: int,
    n: int,
    d: int,
    l: int,
    sigma: float = 0.0,
    seed: int = 0,
    operator: str = "parseval",
    beta_norm: float | None = None,
    op: AnalysisOperator | None = None,
) -> ProblemInstance:
    """Generate a full synthetic task ``y = X beta* + w``.

    The target is rescaled to ``beta_norm`` (default ``TARGET_RMS * sqrt(d)``). Pass `op` to reuse an existing operator instead of
    building one of the named `operator` kind.
    """
    s_op, s_x, s_beta, s_noise = child_seeds(seed, 4)
    if op is None:
        op = build_operator(operator, n, d, s_op)
    X = make_design_matrix(m, op.d, s_x)
    beta, profile = make_cosparse_vector(op, l, s_beta)
    scale = TARGET_RMS * np.sqrt(op.d) if beta_norm is None else float(beta_norm)
    beta = scale * beta
    y = observe(X, beta, sigma, s_noise)
    return ProblemInstance(X, y, beta, op, float(sigma), profile, int(seed), int(l))


def save_instance(inst: ProblemInstance, directory) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(inst.X, out / "X.csv")
    write_matrix_csv(inst.y, out / "y.csv")
    write_matrix_csv(inst.beta_star, out / "beta_star.csv")
    write_matrix_csv(inst.op.D, out / "D.csv")
    meta = {
        "m": inst.m,
        "d": inst.d,
        "n": inst.n,
        "l": inst.l,
        "sigma": inst.sigma,
        "seed": inst.seed,
        "operator": inst.op.kind,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return out


def load_instance(directory) -> ProblemInstance:
    src = Path(directory)
    meta = json.loads((src / "meta.json").read_text())
    op = AnalysisOperator.from_matrix(read_matrix_csv(src / "D.csv"), kind=meta["operator"])
    beta = read_matrix_csv(src / "beta_star.csv").ravel()
    return ProblemInstance(
        X=read_matrix_csv(src / "X.csv"),
        y=read_matrix_csv(src / "y.csv").ravel(),
        beta_star=beta,
        op=op,
        sigma=float(meta["sigma"]),
        profile=cosparsity(op, beta),
        seed=int(meta["seed"]),
        l=int(meta["l"]),
    )


# --- phantom task -----------------------------------------------------------

PALETTE = (0.0, 0.2, 0.3, 0.45, 0.7, 1.0)

# (center_x, center_y, semi_x, semi_y, angle_deg, palette index), painted in order
_ELLIPSES = (
    (0.0, 0.0, 0.7, 0.9, 0.0, 5),
    (0.0, -0.02, 0.56, 0.76, 0.0, 1),
    (0.0, 0.15, 0.3, 0.28, 0.0, 3),
    (0.0, 0.15, 0.12, 0.12, 0.0, 4),
)


def make_phantom(h: int, w: int) -> np.ndarray:
    """Piecewise-constant nested-ellipse head phantom on an h x w grid.

    Gray levels come from the fixed six-level `PALETTE` (five are used), so the image has
    sparse finite-difference gradients.
    """
    if h < 8 or w < 8:
        raise InvalidShape("phantom needs h, w >= 8")
    ys = (np.arange(h) + 0.5) / h * 2.0 - 1.0
    xs = (np.arange(w) + 0.5) / w * 2.0 - 1.0
    xx, yy = np.meshgrid(xs, -ys)
    img = np.zeros((h, w))
    for cx, cy, ax, ay, ang, level in _ELLIPSES:
        t = np.deg2rad(ang)
        u = (xx - cx) * np.cos(t) + (yy - cy) * np.sin(t)
        v = -(xx - cx) * np.sin(t) + (yy - cy) * np.cos(t)
        img[(u / ax) ** 2 + (v / ay) ** 2 <= 1.0] = PALETTE[level]
    return img


def radial_frequencies(h: int, w: int, lines: int) -> list[tuple[int, int]]:
    """Grid frequencies nearest to `lines` equally spaced lines through DC.

    Line j has angle ``j * pi / lines``. Frequencies are taken modulo the
    grid, and each conjugate pair ``k, -k`` is kept once.
    """
    if lines < 1:
        raise InvalidInput("lines must be >= 1")
    radius = max(h, w)
    ts = np.arange(-radius, radius + 0.25, 0.25)
    seen: dict[tuple[int, int], None] = {}
    for j in range(lines):
        theta = j * np.pi / lines
        ky = np.rint(ts * np.sin(theta)).astype(int)
        kx = np.rint(ts * np.cos(theta)).astype(int)
        ok = (np.abs(ky) <= h // 2) & (np.abs(kx) <= w // 2)
        for a, b in zip(ky[ok], kx[ok]):
            k = (int(a) % h, int(b) % w)
            conj = ((-k[0]) % h, (-k[1]) % w)
            key = min(k, conj)
            seen.setdefault(key, None)
    return list(seen)


def make_partial_fourier_radial(h: int, w: int, lines: int, seed: int = 0) -> np.ndarray:
    """Real-valued radial-line Fourier measurement matrix for h x w images.

    Each sampled frequency contributes a cosine row and a sine row (the real
    and imaginary parts of the unitary 2-D DFT functional on the row-major
    image), each scaled to unit norm. Sine rows that vanish identically
    (self-conjugate frequencies such as DC) are dropped. The geometry is
    deterministic; `seed` is accepted for interface symmetry only.
    """
    del seed
    r = np.arange(h)[:, None]
    c = np.arange(w)[None, :]
    rows = []
    for k1, k2 in radial_frequencies(h, w, lines):
        phase = 2.0 * np.pi * (k1 * r / h + k2 * c / w)
        for part in (np.cos(phase), -np.sin(phase)):
            vec = part.ravel() / np.sqrt(h * w)
            norm = np.linalg.norm(vec)
            if norm > 1e-12:
                rows.append(vec / norm)
    return np.array(rows)


@dataclass(frozen=True)
class PhantomTask:
    image: np.ndarray
    lines: int
    X: np.ndarray
    y: np.ndarray
    op: AnalysisOperator
    sigma: float

    @property
    def beta_star(self) -> np.ndarray:
        return self.image.ravel()


def make_phantom_task(h: int, w: int, lines: int, sigma: float = 0.0, seed: int = 0) -> PhantomTask:
    img = make_phantom(h, w)
    X = make_partial_fourier_radial(h, w, lines, seed)
    y = observe(X, img.ravel(), sigma, child_seeds(seed, 1)[0])
    return PhantomTask(img, lines, X, y, make_fd_2d(h, w), float(sigma))
