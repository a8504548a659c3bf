"""Analysis operators D and the cosparsity of a vector under them."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInput, InvalidShape
from .numerics import SpectralData, as_matrix, singular_values

PARSEVAL_TOL = 1e-8
SPARSE_DENSITY = 0.1


@dataclass(frozen=True)
class AnalysisOperator:
    """An n x d analysis operator with its spectral summary.

    ``kappa`` is the ratio of the largest to the smallest *nonzero* singular
    value, so rank-deficient operators such as finite differences still have
    a finite condition number.
    """

    D: np.ndarray
    spectral: SpectralData
    kind: str = "custom"
    kappa: float = field(init=False)
    full_column_rank: bool = field(init=False)
    parseval: bool = field(init=False)
    sparse: sp.csr_matrix | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.D.setflags(write=False)
        object.__setattr__(self, "kappa", self.spectral.kappa)
        object.__setattr__(self, "full_column_rank", self.spectral.rank == self.d)
        gram = self.D.T @ self.D
        is_parseval = np.max(np.abs(gram - np.eye(self.d))) <= PARSEVAL_TOL
        object.__setattr__(self, "parseval", bool(is_parseval))
        nnz = np.count_nonzero(self.D)
        sparse = sp.csr_matrix(self.D) if nnz <= SPARSE_DENSITY * self.D.size else None
        object.__setattr__(self, "sparse", sparse)

    @classmethod
    def from_matrix(cls, D, kind: str = "custom") -> "AnalysisOperator":
        D = np.array(as_matrix(D), dtype=float)
        return cls(D, singular_values(D), kind)

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @property
    def d(self) -> int:
        return self.D.shape[1]

    def __call__(self, beta) -> np.ndarray:
        return self.D @ np.asarray(beta, dtype=float)


@dataclass(frozen=True)
class CosupportProfile:
    support: tuple[int, ...]
    cosupport: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.support)

    @property
    def l(self) -> int:
        return len(self.cosupport)


def make_identity(d: int) -> AnalysisOperator:
    if d < 1:
        raise InvalidShape("d must be >= 1")
    return AnalysisOperator.from_matrix(np.eye(d), kind="identity")


def _fd_matrix_1d(d: int) -> np.ndarray:
    D = np.zeros((d - 1, d))
    idx = np.arange(d - 1)
    D[idx, idx] = -1.0
    D[idx, idx + 1] = 1.0
    return D


def make_fd_1d(d: int) -> AnalysisOperator:
    """Forward differences ``(D beta)_i = beta_{i+1} - beta_i``, shape (d-1, d)."""
    if d < 2:
        raise InvalidShape("d must be >= 2")
    return AnalysisOperator.from_matrix(_fd_matrix_1d(d), kind="fd1d")


def fd_2d_matrix(h: int, w: int) -> np.ndarray:
    """Stacked horizontal-then-vertical forward differences of a row-major h x w image.

    No wrap-around at the boundary, so there are h*(w-1) + (h-1)*w rows.
    """
    if h < 2 or w < 2:
        raise InvalidShape("h and w must be >= 2")
    horiz = np.kron(np.eye(h), _fd_matrix_1d(w))
    vert = np.kron(_fd_matrix_1d(h), np.eye(w))
    return np.vstack([horiz, vert])


def make_fd_2d(h: int, w: int) -> AnalysisOperator:
    return AnalysisOperator.from_matrix(fd_2d_matrix(h, w), kind="fd2d")


def make_random_parseval_frame(n: int, d: int, seed: int) -> AnalysisOperator:
    """Random n x d operator with orthonormal columns (so D^T D = I).

    Draws an n x d standard Gaussian and orthonormalizes its columns by QR;
    signs are fixed so the result depends only on the Gaussian draw.
    """
    if n < d:
        raise InvalidShape(f"a Parseval frame needs n >= d, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, d))
    Q, R = np.linalg.qr(G)
    Q = Q * np.sign(np.diag(R))
    return AnalysisOperator.from_matrix(Q, kind="parseval")


def cosparsity(op: AnalysisOperator, beta, tol: float = 1e-9) -> CosupportProfile:
    """Split the rows of D into support and cosupport of ``D @ beta``.

    Row i is in the cosupport when ``|D_i beta| <= tol * ||D beta||_inf``.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.shape[0] != op.d:
        raise InvalidInput(f"beta has length {beta.shape[0]}, expected {op.d}")
    if tol < 0:
        raise InvalidInput("tol must be non-negative")
    a = np.abs(op.D @ beta)
    top = a.max() if a.size else 0.0
    if top == 0.0:
        zero = np.ones(op.n, dtype=bool)
    else:
        zero = a <= tol * top
    idx = np.arange(op.n)
    return CosupportProfile(tuple(idx[~zero].tolist()), tuple(idx[zero].tolist()))


def write_matrix_csv(M, path) -> None:
    """Dump a matrix as CSV: a ``rows,cols`` header then one row per line."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    lines = [f"{M.shape[0]},{M.shape[1]}"]
    lines += [",".join(repr(float(v)) for v in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    text = Path(path).read_text().strip().splitlines()
    rows, cols = (int(v) for v in text[0].split(","))
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]], dtype=float)
    data = data.reshape(rows, cols)
    return data


def save_operator(op: AnalysisOperator, path) -> None:
    write_matrix_csv(op.D, path)


def load_operator(path, kind: str = "custom") -> AnalysisOperator:
    return AnalysisOperator.from_matrix(read_matrix_csv(path), kind=kind)
