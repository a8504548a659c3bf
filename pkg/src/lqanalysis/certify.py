"""Brute-force certificates for tiny problems: restricted isometry constants and D-NSP_q.

The D-RIP is measured on ``{D^+ w : w s-sparse}``, the subspaces that the
recovery proofs actually use. For a Parseval frame ``D^+ = D^T`` and this
is the usual D-RIP. The Omega-RIP is measured on the null spaces of
``l``-row submatrices of D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import EmptyModel, InvalidInput, TooLarge
from .numerics import as_matrix, null_space_basis, pseudoinverse
from .operators import AnalysisOperator

ENUM_BUDGET = 2_000_000
RANGE_TOL = 1e-12
NSP_MARGIN = 1e-9
GRID_POINTS = 10_000
THETA_TOL = 1e-10
WITNESS_ATOL = 1e-10


class Flavor(str, Enum):
    DRIP = "DRip"
    OMEGA = "OmegaRip"


class Verdict(str, Enum):
    HOLDS = "Holds"
    VIOLATED = "Violated"
    UNKNOWN = "Unknown"


class Method(str, Enum):
    EXACT_GRID = "ExactGrid"
    RANDOMIZED = "Randomized"


@dataclass(frozen=True)
class RipEstimate:
    order: int
    delta: float
    extremal_support: tuple
    flavor: Flavor


@dataclass(frozen=True)
class NspVerdict:
    """Outcome of a D-NSP_q check.

    ``margin`` is the smallest ``||D_{T^c} v||_q^q - ||D_T v||_q^q`` seen over
    unit null-space vectors v and admissible T. It is ``inf`` when X has a
    trivial null space.
    """

    verdict: Verdict
    margin: float
    method: Method
    witness_v: np.ndarray | None = None
    witness_T: tuple | None = None


def _isometry_deviation(XtX: np.ndarray, U: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(U.T @ XtX @ U)
    return float(max(ev[-1] - 1.0, 1.0 - ev[0], 0.0))


def _check_budget(n: int, r: int, budget: int) -> None:
    if math.comb(n, r) > budget:
        raise TooLarge(f"C({n}, {r}) subsets exceed the budget {budget}")


def drip_delta(X, op: AnalysisOperator, s: int, budget: int = ENUM_BUDGET) -> RipEstimate:
    """Worst isometry defect of X over ``span(D^+ e_i : i in S)``, ``|S| = s``."""
    X = as_matrix(X)
    if not 1 <= s <= op.n:
        raise InvalidInput(f"order s={s} outside [1, {op.n}]")
    _check_budget(op.n, s, budget)
    P = pseudoinverse(op.D)
    XtX = X.T @ X
    best, arg = 0.0, tuple(range(s))
    for S in combinations(range(op.n), s):
        B = P[:, list(S)]
        U, sv, _ = np.linalg.svd(B, full_matrices=False)
        U = U[:, sv > RANGE_TOL]
        if U.shape[1] == 0:
            continue
        dev = _isometry_deviation(XtX, U)
        if dev > best:
            best, arg = dev, S
    return RipEstimate(s, best, arg, Flavor.DRIP)


def omega_rip_delta(X, op: AnalysisOperator, l: int, budget: int = ENUM_BUDGET) -> RipEstimate:
    """Worst isometry defect of X over ``Null(D_Lambda)``, ``|Lambda| = l``."""
    X = as_matrix(X)
    if not 1 <= l <= op.n:
        raise InvalidInput(f"cosparsity l={l} outside [1, {op.n}]")
    _check_budget(op.n, l, budget)
    XtX = X.T @ X
    best, arg, seen = 0.0, None, False
    for L in combinations(range(op.n), l):
        W = null_space_basis(op.D[list(L)])
        if W.shape[1] == 0:
            continue
        seen = True
        dev = _isometry_deviation(XtX, W)
        if arg is None or dev > best:
            best, arg = dev, L
    if not seen:
        raise EmptyModel(f"every {l}-row submatrix of D has a trivial null space")
    return RipEstimate(l, best, arg, Flavor.OMEGA)


# --- null space property ----------------------------------------------------


def _margins(A: np.ndarray, q: float, k: int, support) -> np.ndarray:
    """Worst-case margin for each column of ``A = D V``."""
    P = np.abs(A) ** q
    total = P.sum(axis=0)
    if support is not None:
        return total - 2.0 * P[list(support)].sum(axis=0)
    if k == 0:
        return total
    top = -np.partition(-P, k - 1, axis=0)[:k]
    return total - 2.0 * top.sum(axis=0)


def _worst_set(a: np.ndarray, q: float, k: int, support) -> tuple:
    if support is not None:
        return tuple(sorted(support))
    order = np.argsort(-np.abs(a) ** q, kind="stable")
    return tuple(sorted(int(i) for i in order[:k]))


def nsp_margin(op: AnalysisOperator, v, q: float, k: int, support=None) -> float:
    """``min_T ||D_{T^c} v||_q^q - ||D_T v||_q^q`` for one vector v.

    The minimum runs over ``|T| <= k``, or is fixed to ``T = support``.
    """
    a = op.D @ np.asarray(v, dtype=float)
    return float(_margins(a[:, None], q, k, support)[0])


def _verdict_from(v, margin, op, q, k, support, method):
    if margin > NSP_MARGIN:
        return NspVerdict(Verdict.HOLDS, float(margin), method)
    T = _worst_set(op.D @ v, q, k, support)
    return NspVerdict(Verdict.VIOLATED, float(margin), method, v, T)


def dnspq_check(X, op: AnalysisOperator, q: float, k: int, budget: int = 2000, seed: int = 0,
                support=None) -> NspVerdict:
    """Check ``||D_T v||_q^q < ||D_{T^c} v||_q^q`` on ``Null(X) \\ {0}``.

    By default T ranges over all sets with ``|T| <= k``; pass `support` to test
    a single set. Nullity 0, 1 and 2 are decided exactly (nullity 2 up to a
    fine angular grid with local refinement), and Holds needs a margin above
    1e-9. Larger null spaces are searched at random and can only report
    Violated or Unknown.
    """
    X = as_matrix(X)
    if not 0.0 < q <= 1.0:
        raise InvalidInput("q must lie in (0, 1]")
    if support is None and not 0 <= k <= op.n:
        raise InvalidInput(f"k={k} outside [0, {op.n}]")
    if X.shape[1] != op.d:
        raise InvalidInput("X and D disagree on the ambient dimension")
    W = null_space_basis(X)
    r = W.shape[1]
    if r == 0:
        return NspVerdict(Verdict.HOLDS, math.inf, Method.EXACT_GRID)
    DW = op.D @ W
    if r == 1:
        v = W[:, 0]
        return _verdict_from(v, nsp_margin(op, v, q, k, support), op, q, k, support, Method.EXACT_GRID)
    if r == 2:
        return _nsp_circle(W, DW, op, q, k, support)
    return _nsp_random(W, DW, op, q, k, support, budget, seed)


def _nsp_circle(W, DW, op, q, k, support) -> NspVerdict:
    # v(theta) and v(theta + pi) give the same margin, so half a turn suffices
    def margin_at(theta):
        c = np.array([math.cos(theta), math.sin(theta)])
        return float(_margins((DW @ c)[:, None], q, k, support)[0])

    thetas = np.linspace(0.0, np.pi, GRID_POINTS, endpoint=False)
    C = np.vstack([np.cos(thetas), np.sin(thetas)])
    grid = _margins(DW @ C, q, k, support)
    # every zero crossing of a row is a cusp of |.|^q, a likely minimizer
    cusps = np.mod(np.arctan2(-DW[:, 0], DW[:, 1]), np.pi)
    cand = [(float(grid[i]), float(thetas[i])) for i in np.argsort(grid)[:20]]
    cand += [(margin_at(t), float(t)) for t in cusps]
    h = np.pi / GRID_POINTS
    best_m, best_t = min(cand)
    for _, t0 in sorted(cand)[:20]:
        res = minimize_scalar(margin_at, bounds=(t0 - h, t0 + h), method="bounded",
                              options={"xatol": THETA_TOL})
        if res.fun < best_m:
            best_m, best_t = float(res.fun), float(res.x)
    v = W @ np.array([math.cos(best_t), math.sin(best_t)])
    return _verdict_from(v, best_m, op, q, k, support, Method.EXACT_GRID)


def _nsp_random(W, DW, op, q, k, support, budget, seed) -> NspVerdict:
    rng = np.random.default_rng(seed)
    r = W.shape[1]
    C = rng.standard_normal((r, max(int(budget), 1)))
    C /= np.linalg.norm(C, axis=0)
    m = _margins(DW @ C, q, k, support)
    starts = C[:, np.argsort(m)[:10]]
    best_m, best_c = float(m.min()), C[:, int(np.argmin(m))]
    for j in range(starts.shape[1]):
        c = starts[:, j].copy()
        for it in range(200):
            a = DW @ c
            T = _worst_set(a, q, k, support)
            sgn = -np.ones_like(a)
            sgn[list(T)] = 1.0
            # ascend ||D_T v||^q - ||D_Tc v||^q; the floor keeps |a|^(q-1) finite
            g = DW.T @ (sgn * q * np.maximum(np.abs(a), 1e-12) ** (q - 1.0) * np.sign(a))
            g -= (g @ c) * c
            gn = np.linalg.norm(g)
            if gn == 0.0:
                break
            c = c + (0.1 / math.sqrt(it + 1.0)) * g / gn
            c /= np.linalg.norm(c)
            mc = float(_margins((DW @ c)[:, None], q, k, support)[0])
            if mc < best_m:
                best_m, best_c = mc, c.copy()
    v = W @ best_c
    if best_m <= NSP_MARGIN:
        return NspVerdict(Verdict.VIOLATED, best_m, Method.RANDOMIZED, v,
                          _worst_set(op.D @ v, q, k, support))
    return NspVerdict(Verdict.UNKNOWN, best_m, Method.RANDOMIZED)


def verify_witness(X, op: AnalysisOperator, q: float, k: int, verdict: NspVerdict) -> bool:
    """Re-check a Violated verdict: ``Xv = 0``, ``|T| <= k`` and the inequality fails.

    For a verdict computed against a fixed `support`, pass ``k = len(support)``.
    """
    if verdict.verdict is not Verdict.VIOLATED:
        return False
    X = as_matrix(X)
    v = np.asarray(verdict.witness_v, dtype=float)
    T = list(verdict.witness_T)
    if np.linalg.norm(v) == 0.0 or len(T) > k:
        return False
    v = v / np.linalg.norm(v)
    if np.linalg.norm(X @ v) > WITNESS_ATOL * max(1.0, np.linalg.norm(X, 2)):
        return False
    P = np.abs(op.D @ v) ** q
    on = P[T].sum()
    return bool(on >= P.sum() - on - NSP_MARGIN)
