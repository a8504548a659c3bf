"""Closed-form recovery conditions, constants and error bounds for l_q-analysis.

All logarithms are natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from .errors import ConditionViolated, InfeasibleRegime, InvalidInput, TooLarge, UndefinedRegime
from .numerics import min_norm_solution, singular_values
from .operators import AnalysisOperator
from .solver import objective_F

MU_DISC_TOL = 1e-12
C0_TOL = 1e-12
ENUM_BUDGET = 2_000_000
FLOOR_TOL = 1e-9


class Mode(str, Enum):
    NOISELESS = "Noiseless"
    NOISY = "Noisy"


def _check_q(q: float) -> None:
    if not 0.0 < q <= 1.0:
        raise InvalidInput(f"q must lie in (0, 1], got {q}")


def rho_of(q: float, t: float, mode: Mode = Mode.NOISELESS) -> float:
    _check_q(q)
    if t <= 0:
        raise InvalidInput("t must be positive")
    if Mode(mode) is Mode.NOISELESS:
        return t ** (q - 2.0) / 4.0
    return 4.0 ** (1.0 / q - 2.0) * t ** (q - 2.0)


def delta_threshold(rho: float, kappa: float) -> float:
    """Largest admissible restricted isometry constant for the given rho and kappa."""
    if rho <= 0 or kappa < 1.0:
        raise InvalidInput("need rho > 0 and kappa >= 1")
    k2 = kappa * kappa
    num = rho * (1.0 - k2 * k2) + k2 * math.sqrt(4.0 * rho + 1.0)
    return num / (rho * (k2 + 1.0) ** 2 + k2)


def kappa_bound(rho: float) -> float:
    """Condition numbers of D strictly below this keep the threshold positive."""
    if rho <= 0:
        raise InvalidInput("rho must be positive")
    s = math.sqrt(4.0 * rho + 1.0)
    return math.sqrt((2.0 * rho + 1.0 + s) / (2.0 * rho))


def mu_of(b: float, rho: float, kappa: float) -> float:
    k2 = kappa * kappa
    disc = -rho * (b + 1.0) ** 2 * k2 * k2 + (2.0 * rho + 1.0) * (1.0 - b * b) * k2 - rho * (1.0 - b) ** 2
    if disc < -MU_DISC_TOL:
        raise InfeasibleRegime(f"discriminant {disc:.3e} < 0: no admissible mu for b={b}, rho={rho}, kappa={kappa}")
    den = 2.0 * (rho + 1.0) * (b + 1.0) * k2 + 2.0 * rho * (b - 1.0)
    if den <= 0:
        raise InfeasibleRegime("non-positive denominator in mu")
    return ((b + 1.0) * k2 + math.sqrt(max(disc, 0.0))) / den


def c0_of(delta: float, rho: float, kappa: float, mu: float) -> float:
    k2 = kappa * kappa
    gap = k2 * (1.0 + delta) - (1.0 - delta)
    return (0.5 - mu) ** 2 * (1.0 + delta) * k2 - 0.25 * (1.0 - delta) + rho * mu * mu * gap


def constants_c(delta: float, rho: float, kappa: float, mu: float, sigma_max_D: float):
    """Return ``(c0, c1, c2)``; raises ConditionViolated unless c0 < 0."""
    if not 0.0 <= delta < 1.0:
        raise InvalidInput("delta must lie in [0, 1)")
    c0 = c0_of(delta, rho, kappa, mu)
    if c0 >= -C0_TOL:
        raise ConditionViolated(f"c0 = {c0:.3e} is not negative; delta is not below the threshold for this mu")
    gap = kappa * kappa * (1.0 + delta) - (1.0 - delta)
    c1 = 2.0 * kappa * (mu - mu * mu) * math.sqrt(1.0 + delta) * sigma_max_D / -c0
    c2 = (2.0 * rho * mu * mu * gap + math.sqrt(max(-c0 * rho * mu * mu * gap, 0.0))) / -c0
    return c0, c1, c2


@dataclass(frozen=True)
class TheoryReport:
    q: float
    t: float
    kappa: float
    k: int
    mode: Mode
    rho: float
    b: float
    kappa_bound: float
    mu: float
    rip_order: float
    rip_order_ceil: int
    feasible: bool
    delta: float | None = None
    c0: float = math.nan
    c1: float = math.nan
    c2: float = math.nan

    @property
    def has_constants(self) -> bool:
        return not math.isnan(self.c1)


def theory_report(q: float, t: float, kappa: float = 1.0, k: int = 1, mode: Mode = Mode.NOISELESS,
                  delta: float | None = None, sigma_max_D: float = 1.0) -> TheoryReport:
    """Evaluate the threshold, kappa bound and mu for one (q, t, kappa, k).

    When `delta` is given and lies below the threshold, c0/c1/c2 are filled
    in as well; otherwise they stay NaN.
    """
    mode = Mode(mode)
    rho = rho_of(q, t, mode)
    b = delta_threshold(rho, kappa)
    kb = kappa_bound(rho)
    feasible = kappa < kb and b > 0.0
    mu = mu_of(b, rho, kappa) if feasible else math.nan
    order = (t**q + 1.0) * k
    order_ceil = math.ceil(t**q * k - FLOOR_TOL) + k
    c0 = c1 = c2 = math.nan
    if feasible and delta is not None and delta < b:
        c0, c1, c2 = constants_c(delta, rho, kappa, mu, sigma_max_D)
    return TheoryReport(q, t, kappa, k, mode, rho, b, kb, mu, order, order_ceil, feasible,
                        delta, c0, c1, c2)


@dataclass(frozen=True)
class ErrorBounds:
    lq_bound: float
    l2_bound: float
    epsilon: float
    k: int
    q: float
    sigma_k: float
    sigma_min_D: float


def error_bounds(report: TheoryReport, epsilon: float, k: int, q: float, sigma_k: float,
                 sigma_min_D: float) -> ErrorBounds:
    """Estimate-error bounds in the analysis domain (l_q) and signal domain (l_2)."""
    if not report.feasible or not report.has_constants:
        raise ConditionViolated("report is infeasible or was built without a sub-threshold delta")
    if epsilon < 0 or sigma_k < 0 or k < 1 or sigma_min_D <= 0:
        raise InvalidInput("need epsilon, sigma_k >= 0, k >= 1, sigma_min_D > 0")
    c1, c2 = report.c1, report.c2
    lq = 2.0 * c1**q * k ** (1.0 - q / 2.0) * epsilon**q + 2.0 * (2.0 * c2**q + 1.0) * sigma_k**q
    l2 = (2.0 * c1 / sigma_min_D) * epsilon + (
        2.0 ** (1.0 / q) * (2.0 * c2 + 1.0) / sigma_min_D
    ) * sigma_k / k ** (1.0 / q - 0.5)
    return ErrorBounds(float(lq), float(l2), epsilon, k, q, sigma_k, sigma_min_D)


def best_k_term_error(a, k: int, q: float) -> float:
    """``sigma_k(a)_q``: l_q quasi-norm of `a` with its k largest entries removed."""
    mags = np.sort(np.abs(np.asarray(a, dtype=float)))[::-1]
    return float(np.sum(mags[k:] ** q) ** (1.0 / q))


@dataclass(frozen=True)
class NoiseBound:
    bound: float
    probability: float

    def __float__(self) -> float:
        return self.bound


def gaussian_noise_bound(m: int, sigma: float) -> NoiseBound:
    """High-probability bound on ``||w||_2`` for ``w ~ N(0, sigma^2 I_m)``; holds w.p. ``1 - 1/m``."""
    if m < 1 or sigma < 0:
        raise InvalidInput("need m >= 1 and sigma >= 0")
    value = sigma * math.sqrt(m + 2.0 * math.sqrt(m * math.log(m)))
    return NoiseBound(value, 1.0 - 1.0 / m)


def sample_constant(C: float) -> float:
    """``1 / (2 ln(2C + 3))``, the constant in front of ``q k ln(n / 4k)``."""
    if C <= 0:
        raise InvalidInput("C must be positive")
    return 1.0 / (2.0 * math.log(2.0 * C + 3.0))


def sample_lower_bound(q: float, k: int, n: int, c2: float) -> float:
    _check_q(q)
    if c2 <= 0 or k < 1:
        raise InvalidInput("need c2 > 0 and k >= 1")
    if n <= 4 * k:
        raise UndefinedRegime(f"n={n} <= 4k={4 * k}: the logarithm is non-positive")
    C2 = 1.0 / (2.0 * math.log(8.0 * c2**q + 7.0))
    return C2 * q * k * math.log(n / (4.0 * k))


def cosparse_sample_floor(op: AnalysisOperator, l: int, budget: int = ENUM_BUDGET) -> int:
    """Twice the largest null-space dimension of any l-row submatrix of D."""
    if not 1 <= l <= op.n:
        raise InvalidInput(f"l={l} outside [1, {op.n}]")
    if math.comb(op.n, l) > budget:
        raise TooLarge(f"C({op.n}, {l}) subsets exceed the budget {budget}")
    best = 0
    for rows in combinations(range(op.n), l):
        rank = singular_values(op.D[list(rows)]).rank
        best = max(best, op.d - rank)
        if best == op.d:
            break
    return 2 * best


def sq_from_s1(t: float, q: float, s1: int) -> int:
    """Cosparsity range for l_q given the l_1 range under the same RIP budget."""
    _check_q(q)
    if t < 1 or s1 < 1:
        raise InvalidInput("need t >= 1 and s1 >= 1")
    ratio = (t + 1.0) / (t ** (q / (2.0 - q)) + 1.0)
    # a tolerance keeps exact multiples like 5/3 * 3 from flooring to 4
    return int(math.floor(ratio * s1 + FLOOR_TOL))


def coirlq_guarantee(delta_2l_minus_n: float, lam: float, epsilon: float, F0: float) -> float:
    """Worst-case solver error ``(sqrt(2 F0) + eps) / sqrt(1 - delta)``.

    `F0` is the smoothed objective at the solver's initialization; it already
    carries the factor `lam`, which is accepted for reference only.
    """
    if not 0.0 <= delta_2l_minus_n < 1.0:
        raise ConditionViolated("the cosparse RIP constant must lie in [0, 1)")
    if lam <= 0 or epsilon < 0 or F0 < 0:
        raise InvalidInput("need lam > 0, epsilon >= 0, F0 >= 0")
    return (math.sqrt(2.0 * F0) + epsilon) / math.sqrt(1.0 - delta_2l_minus_n)


def initial_objective(X, y, op: AnalysisOperator, q: float, lam: float, eps0: float = 1.0) -> float:
    """F at the minimum-norm start, the ``F0`` expected by :func:`coirlq_guarantee`."""
    beta0 = min_norm_solution(X, y)
    return objective_F(X, y, op, beta0, eps0, lam, q)


STANDARD_ROWS = ((1.0, 1.0, 1.0), (0.5, 1.0, 1.0), (1.0, 2.0, 1.0), (0.5, 4.0, 1.0), (1.0, 6.0, 1.0), (0.5, 36.0, 1.0))


@dataclass(frozen=True)
class ThresholdRow:
    q: float
    t: float
    kappa: float
    rho: float
    order_multiplier: float
    threshold: float


def threshold_table(rows=STANDARD_ROWS, mode: Mode = Mode.NOISELESS) -> list[ThresholdRow]:
    out = []
    for q, t, kappa in rows:
        rho = rho_of(q, t, mode)
        out.append(ThresholdRow(q, t, kappa, rho, t**q + 1.0, delta_threshold(rho, kappa)))
    return out


__all__ = [
    "ErrorBounds",
    "Mode",
    "NoiseBound",
    "TheoryReport",
    "ThresholdRow",
    "best_k_term_error",
    "c0_of",
    "constants_c",
    "coirlq_guarantee",
    "cosparse_sample_floor",
    "delta_threshold",
    "error_bounds",
    "gaussian_noise_bound",
    "initial_objective",
    "kappa_bound",
    "mu_of",
    "rho_of",
    "sample_constant",
    "sample_lower_bound",
    "sq_from_s1",
    "theory_report",
    "threshold_table",
]
