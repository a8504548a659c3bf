import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lqanalysis.errors import ConditionViolated, InvalidInput, TooLarge, UndefinedRegime
from lqanalysis.operators import AnalysisOperator, make_fd_1d, make_identity, make_random_parseval_frame
from lqanalysis.theory import (
    Mode,
    best_k_term_error,
    c0_of,
    constants_c,
    coirlq_guarantee,
    cosparse_sample_floor,
    delta_threshold,
    error_bounds,
    gaussian_noise_bound,
    kappa_bound,
    mu_of,
    rho_of,
    sample_constant,
    sample_lower_bound,
    sq_from_s1,
    theory_report,
    threshold_table,
)

STANDARD_THRESHOLDS = [
    math.sqrt(2) / 2,
    math.sqrt(2) / 2,
    math.sqrt(2 / 3),
    math.sqrt(8 / 9),
    math.sqrt(6 / 7),
    math.sqrt(216 / 217),
]


def test_standard_threshold_rows():
    rows = threshold_table()
    assert [r.threshold for r in rows] == pytest.approx(STANDARD_THRESHOLDS, abs=1e-12)
    assert [r.order_multiplier for r in rows] == [2, 2, 3, 3, 7, 7]


def test_rho_examples():
    assert rho_of(1.0, 2.0, Mode.NOISELESS) == pytest.approx(1 / 8)
    assert rho_of(0.5, 36.0) == pytest.approx(1 / 864)
    for t in (0.5, 1.0, 3.0):
        assert rho_of(1.0, t, Mode.NOISY) == pytest.approx(rho_of(1.0, t, Mode.NOISELESS))
    assert rho_of(0.5, 1.0, "Noisy") == pytest.approx(1.0)
    with pytest.raises(InvalidInput):
        rho_of(0.0, 1.0)


def test_kappa_bound_examples():
    assert kappa_bound(0.25) == pytest.approx(1 + math.sqrt(2))
    assert kappa_bound(2.0) == pytest.approx(math.sqrt(2))
    grid = [kappa_bound(r) for r in np.logspace(-3, 6, 50)]
    assert all(a > b > 1.0 for a, b in zip(grid, grid[1:]))
    assert kappa_bound(1e12) == pytest.approx(1.0, abs=1e-5)


def test_kappa_one_closed_form():
    rng = np.random.default_rng(1)
    for rho in 10.0 ** rng.uniform(-4, 3, 100):
        assert delta_threshold(rho, 1.0) == pytest.approx(1 / math.sqrt(4 * rho + 1), abs=1e-12)


def test_threshold_positive_exactly_below_kappa_bound():
    for rho in (0.01, 0.25, 3.0):
        kb = kappa_bound(rho)
        assert delta_threshold(rho, kb * (1 - 1e-6)) > 0
        assert delta_threshold(rho, kb * (1 + 1e-6)) < 0
        assert delta_threshold(rho, kb) == pytest.approx(0.0, abs=1e-12)


def test_q_monotonicity():
    for t in (1.0, 1.5, 2.0, 4.0, 10.0):
        vals = [delta_threshold(rho_of(q, t), 1.0) for q in np.linspace(0.1, 1.0, 10)]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e2))
def test_kappa_monotonicity(rho):
    ks = np.linspace(1.0, kappa_bound(rho), 30)
    vals = [delta_threshold(rho, k) for k in ks]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_boundary_consistency_grid():
    rng = np.random.default_rng(7)
    for rho in 10.0 ** rng.uniform(-3, 2, 60):
        for kappa in np.linspace(1.0, kappa_bound(rho), 8)[:-1]:
            b = delta_threshold(rho, kappa)
            mu = mu_of(b, rho, kappa)
            assert 0.0 < mu <= 0.5
            assert abs(c0_of(b, rho, kappa, mu)) <= 1e-9
            with pytest.raises(ConditionViolated):
                constants_c(b, rho, kappa, mu, 1.0)


def test_constants_below_threshold():
    b = delta_threshold(0.25, 1.0)
    mu = mu_of(b, 0.25, 1.0)
    for delta in (0.0, 0.3, b - 1e-3):
        c0, c1, c2 = constants_c(delta, 0.25, 1.0, mu, 1.0)
        assert c0 < 0 and c1 > 0
        # with kappa = 1 the RIP gap term, and with it c2, vanishes only at delta = 0
        assert (c2 > 0) == (delta > 0) and c2 >= 0
    # delta = 0, kappa = 1 collapses c0 to (1/2 - mu)^2 - 1/4
    assert c0_of(0.0, 0.25, 1.0, mu) == pytest.approx((0.5 - mu) ** 2 - 0.25)


def test_report_and_error_bounds():
    rep = theory_report(1.0, 1.0, 1.0, k=2, mode=Mode.NOISY, delta=0.3)
    assert rep.feasible and rep.has_constants
    assert rep.rip_order == 4 and rep.rip_order_ceil == 4
    zero = error_bounds(rep, 0.0, 2, 1.0, 0.0, 1.0)
    assert zero.lq_bound == 0.0 and zero.l2_bound == 0.0
    a = error_bounds(rep, 0.1, 2, 1.0, 0.0, 1.0).l2_bound
    b = error_bounds(rep, 0.2, 2, 1.0, 0.0, 1.0).l2_bound
    assert b == pytest.approx(2 * a)
    assert a == pytest.approx(2 * rep.c1 * 0.1)
    with pytest.raises(ConditionViolated):
        error_bounds(theory_report(1.0, 1.0, 1.0, delta=0.9), 0.1, 1, 1.0, 0.0, 1.0)


def test_rip_order_ceiling():
    rep = theory_report(0.5, 2.0, 1.0, k=3)
    assert rep.rip_order == pytest.approx((math.sqrt(2) + 1) * 3)
    assert rep.rip_order_ceil == math.ceil(math.sqrt(2) * 3) + 3


def test_infeasible_report():
    rep = theory_report(1.0, 1.0, kappa=3.0)
    assert not rep.feasible and math.isnan(rep.mu)


def test_best_k_term_error():
    assert best_k_term_error([3.0, -1.0, 0.5, 2.0], 2, 1.0) == pytest.approx(1.5)
    assert best_k_term_error([1.0, 0.0], 1, 0.5) == 0.0


def test_gaussian_noise_bound():
    assert float(gaussian_noise_bound(1, 2.0)) == pytest.approx(2.0)
    assert gaussian_noise_bound(50, 0.0).bound == 0.0
    nb = gaussian_noise_bound(100, 0.01)
    assert nb.bound == pytest.approx(0.01 * math.sqrt(100 + 2 * math.sqrt(100 * math.log(100))))
    assert nb.bound == pytest.approx(0.1196, abs=1e-4)
    assert nb.probability == pytest.approx(0.99)


def test_gaussian_noise_bound_holds_empirically():
    rng = np.random.default_rng(0)
    m, s = 200, 0.3
    hits = np.mean([np.linalg.norm(s * rng.standard_normal(m)) <= gaussian_noise_bound(m, s).bound
                    for _ in range(2000)])
    assert hits >= 1 - 1 / m - 0.01


def test_sample_bounds():
    assert sample_constant(1.0) == pytest.approx(1 / (2 * math.log(5)))
    v1 = sample_lower_bound(0.5, 3, 100, 2.0)
    c2 = 1 / (2 * math.log(8 * 2.0**0.5 + 7))
    assert v1 == pytest.approx(c2 * 0.5 * 3 * math.log(100 / 12))
    with pytest.raises(UndefinedRegime):
        sample_lower_bound(0.5, 3, 12, 2.0)


def test_cosparse_sample_floor_examples():
    assert cosparse_sample_floor(make_identity(5), 2) == 6
    assert cosparse_sample_floor(make_fd_1d(4), 2) == 4
    assert cosparse_sample_floor(make_random_parseval_frame(6, 4, 0), 3) == 2
    with pytest.raises(TooLarge):
        cosparse_sample_floor(make_random_parseval_frame(40, 30, 0), 20)


def test_cosparse_floor_non_increasing_in_l():
    op = AnalysisOperator.from_matrix(np.vstack([np.eye(4), np.eye(4)[:2]]))
    floors = [cosparse_sample_floor(op, l) for l in range(1, 7)]
    assert all(a >= b for a, b in zip(floors, floors[1:]))
    # a repeated row does not shrink the null space
    assert floors[1] == 2 * 3


def test_sq_from_s1():
    for s1 in range(1, 31):
        assert sq_from_s1(4.0, 2 / 3, s1) == (5 * s1) // 3
        assert sq_from_s1(3.0, 1.0, s1) == s1
        assert sq_from_s1(1.0, 0.3, s1) == s1


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 100.0), st.floats(0.05, 1.0), st.integers(1, 500))
def test_sq_at_least_s1(t, q, s1):
    assert sq_from_s1(t, q, s1) >= s1


def test_coirlq_guarantee():
    assert coirlq_guarantee(0.0, 1e-4, 0.0, 2.0) == pytest.approx(2.0)
    assert coirlq_guarantee(0.75, 1e-4, 0.3, 0.0) == pytest.approx(0.6)
    with pytest.raises(ConditionViolated):
        coirlq_guarantee(1.0, 1e-4, 0.1, 1.0)
