import numpy as np
import pytest

from tikhonov_nesterov import (
    PolyScheduleParams,
    SolverConfig,
    generic_schedule,
    paper_quadratic,
    polynomial_schedule,
    run,
    shifted_quadratic,
    tikhonov_point,
)
from tikhonov_nesterov import diagnostics as diag
from tikhonov_nesterov.problems import Objective
from tikhonov_nesterov.schedules import PreconditionError

from conftest import benchmark_problems


def poly(a=1.0, q=0.8, c=1.0, p=1.5, s=0.1, L=None):
    return polynomial_schedule(PolyScheduleParams(a, q, c, p), s, L)


def half_square():
    return Objective(1, lambda x: 0.5 * np.sum(np.asarray(x) ** 2, axis=-1), lambda x: np.asarray(x, float), 1.0)


# -- proof quantities --------------------------------------------------------------

def test_p_coef_example():
    expected = (1 - 0.1 * 2**-1.5) ** 2 * 2**1.6 / 0.2 - 2**0.8
    assert diag.p_coef(poly(), 2) == pytest.approx(expected, rel=1e-14)
    assert diag.p_coef(poly(), 2) == pytest.approx(12.363, abs=5e-4)


def boundary_schedule(s=0.1):
    # q_k on the boundary 2s / (1 - s eps_k)^2 of the second (Q) part
    eps = lambda k: 1.0 / np.asarray(k, float)  # noqa: E731
    return generic_schedule(s, eps, lambda k: 2 * s / (1 - s * eps(k)) ** 2)


def test_p_coef_vanishes_on_boundary():
    sched = boundary_schedule()
    assert np.allclose(diag.p_coef(sched, np.arange(1, 50)), 0.0, atol=1e-15)


def test_p_coef_precondition():
    sched = poly(c=1000, s=0.1, L=4)
    with pytest.raises(PreconditionError):
        diag.p_coef(sched, sched.k1 - 1)


def test_eta_with_equal_points():
    sched = poly(a=2.0)
    s, k = sched.s, 7
    x = np.array([0.3, -1.2])
    expected = x / ((1 - s / sched.q(k - 1)) * (1 - s * sched.eps(k)))
    assert np.allclose(diag.eta(sched, k, x, x), expected, rtol=1e-14)


def test_eta_with_zero_p():
    # boundary q rule gives p_k = 0, and q_{k-1} > s keeps the weight valid
    sched = boundary_schedule(0.05)
    k = 5
    x, y = np.array([1.0, 2.0]), np.array([-0.5, 0.25])
    denom = (1 - sched.s / sched.q(k - 1)) * (1 - sched.s * sched.eps(k))
    assert np.allclose(diag.eta(sched, k, x, y), y / denom, rtol=1e-12)


def test_eta_degenerate_weight():
    sched = poly(a=0.05, s=0.1)
    with pytest.raises(diag.DegenerateWeightError):
        diag.eta(sched, 2, np.zeros(2), np.zeros(2))
    with pytest.raises(diag.DegenerateWeightError):
        diag.eta(poly(), 1, np.zeros(2), np.zeros(2))


def test_energy_vanishes_at_optimum():
    obj = shifted_quadratic([2.0, 0.0])
    sched = poly()
    k = 10
    xbar = tikhonov_point(obj, sched.eps(k + 1)).point
    assert diag.energy(sched, obj, k, xbar, obj.oracle.x_star, obj.oracle.x_star) == pytest.approx(0, abs=1e-15)


def test_energy_on_constant_path_problem():
    obj = paper_quadratic(1, 5)
    sched = poly()
    k = 9
    x_next, eta_next = np.array([0.3, 0.2]), np.array([-1.0, 0.5])
    e = sched.eps(k + 1)
    expected = ((diag.p_coef(sched, k) + sched.q(k)) * obj.regularized_value(x_next, e) + eta_next @ eta_next)
    assert diag.energy(sched, obj, k, x_next, eta_next, np.zeros(2)) == pytest.approx(expected, rel=1e-14)


# -- lemma samplers ----------------------------------------------------------------

def test_lemmas_hold_on_benchmarks():
    for obj in benchmark_problems():
        rep = diag.check_lemmas(obj)
        assert rep.passed, rep.max_violation
        md = diag.check_modified_descent(obj, 1.0 / obj.lipschitz)
        assert md.passed, md.max_violation
        assert md.extra["chain_gap"] >= -1e-12


def test_modified_descent_equality_case():
    # f = x^2/2, L = s = 1, y = 1, x = 0: both sides of the inequality are 0
    f = lambda v: 0.5 * v * v  # noqa: E731
    s, x, y = 1.0, 0.0, 1.0
    g = lambda v: v  # noqa: E731
    rhs = f(x) + g(y) * (y - x) - 0.5 * s * g(y) ** 2 - 0.5 * s * (g(y) - g(x)) ** 2
    assert f(y - s * g(y)) == rhs == 0.0
    assert diag.check_modified_descent(half_square(), 1.0).passed


def test_modified_descent_precondition():
    with pytest.raises(PreconditionError):
        diag.check_modified_descent(paper_quadratic(1, 5), 0.1)


def test_lemma_detects_wrong_lipschitz():
    obj = paper_quadratic(1, 5)
    lying = Objective(2, obj.value, obj.gradient, obj.lipschitz / 4, obj.oracle)
    assert not diag.check_lemmas(lying).passed


# -- regularization path -------------------------------------------------------------

def test_path_bounds_shifted_example():
    obj = shifted_quadratic([2.0, 0.0])
    rep = diag.check_path_bounds(obj, [1.0, 0.5])
    move = np.linalg.norm(rep.points[1] - rep.points[0])
    assert move == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert rep.passed
    assert rep.step_violation == pytest.approx(1 / 3 - 2 / 3, rel=1e-12)


def test_path_bounds_constant_path():
    rep = diag.check_path_bounds(paper_quadratic(1, 5), np.geomspace(1, 1e-6, 50))
    assert rep.passed
    assert np.allclose(rep.points, 0.0)


def test_path_bounds_single_eps_is_vacuous():
    rep = diag.check_path_bounds(shifted_quadratic([2.0, 0.0]), [0.3])
    assert rep.passed


def test_path_bounds_on_benchmarks():
    for obj in benchmark_problems():
        assert diag.check_path_bounds(obj, np.geomspace(10, 1e-6, 50)).passed


@pytest.mark.parametrize("eps", [[], [1.0, 1.0], [0.5, 1.0], [1.0, -1.0]])
def test_path_bounds_rejects_bad_grid(eps):
    with pytest.raises(ValueError):
        diag.check_path_bounds(shifted_quadratic([1.0]), eps)


# -- trace diagnostics -----------------------------------------------------------------

@pytest.fixture(scope="module")
def q_holding_run():
    """Full run on a schedule where (Q) holds from a small index."""
    obj = shifted_quadratic([2.0, -1.0])
    sched = poly(a=0.04, s=0.1, L=1.0).with_k2(20000)
    cfg = SolverConfig(obj, sched, np.zeros(2), np.array([1.0, 1.0]), 20000, record_every=1)
    return run(cfg), sched, obj


def test_trace_inequalities_hold(q_holding_run):
    tr, sched, obj = q_holding_run
    rep = diag.check_trace_inequalities(tr, sched, obj)
    assert rep.checked > 1000
    assert rep.passed, rep


def test_lyapunov_quantities(q_holding_run):
    tr, sched, obj = q_holding_run
    rep = diag.lyapunov(tr, sched, obj, energy_at=(100, 10**4))
    assert rep.eta_residual_max <= 1e-10
    assert rep.q_holds_count > 0 and rep.p_min_where_q >= -1e-12
    assert all(smp.energy >= -1e-10 for smp in rep.samples)
    ratios = rep.energy_ratio(sched)
    assert 100 in ratios and 10**4 in ratios


def test_rate_report_constant_optimum():
    obj = paper_quadratic(1, 5)
    sched = poly(s=0.9 / 52, L=52)
    tr = run(SolverConfig(obj, sched, np.zeros(2), np.zeros(2), 500))
    rep = diag.rate_report(tr, sched, obj)
    assert rep.passed
    assert rep.sup_f_over_eps == 0.0
    assert rep.vel_ratio_trend == (0.0, 0.0)
    assert rep.dist_xstar_final == 0.0


def test_rate_report_ratios_nonnegative(q_holding_run):
    tr, sched, obj = q_holding_run
    rep = diag.rate_report(tr, sched, obj)
    for trend in (rep.vel_ratio_trend, rep.gradx_ratio_trend, rep.grady_ratio_trend,
                  rep.f_ratio_trend, rep.gap_over_eps_trend):
        assert min(trend) >= 0
    assert set(rep.raw_trends) == {"fx", "fy", "vel", "gx", "gy"}
    assert len(rep.lines()) == 9


def test_rate_report_min_norm_separates_baseline():
    obj = paper_quadratic(1, 5)
    sched = poly(s=0.9 / 52, L=52)
    x0, x1 = np.array([1.0, -1.0]), np.array([-1.0, 1.0])
    base = run(SolverConfig(obj, sched, x0, x1, 2000, "drop_both"))
    rep = diag.rate_report(base, sched, obj)
    assert not rep.verdicts["min_norm"]
    assert not diag.min_norm_verdict(base, obj)


def test_rate_report_needs_enough_records():
    obj = paper_quadratic(1, 5)
    sched = poly(s=0.01)
    tr = run(SolverConfig(obj, sched, np.zeros(2), np.ones(2), 50))
    with pytest.raises(diag.InsufficientDataError):
        diag.rate_report(tr, sched, obj)


def test_noise_floor_only_removes_rounding_level_values():
    obj = paper_quadratic(1, 5)
    sched = poly(s=0.9 / 52, L=52)
    tr = run(SolverConfig(obj, sched, np.array([1.0, -1.0]), np.array([-1.0, 1.0]), 10**4))
    floored = diag.rate_report(tr, sched, obj)
    raw = diag.rate_report(tr, sched, obj, noise_floor=False)
    # f along the trace sits at rounding level, so flooring zeroes it
    assert raw.f_ratio_trend[1] < 1e-20
    assert floored.f_ratio_trend == (0.0, 0.0)
    # velocity is far above rounding level and unaffected
    assert floored.vel_ratio_trend == raw.vel_ratio_trend


def test_coefficient_tail():
    tail = diag.coefficient_tail(poly(a=0.04).with_k2(10**5), 10**6)
    assert 0 <= tail["b_min"] and tail["b_max"] < 1
    assert tail["c_positive_onset"] is not None
    assert tail["c_ratio_last_max"] < 0.01 * tail["c_ratio_first_max"]
