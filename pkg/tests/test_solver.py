import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tikhonov_nesterov import (
    DivergenceError,
    PolyScheduleParams,
    SolverConfig,
    b_coef,
    c_coef,
    generic_schedule,
    paper_quadratic,
    polynomial_schedule,
    run,
    run_matrix,
    shifted_quadratic,
    step,
    step_equivalent,
)
from tikhonov_nesterov.problems import Objective
from tikhonov_nesterov.solver import VARIANTS, coefficients, default_record_every

from conftest import benchmark_problems

START = (np.array([1.0, -1.0]), np.array([-1.0, 1.0]))


def half_square():
    return Objective(1, lambda x: 0.5 * np.sum(np.asarray(x) ** 2, axis=-1), lambda x: np.asarray(x, float), 1.0)


def constant_schedule(s, eps):
    """Schedule with constant eps; tests patch the coefficients directly."""
    return generic_schedule(s, lambda k: eps + 0.0 * np.asarray(k, float), lambda k: np.asarray(k, float))


def fig_config(variant="full", iters=100, a=1.0, b=5.0, p=1.5, record_every=None, s=None):
    obj = paper_quadratic(a, b)
    s = 0.9 / obj.lipschitz if s is None else s
    sched = polynomial_schedule(PolyScheduleParams(1.0, 0.8, 1.0, p), s, obj.lipschitz)
    return SolverConfig(obj, sched, *START, iters, variant, record_every)


def test_step_examples(monkeypatch):
    import tikhonov_nesterov.solver as solver

    cfg = SolverConfig(half_square(), constant_schedule(0.1, 0.3), [1.0], [1.0], 5)
    monkeypatch.setattr(solver, "coefficients", lambda cfg, k: (0.3, 0.0, 0.0))
    y, xn = solver.step(np.array([1.0]), np.array([1.0]), 3, cfg)
    assert y[0] == 1.0 and xn[0] == pytest.approx(0.87, abs=1e-15)
    y, xn = solver.step_equivalent(np.array([1.0]), np.array([1.0]), 3, cfg)
    assert xn[0] == pytest.approx(0.87, abs=1e-15)

    monkeypatch.setattr(solver, "coefficients", lambda cfg, k: (0.0, 0.5, 0.1))
    y, _ = solver.step(np.array([1.0]), np.array([2.0]), 3, cfg)
    assert y[0] == pytest.approx(2.3, abs=1e-15)


def test_drop_both_fixed_point_on_argmin():
    cfg = fig_config("drop_both")
    x = np.array([5.0, -1.0])
    for k in (1, 2, 50):
        y, xn = step(x, x, k, cfg)
        assert np.array_equal(y, x) and np.array_equal(xn, x)


def test_first_step_special_case():
    cfg = fig_config(iters=1)
    tr = run(cfg)
    assert len(tr) == 1 and tr.k[0] == 1
    assert np.array_equal(tr.y[0], cfg.x1)
    eps1 = cfg.schedule.eps(1)
    expected = (1 - cfg.s * eps1) * cfg.x1 - cfg.s * cfg.objective.gradient(cfg.x1)
    assert np.allclose(tr.x_last, expected, rtol=0, atol=1e-15)


def test_variant_coefficients():
    ks = np.arange(1, 50)
    full = fig_config("full")
    eps, b, c = coefficients(full, ks)
    assert np.array_equal(b, b_coef(full.schedule, ks)) and np.array_equal(c, c_coef(full.schedule, ks))
    for variant in ("drop_eps", "drop_both"):
        eps, _, _ = coefficients(fig_config(variant), ks)
        assert np.all(eps == 0)
    for variant in ("drop_c", "drop_both"):
        _, _, c = coefficients(fig_config(variant), ks)
        assert np.all(c == 0)
    eps, b, c = coefficients(fig_config("drop_eps"), ks)
    s = full.s
    assert np.allclose(c[1:], 2 * s**2 / ((ks[1:] - 1) ** 0.8 * ks[1:] ** 0.8), rtol=1e-14)


def test_drop_both_is_classical_update():
    cfg = fig_config("drop_both")
    rng = np.random.default_rng(0)
    for k in range(2, 30):
        xp, xc = rng.normal(size=(2, 2))
        y, xn = step(xp, xc, k, cfg)
        b = b_coef(cfg.schedule, k)
        # drop_both uses the eps-free b
        _, b_used, _ = coefficients(cfg, k)
        assert np.array_equal(y, xc + b_used * (xc - xp))
        assert np.array_equal(xn, y - cfg.s * cfg.objective.gradient(y))
        assert np.isfinite(b)


@pytest.mark.parametrize("variant", VARIANTS)
def test_formulation_equivalence(variant):
    rng = np.random.default_rng(11)
    for obj in benchmark_problems():
        n = obj.dimension
        sched = polynomial_schedule(PolyScheduleParams(1.0, 0.8, 1.0, 1.5), 0.9 / obj.lipschitz, obj.lipschitz)
        cfg = SolverConfig(obj, sched, np.zeros(n), np.zeros(n), 10, variant)
        for _ in range(200):
            xp, xc = rng.uniform(-10, 10, (2, n))
            k = int(rng.integers(1, 10**6))
            y1, x1 = step(xp, xc, k, cfg)
            y2, x2 = step_equivalent(xp, xc, k, cfg)
            assert np.allclose(y1, y2, rtol=0, atol=1e-12)
            assert np.allclose(x1, x2, rtol=0, atol=1e-12)


def test_step_equivalent_with_zero_eps_is_gradient_step():
    cfg = fig_config("drop_eps")
    xp, xc = np.array([0.3, 0.1]), np.array([0.2, -0.4])
    y, xn = step_equivalent(xp, xc, 5, cfg)
    assert np.array_equal(xn, y - cfg.s * cfg.objective.gradient(y))


def test_run_records_and_velocity_consistency():
    tr = run(fig_config(iters=500))
    assert len(tr) == 500
    assert tr.k[0] == 1 and np.all(np.diff(tr.k) > 0)
    vel = np.linalg.norm(np.diff(tr.x, axis=0), axis=1)
    assert np.allclose(tr.columns["velocity"][1:], vel, rtol=1e-15, atol=0)
    rec = tr[10]
    assert rec.k == 11 and rec.f_x == tr.columns["f_x"][10]
    assert len(tr.records) == 500


def test_run_stride_keeps_first_and_last():
    assert default_record_every(999) == 1
    assert default_record_every(10**5) == 10
    tr = run(fig_config(iters=12345))
    assert tr.k[0] == 1 and tr.k[-1] == 12345
    assert np.all(np.diff(tr.k)[:-1] == 2)
    tr = run(fig_config(iters=100, record_every=7))
    assert tr.k[0] == 1 and tr.k[-1] == 100 and tr.k[1] == 8


def test_run_is_deterministic():
    a = run(fig_config(iters=2000))
    b = run(fig_config(iters=2000))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    for name in a.columns:
        assert np.array_equal(a.columns[name], b.columns[name], equal_nan=True)


def test_run_warnings():
    tr = run(fig_config(iters=20, a=0.1, b=100, s=0.1))
    assert any("step size exceeds 1/L" in w for w in tr.warnings)
    assert any("(Q) not yet satisfied at horizon 20" in w for w in tr.warnings)
    tr = run(fig_config(iters=10**4, p=1.7))
    assert any("q2eps_increasing" in w for w in tr.warnings)


def test_divergence_carries_partial_trace():
    with pytest.raises(DivergenceError) as info:
        run(fig_config(iters=2000, s=1.0))
    err = info.value
    assert err.k > 1 and err.trace is not None
    assert err.trace.diverged_at == err.k
    assert len(err.trace) == err.k - 1


def test_config_validation():
    obj = paper_quadratic(1, 5)
    sched = polynomial_schedule(PolyScheduleParams(1, 0.8, 1, 1.5), 0.01)
    with pytest.raises(ValueError):
        SolverConfig(obj, sched, [0.0], [0.0, 0.0], 10)
    with pytest.raises(ValueError):
        SolverConfig(obj, sched, [0.0, 0.0], [0.0, 0.0], 10, "nope")
    with pytest.raises(ValueError):
        SolverConfig(obj, sched, [0.0, 0.0], [0.0, 0.0], 0)
    with pytest.raises(ValueError):
        SolverConfig(obj, sched, [0.0, 0.0], [0.0, 0.0], 10, record_every=0)


def test_run_matrix_shapes():
    base = fig_config(iters=20, a=0.1, b=100)
    traces = run_matrix(base, [0.3, 0.6, 0.9, 1.2, 1.5])
    assert len(traces) == 6
    assert traces[-1].config["variant"] == "drop_both"
    assert [t.config["schedule"]["p"] for t in traces[:5]] == [0.3, 0.6, 0.9, 1.2, 1.5]
    assert len(run_matrix(base, [1.5])) == 2
    with pytest.raises(ValueError):
        run_matrix(base, [])


def test_run_matrix_continues_past_divergence():
    traces = run_matrix(fig_config(iters=300, s=1.0), [0.5, 1.5])
    assert len(traces) == 3
    assert all(t.diverged_at is not None for t in traces)


def test_full_variant_value_eventually_below_start():
    for obj in benchmark_problems():
        n = obj.dimension
        sched = polynomial_schedule(PolyScheduleParams(1, 0.8, 1, 1.5), 0.9 / obj.lipschitz, obj.lipschitz)
        x1 = np.linspace(-1, 1, n) + 0.5
        tr = run(SolverConfig(obj, sched, np.zeros(n), x1, 10**4))
        gap = tr.columns["f_x"] - obj.oracle.min_value
        assert np.all(gap[len(gap) // 2:] < gap[0])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2), st.integers(1, 10**6))
def test_shifted_step_equivalence_property(x, k):
    obj = shifted_quadratic([2.0, 0.0])
    sched = polynomial_schedule(PolyScheduleParams(0.5, 0.5, 2.0, 0.7), 0.5, 1.0)
    cfg = SolverConfig(obj, sched, np.zeros(2), np.zeros(2), 5)
    xc = np.array(x)
    xp = xc[::-1] * 0.5
    y1, n1 = step(xp, xc, k, cfg)
    y2, n2 = step_equivalent(xp, xc, k, cfg)
    assert np.allclose(n1, n2, rtol=0, atol=1e-12)


def null_component_oracle(n_iter, s, a=1.0, q=0.8, c=1.0, p=1.5):
    """Null-direction coordinate of the full iteration, in plain Python.

    Along a direction with (a, b) . v = 0 the gradient term vanishes, so the
    coordinate follows z_{k+1} = (1 - s eps_k)(z_k + b_{k-1}(z_k - z_{k-1}) - c_k z_k).
    """
    eps = lambda k: c * k**-p  # noqa: E731
    qq = lambda k: a * k**q  # noqa: E731
    v = np.array([5.0, -1.0]) / np.sqrt(26.0)
    z_prev, z = float(START[0] @ v), float(START[1] @ v)
    out = {1: z}
    for k in range(1, n_iter + 1):
        if k == 1:
            bk = ck = 0.0
        else:
            e0, e1, q0, q1 = eps(k - 1), eps(k), qq(k - 1), qq(k)
            bk = (q0 - s) * ((1 - s * e0) ** 2 * q0 - 2 * s) / ((1 - s * e0) * (1 - s * e1) * q0 * q1)
            ck = 2 * s / ((1 - s * e0) * (1 - s * e1) ** 2 * q1) * (s / q0 - s * s * e1 / q0 - s * (e0 - e1))
        y = z + bk * (z - z_prev) - ck * z
        z_prev, z = z, (1 - s * eps(k)) * y
        out[k + 1] = z
    return out


def test_null_component_matches_scalar_oracle():
    n = 10**5
    cfg = fig_config(iters=n, record_every=1)
    tr = run(cfg)
    ref = null_component_oracle(n, cfg.s)
    v = np.array([5.0, -1.0]) / np.sqrt(26.0)
    for k in (2, 10, 1000, 50000, n):
        i = int(np.flatnonzero(tr.k == k)[0])
        assert tr.x[i] @ v == pytest.approx(ref[k], rel=1e-9, abs=1e-12)
    # the distance to x* = 0 at the horizon is the null component
    assert np.linalg.norm(tr.x[-1]) == pytest.approx(abs(ref[n]), rel=1e-6)
