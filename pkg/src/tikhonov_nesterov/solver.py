"""The inertial gradient iteration with two Tikhonov terms.

    y_k     = x_k + b_{k-1} (x_k - x_{k-1}) - c_k x_k
    x_{k+1} = (1 - s eps_k) y_k - s grad f(y_k)

Variants switch off the eps_k y_k term (``drop_eps``), the c_k x_k term
(``drop_c``) or both (``drop_both``).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

import numpy as np

from .problems import Objective
from .schedules import (
    PolyScheduleParams,
    Schedule,
    b_coef,
    b_coef_no_eps,
    c_coef,
    c_coef_no_eps,
    check_growth_hypotheses,
    find_k2,
    polynomial_schedule,
)

VARIANTS = ("full", "drop_eps", "drop_c", "drop_both")


class DivergenceError(RuntimeError):
    def __init__(self, k: int, trace: Optional["Trace"] = None):
        super().__init__(f"non-finite iterate at k={k}")
        self.k = k
        self.trace = trace


def default_record_every(max_iter: int) -> int:
    if max_iter < 1000:
        return 1
    return math.ceil(max_iter / 10**4)


@dataclass(frozen=True)
class SolverConfig:
    objective: Objective
    schedule: Schedule
    x0: np.ndarray
    x1: np.ndarray
    max_iter: int
    variant: str = "full"
    record_every: Optional[int] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        for name in ("x0", "x1"):
            v = np.asarray(getattr(self, name), dtype=float).ravel()
            if v.size != self.objective.dimension:
                raise ValueError(f"{name} has dimension {v.size}, objective has {self.objective.dimension}")
            object.__setattr__(self, name, v)
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.record_every is not None and self.record_every < 1:
            raise ValueError("record_every must be positive")

    @property
    def s(self) -> float:
        return self.schedule.s

    @property
    def stride(self) -> int:
        return self.record_every or default_record_every(self.max_iter)

    def summary(self) -> dict:
        sched = self.schedule
        out = {
            "problem": self.objective.name,
            "problem_params": self.objective.params,
            "lipschitz": self.objective.lipschitz,
            "s": sched.s,
            "variant": self.variant,
            "max_iter": self.max_iter,
            "record_every": self.stride,
            "x0": self.x0.tolist(),
            "x1": self.x1.tolist(),
        }
        if sched.params is not None:
            p = sched.params
            out["schedule"] = {"a": p.a, "q": p.q_exp, "c": p.c, "p": p.p_exp}
        return out


def coefficients(cfg: SolverConfig, k):
    """(eps_k, b_{k-1}, c_k) as the chosen variant uses them; k scalar or array."""
    sched, variant = cfg.schedule, cfg.variant
    k_arr = np.asarray(k)
    if variant in ("drop_eps", "drop_both"):
        eps = np.zeros(k_arr.shape)
        b = b_coef_no_eps(sched, k)
    else:
        eps = np.asarray(sched.eps(k_arr), dtype=float)
        b = b_coef(sched, k)
    if variant == "full":
        c = c_coef(sched, k)
    elif variant == "drop_eps":
        c = c_coef_no_eps(sched, k)
    else:
        c = np.zeros(k_arr.shape)
    if k_arr.ndim == 0:
        return float(eps), float(b), float(c)
    return eps, np.asarray(b, dtype=float), np.asarray(c, dtype=float)


def step(x_prev, x_curr, k: int, cfg: SolverConfig):
    """One iteration; returns (y_k, x_{k+1})."""
    eps, b, c = coefficients(cfg, k)
    return _step(np.asarray(x_prev, dtype=float), np.asarray(x_curr, dtype=float),
                 k, cfg.s, eps, b, c, cfg.objective.gradient)


def _step(x_prev, x_curr, k, s, eps, b, c, grad):
    y = x_curr + b * (x_curr - x_prev) - c * x_curr
    x_next = (1.0 - s * eps) * y - s * grad(y)
    if not (np.isfinite(y).all() and np.isfinite(x_next).all()):
        raise DivergenceError(k)
    return y, x_next


def step_equivalent(x_prev, x_curr, k: int, cfg: SolverConfig):
    """Same iteration written as a gradient step on f + (eps_k/2)||.||^2."""
    eps, b, c = coefficients(cfg, k)
    x_prev = np.asarray(x_prev, dtype=float)
    x_curr = np.asarray(x_curr, dtype=float)
    y = x_curr + b * (x_curr - x_prev) - c * x_curr
    x_next = y - cfg.s * cfg.objective.regularized_gradient(y, eps)
    if not (np.isfinite(y).all() and np.isfinite(x_next).all()):
        raise DivergenceError(k)
    return y, x_next


@dataclass(frozen=True)
class IterateRecord:
    k: int
    x: np.ndarray
    y: np.ndarray
    f_x: float
    f_y: float
    grad_norm_x: float
    grad_norm_y: float
    velocity: float
    dist_xstar: float
    eps_k: float
    b_k: float
    c_k: float


COLUMNS = ("k", "f_x", "f_y", "grad_norm_x", "grad_norm_y", "velocity",
           "dist_xstar", "eps_k", "b_k", "c_k")


@dataclass
class Trace:
    """Columnar store of the recorded iterates.

    ``x[i]`` and ``y[i]`` belong to index ``k[i]``; the scalar columns follow
    the CSV layout.  Iterating yields ``IterateRecord`` objects.
    """
    config: dict
    k: np.ndarray
    x: np.ndarray
    y: np.ndarray
    columns: dict
    wall_time: float = 0.0
    warnings: list = field(default_factory=list)
    diverged_at: Optional[int] = None
    x_last: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.k.size)

    def __getitem__(self, i) -> IterateRecord:
        return IterateRecord(
            k=int(self.k[i]), x=self.x[i], y=self.y[i],
            **{name: float(self.columns[name][i]) for name in COLUMNS if name != "k"},
        )

    def __iter__(self) -> Iterator[IterateRecord]:
        return (self[i] for i in range(len(self)))

    @property
    def records(self) -> list:
        return list(self)

    def column(self, name: str) -> np.ndarray:
        if name == "k":
            return self.k
        return self.columns[name]

    @property
    def final_x(self) -> np.ndarray:
        return self.x[-1]


def _build_trace(cfg, ks, X, Y, vel, eps, b, c, wall, warnings, diverged_at=None, x_last=None):
    obj = cfg.objective
    cols = {
        "f_x": np.asarray(obj.value(X), dtype=float).reshape(-1),
        "f_y": np.asarray(obj.value(Y), dtype=float).reshape(-1),
        "grad_norm_x": np.linalg.norm(obj.gradient(X), axis=-1).reshape(-1),
        "grad_norm_y": np.linalg.norm(obj.gradient(Y), axis=-1).reshape(-1),
        "velocity": vel,
        "dist_xstar": (np.linalg.norm(X - obj.oracle.x_star, axis=-1) if obj.oracle is not None
                       else np.full(len(ks), np.nan)),
        "eps_k": eps,
        "b_k": b,
        "c_k": c,
    }
    return Trace(config=cfg.summary(), k=ks, x=X, y=Y, columns=cols, wall_time=wall,
                 warnings=list(warnings), diverged_at=diverged_at, x_last=x_last)


def schedule_warnings(cfg: SolverConfig) -> list:
    """Static warnings for a configuration: step size, (Q) and hypotheses."""
    sched = cfg.schedule
    out = []
    L = cfg.objective.lipschitz
    if cfg.s * L >= 1:
        out.append(f"step size exceeds 1/L (s*L = {cfg.s * L:.6g})")
    out.extend(w for w in sched.warnings if not w.startswith("step size exceeds"))
    if cfg.variant != "full":
        return out
    try:
        k2 = find_k2(sched, max(cfg.max_iter, sched.k1))
    except ValueError:
        k2 = None
    if k2 is None:
        out.append(f"(Q) not yet satisfied at horizon {cfg.max_iter}")
    if cfg.max_iter >= max(sched.generic_start, 2) + 1:
        hyp = check_growth_hypotheses(sched, cfg.max_iter)
        if not hyp.passed:
            out.append("hypothesis check failed: " + ", ".join(hyp.failed()))
    return out


def run(cfg: SolverConfig) -> Trace:
    """Iterate k = 1..max_iter from (x0, x1) and record every ``stride`` steps.

    The first and last iterates are always recorded.  Raises DivergenceError
    (with the partial trace attached) on a non-finite value.
    """
    warnings = schedule_warnings(cfg)
    # overflow is reported through DivergenceError, not numpy's warnings
    with np.errstate(over="ignore", invalid="ignore"):
        return _run(cfg, warnings)


def _run(cfg: SolverConfig, warnings: list) -> Trace:
    n, N = cfg.objective.dimension, cfg.max_iter
    ks_all = np.arange(1, N + 1)
    eps, b, c = coefficients(cfg, ks_all)
    stride = cfg.stride
    rec = np.zeros(N, dtype=bool)
    rec[::stride] = True
    rec[-1] = True
    m = int(rec.sum())
    X = np.empty((m, n))
    Y = np.empty((m, n))
    vel = np.empty(m)
    grad = cfg.objective.gradient
    s = cfg.s
    x_prev, x = cfg.x0.copy(), cfg.x1.copy()
    j = 0
    t0 = time.perf_counter()
    for i in range(N):
        try:
            y, x_next = _step(x_prev, x, i + 1, s, eps[i], b[i], c[i], grad)
        except DivergenceError:
            idx = np.flatnonzero(rec[:i])
            trace = _build_trace(cfg, ks_all[idx], X[:j], Y[:j], vel[:j], eps[idx], b[idx], c[idx],
                                 time.perf_counter() - t0,
                                 warnings + [f"diverged at k={i + 1}"], diverged_at=i + 1)
            raise DivergenceError(i + 1, trace) from None
        if rec[i]:
            X[j] = x
            Y[j] = y
            vel[j] = np.linalg.norm(x - x_prev)
            j += 1
        x_prev, x = x, x_next
    wall = time.perf_counter() - t0
    idx = np.flatnonzero(rec)
    return _build_trace(cfg, ks_all[idx], X, Y, vel, eps[idx], b[idx], c[idx], wall, warnings,
                        x_last=x)


def with_poly_p(cfg: SolverConfig, p_exp: float) -> SolverConfig:
    params = cfg.schedule.params
    if params is None:
        raise ValueError("run_matrix needs a polynomial schedule")
    new = PolyScheduleParams(params.a, params.q_exp, params.c, p_exp)
    sched = polynomial_schedule(new, cfg.schedule.s, cfg.schedule.lipschitz)
    return replace(cfg, schedule=sched)


def run_matrix(base: SolverConfig, p_values) -> list:
    """One full-variant trace per p, then the drop_both baseline.

    A diverging member contributes its partial trace and the matrix goes on.
    """
    p_values = list(p_values)
    if not p_values:
        raise ValueError("run_matrix needs at least one p value")
    configs = [replace(with_poly_p(base, p), variant="full") for p in p_values]
    configs.append(replace(base, variant="drop_both"))
    traces = []
    for cfg in configs:
        try:
            traces.append(run(cfg))
        except DivergenceError as exc:
            traces.append(exc.trace)
    return traces
