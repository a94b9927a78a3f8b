"""Inequality checkers, Lyapunov quantities and rate verdicts for traces.

Checkers report the worst slack they saw instead of a bare boolean, so a
tolerance can be judged against the data.  Asymptotic o(.) / O(.) claims are
read off decade trends of the relevant ratio:

* O(.) passes when the tail sup is finite and the last-decade max does not
  exceed the first-decade max;
* o(.) passes when the last-decade max is at most half the first-decade max.

Quantities below floating-point resolution at the iterate (a few ulps of
||x_k||, pushed through f, grad f or the regularized gap) are counted as
zero before the ratios are formed; the unfloored trends are kept alongside.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problems import Objective, tikhonov_point
from .schedules import PreconditionError, Schedule, b_coef, c_coef, q_terms
from .solver import Trace

LEMMA_TOL = 1e-9
NOISE_ULPS = 16.0
MIN_RECORDS = 100
MAX_ORACLE_SAMPLES = 200
DEFAULT_DIST_TOL = 0.05


class DegenerateWeightError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


# -- proof quantities ---------------------------------------------------------

def p_coef(sched: Schedule, k):
    if np.any(np.asarray(k) < sched.k1):
        raise PreconditionError(f"p_k needs k >= k1 = {sched.k1}")
    s = sched.s
    q = sched.q(k)
    return (1 - s * sched.eps(k)) ** 2 * q**2 / (2 * s) - q


def _eta_parts(sched: Schedule, k):
    s = sched.s
    k = np.asarray(k)
    if np.any(k < 2):
        raise DegenerateWeightError("eta_k needs k >= 2")
    q_prev = sched.q(k - 1)
    if np.any(q_prev <= s):
        raise DegenerateWeightError(f"eta_k needs q_(k-1) > s (k={k})")
    e = sched.eps(k)
    q = sched.q(k)
    p = p_coef(sched, k)
    denom = (1 - s / q_prev) * (1 - s * e) * q
    return p, q, denom


def eta(sched: Schedule, k, x_k, y_k) -> np.ndarray:
    """((p_k + q_k) y_k - p_k x_k) / ((1 - s/q_{k-1})(1 - s eps_k) q_k).

    Evaluated as (p_k (y_k - x_k) + q_k y_k) / denom, which avoids the
    cancellation between the two large terms.  Accepts a single index with
    vectors, or an index array with row-stacked vectors.
    """
    p, q, denom = _eta_parts(sched, k)
    x_k = np.asarray(x_k, dtype=float)
    y_k = np.asarray(y_k, dtype=float)
    p, q, denom = (np.asarray(v)[..., None] for v in (p, q, denom))
    out = (p * (y_k - x_k) + q * y_k) / denom
    return out


def eta_scale(sched: Schedule, k, x_k, y_k):
    """Magnitude of the terms that make up eta_k, before cancellation."""
    p, q, denom = _eta_parts(sched, k)
    ny = np.linalg.norm(y_k, axis=-1)
    nx = np.linalg.norm(x_k, axis=-1)
    return (np.abs(p + q) * ny + np.abs(p) * nx) / np.abs(denom)


def energy(sched: Schedule, obj: Objective, k: int, x_next, eta_next, x_star) -> float:
    """E_k = (p_k + q_k)(f_{k+1}(x_{k+1}) - f_{k+1}(xbar_{k+1})) + ||eta_{k+1} - x*||^2."""
    e_next = float(sched.eps(k + 1))
    xbar = tikhonov_point(obj, e_next).point
    gap = float(obj.regularized_value(x_next, e_next) - obj.regularized_value(xbar, e_next))
    p = float(p_coef(sched, k))
    q = float(sched.q(k))
    d = np.asarray(eta_next, dtype=float) - np.asarray(x_star, dtype=float)
    return (p + q) * gap + float(d @ d)


# -- sampled lemma checks -----------------------------------------------------

def _sample_pairs(obj: Objective, samples: int, radius: float, seed: int):
    rng = np.random.default_rng(seed)
    centre = obj.oracle.x_star if obj.oracle is not None else np.zeros(obj.dimension)
    shape = (samples, obj.dimension)
    x = centre + rng.uniform(-radius, radius, shape)
    y = centre + rng.uniform(-radius, radius, shape)
    return x, y


def _dot(u, v):
    return np.sum(u * v, axis=-1)


@dataclass
class LemmaReport:
    samples: int
    max_violation: dict
    tol: float = LEMMA_TOL
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.max_violation.values())


def check_lemmas(obj: Objective, samples: int = 10**4, radius: float = 10.0, seed: int = 0) -> LemmaReport:
    """Descent lemma and the co-coercivity inequality on random pairs."""
    x, y = _sample_pairs(obj, samples, radius, seed)
    L = obj.lipschitz
    fx, fy = obj.value(x), obj.value(y)
    gx, gy = obj.gradient(x), obj.gradient(y)
    d = x - y
    descent = fx - (fy + _dot(gy, d) + 0.5 * L * _dot(d, d))
    gd = gy - gx
    cocoercive = 0.5 / L * _dot(gd, gd) + _dot(gy, d) + fy - fx
    return LemmaReport(samples, {
        "descent": float(np.max(descent)),
        "cocoercive": float(np.max(cocoercive)),
    })


def check_modified_descent(obj: Objective, s: float, samples: int = 10**4, radius: float = 10.0,
                           seed: int = 0) -> LemmaReport:
    """Both forms of the modified descent inequality at y - s grad f(y).

    The (L/2 s^2 - s) form holds for any s > 0; the -(s/2) form needs
    s <= 1/L.  ``extra['chain_gap']`` is min(slack_f4 - slack_f3), which must
    not go below -1e-12.
    """
    L = obj.lipschitz
    if not 0 < s <= 1.0 / L * (1 + 1e-12):
        raise PreconditionError(f"s={s} outside (0, 1/L={1.0 / L}]")
    x, y = _sample_pairs(obj, samples, radius, seed)
    gx, gy = obj.gradient(x), obj.gradient(y)
    lhs = obj.value(y - s * gy)
    base = obj.value(x) + _dot(gy, y - x)
    gg = _dot(gy, gy)
    gd = gy - gx
    dd = _dot(gd, gd)
    rhs3 = base + (0.5 * L * s * s - s) * gg - 0.5 / L * dd
    rhs4 = base - 0.5 * s * gg - 0.5 * s * dd
    slack3, slack4 = rhs3 - lhs, rhs4 - lhs
    return LemmaReport(samples, {
        "f3": float(np.max(-slack3)),
        "f4": float(np.max(-slack4)),
    }, extra={"chain_gap": float(np.min(slack4 - slack3))})


@dataclass
class PathReport:
    eps: np.ndarray
    points: np.ndarray
    step_violation: float
    gap_violation: float
    transfer_violation: float
    norm_violation: float
    monotone_violation: float
    dist_first: float
    dist_last: float
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        worst = max(self.step_violation, self.gap_violation, self.transfer_violation,
                    self.norm_violation, self.monotone_violation)
        return worst <= self.tol and self.dist_last <= self.dist_first + self.tol


def check_path_bounds(obj: Objective, eps_list, samples: int = 200, radius: float = 10.0,
                      seed: int = 0) -> PathReport:
    """Regularization-path facts along a decreasing eps grid.

    Checks the path-step bound between neighbours, the strong-convexity gap
    and value-transfer inequalities at sampled points, ||xbar(eps)|| <= ||x*||
    and monotone growth of ||xbar(eps)|| as eps decreases.
    """
    eps_list = np.asarray(eps_list, dtype=float)
    if eps_list.ndim != 1 or eps_list.size == 0 or np.any(eps_list <= 0):
        raise ValueError("eps_list must be a nonempty list of positive reals")
    if np.any(np.diff(eps_list) >= 0):
        raise ValueError("eps_list must be strictly decreasing")
    pts = np.array([tikhonov_point(obj, e).point for e in eps_list])
    norms = np.linalg.norm(pts, axis=1)

    step_v = -np.inf
    for i in range(eps_list.size - 1):
        e0, e1 = eps_list[i], eps_list[i + 1]
        move = np.linalg.norm(pts[i + 1] - pts[i])
        bound = min((e0 - e1) / e1 * norms[i], (e0 - e1) / e0 * norms[i + 1])
        step_v = max(step_v, move - bound)

    x, y = _sample_pairs(obj, samples, radius, seed)
    gap_v = transfer_v = -np.inf
    for e, xbar in zip(eps_list, pts):
        fk_bar = obj.regularized_value(xbar, e)
        gap = obj.regularized_value(x, e) - fk_bar
        d = x - xbar
        gap_v = max(gap_v, float(np.max(0.5 * e * _dot(d, d) - gap)))
        lhs = obj.value(x) - obj.value(y)
        rhs = gap + 0.5 * e * _dot(y, y)
        transfer_v = max(transfer_v, float(np.max(lhs - rhs)))

    if obj.oracle is not None:
        xs = obj.oracle.x_star
        norm_v = float(np.max(norms - np.linalg.norm(xs)))
        dists = np.linalg.norm(pts - xs, axis=1)
        dist_first, dist_last = float(dists[0]), float(dists[-1])
    else:
        norm_v, dist_first, dist_last = -np.inf, np.nan, np.nan
    mono_v = float(np.max(norms[:-1] - norms[1:])) if norms.size > 1 else -np.inf
    return PathReport(eps_list, pts, float(step_v), float(gap_v), float(transfer_v),
                      norm_v, mono_v, dist_first, dist_last)


# -- trace checks -------------------------------------------------------------

def _consecutive(trace: Trace, start: int):
    """Row indices i with k[i] >= start and k[i+1] == k[i] + 1."""
    k = trace.k
    i = np.flatnonzero((k[:-1] >= start) & (np.diff(k) == 1))
    return i


@dataclass
class TraceInequalityReport:
    descent_violation: float
    gap_distance_violation: float
    checked: int
    tol: float = LEMMA_TOL

    @property
    def passed(self) -> bool:
        return self.descent_violation <= self.tol and self.gap_distance_violation <= self.tol


def check_trace_inequalities(trace: Trace, sched: Schedule, obj: Objective,
                             start: Optional[int] = None) -> TraceInequalityReport:
    """Per-step descent inequality for f_k and the gap-to-distance bound."""
    start = sched.generic_start if start is None else start
    idx = _consecutive(trace, start)
    descent_v = -np.inf
    gapd_v = -np.inf
    if idx.size:
        k = trace.k[idx]
        e = sched.eps(k)[:, None]
        x, y, xn = trace.x[idx], trace.y[idx], trace.x[idx + 1]
        gy = obj.regularized_gradient(y, e)
        gx = obj.regularized_gradient(x, e)
        e1 = e[:, 0]
        rhs = (obj.regularized_value(x, e1) + _dot(gy, y - x) - 0.5 * sched.s * _dot(gy, gy)
               - 0.5 * sched.s * _dot(gy - gx, gy - gx))
        descent_v = float(np.max(obj.regularized_value(xn, e1) - rhs))
    sub = _log_subsample(trace.k, start, MAX_ORACLE_SAMPLES)
    for i in sub:
        k = int(trace.k[i])
        e = float(sched.eps(k))
        xbar = tikhonov_point(obj, e).point
        x = trace.x[i]
        gap = float(obj.regularized_value(x, e) - obj.regularized_value(xbar, e))
        d = x - xbar
        gapd_v = max(gapd_v, float(d @ d - 2 * gap / e))
    return TraceInequalityReport(descent_v, gapd_v, int(idx.size))


def _log_subsample(k, start, n):
    cand = np.flatnonzero(k >= start)
    if cand.size <= n:
        return cand
    targets = np.geomspace(k[cand[0]], k[cand[-1]], n)
    pos = np.searchsorted(k[cand], targets)
    return np.unique(cand[np.clip(pos, 0, cand.size - 1)])


@dataclass(frozen=True)
class LyapunovSample:
    k: int
    p_k: float
    eta: np.ndarray
    energy: float


@dataclass
class LyapunovReport:
    start: int
    eta_residual_max: float
    eta_residual_checked: int
    p_min_where_q: float
    q_holds_count: int
    samples: list

    def energy_ratio(self, sched: Schedule) -> dict:
        return {smp.k: smp.energy / float(sched.q(smp.k) ** 2 * sched.eps(smp.k)) for smp in self.samples}


def lyapunov(trace: Trace, sched: Schedule, obj: Objective, start: Optional[int] = None,
             energy_at=(), max_samples: int = MAX_ORACLE_SAMPLES) -> LyapunovReport:
    """Recurrence residual of eta, sign of p_k under (Q), and sampled energies.

    The eta residual is
        ||eta_{k+1} - (1 - s/q_{k-1}) eta_k + ((1 - s eps_k) q_k / 2) grad f_k(y_k)||
    divided by the magnitude of the terms that build eta_k and eta_{k+1}
    (and the gradient term), since eta itself is a small difference of large
    numbers.  Energies are computed at a log-spaced subsample of k plus the
    indices in ``energy_at``.
    """
    if obj.oracle is None:
        raise ValueError("lyapunov diagnostics need a minimal-norm oracle")
    s = sched.s
    start = sched.generic_start if start is None else max(int(start), 2)
    x_star = obj.oracle.x_star
    idx = _consecutive(trace, start)
    res_max = 0.0
    if idx.size:
        k = trace.k[idx]
        e = sched.eps(k)[:, None]
        q, q_prev = sched.q(k)[:, None], sched.q(k - 1)[:, None]
        x, y = trace.x[idx], trace.y[idx]
        x1, y1 = trace.x[idx + 1], trace.y[idx + 1]
        g_term = 0.5 * (1 - s * e) * q * obj.regularized_gradient(y, e)
        predicted = (1 - s / q_prev) * eta(sched, k, x, y) - g_term
        resid = np.linalg.norm(eta(sched, k + 1, x1, y1) - predicted, axis=1)
        scale = np.maximum.reduce([eta_scale(sched, k, x, y), eta_scale(sched, k + 1, x1, y1),
                                   np.linalg.norm(g_term, axis=1)])
        ok = scale > 0
        if ok.any():
            res_max = float(np.max(resid[ok] / scale[ok]))

    # p_k >= 0 wherever (Q) holds
    ks = trace.k[trace.k >= max(start, sched.k1)]
    p_min = np.inf
    n_q = 0
    if ks.size:
        lhs, q0, bound = q_terms(sched, ks)
        holds = (lhs <= 0) & (q0 >= bound)
        n_q = int(holds.sum())
        if n_q:
            p_min = float(np.min(p_coef(sched, ks[holds])))

    # E_k uses record k+1
    rows = _log_subsample(trace.k, start + 1, max_samples)
    wanted = set(int(k) + 1 for k in energy_at)
    rows = np.union1d(rows, np.flatnonzero(np.isin(trace.k, list(wanted)))).astype(int) if wanted else rows
    samples = []
    for j in rows:
        k = int(trace.k[j]) - 1
        if k < start:
            continue
        eta_next = eta(sched, k + 1, trace.x[j], trace.y[j])
        E = energy(sched, obj, k, trace.x[j], eta_next, x_star)
        samples.append(LyapunovSample(k, float(p_coef(sched, k)), eta_next, E))
    return LyapunovReport(start, res_max, int(idx.size), p_min, n_q, samples)


# -- rate verdicts ------------------------------------------------------------

@dataclass
class RateReport:
    k_tail: int
    k_max: int
    sup_f_over_eps: float
    vel_ratio_trend: tuple
    gradx_ratio_trend: tuple
    grady_ratio_trend: tuple
    fy_ratio_trend: tuple
    f_ratio_trend: tuple
    gap_over_eps_trend: tuple
    energy_over_q2eps_trend: tuple
    dist_xstar_final: float
    dist_tol: float
    verdicts: dict
    raw_trends: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def lines(self) -> list:
        out = [f"tail k in [{self.k_tail}, {self.k_max}]"]
        named = [
            ("value_x_O_eps", "(f(x_k)-min f)/eps_k", self.f_ratio_trend),
            ("value_y_O_eps", "(f(y_k)-min f)/eps_k", self.fy_ratio_trend),
            ("gap_o_eps", "(f_k(x_k)-f_k(xbar_k))/eps_k", self.gap_over_eps_trend),
            ("velocity_o_sqrt_eps", "|x_k-x_(k-1)|/sqrt(eps_k)", self.vel_ratio_trend),
            ("grad_x_o_sqrt_eps", "|grad f(x_k)|/sqrt(eps_k)", self.gradx_ratio_trend),
            ("grad_y_o_sqrt_eps", "|grad f(y_k)|/sqrt(eps_k)", self.grady_ratio_trend),
        ]
        for key, label, (first, last) in named:
            mark = "PASS" if self.verdicts[key] else "FAIL"
            out.append(f"{mark} {key}: {label} first-decade max {first:.6g}, last-decade max {last:.6g}")
        e0, e1 = self.energy_over_q2eps_trend
        out.append(f"info energy E_k/(q_k^2 eps_k): first-decade max {e0:.6g}, last-decade max {e1:.6g}")
        mark = "PASS" if self.verdicts["min_norm"] else "FAIL"
        out.append(f"{mark} min_norm: |x_final - x*| = {self.dist_xstar_final:.6g} (threshold {self.dist_tol:g})")
        return out


def _decades(k, k_tail, k_max):
    first = (k >= k_tail) & (k < 10 * k_tail)
    last = (k > k_max / 10) & (k >= k_tail)
    if not first.any():
        first = k >= k_tail
    return first, last


def _trend(v, first, last):
    if not last.any():
        return (float(np.max(v[first])) if first.any() else 0.0, np.nan)
    return float(np.max(v[first])), float(np.max(v[last]))


def _o_pass(tr):
    return bool(np.isfinite(tr[1]) and tr[1] <= 0.5 * tr[0])


def _big_o_pass(tr, sup):
    return bool(np.isfinite(sup) and np.isfinite(tr[1]) and tr[1] <= tr[0])


def rate_report(trace: Trace, sched: Schedule, obj: Objective, dist_tol: float = DEFAULT_DIST_TOL,
                noise_floor: bool = True) -> RateReport:
    """Verdicts on the rate conclusions from a completed trace.

    The tail is [k_tail, k_max] with k_tail = max(kbar, k_max / 100); the
    first decade is [k_tail, 10 k_tail) and the last is (k_max / 10, k_max].
    """
    if len(trace) < MIN_RECORDS:
        raise InsufficientDataError(f"rate report needs >= {MIN_RECORDS} records, got {len(trace)}")
    if obj.oracle is None:
        raise ValueError("rate report needs a minimal-norm oracle")
    k = trace.k
    k_max = int(k[-1])
    k_tail = int(max(sched.kbar or 1, k_max // 100, 1))
    first, last = _decades(k, k_tail, k_max)
    tail = k >= k_tail
    x_star, fmin = obj.oracle.x_star, obj.oracle.min_value
    L = obj.lipschitz
    eps = np.asarray(sched.eps(k), dtype=float)
    root = np.sqrt(eps)

    fx = trace.columns["f_x"] - fmin
    fy = trace.columns["f_y"] - fmin
    gx, gy = trace.columns["grad_norm_x"], trace.columns["grad_norm_y"]
    vel = trace.columns["velocity"]

    scale = np.maximum.reduce([np.linalg.norm(trace.x, axis=1), np.linalg.norm(trace.y, axis=1),
                               np.full(len(k), np.linalg.norm(x_star))])
    delta = NOISE_ULPS * np.finfo(float).eps * scale
    floors = {
        "fx": gx * delta + 0.5 * L * delta**2,
        "fy": gy * delta + 0.5 * L * delta**2,
        "gx": L * delta,
        "gy": L * delta,
        "vel": delta,
    }

    def resolved(v, key):
        v = np.abs(v) if key in ("fx", "fy") else v
        if not noise_floor:
            return v
        return np.where(v <= floors[key], 0.0, v)

    ratios = {
        "fx": resolved(fx, "fx") / eps,
        "fy": resolved(fy, "fy") / eps,
        "vel": resolved(vel, "vel") / root,
        "gx": resolved(gx, "gx") / root,
        "gy": resolved(gy, "gy") / root,
    }
    raw = {
        "fx": _trend(np.abs(fx) / eps, first, last),
        "fy": _trend(np.abs(fy) / eps, first, last),
        "vel": _trend(vel / root, first, last),
        "gx": _trend(gx / root, first, last),
        "gy": _trend(gy / root, first, last),
    }
    trends = {key: _trend(v, first, last) for key, v in ratios.items()}
    sup_f = float(np.max(ratios["fx"][tail]))
    sup_fy = float(np.max(ratios["fy"][tail]))

    # oracle-dependent ratios on a log-spaced subsample of the tail
    sub = _log_subsample(k, k_tail, MAX_ORACLE_SAMPLES)
    gap_ratio = np.zeros(sub.size)
    for n, i in enumerate(sub):
        e = float(eps[i])
        xbar = tikhonov_point(obj, e).point
        x = trace.x[i]
        gap = float(obj.regularized_value(x, e) - obj.regularized_value(xbar, e))
        gfloor = (np.linalg.norm(obj.regularized_gradient(x, e)) * delta[i]
                  + 0.5 * (L + e) * delta[i] ** 2)
        if noise_floor and abs(gap) <= gfloor:
            gap = 0.0
        gap_ratio[n] = max(gap, 0.0) / e
    ksub = k[sub]
    f_sub, l_sub = _decades(ksub, k_tail, k_max)
    gap_trend = _trend(gap_ratio, f_sub, l_sub)

    e_vals, e_k = [], []
    for j in sub:
        kk = int(k[j]) - 1
        if kk < max(sched.generic_start, 2):
            continue
        eta_next = eta(sched, kk + 1, trace.x[j], trace.y[j])
        E = energy(sched, obj, kk, trace.x[j], eta_next, x_star)
        e_vals.append(E / float(sched.q(kk) ** 2 * sched.eps(kk)))
        e_k.append(kk)
    e_vals, e_k = np.asarray(e_vals), np.asarray(e_k)
    if e_vals.size:
        ef, el = _decades(e_k, k_tail - 1, k_max - 1)
        energy_trend = _trend(e_vals, ef, el)
    else:
        energy_trend = (np.nan, np.nan)

    dist = float(np.linalg.norm(trace.x[-1] - x_star))
    verdicts = {
        "value_x_O_eps": _big_o_pass(trends["fx"], sup_f),
        "value_y_O_eps": _big_o_pass(trends["fy"], sup_fy),
        "gap_o_eps": _o_pass(gap_trend),
        "velocity_o_sqrt_eps": _o_pass(trends["vel"]),
        "grad_x_o_sqrt_eps": _o_pass(trends["gx"]),
        "grad_y_o_sqrt_eps": _o_pass(trends["gy"]),
        "min_norm": dist <= dist_tol,
    }
    return RateReport(
        k_tail=k_tail, k_max=k_max, sup_f_over_eps=sup_f,
        vel_ratio_trend=trends["vel"], gradx_ratio_trend=trends["gx"], grady_ratio_trend=trends["gy"],
        fy_ratio_trend=trends["fy"], f_ratio_trend=trends["fx"],
        gap_over_eps_trend=gap_trend, energy_over_q2eps_trend=energy_trend,
        dist_xstar_final=dist, dist_tol=dist_tol, verdicts=verdicts, raw_trends=raw,
    )


def min_norm_verdict(trace: Trace, obj: Objective, dist_tol: float = DEFAULT_DIST_TOL) -> bool:
    """Whether the last recorded iterate is within ``dist_tol`` of x*."""
    return bool(np.linalg.norm(trace.x[-1] - obj.oracle.x_star) <= dist_tol)


def coefficient_tail(sched: Schedule, k_hi: int) -> dict:
    """Tail behaviour of b_k and c_k / sqrt(eps_k) on a log grid from kbar (or k1) to k_hi."""
    ks = np.unique(np.rint(np.geomspace(sched.generic_start, k_hi, 400)).astype(np.int64))
    b = b_coef(sched, ks)
    c = c_coef(sched, ks)
    ratio = c / np.sqrt(sched.eps(ks))
    neg = np.flatnonzero(c <= 0)
    onset = int(ks[neg[-1] + 1]) if neg.size and neg[-1] + 1 < ks.size else (int(ks[0]) if not neg.size else None)
    first = ks < 10 * ks[0]
    last = ks > k_hi / 10
    return {
        "b_min": float(b.min()), "b_max": float(b.max()), "b_last": float(b[-1]),
        "c_positive_onset": onset,
        "c_ratio_first_max": float(np.max(np.abs(ratio[first]))),
        "c_ratio_last_max": float(np.max(np.abs(ratio[last]))),
    }
