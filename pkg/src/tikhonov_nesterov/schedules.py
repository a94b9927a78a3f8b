"""Parameter schedules: step size s, regularization eps_k and auxiliary q_k.

The momentum coefficient b_{k-1} and the extra regularization weight c_k are
derived from (s, eps, q).  Polynomial schedules q_k = a k^q, eps_k = c k^-p
also have closed forms, kept separate from the generic formulas so that each
can check the other.

All sequence functions accept scalars or integer arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

DENOM_GUARD = 1e-14
DENSE_LIMIT = 10**5
GEOM_POINTS_PER_DECADE = 200
INDEX_CAP = 2**62  # stands in for indices beyond any horizon


class ConditionSError(ValueError):
    """Raised when s * L >= 1, so no k0 satisfies s <= 1/(L + eps_k0)."""


class PreconditionError(ValueError):
    pass


def _check_index(k):
    bad = k < 1 if isinstance(k, (int, np.integer)) else np.any(np.asarray(k) < 1)
    if bad:
        raise IndexError(f"schedule index must be >= 1, got {k}")


def pow_gap(k, p):
    """(k-1)^p - k^p without cancellation for large k."""
    k = np.asarray(k, dtype=float)
    return k**p * np.expm1(p * np.log1p(-1.0 / k))


@dataclass(frozen=True)
class PolyScheduleParams:
    a: float
    q_exp: float
    c: float
    p_exp: float

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0 and self.p_exp > 0):
            raise ValueError(f"a, c, p must be positive: {self}")
        if not 0 < self.q_exp <= 1:
            raise ValueError(f"q must lie in (0, 1], got {self.q_exp}")

    def certification(self, s: float) -> str:
        """'rate_certified', 'q1_mode' or 'uncertified'."""
        if 0 < self.q_exp < 1 and 0 < self.p_exp < 2 * self.q_exp:
            return "rate_certified"
        if self.q_exp == 1 and self.a < s / 2:
            return "q1_mode"
        return "uncertified"


@dataclass(frozen=True)
class Schedule:
    """Step size plus the eps/q sequences and their validity indices.

    ``k2`` and ``kbar`` are only known after a (Q) scan; they are None when
    the scan has not run or found no index within its horizon.
    """
    s: float
    eps: Callable
    q: Callable
    k0: Optional[int] = 1
    k1: int = 1
    k2: Optional[int] = None
    kbar: Optional[int] = None
    params: Optional[PolyScheduleParams] = None
    lipschitz: Optional[float] = None
    eps_decrement: Optional[Callable] = None
    warnings: tuple = ()

    @property
    def generic_start(self) -> int:
        """First index of the analysed range: kbar when known, else k1."""
        return self.kbar if self.kbar is not None else max(self.k1, 2)

    def with_k2(self, horizon: int) -> "Schedule":
        k2 = find_k2(self, horizon)
        return replace(self, k2=k2, kbar=None if k2 is None else k2 + 1)


def polynomial_schedule(params: PolyScheduleParams, s: float, lipschitz: Optional[float] = None,
                        strict: bool = False) -> Schedule:
    """Schedule with q_k = a k^q and eps_k = c / k^p.

    With ``strict=False`` an unsatisfiable condition (S) is recorded as a
    warning and k0 is left as None; the schedule is still usable.
    """
    a, qe, c, pe = params.a, params.q_exp, params.c, params.p_exp
    if not s > 0:
        raise ValueError(f"step size must be positive, got {s}")
    warnings = []
    k0 = 1
    if lipschitz is not None:
        try:
            k0 = k0_poly(params, s, lipschitz)
        except ConditionSError as exc:
            if strict:
                raise
            warnings.append(f"step size exceeds 1/L: {exc}")
            k0 = None
    cert = params.certification(s)
    if cert == "uncertified":
        warnings.append(f"schedule is uncertified (q={qe}, p={pe}, a={a}, s={s})")

    def eps(k):
        if isinstance(k, (int, np.integer)):
            _check_index(k)
            return c * float(k) ** (-pe)
        _check_index(k)
        return c * np.asarray(k, dtype=float) ** (-pe)

    def q(k):
        if isinstance(k, (int, np.integer)):
            _check_index(k)
            return a * float(k) ** qe
        _check_index(k)
        return a * np.asarray(k, dtype=float) ** qe

    def eps_decrement(k):
        # eps_{k-1} - eps_k
        if isinstance(k, (int, np.integer)):
            k = float(k)
            return -c * (k - 1.0) ** (-pe) * math.expm1(pe * math.log1p(-1.0 / k))
        k = np.asarray(k, dtype=float)
        return -c * (k - 1.0) ** (-pe) * np.expm1(pe * np.log1p(-1.0 / k))

    k1 = max(k0 or 1, _root_index(s * c, pe))
    if k1 >= INDEX_CAP:
        warnings.append(f"1 - s*eps_k stays nonpositive below k = 2^62 (s*c = {s * c:.6g}, p = {pe:g})")
    return Schedule(s=float(s), eps=eps, q=q, k0=k0, k1=k1, params=params,
                    lipschitz=lipschitz, eps_decrement=eps_decrement, warnings=tuple(warnings))


def generic_schedule(s: float, eps: Callable, q: Callable, lipschitz: Optional[float] = None,
                     search_limit: int = 10**7) -> Schedule:
    """Schedule from arbitrary eps/q rules; k0 and k1 found by scanning."""
    warnings = []
    k0: Optional[int] = 1
    if lipschitz is not None:
        if s * lipschitz >= 1:
            warnings.append(f"step size exceeds 1/L (s*L = {s * lipschitz:.6g})")
            k0 = None
        else:
            k0 = _first_index(lambda k: s <= 1.0 / (lipschitz + eps(k)), 1, search_limit)
    k1 = _first_index(lambda k: 1.0 - s * eps(k) > 0, k0 or 1, search_limit)
    return Schedule(s=float(s), eps=eps, q=q, k0=k0, k1=k1, lipschitz=lipschitz,
                    warnings=tuple(warnings))


def _first_index(pred, start, limit):
    # eps non-increasing makes pred monotone; doubling then bisection
    if pred(start):
        return start
    lo, hi = start, start + 1
    while not pred(hi):
        lo, hi = hi, 2 * hi
        if hi > limit:
            raise PreconditionError(f"no index found below {limit}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def eps_at(sched: Schedule, k):
    _check_index(k)
    return sched.eps(k)


def q_at(sched: Schedule, k):
    _check_index(k)
    return sched.q(k)


def _eps_gap(sched: Schedule, k):
    if sched.eps_decrement is not None:
        return sched.eps_decrement(k)
    return sched.eps(np.asarray(k) - 1) - sched.eps(k)


def _root_index(base: float, p_exp: float) -> int:
    """int(base ** (1/p)) + 1, capped at INDEX_CAP."""
    if base > 0 and math.log(base) / p_exp >= math.log(INDEX_CAP - 1):
        return INDEX_CAP
    return int(base ** (1.0 / p_exp)) + 1


def k0_poly(params: PolyScheduleParams, s: float, lipschitz: float) -> int:
    if s * lipschitz >= 1:
        raise ConditionSError(f"s*L = {s * lipschitz:.6g} >= 1")
    return _root_index(params.c * s / (1.0 - lipschitz * s), params.p_exp)


def k1_index(sched: Schedule) -> int:
    return sched.k1


def q_terms(sched: Schedule, k):
    """Left-hand side of the (Q) inequality and the lower bound 2s/(1-s eps_k)^2."""
    s = sched.s
    k = np.asarray(k)
    e0, e1 = sched.eps(k), sched.eps(k + 1)
    q0, q1 = sched.q(k), sched.q(k + 1)
    lhs = (1 - s * e1) ** 2 * q1**2 - (1 - s * e0) ** 2 * q0**2 - 2 * s * q1 + s * (1 - s * e0) ** 2 * q0
    bound = 2 * s / (1 - s * e0) ** 2
    return lhs, q0, bound


def check_Q(sched: Schedule, k: int) -> tuple:
    if k < sched.k1:
        raise PreconditionError(f"(Q) is only defined for k >= k1 = {sched.k1}, got {k}")
    lhs, q0, bound = q_terms(sched, k)
    return bool(lhs <= 0), bool(q0 >= bound)


def sample_grid(lo: int, hi: int, dense_limit: int = DENSE_LIMIT,
                per_decade: int = GEOM_POINTS_PER_DECADE) -> np.ndarray:
    """Every integer in [lo, min(hi, dense_limit)], then geometric samples up to hi."""
    dense_hi = min(hi, dense_limit)
    parts = [np.arange(lo, dense_hi + 1, dtype=np.int64)] if lo <= dense_hi else []
    start = max(lo, dense_hi + 1)
    if hi >= start:
        n = max(2, int(math.ceil(per_decade * math.log10(hi / start))) + 1)
        geo = np.unique(np.rint(np.geomspace(start, hi, n)).astype(np.int64))
        parts.append(geo)
    return np.unique(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)


def find_k2(sched: Schedule, horizon: int) -> Optional[int]:
    """Smallest sampled k such that (Q) holds at every sampled j in [k, horizon]."""
    if horizon < sched.k1:
        raise PreconditionError(f"horizon {horizon} < k1 = {sched.k1}")
    grid = sample_grid(sched.k1, horizon)
    lhs, q0, bound = q_terms(sched, grid)
    ok = (lhs <= 0) & (q0 >= bound)
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return int(grid[0])
    if bad[-1] == grid.size - 1:
        return None
    return int(grid[bad[-1] + 1])


def _b_generic(s, e0, e1, q0, q1):
    denom = (1 - s * e0) * (1 - s * e1) * q0 * q1
    num = (q0 - s) * ((1 - s * e0) ** 2 * q0 - 2 * s)
    return num, denom


def _scalar_terms(sched: Schedule, k: int):
    e0, e1 = float(sched.eps(k - 1)), float(sched.eps(k))
    q0, q1 = float(sched.q(k - 1)), float(sched.q(k))
    return e0, e1, q0, q1


def b_coef(sched: Schedule, k):
    """b_{k-1}, the weight on (x_k - x_{k-1}) at iteration k."""
    _check_index(k)
    s = sched.s
    if isinstance(k, (int, np.integer)):
        if k == 1:
            return 0.0
        num, denom = _b_generic(s, *_scalar_terms(sched, int(k)))
        return 0.0 if abs(denom) <= DENOM_GUARD else num / denom
    scalar = np.ndim(k) == 0
    k = np.atleast_1d(np.asarray(k))
    km = np.maximum(k - 1, 1)
    num, denom = _b_generic(s, sched.eps(km), sched.eps(k), sched.q(km), sched.q(k))
    skip = (k == 1) | (np.abs(denom) <= DENOM_GUARD)
    out = np.where(skip, 0.0, num / np.where(skip, 1.0, denom))
    return float(out[0]) if scalar else out


def _c_generic(s, e0, e1, q0, q1, gap):
    pref = 2 * s / ((1 - s * e0) * (1 - s * e1) ** 2 * q1)
    return pref * (s / q0 - s * s * e1 / q0 - s * gap)


def c_coef(sched: Schedule, k):
    _check_index(k)
    s = sched.s
    if isinstance(k, (int, np.integer)):
        if k == 1:
            return 0.0
        k = int(k)
        e0, e1, q0, q1 = _scalar_terms(sched, k)
        if abs((1 - s * e0) * (1 - s * e1) * q0 * q1) <= DENOM_GUARD:
            return 0.0
        return float(_c_generic(s, e0, e1, q0, q1, _eps_gap(sched, k)))
    scalar = np.ndim(k) == 0
    k = np.atleast_1d(np.asarray(k))
    km = np.maximum(k - 1, 1)
    e0, e1 = sched.eps(km), sched.eps(k)
    q0, q1 = sched.q(km), sched.q(k)
    denom = (1 - s * e0) * (1 - s * e1) * q0 * q1
    skip = (k == 1) | (np.abs(denom) <= DENOM_GUARD)
    pref = 2 * s / np.where(skip, 1.0, (1 - s * e0) * (1 - s * e1) ** 2 * q1)
    inner = s / q0 - s * s * e1 / q0 - s * _eps_gap(sched, np.where(k == 1, 2, k))
    out = pref * inner
    out = np.where(skip, 0.0, out)
    return float(out[0]) if scalar else out


def c_coef_no_eps(sched: Schedule, k):
    """c_k once eps is dropped from the iteration: 2 s^2 / (q_{k-1} q_k)."""
    _check_index(k)
    scalar = np.ndim(k) == 0
    k = np.atleast_1d(np.asarray(k))
    km = np.maximum(k - 1, 1)
    out = np.where(k == 1, 0.0, 2 * sched.s**2 / (sched.q(km) * sched.q(k)))
    return float(out[0]) if scalar else out


def b_coef_no_eps(sched: Schedule, k):
    """b_{k-1} with eps identically zero."""
    zero = replace(sched, eps=lambda j: np.zeros(np.shape(j)), eps_decrement=None)
    return b_coef(zero, k)


def bp_closed_form(params: PolyScheduleParams, s: float, k):
    a, qe, c, pe = params.a, params.q_exp, params.c, params.p_exp
    _check_index(k)
    scalar = np.ndim(k) == 0
    k = np.atleast_1d(np.asarray(k, dtype=float))
    km = np.maximum(k - 1.0, 1.0)
    g0 = km**pe - c * s
    g1 = k**pe - c * s
    num = k**pe * (a * km**qe - s) * (a * g0**2 * km**qe - 2 * s * km ** (2 * pe))
    den = a**2 * km ** (qe + pe) * k**qe * g0 * g1
    skip = (k == 1) | (np.abs(g0 * g1) <= DENOM_GUARD * np.maximum(km**pe * k**pe, 1.0))
    out = np.where(skip, 0.0, num / np.where(skip, 1.0, den))
    return float(out[0]) if scalar else out


def cp_closed_form(params: PolyScheduleParams, s: float, k):
    """Closed form of c_k for polynomial schedules.

    The second numerator term is -s c (k-1)^p, which is what substituting the
    polynomial sequences into the generic formula produces.  The last two
    numerator terms are grouped as a c (k-1)^q ((k-1)^p - k^p) and the bracket
    is evaluated with ``pow_gap`` to avoid cancellation at large k.
    """
    a, qe, c, pe = params.a, params.q_exp, params.c, params.p_exp
    _check_index(k)
    scalar = np.ndim(k) == 0
    k = np.atleast_1d(np.asarray(k, dtype=float))
    km = np.maximum(k - 1.0, 1.0)
    g0 = km**pe - c * s
    g1 = k**pe - c * s
    inner = km**pe * k**pe - s * c * km**pe + a * c * km**qe * pow_gap(np.maximum(k, 2.0), pe)
    num = 2 * s**2 * k**pe * inner
    den = a**2 * km**qe * k**qe * g0 * g1**2
    skip = (k == 1) | (np.abs(g0 * g1) <= DENOM_GUARD * np.maximum(km**pe * k**pe, 1.0))
    out = np.where(skip, 0.0, num / np.where(skip, 1.0, den))
    return float(out[0]) if scalar else out


def cp_printed_form(params: PolyScheduleParams, s: float, k):
    """The closed form with -c (k-1)^p as the second numerator term (no s factor).

    Kept only to demonstrate that it disagrees with the generic formula.
    """
    a, qe, c, pe = params.a, params.q_exp, params.c, params.p_exp
    k = float(k)
    if k == 1:
        return 0.0
    km = k - 1.0
    inner = km**pe * k**pe - c * km**pe - a * c * km**qe * k**pe + a * c * km ** (qe + pe)
    return 2 * s**2 * k**pe * inner / (a**2 * km**qe * k**qe * (km**pe - c * s) * (k**pe - c * s) ** 2)


@dataclass
class HypothesisReport:
    start: int
    horizon: int
    ratio_sup: float
    ratio_bounded: bool
    q2eps_increasing: bool
    q2eps_first_decrease: Optional[int]
    q2eps_growing: bool
    q2eps_mid: float
    q2eps_end: float
    drift_head_max: float
    drift_tail_max: float
    drift_vanishing: bool
    q_increasing: bool
    b_tail_min: float
    notes: list

    @property
    def verdicts(self) -> dict:
        return {
            "ratio_bounded": self.ratio_bounded,
            "q2eps_increasing": self.q2eps_increasing,
            "q2eps_divergent": self.q2eps_growing,
            "drift_to_zero": self.drift_vanishing,
        }

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def failed(self) -> list:
        return [name for name, ok in self.verdicts.items() if not ok]


def check_growth_hypotheses(sched: Schedule, horizon: int, start: Optional[int] = None) -> HypothesisReport:
    """Sampled checks of the four growth hypotheses on the schedule.

    - q_k eps_k / (q_{k-1} eps_{k-1}) bounded (finite sup over the range);
    - q_k^2 eps_k strictly increasing, and larger at the horizon than at the
      geometric midpoint;
    - q_k (eps_k - eps_{k+1}) / eps_k decreasing toward 0: the max over the
      last decade is below the max over the first decade.
    The range starts at kbar when known, else at k1 (noted in the report).
    """
    notes = []
    if start is None:
        start = sched.generic_start
        if sched.kbar is None:
            notes.append(f"kbar unknown; hypotheses checked from k1-based start {start}")
    start = max(int(start), 2)
    if horizon < start:
        raise PreconditionError(f"horizon {horizon} < start {start}")
    grid = sample_grid(start, horizon)
    eps = sched.eps(grid)
    q = sched.q(grid)
    ratio = q * eps / (sched.q(grid - 1) * sched.eps(grid - 1))
    ratio_sup = float(np.max(ratio))

    q2e = q**2 * eps
    dq2e = np.diff(q2e)
    dec = np.flatnonzero(dq2e <= 0)
    mid = int(round(math.sqrt(start * horizon)))
    q2e_mid = float(sched.q(mid) ** 2 * sched.eps(mid))
    q2e_end = float(sched.q(horizon) ** 2 * sched.eps(horizon))

    drift = q * _eps_gap(sched, grid + 1) / eps
    head = grid < min(10 * start, horizon)
    tail = grid > max(horizon / 10, start)
    if not head.any():
        head = grid == grid[0]
    if not tail.any():
        tail = grid == grid[-1]
    head_max = float(np.max(np.abs(drift[head])))
    tail_max = float(np.max(np.abs(drift[tail])))

    b = b_coef(sched, grid[grid >= max(start, horizon // 10)])
    return HypothesisReport(
        start=start,
        horizon=horizon,
        ratio_sup=ratio_sup,
        ratio_bounded=bool(np.isfinite(ratio_sup)),
        q2eps_increasing=dec.size == 0,
        q2eps_first_decrease=None if dec.size == 0 else int(grid[dec[0]]),
        q2eps_growing=q2e_end > q2e_mid,
        q2eps_mid=q2e_mid,
        q2eps_end=q2e_end,
        drift_head_max=head_max,
        drift_tail_max=tail_max,
        drift_vanishing=tail_max < head_max,
        q_increasing=bool(np.all(np.diff(q) > 0)),
        b_tail_min=float(np.min(b)),
        notes=notes,
    )


# name used by the public API listing
check_theorem2_hypotheses = check_growth_hypotheses
