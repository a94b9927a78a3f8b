"""Benchmark objectives with exact gradients and minimal-norm oracles.

Every objective here is smooth and convex.  ``value`` and ``gradient`` act on
the last axis, so a stack of points with shape ``(m, n)`` is evaluated in one
call.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

TIKHONOV_GTOL = 1e-12
TIKHONOV_MAX_ITER = 10**6
PINV_RCOND = 1e-10


class InvalidProblemError(ValueError):
    pass


class UnboundedBelowError(ValueError):
    pass


class OracleFailureError(RuntimeError):
    pass


@dataclass(frozen=True)
class MinNormOracle:
    """Minimal-norm minimizer and the minimum value.

    ``null_basis`` has orthonormal columns spanning the directions along which
    f is constant, so every minimizer is ``x_star + null_basis @ t``.
    """
    x_star: np.ndarray
    min_value: float
    null_basis: Optional[np.ndarray] = None

    def minimizer(self, t) -> np.ndarray:
        if self.null_basis is None or self.null_basis.shape[1] == 0:
            return self.x_star.copy()
        return self.x_star + self.null_basis @ np.atleast_1d(t)


@dataclass(frozen=True)
class TikhonovPoint:
    eps: float
    point: np.ndarray


@dataclass(frozen=True)
class Objective:
    dimension: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    oracle: Optional[MinNormOracle] = None
    name: str = "objective"
    params: dict = field(default_factory=dict)
    # (H, g) with f(x) = 0.5 x'Hx - g'x + const, when f is quadratic
    quadratic: Optional[tuple] = None
    lipschitz_paper: Optional[float] = None

    def regularized_value(self, x, eps):
        x = np.asarray(x, dtype=float)
        return self.value(x) + 0.5 * eps * np.sum(x * x, axis=-1)

    def regularized_gradient(self, x, eps):
        x = np.asarray(x, dtype=float)
        return self.gradient(x) + eps * x


def paper_quadratic(a: float, b: float) -> Objective:
    """f(x, y) = (a x + b y)^2 on R^2; argmin is the line a x + b y = 0."""
    a = float(a)
    b = float(b)
    if a == 0.0 or b == 0.0 or not (np.isfinite(a) and np.isfinite(b)):
        raise InvalidProblemError(f"paper_quadratic needs nonzero finite a, b (got a={a}, b={b})")
    w = np.array([a, b])

    def value(x):
        return (np.asarray(x, dtype=float) @ w) ** 2

    def gradient(x):
        r = np.asarray(x, dtype=float) @ w
        return 2.0 * np.multiply.outer(r, w)

    nw = np.hypot(a, b)
    null = np.array([[b], [-a]]) / nw
    oracle = MinNormOracle(x_star=np.zeros(2), min_value=0.0, null_basis=null)
    sq = a * a + b * b
    return Objective(
        dimension=2,
        value=value,
        gradient=gradient,
        lipschitz=2.0 * sq,
        oracle=oracle,
        name="paper_quadratic",
        params={"a": a, "b": b},
        quadratic=(2.0 * np.outer(w, w), np.zeros(2)),
        lipschitz_paper=2.0 * np.sqrt(2.0) * np.sqrt(sq * max(a * a, b * b)),
    )


def shifted_quadratic(u) -> Objective:
    u = np.array(u, dtype=float).ravel()
    n = u.size
    if n == 0:
        raise InvalidProblemError("shifted_quadratic needs a nonempty centre")

    def value(x):
        d = np.asarray(x, dtype=float) - u
        return 0.5 * np.sum(d * d, axis=-1)

    def gradient(x):
        return np.asarray(x, dtype=float) - u

    return Objective(
        dimension=n,
        value=value,
        gradient=gradient,
        lipschitz=1.0,
        oracle=MinNormOracle(x_star=u.copy(), min_value=0.0, null_basis=np.zeros((n, 0))),
        name="shifted_quadratic",
        params={"u": u.tolist()},
        quadratic=(np.eye(n), u.copy()),
    )


def psd_quadratic(A, b) -> Objective:
    """f(x) = 0.5 x'Ax - b'x with A symmetric PSD and b in range(A).

    The minimal-norm minimizer is the pseudoinverse solution, computed from
    an eigendecomposition with cutoff ``PINV_RCOND * lambda_max``.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != b.size:
        raise InvalidProblemError(f"shape mismatch: A{A.shape}, b({b.size},)")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise InvalidProblemError("A is not symmetric")
    A = 0.5 * (A + A.T)
    lam, V = np.linalg.eigh(A)
    lam_max = float(lam[-1]) if lam.size else 0.0
    if lam_max <= 0.0:
        raise InvalidProblemError("A has no positive eigenvalue")
    if lam[0] < -1e-10 * lam_max:
        raise InvalidProblemError(f"A is not positive semidefinite (eigenvalue {lam[0]:.3e})")
    keep = lam > PINV_RCOND * lam_max
    coords = V.T @ b
    resid = np.linalg.norm(coords[~keep])
    if resid > 1e-10 * max(1.0, np.linalg.norm(b)):
        raise UnboundedBelowError(f"b is not in range(A): residual {resid:.3e}")
    x_star = V[:, keep] @ (coords[keep] / lam[keep])
    min_value = -0.5 * float(b @ x_star)

    def value(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.sum((x @ A) * x, axis=-1) - x @ b

    def gradient(x):
        return np.asarray(x, dtype=float) @ A - b

    return Objective(
        dimension=b.size,
        value=value,
        gradient=gradient,
        lipschitz=lam_max,
        oracle=MinNormOracle(x_star=x_star, min_value=min_value, null_basis=V[:, ~keep]),
        name="psd_quadratic",
        params={"A": A.tolist(), "b": b.tolist()},
        quadratic=(A, b.copy()),
    )


def tikhonov_point(obj: Objective, eps: float, x_init=None) -> TikhonovPoint:
    """Unique minimizer of f + (eps/2)||x||^2."""
    eps = float(eps)
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if obj.quadratic is not None:
        H, g = obj.quadratic
        point = np.linalg.solve(H + eps * np.eye(obj.dimension), g)
        return TikhonovPoint(eps, point)

    # eps-strongly convex and (L + eps)-smooth: fixed step 1/(L + eps) contracts
    x = np.zeros(obj.dimension) if x_init is None else np.array(x_init, dtype=float)
    step = 1.0 / (obj.lipschitz + eps)
    for _ in range(TIKHONOV_MAX_ITER):
        g = obj.gradient(x) + eps * x
        if np.linalg.norm(g) <= TIKHONOV_GTOL:
            return TikhonovPoint(eps, x)
        x = x - step * g
    raise OracleFailureError(
        f"Tikhonov inner solve did not reach |grad| <= {TIKHONOV_GTOL} "
        f"in {TIKHONOV_MAX_ITER} steps (eps={eps})"
    )
