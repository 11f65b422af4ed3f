"""Problem definition and shared evaluation routines.

The central object is :class:`LpProblem`, the least-squares data-misfit plus
an lp quasi-norm penalty on a linear map of the unknowns,

    J(x) = 1/2 |A x - b|_2^2 + beta * sum_i |(L x)_i|^p  (+ eta/2 (x, P x)),

with 0 < p <= 1.  For p < 1 the penalty is nonsmooth and nonconvex; all
solvers in this package work on a smoothed version whose weight is capped at
the level eps, see :func:`psi_eps` and :func:`residual_eps`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json

import numpy as np

__all__ = [
    "LpProblem",
    "SparsityStats",
    "ZERO_CUTOFF",
    "objective",
    "psi_eps",
    "objective_eps",
    "residual_eps",
    "smoothing_weights",
    "sparsity_stats",
    "kernel_condition_holds",
]

# Entries at or below this magnitude count as numerically zero in all
# sparsity statistics.
ZERO_CUTOFF = 1e-10


def _as_matrix(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _as_vector(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"{name} must be a 1-d array, got ndim={a.ndim}")
    return a


@dataclass(frozen=True)
class LpProblem:
    """Immutable instance of the regularized least-squares problem.

    Parameters
    ----------
    A : (m, n) ndarray
        Forward operator of the data misfit.
    Lambda : (r, n) ndarray
        Linear map inside the lp penalty.
    b : (m,) ndarray
        Data vector.
    beta : float
        Positive penalty parameter.
    p : float
        Quasi-norm exponent in (0, 1].
    eta : float, optional
        Weight of an additional quadratic regularizer eta/2 (x, P x).
    P : (n, n) ndarray, optional
        Symmetric nonnegative matrix; required iff ``eta > 0``.
    """

    A: np.ndarray
    Lambda: np.ndarray
    b: np.ndarray
    beta: float
    p: float
    eta: float = 0.0
    P: np.ndarray | None = None

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        Lam = _as_matrix(self.Lambda, "Lambda")
        b = _as_vector(self.b, "b")
        if A.shape[1] != Lam.shape[1]:
            raise ValueError(
                f"A has {A.shape[1]} columns but Lambda has {Lam.shape[1]}"
            )
        if A.shape[0] != b.shape[0]:
            raise ValueError(
                f"A has {A.shape[0]} rows but b has length {b.shape[0]}"
            )
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        P = self.P
        if self.eta == 0 and P is not None:
            raise ValueError("P is only meaningful together with eta > 0")
        if self.eta > 0:
            if P is None:
                raise ValueError("P is required when eta > 0")
            P = _as_matrix(P, "P")
            if P.shape != (A.shape[1], A.shape[1]):
                raise ValueError("P must be n-by-n")
            scale = max(np.abs(P).max(), 1.0)
            if np.abs(P - P.T).max() > 1e-12 * scale:
                raise ValueError("P must be symmetric (1e-12 relative)")
        for name, arr in (("A", A), ("Lambda", Lam), ("b", b), ("P", P)):
            if arr is not None:
                arr = arr.copy()
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def r(self) -> int:
        return self.Lambda.shape[0]

    def _check_x(self, x):
        x = _as_vector(x, "x")
        if x.shape[0] != self.n:
            raise ValueError(f"x has length {x.shape[0]}, expected {self.n}")
        return x


@dataclass(frozen=True)
class SparsityStats:
    """Sparsity summary of a vector, at the 1e-10 zero cutoff.

    ``sp`` counts the components smaller in magnitude than the smoothing
    level eps; those are the entries where the smoothing is active.
    """

    l0: int
    l0c: int
    lp_p: float
    sp: int

    def to_dict(self) -> dict:
        return {"l0": self.l0, "l0c": self.l0c, "lp_p": self.lp_p, "sp": self.sp}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def objective(prob: LpProblem, x) -> float:
    """Evaluate J(x) = 1/2 |Ax-b|^2 + beta |Lx|_p^p (+ eta/2 (x,Px)).

    The convention 0^p = 0 makes the penalty continuous at zero entries.
    """
    x = prob._check_x(x)
    r = prob.A @ x - prob.b
    y = prob.Lambda @ x
    val = 0.5 * float(r @ r) + prob.beta * float(np.sum(np.abs(y) ** prob.p))
    if prob.eta > 0:
        val += 0.5 * prob.eta * float(x @ (prob.P @ x))
    return val


def psi_eps(t, eps: float, p: float):
    """Smoothed |.|^{p/2} applied to t >= 0.

    Below t = eps^2 the map t**(p/2) is replaced by its tangent at eps^2,

        psi(t) = (p/2) t / eps^(2-p) + (1 - p/2) eps^p,

    which matches value and slope at the junction, so psi is C^1 there and
    concave and nondecreasing overall.  Accepts scalars or arrays.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    knee = eps * eps
    low = 0.5 * p * t_arr / eps ** (2.0 - p) + (1.0 - 0.5 * p) * eps**p
    high = np.where(t_arr >= knee, t_arr, knee) ** (0.5 * p)
    out = np.where(t_arr <= knee, low, high)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def objective_eps(prob: LpProblem, x, eps: float) -> float:
    """Smoothed objective J_eps(x) = 1/2 |Ax-b|^2 + beta psi_eps(|Lx|^2).

    Dominates :func:`objective` from above; the gap is at most
    beta * r * (1 - p/2) * eps^p and vanishes as eps -> 0.
    """
    x = prob._check_x(x)
    r = prob.A @ x - prob.b
    y = prob.Lambda @ x
    val = 0.5 * float(r @ r) + prob.beta * float(
        np.sum(psi_eps(y * y, eps, prob.p))
    )
    if prob.eta > 0:
        val += 0.5 * prob.eta * float(x @ (prob.P @ x))
    return val


def smoothing_weights(y, eps: float, beta: float, p: float):
    """Diagonal weights beta*p / max(eps^(2-p), |y_i|^(2-p)).

    These are the coefficients of the weighted-least-squares system solved by
    the monotone scheme; they are positive and bounded by beta*p*eps^(p-2).
    """
    y = np.asarray(y, dtype=float)
    return beta * p / np.maximum(eps ** (2.0 - p), np.abs(y) ** (2.0 - p))


def residual_eps(prob: LpProblem, x, eps: float) -> np.ndarray:
    """Residual of the smoothed stationarity system at x.

    Returns A*(Ax-b) + eta*P x + L* W(Lx) Lx with W the diagonal weights of
    :func:`smoothing_weights`.  Its max-norm is the stopping quantity of the
    iterative solvers.
    """
    x = prob._check_x(x)
    y = prob.Lambda @ x
    w = smoothing_weights(y, eps, prob.beta, prob.p)
    r = prob.A.T @ (prob.A @ x - prob.b) + prob.Lambda.T @ (w * y)
    if prob.eta > 0:
        r += prob.eta * (prob.P @ x)
    return r


def sparsity_stats(v, eps: float, p: float) -> SparsityStats:
    """Count (numerically) zero and nonzero entries of v and its lp^p value.

    ``l0`` counts |v_i| > 1e-10, ``l0c`` the complement, and ``sp`` the
    entries with |v_i| < eps.
    """
    v = np.asarray(v, dtype=float).ravel()
    a = np.abs(v)
    l0 = int(np.count_nonzero(a > ZERO_CUTOFF))
    return SparsityStats(
        l0=l0,
        l0c=v.size - l0,
        lp_p=float(np.sum(a**p)),
        sp=int(np.count_nonzero(a < eps)),
    )


def kernel_condition_holds(A, Lambda) -> bool:
    """Check that A and Lambda have no common nontrivial kernel.

    True iff the stacked matrix [A; Lambda] has full column rank; singular
    values below 1e-10 times the largest one count as zero.
    """
    A = _as_matrix(A, "A")
    Lam = _as_matrix(Lambda, "Lambda")
    if A.shape[1] != Lam.shape[1]:
        raise ValueError("A and Lambda must have the same number of columns")
    stacked = np.vstack([A, Lam])
    s = np.linalg.svd(stacked, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return stacked.shape[1] == 0
    return int(np.count_nonzero(s > 1e-10 * s[0])) == stacked.shape[1]
