"""Iterating the SEIR map: trajectories, limits, the post-peak set M, and the
identities that tie the recovered series r(n) back to the full state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DriftError,
    ModelError,
    ParameterError,
    Params,
    SimplexState,
    as_state,
    is_fixed,
    raw_step,
    require_admissible,
    simplex_violation,
)
from .spectral import critical_alpha

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**6


class NotApplicableError(ModelError, ValueError):
    """The question has no answer for this input (e.g. a fixed-point start)."""


class DegenerateWindowError(ModelError, ArithmeticError):
    """A v-window cannot be inverted because a denominator vanishes."""


def post_peak_terms(x: Sequence[float], p: Params) -> tuple[float, float]:
    """(A, B) = (ae - βs(i+qe), bi - ae): the net daily outflow of e and of i."""
    s, e, i, _ = x
    return p.a * e - p.beta * s * (i + p.q * e), p.b * i - p.a * e


def in_M(x: Sequence[float], p: Params) -> bool:
    """True iff A > 0 and B > 0 (strict, no tolerance band)."""
    A, B = post_peak_terms(x, p)
    return A > 0.0 and B > 0.0


@dataclass(frozen=True)
class Trajectory:
    """States for days 0..n, one row (s, e, i, r) per day."""

    states: np.ndarray
    params: Params

    def __post_init__(self) -> None:
        arr = np.array(self.states, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4 or arr.shape[0] == 0:
            raise ValueError(f"expected a non-empty (n, 4) array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "states", arr)

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, n: int) -> SimplexState:
        return SimplexState(*(float(c) for c in self.states[n]))

    s = property(lambda self: self.states[:, 0])
    e = property(lambda self: self.states[:, 1])
    i = property(lambda self: self.states[:, 2])
    r = property(lambda self: self.states[:, 3])

    @property
    def A(self) -> np.ndarray:
        p = self.params
        return p.a * self.e - p.beta * self.s * (self.i + p.q * self.e)

    @property
    def B(self) -> np.ndarray:
        p = self.params
        return p.b * self.i - p.a * self.e

    @property
    def in_M(self) -> np.ndarray:
        return (self.A > 0.0) & (self.B > 0.0)

    def m_entry_day(self) -> int | None:
        """First stored day that lies in M, if any."""
        flags = self.in_M
        return int(np.argmax(flags)) if flags.any() else None


def simulate(x0: Sequence[float], p: Params, n: int) -> Trajectory:
    """Iterate the one-day map n times from x0."""
    require_admissible(p)
    x = as_state(x0)
    if n < 0:
        raise ValueError(f"step count must be non-negative, got {n}")
    out = np.empty((n + 1, 4))
    out[0] = x
    beta, q, a, b = p.beta, p.q, p.a, p.b
    for k in range(1, n + 1):
        x = raw_step(*x, beta, q, a, b)
        out[k] = x
    problem = simplex_violation(tuple(out[-1]))
    if problem is not None:
        raise DriftError(f"trajectory drifted off the simplex by day {n}: {problem}")
    return Trajectory(out, p)


def peak(t: Trajectory) -> tuple[int, float]:
    """Day and value of the largest infectious fraction (earliest on ties)."""
    day = int(np.argmax(t.i))
    return day, float(t.i[day])


def completion_day(t: Trajectory, threshold: float) -> int | None:
    """First day at or after the peak with i < threshold; None if not reached.

    Searching from the peak keeps a small initial seed (i0 < threshold) from
    counting as an already-finished epidemic.
    """
    start, _ = peak(t)
    below = np.nonzero(t.i[start:] < threshold)[0]
    return int(start + below[0]) if below.size else None


@dataclass(frozen=True)
class LimitReport:
    limit_state: SimplexState
    iterations: int
    converged: bool
    bound_ok: bool | None  # None: check skipped (fixed-point start or beta = 0)
    critical_alpha: float | None
    final_state: SimplexState  # last iterate before clamping

    def as_dict(self) -> dict:
        return {
            "limit_state": list(self.limit_state),
            "iterations": self.iterations,
            "converged": self.converged,
            "bound_ok": self.bound_ok,
            "critical_alpha": self.critical_alpha,
            "final_state": list(self.final_state),
        }


def find_limit(
    x0: Sequence[float],
    p: Params,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> LimitReport:
    """Iterate until e + i < tol and |Δs| < tol, or max_iter steps.

    The limit is reported as (s, 0, 0, 1 - s). When the start is not a fixed
    point and beta > 0, bound_ok records whether s < ab / (β(a + bq)).
    Non-convergence is reported through the `converged` flag, not raised.
    """
    require_admissible(p)
    x = as_state(x0)
    start_fixed = is_fixed(x)
    beta, q, a, b = p.beta, p.q, p.a, p.b
    converged = False
    n = 0
    while True:
        if x[1] + x[2] < tol and n > 0 and abs(x[0] - prev_s) < tol:
            converged = True
            break
        if start_fixed:
            converged = True
            break
        if n >= max_iter:
            break
        prev_s = x[0]
        x = raw_step(*x, beta, q, a, b)
        n += 1
    x = SimplexState(*x)
    problem = simplex_violation(x)
    if problem is not None:
        raise DriftError(f"iteration drifted off the simplex: {problem}")
    s = x.s
    limit = SimplexState(s, 0.0, 0.0, 1.0 - s)
    crit = None
    bound_ok = None
    if beta > 0.0 and p.a + p.b * p.q > 0.0:
        crit = critical_alpha(p)
        if not start_fixed:
            bound_ok = s < crit
    return LimitReport(limit, n, converged, bound_ok, crit, x)


def entry_time_into_M(x0: Sequence[float], p: Params, max_iter: int = DEFAULT_MAX_ITER) -> int | None:
    """Smallest day k with state k in M, or None if not reached by max_iter."""
    require_admissible(p)
    x = as_state(x0)
    if is_fixed(x):
        raise NotApplicableError("a fixed point never enters M (A = B = 0 forever)")
    beta, q, a, b = p.beta, p.q, p.a, p.b
    for k in range(max_iter + 1):
        if in_M(x, p):
            return k
        x = raw_step(*x, beta, q, a, b)
    return None


def _window_differences(v_window: Sequence[float]):
    if len(v_window) != 4:
        raise ValueError(f"need four consecutive r values, got {len(v_window)}")
    v0, v1, v2, v3 = (float(v) for v in v_window)
    d0, d1, d2 = v1 - v0, v2 - v1, v3 - v2
    # Each stored r carries up to half an ulp of rounding, so each first
    # difference is known only to within one ulp of the largest r.
    ulp = float(np.spacing(max(abs(v0), abs(v1), abs(v2), abs(v3), np.finfo(float).tiny)))
    return d0, d1, d2, ulp


def reconstruct_from_v(v_window: Sequence[float], p: Params) -> tuple[float, float, float]:
    """Recover (s, e, i) on day n from r on days n..n+3.

    i = (r1 - r0) / b
    e = (r2 + (b - 2) r1 + (1 - b) r0) / (ab)
    s = (r3 + (a+b-3) r2 + (3+ab-2a-2b) r1 + (a+b-ab-1) r0)
        / (β (q r2 + (a+bq-2q) r1 + (q-bq-a) r0))

    Every coefficient set sums to zero, so all three are evaluated on first and
    second differences of r (exact for neighbouring doubles) instead of on r
    itself, which would cancel O(1) terms down to O(flux).

    Raises DegenerateWindowError when the s-denominator is no larger than the
    uncertainty it inherits from rounding in the r values.
    """
    if not (p.a > 0.0 and p.b > 0.0 and p.beta > 0.0):
        raise ParameterError("reconstruction needs a, b and beta all positive")
    a, b, beta, q = p.a, p.b, p.beta, p.q
    d0, d1, d2, ulp = _window_differences(v_window)
    dd0, dd1 = d1 - d0, d2 - d1
    i = d0 / b
    e = (dd0 + b * d0) / (a * b)
    den = q * dd0 + (a + b * q) * d0
    if abs(den) <= ulp * (q + abs(a + b * q - q)):
        raise DegenerateWindowError(f"s-denominator {den:.3g} is within rounding of zero; window {tuple(v_window)}")
    num = (dd1 - dd0) + (a + b) * dd0 + a * b * d0
    return num / (beta * den), e, i


def reconstruction_uncertainty(v_window: Sequence[float], p: Params) -> float:
    """First-order bound on the error in reconstructed s caused by rounding of
    the stored r values alone (inf when the denominator is within rounding of 0).
    """
    a, b, beta, q = p.a, p.b, p.beta, p.q
    d0, d1, d2, ulp = _window_differences(v_window)
    dd0 = d1 - d0
    den = q * dd0 + (a + b * q) * d0
    num = (d2 - d1 - dd0) + (a + b) * dd0 + a * b * d0
    den_err = ulp * (q + abs(a + b * q - q))
    if abs(den) <= den_err:
        return math.inf
    num_err = ulp * (1.0 + abs(a + b - 2.0) + (1.0 - a) * (1.0 - b))
    s = num / (beta * den)
    return (num_err + abs(s) * beta * den_err) / (beta * abs(den))


def recurrence_rhs(v0, v1, v2, p: Params):
    """Right-hand side of ab·v(n+3) = F(v(n), v(n+1), v(n+2)). Works on arrays."""
    a, b, beta, q = p.a, p.b, p.beta, p.q
    c = q - a - b * q  # recurring combination
    d = a + b * q - 2.0 * q
    ab1 = (1.0 - a) * (1.0 - b)
    return (
        -beta * q * v2 * v2
        - beta * (2.0 * b * q - 4.0 * q + a + a * q) * v2 * v1
        - beta * (q * ab1 + c) * v2 * v0
        - beta * d * (a + b - 2.0) * v1 * v1
        - beta * (ab1 * d + (a + b - 2.0) * c) * v1 * v0
        - beta * ab1 * c * v0 * v0
        - a * b * (a + b - beta * q - 3.0) * v2
        - a * b * (3.0 + a * b - 2.0 * a - 2.0 * b - beta * d) * v1
        - a * b * (a + b - a * b - 1.0 - beta * c) * v0
    )


def recurrence_residuals(v: Sequence[float], p: Params) -> np.ndarray:
    """|F(v(n), v(n+1), v(n+2)) - ab·v(n+3)| for every complete window.

    The difference F - ab·v(n+3) is expanded in v(n) and the first differences
    of v, where every term carries at least one difference. Constant windows
    therefore give exactly 0 and no O(1) terms cancel.
    """
    v = np.asarray(v, dtype=float)
    if v.size < 4:
        raise ValueError("need at least four values")
    a, b, beta, q = p.a, p.b, p.beta, p.q
    v0 = v[:-3]
    d0, d1, d2 = v[1:-2] - v0, v[2:-1] - v[1:-2], v[3:] - v[2:-1]
    k = a + b * q - q
    res = (
        -a * b * beta * v0 * (k * d0 + q * d1)
        - beta * (a + b - 1.0) * k * d0 * d0
        - beta * (a * q + a + 2.0 * b * q - 2.0 * q) * d0 * d1
        - beta * q * d1 * d1
        + a * b * (a + b - a * b + beta * (a + b * q - q) - 1.0) * d0
        + a * b * (2.0 - a - b + beta * q) * d1
        - a * b * d2
    )
    return np.abs(res)


def recurrence_residual(t: Trajectory) -> float:
    """Largest recurrence residual along a trajectory of length >= 4."""
    if len(t) < 4:
        raise ValueError("trajectory must contain at least four days")
    return float(recurrence_residuals(t.r, t.params).max())

