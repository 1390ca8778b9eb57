"""Parameters, simplex states and the one-day SEIR evolution operator.

Coordinates are always ordered (s, e, i, r): susceptible, exposed,
infectious and recovered fractions of a closed population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

# |s + e + i + r - 1| allowed before a state is considered off the simplex.
SIMPLEX_TOL = 1e-12


class ModelError(Exception):
    """Base class for all errors raised by this package."""


class MalformedInputError(ModelError, ValueError):
    """A numeric input is NaN or infinite, or has the wrong shape."""


class ParameterError(ModelError, ValueError):
    """Parameters violate the admissibility conditions."""


class DomainError(ModelError, ValueError):
    """A state lies off the simplex (or an argument is outside its domain)."""


class DriftError(ModelError, ArithmeticError):
    """Floating-point drift pushed a computed state off the simplex."""


@dataclass(frozen=True)
class Params:
    """Model parameters.

    beta: contact-transmission rate per day.
    q: relative infectiousness of exposed contacts (non-negative by type).
    a: exposed -> infectious rate (1 / incubation period).
    b: infectious -> recovered rate (1 / infectious period).
    """

    beta: float
    q: float
    a: float
    b: float

    def __post_init__(self) -> None:
        for name in ("beta", "q", "a", "b"):
            try:
                value = float(getattr(self, name))
            except (TypeError, ValueError) as exc:
                raise MalformedInputError(f"{name} is not a number: {getattr(self, name)!r}") from exc
            if not math.isfinite(value):
                raise MalformedInputError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        # q < 0 is not a model at all: with beta = 0 no coefficient even sees it.
        if self.q < 0.0:
            raise MalformedInputError(f"q must be non-negative, got {self.q!r}")

    def as_dict(self) -> dict[str, float]:
        return {"beta": self.beta, "q": self.q, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    violations: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.ok


def validate_params(p: Params) -> Admissibility:
    """Check that the one-day operator maps the simplex into itself.

    Admissible iff a, b, beta lie in [0, 1] and beta*q <= 1.
    Each violation is reported as the failed inequality plus the offending value.
    """
    if not isinstance(p, Params):
        raise MalformedInputError(f"expected Params, got {type(p).__name__}")
    violations = []
    for name in ("a", "b", "beta"):
        value = getattr(p, name)
        if not 0.0 <= value <= 1.0:
            symbol = "β" if name == "beta" else name
            violations.append(f"0 ≤ {symbol} ≤ 1 ({symbol} = {value:g})")
    if p.beta * p.q > 1.0:
        violations.append(f"βq ≤ 1 (βq = {p.beta * p.q:g})")
    return Admissibility(not violations, tuple(violations))


def require_admissible(p: Params) -> None:
    verdict = validate_params(p)
    if not verdict.ok:
        raise ParameterError("inadmissible parameters: " + "; ".join(verdict.violations))


class SimplexState(NamedTuple):
    """A point (s, e, i, r) of the 3-simplex."""

    s: float
    e: float
    i: float
    r: float

    @classmethod
    def from_counts(cls, S: float, E: float, I: float, R: float, population: float) -> "SimplexState":
        """Normalize absolute compartment counts by the population size."""
        if not (math.isfinite(population) and population > 0):
            raise DomainError(f"population must be a positive finite number, got {population!r}")
        counts = (S, E, I, R)
        if any(not math.isfinite(c) or c < 0 for c in counts):
            raise DomainError(f"counts must be finite and non-negative, got {counts}")
        total = math.fsum(counts)
        if abs(total - population) > SIMPLEX_TOL * population:
            raise DomainError(f"counts sum to {total:g}, expected population {population:g}")
        return cls(S / population, E / population, I / population, R / population)

    @property
    def total(self) -> float:
        return self.s + self.e + self.i + self.r


def fixed_point(alpha: float) -> SimplexState:
    """The fixed point (alpha, 0, 0, 1 - alpha)."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    return SimplexState(alpha, 0.0, 0.0, 1.0 - alpha)


def is_fixed(x: Sequence[float]) -> bool:
    """Every state with no exposed and no infectious mass is fixed."""
    return x[1] == 0.0 and x[2] == 0.0


def simplex_violation(x: Sequence[float]) -> str | None:
    """Describe why x is off the simplex, or return None if it is on it."""
    if len(x) != 4:
        return f"expected 4 coordinates, got {len(x)}"
    for name, value in zip("seir", x):
        if not math.isfinite(value):
            return f"{name} is not finite ({value!r})"
        if value < -SIMPLEX_TOL or value > 1.0 + SIMPLEX_TOL:
            return f"{name} = {value!r} is outside [0, 1]"
    drift = abs(math.fsum(x) - 1.0)
    if drift > SIMPLEX_TOL:
        return f"coordinates sum to 1 {'+' if math.fsum(x) > 1 else '-'} {drift:.3g}"
    return None


def as_state(x: Sequence[float]) -> SimplexState:
    """Coerce x to a SimplexState, raising DomainError if it is off the simplex."""
    try:
        state = SimplexState(*(float(c) for c in x))
    except TypeError as exc:
        raise MalformedInputError(f"cannot read a 4-coordinate state from {x!r}") from exc
    problem = simplex_violation(state)
    if problem is not None:
        raise DomainError(f"state {tuple(state)} is off the simplex: {problem}")
    return state


def raw_step(s: float, e: float, i: float, r: float, beta: float, q: float, a: float, b: float):
    # No checks; callers validate once and loop. Evaluation order is shared
    # with the vectorized kernel in calibration, keep the two in sync.
    # (1 - a) e rather than e - ae: 1 - a is exact for a >= 1/2, so pure decay
    # loses at most one rounding per step even when a is close to 1.
    flux = beta * s * (i + q * e)
    return s - flux, (1.0 - a) * e + flux, (1.0 - b) * i + a * e, r + b * i


def step(x: Sequence[float], p: Params) -> SimplexState:
    """Advance a state by one day.

    Returns (s - βs(i+qe), e - ae + βs(i+qe), i - bi + ae, r + bi). The result
    is not renormalized; a DriftError is raised if it leaves the simplex.
    """
    require_admissible(p)
    x = as_state(x)
    out = SimplexState(*raw_step(*x, p.beta, p.q, p.a, p.b))
    problem = simplex_violation(out)
    if problem is not None:
        raise DriftError(f"step left the simplex: {problem}")
    return out


def check_rows(X: np.ndarray) -> None:
    """Raise DomainError unless every row of an (n, 4) array is on the simplex."""
    if X.ndim != 2 or X.shape[1] != 4:
        raise MalformedInputError(f"expected an (n, 4) array, got shape {X.shape}")
    bad = (
        ~np.isfinite(X).all(axis=1)
        | (X < -SIMPLEX_TOL).any(axis=1)
        | (X > 1.0 + SIMPLEX_TOL).any(axis=1)
        | (np.abs(X.sum(axis=1) - 1.0) > SIMPLEX_TOL)
    )
    if bad.any():
        k = int(np.argmax(bad))
        raise DomainError(f"row {k} {tuple(X[k])} is off the simplex")


def step_many(X: np.ndarray, p: Params) -> np.ndarray:
    """Row-wise step for an (n, 4) array of simplex states."""
    require_admissible(p)
    X = np.asarray(X, dtype=float)
    check_rows(X)
    out = np.column_stack(raw_step(X[:, 0], X[:, 1], X[:, 2], X[:, 3], p.beta, p.q, p.a, p.b))
    try:
        check_rows(out)
    except DomainError as exc:
        raise DriftError(f"step left the simplex: {exc}") from exc
    return out
