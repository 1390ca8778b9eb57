"""Linear stability of the fixed-point segment (alpha, 0, 0, 1 - alpha).

The recovered coordinate is dropped (it is determined by the other three on
the simplex) and the reduced map on (s, e, i) is linearized. Every fixed point
has the eigenvalue 1 along the segment itself, so none is hyperbolic; the
other two eigenvalues decide the local picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, ModelError, Params, SimplexState, fixed_point, require_admissible

BELOW, AT, ABOVE = "below", "at", "above"

# regime -> (dim stable, dim centre, dim unstable) eigenspaces
EIGENSPACE_DIMS = {BELOW: (2, 1, 0), AT: (1, 2, 0), ABOVE: (1, 1, 1)}


class UndefinedThresholdError(ModelError, ValueError):
    """The critical susceptible fraction does not exist (beta = 0 or a + bq = 0)."""


@dataclass(frozen=True)
class FixedPoint:
    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha!r}")

    @property
    def state(self) -> SimplexState:
        return fixed_point(self.alpha)


def fixed_point_segment(count: int) -> list[FixedPoint]:
    """`count` evenly spaced fixed points from alpha = 0 to alpha = 1."""
    if count < 2:
        raise ValueError("need at least the two endpoints")
    return [FixedPoint(float(a)) for a in np.linspace(0.0, 1.0, count)]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    return alpha


def jacobian_at(alpha: float, p: Params) -> np.ndarray:
    """Jacobian of the reduced (s, e, i) map at the fixed point with s = alpha."""
    require_admissible(p)
    alpha = _check_alpha(alpha)
    ba = p.beta * alpha
    return np.array(
        [
            [1.0, -p.q * ba, -ba],
            [0.0, 1.0 - p.a + p.q * ba, ba],
            [0.0, p.a, 1.0 - p.b],
        ]
    )


def characteristic(mu: float, alpha: float, p: Params) -> float:
    """(1 - mu) * [(1 - a + q*alpha*beta - mu)(1 - b - mu) - a*alpha*beta]."""
    ab = alpha * p.beta
    return (1.0 - mu) * ((1.0 - p.a + p.q * ab - mu) * (1.0 - p.b - mu) - p.a * ab)


def eigenvalues_at(alpha: float, p: Params) -> tuple[float, float, float, float]:
    """Closed-form spectrum (mu1, mu2, mu3, D) of jacobian_at(alpha, p).

    mu1 = 1 always; mu2 takes -sqrt(D) inside the bracket and mu3 takes +sqrt(D),
    so mu2 >= mu3.
    """
    require_admissible(p)
    alpha = _check_alpha(alpha)
    a, b = p.a, p.b
    qab = p.q * alpha * p.beta
    D = (b - a + qab) ** 2 + 4.0 * a * alpha * p.beta
    root = math.sqrt(D)
    mu2 = 1.0 - (a + b - qab - root) / 2.0
    mu3 = 1.0 - (a + b - qab + root) / 2.0
    return 1.0, mu2, mu3, D


def critical_alpha(p: Params) -> float:
    """Susceptible fraction ab / (beta (a + bq)) at which |mu2| crosses 1."""
    denom = p.beta * (p.a + p.b * p.q)
    if p.beta <= 0.0:
        raise UndefinedThresholdError("critical alpha is undefined for beta = 0")
    if denom <= 0.0:
        raise UndefinedThresholdError("critical alpha is undefined for a + bq = 0")
    return p.a * p.b / denom


def tie_band(critical: float) -> float:
    return 1e-12 * max(1.0, critical)


def regime_of(alpha: float, critical: float) -> str:
    if abs(alpha - critical) <= tie_band(critical):
        return AT
    return BELOW if alpha < critical else ABOVE


@dataclass(frozen=True)
class SpectralReport:
    alpha: float
    mu1: float
    mu2: float
    mu3: float
    discriminant: float
    critical_alpha: float | None
    regime: str | None  # None when beta = 0 (no threshold)
    dims: tuple[int, int, int]
    hyperbolic: bool = False

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "mu3": self.mu3,
            "D": self.discriminant,
            "critical_alpha": self.critical_alpha,
            "regime": self.regime,
            "dims": list(self.dims),
            "hyperbolic": self.hyperbolic,
        }


def _dims_by_modulus(mus, band: float = 1e-12) -> tuple[int, int, int]:
    stable = sum(abs(m) < 1.0 - band for m in mus)
    unstable = sum(abs(m) > 1.0 + band for m in mus)
    return stable, len(mus) - stable - unstable, unstable


def classify(alpha: float, p: Params) -> SpectralReport:
    """Spectrum, regime relative to the critical alpha, and eigenspace dimensions.

    With beta = 0 the Jacobian is triangular with spectrum {1, 1 - a, 1 - b};
    no regime is assigned and the dimensions are counted from the moduli.
    """
    mu1, mu2, mu3, D = eigenvalues_at(alpha, p)
    alpha = float(alpha)
    if p.beta == 0.0:
        return SpectralReport(alpha, mu1, mu2, mu3, D, None, None, _dims_by_modulus((mu1, mu2, mu3)))
    crit = critical_alpha(p)
    regime = regime_of(alpha, crit)
    return SpectralReport(alpha, mu1, mu2, mu3, D, crit, regime, EIGENSPACE_DIMS[regime])
