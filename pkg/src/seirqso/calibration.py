"""Exhaustive grid search for parameters that reproduce an observed peak day
(and optionally a completion day).

Day indices are piecewise constant in the parameters, so the loss has no
useful gradient; every grid point is evaluated. The grid is simulated as one
vectorized batch, which keeps results independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ModelError, Params, SimplexState, as_state, raw_step, require_admissible

HORIZON_CAP = 20_000  # days simulated at most per parameter set
CAP_PENALTY = 10_000.0  # added to the loss when completion is not reached by HORIZON_CAP
MAX_GRID_POINTS = 10**6
DEFAULT_RESOLUTION = 20


class CalibrationError(ModelError, ValueError):
    """Invalid search box or target."""


@dataclass(frozen=True)
class CalibrationTarget:
    target_peak_day: int
    population: float
    initial_state: SimplexState
    target_completion_day: int | None = None
    completion_threshold: float | None = None  # defaults to 1 / population

    def __post_init__(self) -> None:
        object.__setattr__(self, "initial_state", as_state(self.initial_state))
        if self.population <= 0:
            raise CalibrationError(f"population must be positive, got {self.population}")
        if self.target_peak_day <= 0:
            raise CalibrationError("target peak day must be positive")
        if self.target_completion_day is not None and self.target_completion_day <= self.target_peak_day:
            raise CalibrationError("target completion day must come after the target peak day")

    @property
    def threshold(self) -> float:
        if self.completion_threshold is not None:
            return self.completion_threshold
        return 1.0 / self.population


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    n: int

    def values(self) -> np.ndarray:
        if self.n < 1 or self.lo > self.hi:
            raise CalibrationError(f"empty axis {self}")
        if self.n == 1:
            if self.lo != self.hi:
                raise CalibrationError(f"a single-point axis needs lo == hi, got {self}")
            return np.array([float(self.lo)])
        return np.linspace(self.lo, self.hi, self.n)

    def refined(self) -> "Axis":
        """Halve the spacing, keeping every existing point."""
        return self if self.n == 1 else Axis(self.lo, self.hi, 2 * self.n - 1)


@dataclass(frozen=True)
class SearchBox:
    a: Axis
    b: Axis
    beta: Axis
    q: Axis

    @classmethod
    def default(cls, resolution: int = DEFAULT_RESOLUTION) -> "SearchBox":
        """Literature ranges: beta 0.1-0.3, a 0.07-0.5, b 0.05-0.1, with q fixed at 1."""
        return cls(
            a=Axis(0.07, 0.5, resolution),
            b=Axis(0.05, 0.1, resolution),
            beta=Axis(0.1, 0.3, resolution),
            q=Axis(1.0, 1.0, 1),
        )

    @property
    def size(self) -> int:
        return self.a.n * self.b.n * self.beta.n * self.q.n

    def refined(self) -> "SearchBox":
        return SearchBox(self.a.refined(), self.b.refined(), self.beta.refined(), self.q.refined())

    def grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flat (a, b, beta, q) arrays in lexicographic order of the axes."""
        if self.size > MAX_GRID_POINTS:
            raise CalibrationError(f"grid too large: {self.size} points exceeds cap of {MAX_GRID_POINTS}")
        axes = [ax.values() for ax in (self.a, self.b, self.beta, self.q)]
        mesh = np.meshgrid(*axes, indexing="ij")
        a, b, beta, q = (m.ravel() for m in mesh)
        bad = (
            (a < 0) | (a > 1) | (b < 0) | (b > 1) | (beta < 0) | (beta > 1) | (q < 0) | (beta * q > 1)
        )
        if bad.any():
            k = int(np.argmax(bad))
            raise CalibrationError(
                f"search box leaves the admissible region at a={a[k]:g}, b={b[k]:g}, beta={beta[k]:g}, q={q[k]:g}"
            )
        return a, b, beta, q


def epidemic_days(
    p: Params,
    x0: Sequence[float],
    threshold: float,
    need_completion: bool = True,
    horizon_cap: int = HORIZON_CAP,
) -> tuple[int, int | None]:
    """(peak day, completion day or None) for a single parameter set.

    The simulation stops once the state is in M (after which i only falls) and,
    if requested, i has dropped below the threshold after the peak.
    """
    require_admissible(p)
    x = tuple(as_state(x0))
    beta, q, a, b = p.beta, p.q, p.a, p.b
    peak_day, peak_i, comp = 0, x[2], -1
    seen_M = False
    if x[2] < threshold:
        comp = 0
    day = 0
    while True:
        s, e, i, _ = x
        if not seen_M:
            A = a * e - beta * s * (i + q * e)
            B = b * i - a * e
            seen_M = A > 0.0 and B > 0.0
        if seen_M and (comp >= 0 or not need_completion):
            break
        if day >= horizon_cap:
            break
        x = raw_step(*x, beta, q, a, b)
        day += 1
        if x[2] > peak_i:
            peak_day, peak_i, comp = day, x[2], -1
        if comp < 0 and x[2] < threshold:
            comp = day
    return peak_day, (comp if comp >= 0 else None)


def batch_epidemic_days(
    a: np.ndarray,
    b: np.ndarray,
    beta: np.ndarray,
    q: np.ndarray,
    x0: Sequence[float],
    threshold: float,
    need_completion: bool = True,
    horizon_cap: int = HORIZON_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized epidemic_days over parameter arrays; completion -1 when not reached.

    Uses the same floating-point evaluation order as the scalar path so both
    give identical days.
    """
    n = a.shape[0]
    x0 = as_state(x0)
    s, e, i, r = (np.full(n, c) for c in x0)
    peak_day = np.zeros(n, dtype=np.int64)
    peak_i = i.copy()
    comp = np.where(i < threshold, 0, -1).astype(np.int64)
    seen_M = np.zeros(n, dtype=bool)
    day = 0
    while True:
        A = a * e - beta * s * (i + q * e)
        B = b * i - a * e
        seen_M |= (A > 0.0) & (B > 0.0)
        done = seen_M & ((comp >= 0) | (not need_completion))
        if done.all() or day >= horizon_cap:
            break
        live = ~done
        flux = beta * s * (i + q * e)
        s, e, i, r = (
            np.where(live, s - flux, s),
            np.where(live, (1.0 - a) * e + flux, e),
            np.where(live, (1.0 - b) * i + a * e, i),
            np.where(live, r + b * i, r),
        )
        day += 1
        rise = live & (i > peak_i)
        peak_day[rise] = day
        peak_i[rise] = i[rise]
        comp[rise] = -1
        hit = live & (comp < 0) & (i < threshold)
        comp[hit] = day
    return peak_day, comp


def _loss(peak_day, comp, tgt: CalibrationTarget, horizon_cap: int):
    loss = np.abs(np.asarray(peak_day, dtype=float) - tgt.target_peak_day)
    if tgt.target_completion_day is not None:
        comp = np.asarray(comp)
        missed = comp < 0
        reached = np.abs(comp.astype(float) - tgt.target_completion_day)
        penalty = CAP_PENALTY + abs(horizon_cap - tgt.target_completion_day)
        loss = loss + np.where(missed, penalty, reached)
    return loss


def objective(p: Params, tgt: CalibrationTarget, horizon_cap: int = HORIZON_CAP) -> float:
    """|peak - target peak| (+ |completion - target completion| if targeted).

    A completion not reached within horizon_cap days costs
    CAP_PENALTY + |horizon_cap - target completion|.
    """
    need = tgt.target_completion_day is not None
    peak_day, comp = epidemic_days(p, tgt.initial_state, tgt.threshold, need, horizon_cap)
    return float(_loss(peak_day, -1 if comp is None else comp, tgt, horizon_cap))


@dataclass(frozen=True)
class CalibrationResult:
    best: Params
    loss: float
    runner_ups: list[tuple[Params, float]]
    evaluated: int
    zero_loss: list[Params]  # every grid point that fits the target exactly

    def as_dict(self) -> dict:
        return {
            "best": self.best.as_dict(),
            "loss": self.loss,
            "runner_ups": [{"params": p.as_dict(), "loss": l} for p, l in self.runner_ups],
            "evaluated": self.evaluated,
            "zero_loss_count": len(self.zero_loss),
        }


def grid_search(
    box: SearchBox,
    tgt: CalibrationTarget,
    top: int = 10,
    horizon_cap: int = HORIZON_CAP,
) -> CalibrationResult:
    """Evaluate every grid point; ties broken by lexicographic (a, b, beta, q)."""
    a, b, beta, q = box.grid()
    need = tgt.target_completion_day is not None
    peak_day, comp = batch_epidemic_days(a, b, beta, q, tgt.initial_state, tgt.threshold, need, horizon_cap)
    loss = _loss(peak_day, comp, tgt, horizon_cap)
    # Stable sort on loss keeps grid (lexicographic) order among ties.
    order = np.argsort(loss, kind="stable")

    def params_at(k: int) -> Params:
        return Params(beta=float(beta[k]), q=float(q[k]), a=float(a[k]), b=float(b[k]))

    best = int(order[0])
    runners = [(params_at(int(k)), float(loss[k])) for k in order[1 : top + 1]]
    zero = [params_at(int(k)) for k in np.nonzero(loss == 0.0)[0]]
    return CalibrationResult(params_at(best), float(loss[best]), runners, a.shape[0], zero)
