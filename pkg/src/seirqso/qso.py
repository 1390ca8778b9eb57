"""Quadratic stochastic operator form of the SEIR map.

On the simplex the one-day map can be homogenized (multiply the linear terms
by s + e + i + r = 1) so that every output coordinate is a quadratic form

    x'_k = sum_ij P[i, j, k] x_i x_j

with a symmetric coefficient cube P. Indices here are 0-based in code and
1-based in the text dump.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Params, SimplexState, as_state, check_rows

S, E, I, R = range(4)


@dataclass(frozen=True)
class QsoTensor:
    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float)
        if arr.shape != (4, 4, 4):
            raise ValueError(f"expected a 4x4x4 array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def __getitem__(self, idx):
        return self.entries[idx]

    def with_entry(self, i: int, j: int, k: int, value: float, symmetric: bool = False) -> "QsoTensor":
        """Copy with one coefficient replaced (0-based indices)."""
        arr = self.entries.copy()
        arr[i, j, k] = value
        if symmetric:
            arr[j, i, k] = value
        return QsoTensor(arr)


def build_tensor(p: Params) -> QsoTensor:
    """Coefficient cube for parameters p.

    Admissibility is not required: inadmissible parameters give a cube with
    negative entries, which verify_tensor reports.
    """
    beta, q, a, b = p.beta, p.q, p.a, p.b
    P = np.zeros((4, 4, 4))
    # Diagonal terms x_i^2.
    P[S, S, S] = 1.0
    P[E, E, E] = 1.0 - a
    P[E, E, I] = a
    P[I, I, I] = 1.0 - b
    P[I, I, R] = b
    P[R, R, R] = 1.0
    # Cross terms x_i x_j (i < j) carry half the mixed coefficient each side.
    half = {
        (S, E, S): 1.0 - beta * q,
        (S, I, S): 1.0 - beta,
        (S, R, S): 1.0,
        (S, E, E): 1.0 - a + beta * q,
        (S, I, E): beta,
        (E, I, E): 1.0 - a,
        (E, R, E): 1.0 - a,
        (S, E, I): a,
        (S, I, I): 1.0 - b,
        (E, I, I): 1.0 + a - b,
        (E, R, I): a,
        (I, R, I): 1.0 - b,
        (S, I, R): b,
        (S, R, R): 1.0,
        (E, I, R): b,
        (E, R, R): 1.0,
        (I, R, R): 1.0 + b,
    }
    for (i, j, k), twice in half.items():
        P[i, j, k] = P[j, i, k] = twice / 2.0
    return QsoTensor(P)


def apply(t: QsoTensor, x: Sequence[float]) -> SimplexState:
    """Evaluate x'_k = sum_ij P[i, j, k] x_i x_j for a state on the simplex."""
    v = np.asarray(as_state(x), dtype=float)
    out = np.einsum("ijk,i,j->k", t.entries, v, v)
    return SimplexState(*(float(c) for c in out))


def apply_many(t: QsoTensor, X: np.ndarray) -> np.ndarray:
    """Row-wise apply for an (n, 4) array of simplex states."""
    X = np.asarray(X, dtype=float)
    check_rows(X)
    return np.einsum("ijk,ni,nj->nk", t.entries, X, X)


@dataclass(frozen=True)
class Violation:
    index: tuple[int, ...]  # 1-based
    amount: float


@dataclass(frozen=True)
class TensorReport:
    symmetric: bool
    nonnegative: bool
    stochastic: bool
    worst_asymmetry: Violation
    worst_negative: Violation
    worst_row_sum: Violation
    tol: float

    @property
    def passed(self) -> bool:
        return self.symmetric and self.nonnegative and self.stochastic

    @property
    def failures(self) -> list[str]:
        out = []
        if not self.symmetric:
            out.append("symmetry")
        if not self.nonnegative:
            out.append("non-negativity")
        if not self.stochastic:
            out.append("stochasticity")
        return out

    def as_dict(self) -> dict:
        def fmt(v: Violation) -> dict:
            return {"index": list(v.index), "amount": v.amount}

        return {
            "passed": self.passed,
            "tol": self.tol,
            "symmetry": {"passed": self.symmetric, "worst": fmt(self.worst_asymmetry)},
            "non_negativity": {"passed": self.nonnegative, "worst": fmt(self.worst_negative)},
            "stochasticity": {"passed": self.stochastic, "worst": fmt(self.worst_row_sum)},
            "failures": self.failures,
        }


def verify_tensor(t: QsoTensor, tol: float = 1e-12) -> TensorReport:
    """Check symmetry, non-negativity and row-stochasticity of the cube.

    `tol` bounds |P_ij,k - P_ji,k| and |sum_k P_ij,k - 1|. Non-negativity is
    checked exactly: a negative coefficient only arises from a strictly
    violated parameter inequality (e.g. fl(βq) > 1 gives 1 - βq < 0), so any
    slack there would accept inadmissible parameters.

    The reported amount is the worst asymmetry, the most negative entry (as a
    positive magnitude, 0 if none) and the worst row-sum residual.
    """
    P = t.entries
    asym = np.abs(P - P.transpose(1, 0, 2))
    ia = np.unravel_index(int(np.argmax(asym)), asym.shape)
    neg = np.maximum(-P, 0.0)
    ineg = np.unravel_index(int(np.argmax(neg)), neg.shape)
    resid = np.abs(P.sum(axis=2) - 1.0)
    ir = np.unravel_index(int(np.argmax(resid)), resid.shape)

    def one_based(idx) -> tuple[int, ...]:
        return tuple(int(k) + 1 for k in idx)

    return TensorReport(
        symmetric=bool(asym[ia] <= tol),
        nonnegative=bool(neg[ineg] == 0.0),
        stochastic=bool(resid[ir] <= tol),
        worst_asymmetry=Violation(one_based(ia), float(asym[ia])),
        worst_negative=Violation(one_based(ineg), float(neg[ineg])),
        worst_row_sum=Violation(one_based(ir), float(resid[ir])),
        tol=tol,
    )


def dump_tensor(t: QsoTensor) -> str:
    """Text dump: one `i j k value` line per nonzero entry with i <= j, 1-based."""
    lines = []
    P = t.entries
    for i in range(4):
        for j in range(i, 4):
            for k in range(4):
                if P[i, j, k] != 0.0:
                    lines.append(f"{i + 1} {j + 1} {k + 1} {P[i, j, k]:.17g}")
    return "\n".join(lines) + "\n"


def load_tensor(text: str) -> QsoTensor:
    """Inverse of dump_tensor (symmetric completion applied)."""
    P = np.zeros((4, 4, 4))
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 'i j k value', got {line!r}")
        i, j, k = (int(c) - 1 for c in parts[:3])
        P[i, j, k] = P[j, i, k] = float(parts[3])
    return QsoTensor(P)
