"""Shared test data and generators."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from seirqso.core import Params, SimplexState

UZBEKISTAN = Params(beta=0.12, q=1.0, a=0.1, b=0.066)
UZBEKISTAN_X0 = SimplexState(0.99999, 0.0, 0.00001, 0.0)
UZBEKISTAN_N = 34_000_000


def random_params(rng: np.random.Generator, lo: float = 0.01, b_le_beta: bool = False) -> Params:
    """Admissible parameters with a, b, beta bounded away from 0."""
    beta = rng.uniform(lo, 1.0)
    a = rng.uniform(lo, 1.0)
    b = rng.uniform(lo, beta) if b_le_beta else rng.uniform(lo, 1.0)
    q = rng.uniform(0.0, min(3.0, 1.0 / beta))
    return Params(beta=beta, q=q, a=a, b=b)


def random_state(rng: np.random.Generator) -> SimplexState:
    w = rng.dirichlet(np.ones(4))
    return SimplexState(w[0], w[1], w[2], 1.0 - w[0] - w[1] - w[2])


unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def admissible_params(draw, beta_min: float = 0.0, rate_min: float = 0.0, rate_max: float = 1.0) -> Params:
    beta = draw(st.floats(beta_min, 1.0))
    q_max = 3.0 if beta == 0 else min(3.0, 1.0 / beta)
    q = draw(st.floats(0.0, q_max))
    if beta * q > 1.0:
        q = 1.0 / beta
    rate = st.floats(rate_min, rate_max)
    return Params(beta=beta, q=q, a=draw(rate), b=draw(rate))


@st.composite
def simplex_states(draw) -> SimplexState:
    w = [draw(st.floats(0.0, 1.0)) for _ in range(4)]
    total = sum(w)
    if total == 0.0:
        return SimplexState(1.0, 0.0, 0.0, 0.0)
    s, e, i = (c / total for c in w[:3])
    return SimplexState(s, e, i, max(0.0, 1.0 - s - e - i))
