"""Hypothesis strategies for states and channels (seed-driven)."""
from hypothesis import strategies as st

from cohsmooth.states import random_density, random_incoherent_channel

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)


@st.composite
def states(draw, d=None, rank=None):
    dim = draw(dims) if d is None else d
    return random_density(dim, rank=rank, seed=draw(seeds))


@st.composite
def state_and_channel(draw, d=None):
    dim = draw(dims) if d is None else d
    rho = random_density(dim, seed=draw(seeds))
    ch = random_incoherent_channel(dim, n_kraus=draw(st.integers(1, 3)), seed=draw(seeds))
    return rho, ch
