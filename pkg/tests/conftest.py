"""Shared builders for solver-level tests."""
import numpy as np
import pytest

from ripm import problem as problem_mod
from ripm.rcp import PathParams


def embedded_instance(n=10, d=4, seed=0, delta=0.05):
    """A random box LP embedded with its starting triple and loop constants.

    Returns (embedded problem, modified wrapper, params, block barriers).
    """
    lp = problem_mod.random_lp(n=n, d=d, seed=seed)
    mp = problem_mod.build_modified(lp, delta=delta)
    emb = mp.problem
    params = PathParams.practical(emb.m, emb.nu, delta=delta)
    return emb, mp, params, emb.block_barriers


def active_start_t(mp, bb, params, factor=25.0):
    """A path parameter small enough that several blocks are active.

    From the delta-central start every block error scales like 1/t, so
    dividing the starting centrality by the activation threshold (times a
    margin) lands in the stepping regime rather than the pure-shrink one.
    """
    del bb
    return float(mp.delta / (params.threshold * factor))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
