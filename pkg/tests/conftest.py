"""Shared helpers for the test suite.

The random tables used by structural tests come from explicit internal-state
ensembles rather than independent uniform draws: a table whose entries are
jointly realizable by some preparation keeps every channel probability
non-negative, while structurally valid but jointly unphysical entries only
preserve the channel sum. Tests that need the latter, weaker setting build
raw tables directly.
"""

import numpy as np
import pytest

from fockdiag import (
    AsppTable,
    InputState,
    InternalEnsemble,
    PhaseMixture,
    effective_aspp,
    required_aspp_pairs,
)


def random_real_ensemble(
    rng: np.random.Generator, dim: int = 3, max_branches: int = 3
) -> InternalEnsemble:
    """Mixture of real unit vectors with Dirichlet weights.

    Real vectors keep every pairwise overlap real, matching the convention
    the closed forms assume.
    """
    count = int(rng.integers(1, max_branches + 1))
    weights = rng.dirichlet(np.ones(count))
    branches = []
    for weight in weights:
        vec = rng.normal(size=dim)
        vec = vec / np.linalg.norm(vec)
        branches.append((float(weight), vec.astype(complex)))
    return InternalEnsemble(tuple(branches))


def random_physical_table(state: InputState, rng: np.random.Generator) -> AsppTable:
    """Overlap-power table realized by an explicit random preparation."""
    upper = random_real_ensemble(rng)
    lower = random_real_ensemble(rng)
    mixture = PhaseMixture.dephasing(float(rng.uniform(0.2, 1.0)), state.total)
    entries = {
        pair: effective_aspp(upper, lower, mixture, *pair)
        for pair in required_aspp_pairs(state)
    }
    return AsppTable(entries)


def random_raw_table(state: InputState, rng: np.random.Generator) -> AsppTable:
    """Independent uniform entries in [0, 1]; valid but not jointly physical."""
    entries = {
        pair: float(rng.uniform(0.0, 1.0))
        for pair in required_aspp_pairs(state)
        if pair != (0, 0)
    }
    return AsppTable(entries)


def all_states(max_total: int) -> list[InputState]:
    """Every supported input state with N + M up to ``max_total``."""
    states = []
    for n in range(1, max_total + 1):
        for m in range(0, min(n, max_total - n + 1)):
            if n + m <= max_total and m < n:
                states.append(InputState.superposition(n, m))
    for n in range(1, max_total // 2 + 1):
        states.append(InputState.twin_fock(n))
    return states


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20250815)
