"""Shared fixtures: reference mixtures used across the suite."""
import numpy as np
import pytest

import specmix as sp


@pytest.fixture(scope="session")
def blend_mix():
    """Three components on d=3 with the third a 1/3-2/3 blend of the
    first two, so the components are linearly dependent but pairwise
    distinct.  First two are binomial(2, 0.2) and binomial(2, 0.8)."""
    return sp.make_mixture(
        [0.5, 0.3, 0.2],
        [[0.64, 0.32, 0.04], [0.04, 0.32, 0.64], [0.24, 0.32, 0.44]],
    )


@pytest.fixture(scope="session")
def fixed_xi():
    """Reference measure (9, 4, 1): separates the blend_mix norms."""
    return sp.dominating_measure([9.0, 4.0, 1.0])


@pytest.fixture(scope="session")
def indep_mix():
    """Linearly independent components with distinct Euclidean norms."""
    return sp.make_mixture(
        [0.3, 0.3, 0.4],
        [[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.2, 0.2, 0.6]],
    )


def random_mixture(rng: np.random.Generator, m: int, d: int) -> sp.MixtureSpec:
    """Random mixture with weights bounded away from 0."""
    w = rng.dirichlet(np.full(m, 5.0))
    comps = rng.dirichlet(np.ones(d), size=m)
    return sp.make_mixture(w, comps)
