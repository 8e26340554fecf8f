"""Shared fixtures: small networks and objective stacks."""

import numpy as np
import pytest

from dalopt.harness import generate_quadratic_stack, reference_solve
from dalopt.network import build_chain_graph, build_complete_graph, build_network


@pytest.fixture(scope="session")
def chain5_net():
    return build_network(build_chain_graph(5))


@pytest.fixture(scope="session")
def complete3_net():
    return build_network(build_complete_graph(3))


@pytest.fixture(scope="session")
def quad5_stack():
    return generate_quadratic_stack(5, 3, seed=2, h_lo=1.0, h_hi=2.0)


@pytest.fixture(scope="session")
def quad5_ref(quad5_stack):
    return reference_solve(quad5_stack)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
