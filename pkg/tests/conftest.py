import pytest

import covrepair as cr


@pytest.fixture(scope="session")
def fourpartite() -> cr.Dataset:
    return cr.load_bundled("fourpartite")


@pytest.fixture(scope="session")
def fourpartite_reference() -> cr.Dataset:
    """Transcribed reference solution of the weighted repair."""
    return cr.load_bundled("fourpartite_repaired")


@pytest.fixture(scope="session")
def weighted_repair(fourpartite) -> cr.RepairResult:
    return cr.repair(fourpartite.gamma, fourpartite.sigma)


@pytest.fixture(scope="session")
def unweighted_repair(fourpartite) -> cr.RepairResult:
    return cr.repair(fourpartite.gamma, None)
