import pytest

from zetalab import ntcore


@pytest.fixture(scope="session")
def tables_small():
    return ntcore.build_sieve(10_000)


@pytest.fixture(scope="session")
def tables_big():
    # shared by the heavy scans and the random-pair identity checks
    return ntcore.build_sieve(1_000_000)
