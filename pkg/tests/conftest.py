import pytest

from repnum import arith


@pytest.fixture(scope="session")
def table():
    # limit 1e4 covers every engine run up to x = 1e8 and factoring to 1e8
    return arith.prime_table(10**4, spf_cap=10**4)


@pytest.fixture(scope="session")
def table6():
    return arith.prime_table(10**6, spf_cap=10**6)
