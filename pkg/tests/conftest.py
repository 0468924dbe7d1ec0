import pytest

from rslab.forms import build_derived_table, build_fourier_table

SMALL_N = 20_000
MID_N = 1 << 17


@pytest.fixture(scope="session")
def small_table():
    return build_fourier_table(SMALL_N)


@pytest.fixture(scope="session")
def small_derived(small_table):
    return build_derived_table(small_table)


@pytest.fixture(scope="session")
def mid_derived():
    return build_derived_table(build_fourier_table(MID_N))


def naive_tau(n_max):
    """q ∏ (1 - q^n)^24 to order n_max by repeated multiplication by (1 - q^n)."""
    c = [0] * (n_max + 1)
    c[0] = 1
    for n in range(1, n_max + 1):
        for _ in range(24):
            for k in range(n_max, n - 1, -1):
                c[k] -= c[k - n]
    return [0] + c[:n_max]  # tau[n] = coefficient of q^{n-1} in the product
