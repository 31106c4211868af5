import numpy as np
import pytest

from oscnet import ChainSpec, NetworkSpec, chain_decomposition, check_assumptions, diagonalize


@pytest.fixture(scope="session")
def chain8():
    """The reference chain: N=8, omega=1, J=K=0.2."""
    cs = ChainSpec(8, 1.0, 0.2)
    return cs, cs.as_network_spec(), chain_decomposition(cs)


@pytest.fixture(scope="session")
def two_mode():
    """Small generic two-mode network with both J and K couplings."""
    spec = NetworkSpec([1.0, 1.3], [[0, 0.1], [0.1, 0]], [[0, 0.05], [0.05, 0]])
    return spec, diagonalize(spec)


def random_stable_spec(rng: np.random.Generator, n_max: int = 6) -> NetworkSpec:
    """Random network satisfying stability plus A1/A2 (resamples until ok)."""
    while True:
        n = int(rng.integers(1, n_max + 1))
        omega = rng.uniform(0.8, 1.6, size=n)
        J = np.zeros((n, n))
        K = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                J[i, j] = J[j, i] = rng.uniform(-0.12, 0.12)
                K[i, j] = K[j, i] = rng.uniform(-0.08, 0.08)
        spec = NetworkSpec(omega, J, K)
        try:
            decomp = diagonalize(spec)
        except Exception:
            continue
        report = check_assumptions(decomp, g_tol=1e-4, gap_tol=1e-3)
        if report.passed:
            return spec
