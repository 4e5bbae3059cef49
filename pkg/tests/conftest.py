import numpy as np
import pytest

from reflectwalk import LatticeLaw, law_from_masses, minimize_mgf, tilt


@pytest.fixture(scope="session")
def law_a() -> LatticeLaw:
    """Centered three-point law, uniform on {-1, 0, 1}."""
    return law_from_masses({-1: 1 / 3, 0: 1 / 3, 1: 1 / 3})


@pytest.fixture(scope="session")
def law_b() -> LatticeLaw:
    """Drifted three-point law, drift +0.3."""
    return law_from_masses({-1: 0.2, 0: 0.3, 1: 0.5})


@pytest.fixture(scope="session")
def law_p5() -> LatticeLaw:
    """Symmetric five-point law on {-2..2}; the smallest a = 2 fixture."""
    return law_from_masses({k: 0.2 for k in range(-2, 3)})


@pytest.fixture(scope="session")
def law_asym() -> LatticeLaw:
    """Centered but asymmetric law with a = 2 (separates interval conventions)."""
    return law_from_masses({-2: 0.1, -1: 0.2, 0: 0.3, 1: 0.4})


def random_laws(count: int, seed: int, centered: bool):
    """Seeded sample of valid laws; centered ones are produced by tilting."""
    rng = np.random.default_rng(seed)
    laws = []
    while len(laws) < count:
        a = int(rng.integers(1, 4))
        b = int(rng.integers(1, 4))
        masses = rng.dirichlet(np.ones(a + b + 1)) + 0.02
        masses /= masses.sum()
        law = law_from_masses({k - a: m for k, m in enumerate(masses)})
        if centered:
            law = tilt(law, minimize_mgf(law).r0)
        laws.append(law)
    return laws
