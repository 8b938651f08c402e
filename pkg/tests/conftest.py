import math
from pathlib import Path

import numpy as np
import pytest

from bsf.instances import InstanceSpec, generate, read_instance

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def ex8():
    return read_instance(FIXTURES / "example8.txt")


def small_suite(count=50, seed0=0, ns=range(6, 11), ps=(0.3, 0.5), ks=(2, 3)):
    """Seeded instances cycling through every (n, p, k) cell whose density can connect n vertices."""
    cells = [(n, p, k) for n in ns for p in ps for k in ks if math.floor(p * n * (n - 1) / 2 + 1e-9) >= n - 1]
    out = []
    for i in range(count):
        n, p, k = cells[i % len(cells)]
        g, k = generate(InstanceSpec(n, p, k, seed=seed0 + i))
        out.append((f"n{n}_p{p}_k{k}_s{seed0 + i}", g, k))
    return out


def random_duals(rng, n, support_prob=0.3):
    from bsf.pricing import DualValues

    zeta = np.where(rng.random(n) < support_prob, rng.uniform(0.0, 0.1, n), 0.0)
    return DualValues(rng.uniform(0, 3), rng.normal(2, 3, n), zeta)
