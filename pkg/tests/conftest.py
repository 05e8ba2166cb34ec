import math

import numpy as np
import pytest

from conecontract.normcore import NormSpec

INF = math.inf


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def norm_family(n, rng):
    """Identity, diagonal and general weights at p in {1, 1.5, 2, 3, inf}."""
    out = []
    for p in (1.0, 1.5, 2.0, 3.0, INF):
        out.append(NormSpec.identity(p))
        out.append(NormSpec.diag(p, rng.uniform(0.5, 2.0, n)))
        out.append(NormSpec.general(p, np.eye(n) + rng.uniform(0, 0.5, (n, n))))
    return out
