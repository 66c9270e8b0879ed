import numpy as np
import pytest

from netshift.graph import SBM_B, make_sbm_scenario, sample_pair


@pytest.fixture(scope="session")
def sbm200():
    sc = make_sbm_scenario(200, SBM_B, 0.5, rng_seed=11)
    g1, g2 = sample_pair(sc, 11)
    return sc, g1, g2


def random_orthogonal(rng, d):
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diagonal(R))
