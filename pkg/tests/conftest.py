import numpy as np
import pytest

from hetmed import dataset_from_arrays


def make_dataset(gamma, tau, se_gamma=0.0, se_tau=0.0, n=None, cov_uv=None, **kw):
    return dataset_from_arrays(gamma, se_gamma, tau, se_tau, n=n, cov_uv=cov_uv, **kw)


@pytest.fixture
def noisy_dataset():
    rng = np.random.default_rng(42)
    K = 40
    gamma = rng.normal(2, 1, K)
    se_u = rng.gamma(1, 1, K) * 0.5
    se_v = rng.gamma(1, 1, K) * 0.5
    tau = 4 + 1.5 * gamma + rng.normal(0, 0.5, K)
    return dataset_from_arrays(
        gamma + se_u * rng.standard_normal(K), se_u,
        tau + se_v * rng.standard_normal(K), se_v,
        n=rng.integers(20, 200, K),
    )
