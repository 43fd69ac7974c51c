import pytest

from rnmlab.potential import compute_droplet, make_ginibre
from rnmlab.orthopoly import default_grid, weighted_kernel
from rnmlab.sampler import (SamplerConfig, collect_mcmc, sample_dpp,
                            sample_ginibre_matrix, stream_rng)


@pytest.fixture(scope="session")
def ginibre():
    return make_ginibre()


@pytest.fixture(scope="session")
def ginibre_droplet(ginibre):
    return compute_droplet(ginibre, 1.0)


@pytest.fixture(scope="session")
def kern16(ginibre):
    return weighted_kernel(ginibre, 16.0, 16)


@pytest.fixture(scope="session")
def kern64(ginibre):
    return weighted_kernel(ginibre, 64.0, 64)


@pytest.fixture(scope="session")
def kern128(ginibre):
    return weighted_kernel(ginibre, 128.0, 128)


@pytest.fixture(scope="session")
def grid16(ginibre):
    return default_grid(ginibre, 16.0, 16)


# --- sample banks (session-wide so module tests and the acceptance suite
# --- share the expensive draws)


@pytest.fixture(scope="session")
def matrix_bank_n64():
    rng = stream_rng(20240801, 0)
    return [sample_ginibre_matrix(64, rng) for _ in range(2000)]


@pytest.fixture(scope="session")
def matrix_bank_n16():
    rng = stream_rng(20240802, 0)
    return [sample_ginibre_matrix(16, rng) for _ in range(2000)]


@pytest.fixture(scope="session")
def dpp_bank_n16(kern16):
    cfg = SamplerConfig(master_seed=20240803)
    rng = stream_rng(20240803, 0)
    return [sample_dpp(kern16, cfg, rng) for _ in range(2000)]


@pytest.fixture(scope="session")
def mcmc_bank_n16(ginibre):
    cfg = SamplerConfig(master_seed=20240804)
    rng = stream_rng(20240804, 0)
    return collect_mcmc(ginibre, 16.0, 16, cfg, rng, 2000)
