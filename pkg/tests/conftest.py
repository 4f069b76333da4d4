import pytest

from poiseuille_waves import kernel


@pytest.fixture(scope="session")
def mode05():
    return kernel.assemble_kernel_mode(0.05)


@pytest.fixture(scope="session")
def mu05(mode05):
    return mode05.mu_tilde_star
