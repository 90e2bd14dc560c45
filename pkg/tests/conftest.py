import numpy as np
import pytest

from anisodisp.spectral import Grid2D, SpectralField


@pytest.fixture
def grid32():
    return Grid2D(32, 10.0)


@pytest.fixture
def grid64():
    return Grid2D(64, 10.0)


def random_field(grid, seed=0, width=2.0):
    """Seeded smooth random real field, zero-mean, Nyquist-free."""
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((grid.N, grid.N)) + 1j * rng.standard_normal(
        (grid.N, grid.N)
    )
    c *= np.exp(-grid.xi_sq / (2.0 * width**2))
    f = SpectralField(grid, c)
    f.enforce_hermitian().zero_nyquist().zero_mean()
    return f
