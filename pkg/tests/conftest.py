import numpy as np
import pytest

from hmfsim.equilibrium import f0_density, solve_m0


@pytest.fixture(scope="session")
def eq01():
    return solve_m0(0.1)


@pytest.fixture(scope="session")
def thermal_density(eq01):
    return lambda x, p: f0_density(x, p, eq01)
