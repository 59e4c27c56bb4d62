import numpy as np
import pytest

from janglab.barrier import BarrierProfile, find_r0
from janglab.capillary import select_capillary_config
from janglab.geometry import make_dataset
from janglab.grids import build_grid
from janglab.jang_metric import build_graph_geometry
from janglab.jang_solver import exhaustion_solve


@pytest.fixture(scope="session")
def base_grid():
    return build_grid(512.0, 2048, "uniform")


@pytest.fixture(scope="session")
def dec_data(base_grid):
    return make_dataset("perturbed-dec", 4,
                        {"m": 1.0, "amplitude": 0.05},
                        grid=base_grid, seed=7)


@pytest.fixture(scope="session")
def flat_data(base_grid):
    return make_dataset("flat", 4, {}, grid=base_grid, seed=0)


@pytest.fixture(scope="session")
def r0(dec_data, base_grid):
    return find_r0(dec_data, base_grid, [1.0, 2.0, 4.0, 8.0])


@pytest.fixture(scope="session")
def barrier(r0):
    return BarrierProfile(r0=r0, n=4)


@pytest.fixture(scope="session")
def cap_config(dec_data, r0, base_grid):
    return select_capillary_config(dec_data, r0, base_grid)


@pytest.fixture(scope="session")
def jang_limit(dec_data, cap_config, r0, base_grid):
    return exhaustion_solve(dec_data, cap_config,
                            [64.0 * r0, 128.0 * r0, 256.0 * r0], base_grid)


@pytest.fixture(scope="session")
def graph_geo(dec_data, cap_config, jang_limit, base_grid):
    return build_graph_geometry(dec_data, cap_config, jang_limit, base_grid)
