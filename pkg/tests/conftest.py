import numpy as np
import pytest

from flowplan import CostSet, FlowField, GoalSpec, GridGeometry, generate_synthetic_field

PAPER_COSTS = CostSet(drift=0, glide=2, forward=4, rotate=10)


def geometry(nx, ny, layers=1, cell=1000.0):
    return GridGeometry(nx=nx, ny=ny, cell_size=cell, layer_depths=tuple(5.0 * i for i in range(layers)))


def still_field(nx=7, ny=7, layers=1, cell=1000.0):
    return generate_synthetic_field("uniform", geometry(nx, ny, layers, cell), u0=0.0, v0=0.0)


def uniform_east(nx=7, ny=7, layers=1, cell=1000.0, speed=0.5):
    return generate_synthetic_field("uniform", geometry(nx, ny, layers, cell), u0=speed, v0=0.0)


def random_field(seed, nx=6, ny=5, layers=2, cell=500.0, land_frac=0.2, scale=0.4):
    """Random currents with sparse land; every layer keeps one free cell."""
    rng = np.random.default_rng(seed)
    g = geometry(nx, ny, layers, cell)
    u = rng.normal(0.0, scale, (layers, ny, nx))
    v = rng.normal(0.0, scale, (layers, ny, nx))
    land = rng.random((layers, ny, nx)) < land_frac
    land[:, 0, 0] = False
    return FlowField(geometry=g, u=u, v=v, land=land)


@pytest.fixture(scope="session")
def paper_gyre():
    """The paper-scale instance: 21x29 grid, 4 layers, double gyre."""
    g = GridGeometry(nx=21, ny=29, cell_size=1000.0, layer_depths=(0.0, 5.0, 10.0, 15.0))
    return generate_synthetic_field("double_gyre", g, amplitude=0.5)


@pytest.fixture(scope="session")
def paper_goal():
    return GoalSpec(15, 22, 0)
