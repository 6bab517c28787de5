import numpy as np
import pytest

from osmkit import forward, scene


@pytest.fixture(scope="session")
def mie_scene():
    return scene.ContrastScene(
        shapes=[(scene.disk((0.0, 0.0), 1.0), 1.0 + 0j)], domain=(-1.0, 1.0))


@pytest.fixture(scope="session")
def solved_disk(mie_scene):
    grid = forward.default_grid(256, mie_scene)
    total = forward.ls_solve(grid, 6.0, theta=0.0)
    return grid, total


@pytest.fixture(scope="session")
def disk_cauchy(solved_disk):
    grid, total = solved_disk
    curve = forward.circle_curve(100.0, 32)
    return forward.synthesize_cauchy(total, grid, curve)


@pytest.fixture(scope="session")
def mie_reference_cauchy():
    curve = forward.circle_curve(100.0, 32)
    return forward.mie_disk_cauchy(6.0, 1.0, 1.0, curve, theta=0.0)


@pytest.fixture(scope="session")
def small_disk_cauchy_fine():
    """Offset small scatterer with a finely sampled measurement circle."""
    sc = scene.ContrastScene(
        shapes=[(scene.disk((0.5, 0.0), 0.3), 1.0 + 0j)], domain=(-1.0, 1.0))
    grid = forward.default_grid(256, sc)
    total = forward.ls_solve(grid, 6.0, theta=0.0)
    curve = forward.circle_curve(100.0, 1024)
    return forward.synthesize_cauchy(total, grid, curve)
