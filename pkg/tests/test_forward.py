import math

import numpy as np
import pytest

from osmkit import forward, scene
from osmkit.forward import (
    CauchyData,
    ContrastGrid,
    SolverError,
    circle_curve,
    far_field,
    far_field_alpha,
    green2d,
    green2d_normal_derivative,
    incident_plane_wave,
    load_cauchy,
    ls_solve,
    mie_disk_cauchy,
    mie_disk_farfield,
    mie_disk_reference,
    save_cauchy,
    scattered_at,
    scattered_normal_derivative,
    synthesize_cauchy,
    unit_circle_directions,
)

from series_refs import j0_series, j1_series, y0_series, y1_series

K = 6.0


def test_incident_plane_wave_values():
    theta = math.pi / 2
    assert incident_plane_wave(K, theta, np.array([0.0, 0.0])) == pytest.approx(1.0)
    val = incident_plane_wave(K, theta, np.array([0.0, math.pi / 6]))
    assert val == pytest.approx(-1.0, abs=1e-12)


def test_incident_plane_wave_unimodular():
    rng = np.random.default_rng(2)
    pts = rng.uniform(-50, 50, size=(100, 2))
    vals = incident_plane_wave(3.7, 1.1, pts)
    np.testing.assert_allclose(np.abs(vals), 1.0, atol=1e-13)


def test_green2d_value_from_series():
    x = np.array([1.0, 0.0])
    y = np.array([0.0, 0.0])
    expected = 0.25j * (j0_series(1.0) + 1j * y0_series(1.0))
    assert green2d(1.0, x, y) == pytest.approx(expected, abs=1e-12)
    # reference numbers: -0.0220642 + 0.1912994j
    assert expected.real == pytest.approx(-0.0220642, abs=1e-6)
    assert expected.imag == pytest.approx(0.1912994, abs=1e-6)


def test_green2d_symmetry_and_imaginary_part():
    # series oracle valid on (0, 8]: keep k * |x - y| below 8
    k = 2.0
    rng = np.random.default_rng(7)
    for _ in range(20):
        x, y = rng.uniform(-1, 1, size=(2, 2))
        if np.linalg.norm(x - y) < 1e-3:
            continue
        assert green2d(k, x, y) == green2d(k, y, x)
        r = np.linalg.norm(x - y)
        assert green2d(k, x, y).imag == pytest.approx(
            0.25 * j0_series(k * r), abs=1e-10)


def test_green2d_singularity():
    with pytest.raises(ValueError):
        green2d(K, np.array([1.0, 1.0]), np.array([1.0, 1.0]))


def test_green2d_normal_derivative_perpendicular():
    x = np.array([1.0, 0.0])
    y = np.array([0.0, 0.0])
    nu = np.array([0.0, 1.0])
    assert abs(green2d_normal_derivative(K, x, y, nu)) < 1e-14


def test_green2d_normal_derivative_value():
    # radial direction: d/dr (i/4) H0(kr) = -(ik/4) H1(kr)
    x = np.array([2.0, 0.0])
    y = np.array([0.0, 0.0])
    nu = np.array([1.0, 0.0])
    h1 = j1_series(2.0) + 1j * y1_series(2.0)
    assert green2d_normal_derivative(1.0, x, y, nu) == pytest.approx(
        -0.25j * h1, abs=1e-12)
    assert h1.real == pytest.approx(0.5767248, abs=1e-6)
    assert h1.imag == pytest.approx(-0.1070324, abs=1e-6)


def test_green2d_normal_derivative_matches_finite_differences():
    rng = np.random.default_rng(13)
    h = 1e-5
    for _ in range(50):
        x = rng.uniform(-2, 2, size=2)
        y = rng.uniform(-2, 2, size=2)
        if np.linalg.norm(x - y) < 0.3:
            continue
        ang = rng.uniform(0, 2 * math.pi)
        nu = np.array([math.cos(ang), math.sin(ang)])
        fd = (green2d(K, x + h * nu, y) - green2d(K, x - h * nu, y)) / (2 * h)
        assert green2d_normal_derivative(K, x, y, nu) == pytest.approx(fd, abs=1e-7)


def test_contrast_grid_validation():
    with pytest.raises(ValueError):
        ContrastGrid(n=100, h=0.1, origin=(-4, -4), eta=np.zeros((100, 100)))
    eta = np.zeros((64, 64), dtype=complex)
    eta[2, 2] = 1.0   # way outside the central half
    with pytest.raises(ValueError):
        ContrastGrid(n=64, h=8.0 / 64, origin=(-4, -4), eta=eta)


def test_ls_solve_zero_contrast_is_incident(solved_disk):
    grid = forward.default_grid(64)
    total = ls_solve(grid, K, theta=0.3)
    xs, ys = grid.node_coords()
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    u_in = incident_plane_wave(K, 0.3, np.stack([xg, yg], axis=-1))
    assert total.iterations == 0
    np.testing.assert_array_equal(total.u, u_in)


def test_ls_solve_matches_mie(disk_cauchy, mie_reference_cauchy):
    err = (np.linalg.norm(disk_cauchy.us - mie_reference_cauchy.us)
           / np.linalg.norm(mie_reference_cauchy.us))
    assert err <= 1e-3


def test_ls_solve_born_limit():
    eps = 1e-3
    sc = scene.ContrastScene(
        shapes=[(scene.disk((0.0, 0.0), 1.0), eps + 0j)], domain=(-1.0, 1.0))
    grid = forward.default_grid(256, sc)
    total = ls_solve(grid, K, theta=0.0)
    curve = circle_curve(100.0, 32)
    us = scattered_at(total, grid, curve.points)
    # Born: same quadrature with the incident wave as the field
    support, eta, (ii, jj) = grid.support_points()
    u_in = incident_plane_wave(K, 0.0, support)
    diff = curve.points[:, None, :] - support[None, :, :]
    r = np.linalg.norm(diff, axis=2)
    from osmkit import specfun
    born = (K ** 2) * grid.h ** 2 * (
        0.25j * specfun.hankel1(0, K * r) * (eta * u_in)[None, :]).sum(axis=1)
    assert np.linalg.norm(us - born) / np.linalg.norm(born) <= 0.005


def test_ls_solve_nonconvergence_raises():
    sc = scene.ContrastScene(
        shapes=[(scene.disk((0.0, 0.0), 1.0), 1.0 + 0j)], domain=(-1.0, 1.0))
    grid = forward.default_grid(64, sc)
    with pytest.raises(SolverError) as excinfo:
        ls_solve(grid, K, theta=0.0, maxiter=1, restart=2)
    assert len(excinfo.value.residuals) >= 1


def test_scattered_at_zero_contrast():
    grid = forward.default_grid(64)
    total = ls_solve(grid, K, 0.0)
    vals = scattered_at(total, grid, np.array([[10.0, 0.0]]))
    np.testing.assert_array_equal(vals, 0.0)


def test_scattered_at_rejects_near_support(solved_disk):
    grid, total = solved_disk
    with pytest.raises(ValueError):
        scattered_at(total, grid, np.array([[1.0, 0.0]]))


def test_scattered_normal_derivative_radiation(disk_cauchy):
    rad = (np.linalg.norm(disk_cauchy.dus - 1j * K * disk_cauchy.us)
           / np.linalg.norm(1j * K * disk_cauchy.us))
    assert rad <= 0.02


def test_scattered_normal_derivative_matches_finite_differences(solved_disk):
    grid, total = solved_disk
    curve = circle_curve(10.0, 8)
    dus = scattered_normal_derivative(total, grid, curve)
    h = 1e-4
    outer = scattered_at(total, grid, curve.points + h * curve.normals)
    inner = scattered_at(total, grid, curve.points - h * curve.normals)
    fd = (outer - inner) / (2 * h)
    assert np.linalg.norm(fd - dus) / np.linalg.norm(dus) <= 1e-5


def test_far_field_matches_mie(solved_disk):
    grid, total = solved_disk
    dirs = unit_circle_directions(128)
    ff = far_field(total, grid, dirs)
    ref = mie_disk_farfield(K, 1.0, 1.0, dirs, theta=0.0)
    assert np.linalg.norm(ff.values - ref.values) / np.linalg.norm(ref.values) <= 1e-3


def test_far_field_consistent_with_scattered_field(solved_disk):
    grid, total = solved_disk
    dirs = unit_circle_directions(16)
    ff = far_field(total, grid, dirs)
    discrepancies = []
    for radius in (100.0, 400.0):
        us = scattered_at(total, grid, radius * dirs)
        limit = us * math.sqrt(radius) * np.exp(-1j * K * radius)
        discrepancies.append(np.linalg.norm(limit - ff.values))
    assert discrepancies[1] <= discrepancies[0] / 3.0


def test_mie_reference_zero_contrast():
    pts = np.array([[5.0, 1.0], [3.0, -2.0]])
    np.testing.assert_array_equal(mie_disk_reference(K, 1.0, 0.0, pts), 0.0)


def test_mie_reference_truncation_converged():
    pts = np.array([[2.0, 0.0], [0.0, 3.0], [1.5, 1.5]])
    coarse = mie_disk_reference(K, 1.0, 1.0, pts, tol=1e-8)
    fine = mie_disk_reference(K, 1.0, 1.0, pts, tol=1e-14)
    np.testing.assert_allclose(coarse, fine, rtol=1e-12)


def test_mie_cauchy_matches_reference_points():
    curve = circle_curve(100.0, 8)
    data = mie_disk_cauchy(K, 1.0, 1.0, curve, theta=0.0)
    direct = mie_disk_reference(K, 1.0, 1.0, curve.points)
    np.testing.assert_allclose(data.us, direct, rtol=1e-12)


def test_translation_covariance():
    # shift by whole grid cells: discrete problems are exactly related
    n = 128
    h = 8.0 / n
    t = np.array([16 * h, -8 * h])
    theta = 0.7
    d = np.array([math.cos(theta), math.sin(theta)])
    base = scene.ContrastScene(shapes=[(scene.disk((0.0, 0.0), 0.7), 1.0 + 0j)])
    moved = scene.ContrastScene(shapes=[(scene.disk(tuple(t), 0.7), 1.0 + 0j)])
    pts = np.array([[30.0, 4.0], [-12.0, 25.0], [8.0, -40.0]])
    g1 = forward.default_grid(n, base)
    g2 = forward.default_grid(n, moved)
    u1 = ls_solve(g1, K, theta)
    u2 = ls_solve(g2, K, theta)
    v1 = scattered_at(u1, g1, pts - t) * np.exp(1j * K * (t @ d))
    v2 = scattered_at(u2, g2, pts)
    np.testing.assert_allclose(v2, v1, rtol=1e-4)


def test_far_field_alpha_value():
    alpha = far_field_alpha(K)
    assert abs(alpha) == pytest.approx(1.0 / math.sqrt(8 * math.pi * K), rel=1e-12)
    assert np.angle(alpha) == pytest.approx(math.pi / 4, abs=1e-12)


def test_cauchy_serialization_round_trip(tmp_path, disk_cauchy):
    path = tmp_path / "data.json"
    save_cauchy(disk_cauchy, path)
    back = load_cauchy(path)
    np.testing.assert_array_equal(back.us, disk_cauchy.us)
    np.testing.assert_array_equal(back.dus, disk_cauchy.dus)
    assert back.k == disk_cauchy.k
    assert back.curve.descriptor == disk_cauchy.curve.descriptor
    # byte determinism
    save_cauchy(disk_cauchy, tmp_path / "again.json")
    assert (tmp_path / "again.bin").read_bytes() == (tmp_path / "data.bin").read_bytes()


def test_curve_validation():
    pts = np.array([[1.0, 0.0]])
    with pytest.raises(ValueError):
        forward.MeasurementCurve(pts, np.array([[2.0, 0.0]]), np.array([1.0]), {})
    with pytest.raises(ValueError):
        CauchyData(circle_curve(10.0, 4), np.zeros(3), np.zeros(4), K)
