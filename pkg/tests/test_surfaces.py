import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spacerot.errors import MeshError, NoSurfaceError, RootNotFoundError
from spacerot.metric import average_products
from spacerot.rotation import Product, Sum, asr
from spacerot.surfaces import (asr_radius, cylinder_surface, ellipsoid_surface, locate_gtt_zero,
                               mesh_surface, msr_radius, numeric_surface, read_obj, write_obj,
                               write_radius_csv)

positive = st.floats(0.1, 10.0)


def test_asr_radius_examples():
    assert asr_radius(2.0) == 0.5
    assert asr_radius(3e8, 3e8) == 1.0
    with pytest.raises(NoSurfaceError):
        asr_radius(0.0)


def test_msr_radius_examples():
    w, c = 1.7, 2.0
    assert msr_radius(math.pi / 2, w, 0, 0, c) == pytest.approx(c / w, rel=1e-15)
    assert msr_radius(0.0, w, w, w, c) == pytest.approx(c / (w * math.sqrt(1.5)), rel=1e-15)
    assert msr_radius(math.pi / 2, w, w, w, c) == pytest.approx(c / (1.5 * w), rel=1e-15)
    with pytest.raises(NoSurfaceError):
        msr_radius(0.3, 0, 0, 0)


@given(st.floats(0, math.pi), positive, positive, positive)
def test_msr_radius_mirror_symmetry(theta, w1, w2, w3):
    assert msr_radius(theta, w1, w2, w3) == pytest.approx(msr_radius(math.pi - theta, w1, w2, w3), rel=1e-12)


def test_locate_matches_asr_radius():
    w, c = 2.5, 1.3
    for phi in np.linspace(0, 2 * math.pi, 5):
        r = locate_gtt_zero(asr("z", w), (math.cos(phi), math.sin(phi), 0.0), 3.0, c)
        assert r == pytest.approx(c / w, rel=1e-9)


def test_locate_matches_ellipsoid_at_non_resonant_frequencies():
    ws = (2.0, 3.0, 5.0)
    avg = average_products(Product(tuple(asr(a, w) for a, w in zip("zxy", ws))))
    rng = np.random.default_rng(4)
    for _ in range(20):
        d = rng.normal(size=3)
        theta = math.acos(d[2] / np.linalg.norm(d))
        assert locate_gtt_zero(avg, d, 2.0) == pytest.approx(msr_radius(theta, *ws), rel=1e-9)


def test_equal_frequency_product_on_axis():
    w = 1.3
    r = locate_gtt_zero(Product((asr("z", w), asr("x", w), asr("y", w))), (0, 0, 1), 5.0)
    assert r == pytest.approx(1 / (w * math.sqrt(1.5)), rel=1e-9)


def test_equal_frequency_product_equator_depends_on_azimuth():
    # equal frequencies are resonant: the averaged surface is not axially symmetric there
    avg = average_products(Product((asr("z", 1.0), asr("x", 1.0), asr("y", 1.0))))
    radii = [locate_gtt_zero(avg, (math.cos(p), math.sin(p), 0.0), 5.0) for p in (0.0, math.pi / 2)]
    assert abs(radii[0] - radii[1]) > 1e-2


def test_sum_along_x_matches_quadratic_root():
    ws = (2.0, 3.0, 5.0)
    r = locate_gtt_zero(Sum(tuple(asr(a, w) for a, w in zip("zxy", ws))), (1, 0, 0), 2.0)
    # x-axis dt^2 coefficient: c^2 - x^2 (w1^2 + w3^2)
    assert r == pytest.approx(1 / math.hypot(ws[0], ws[2]), rel=1e-9)


def test_locate_errors_carry_profile():
    with pytest.raises(RootNotFoundError) as info:
        locate_gtt_zero(asr("z", 1.0), (0, 0, 1), 10.0)
    assert len(info.value.profile) == 201
    with pytest.raises(ValueError):
        locate_gtt_zero(asr("z", 1.0), (0, 0, 0), 1.0)


def test_cylinder_mesh():
    surf = cylinder_surface(2.0)
    assert surf.z_half == pytest.approx(1.5)
    mesh = mesh_surface(surf, (32, 8))
    assert mesh.vertices.shape == (256, 3)
    assert np.allclose(np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1]), 0.5, rtol=1e-12)
    assert not mesh.is_closed_oriented()


def test_ellipsoid_mesh_closed_and_on_surface():
    ws, c = (1.0, 2.0, 0.5), 1.5
    mesh = mesh_surface(ellipsoid_surface(*ws, c), (24, 12))
    assert mesh.is_closed_oriented()
    r = np.linalg.norm(mesh.vertices, axis=1)
    theta = np.arccos(np.clip(mesh.vertices[:, 2] / r, -1, 1))
    assert np.allclose(r, msr_radius(theta, *ws, c), rtol=1e-9)
    assert mesh.signed_volume() > 0


def test_equal_frequency_pole_radius():
    w = 2.0
    mesh = mesh_surface(ellipsoid_surface(w, w, w), (8, 8))
    assert np.linalg.norm(mesh.vertices[0]) == pytest.approx(1 / (w * math.sqrt(1.5)), rel=1e-12)


def test_ellipsoid_volume_converges():
    # r depends only on theta: V = (2 pi / 3) int r^3 sin(theta) dtheta
    ws = (2.0, 3.0, 5.0)
    th = np.linspace(0, math.pi, 20001)
    f = msr_radius(th, *ws) ** 3 * np.sin(th)
    exact = 2 * math.pi / 3 * float(np.sum((f[1:] + f[:-1]) / 2 * np.diff(th)))
    vol = mesh_surface(ellipsoid_surface(*ws), (128, 64)).signed_volume()
    assert vol == pytest.approx(exact, rel=2e-3)


def test_numeric_surface_mesh():
    surf = numeric_surface(Product((asr("z", 2.0), asr("x", 3.0))), 2.0)
    mesh = mesh_surface(surf, (8, 8))
    assert mesh.is_closed_oriented()
    assert mesh.signed_volume() > 0


def test_mesh_errors():
    with pytest.raises(MeshError):
        mesh_surface(cylinder_surface(1.0), (4, 8))


def test_obj_round_trip():
    mesh = mesh_surface(ellipsoid_surface(1.0, 2.0, 3.0), (8, 8))
    buf = io.StringIO()
    write_obj(mesh, buf)
    back = read_obj(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.faces, mesh.faces)


def test_radius_csv():
    mesh = mesh_surface(ellipsoid_surface(1.0, 2.0, 3.0), (8, 8))
    buf = io.StringIO(newline="")
    write_radius_csv(mesh, buf)
    lines = buf.getvalue().split("\r\n")
    assert lines[0] == "theta,phi,r"
    assert len(lines) == len(mesh.vertices) + 2
