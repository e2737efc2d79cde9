import math

import numpy as np
import pytest

from spacerot.errors import DivisionSingularityError, SuperluminalBoostError
from spacerot.waves import (Grid, ResolutionWarning, boost_term_sweep, build_boosted_wave, chirp,
                            constant, exp_decay, gaussian, klein_gordon_residual, plane_phase,
                            potential_decomposition, radial_sinc, schrodinger_residual)

OMEGA = 5.0


def test_boost_kinematics():
    w = build_boosted_wave(gaussian(), OMEGA, 0.6)
    assert w.gamma == pytest.approx(1.25, abs=1e-14)
    assert w.xi(1.0, 0.0) == pytest.approx(1.25)
    with pytest.raises(SuperluminalBoostError):
        build_boosted_wave(gaussian(), OMEGA, 1.0)
    with pytest.raises(ValueError):
        build_boosted_wave(gaussian(), 0.0)


def test_constant_profile_wave():
    w = build_boosted_wave(constant(), OMEGA)
    tau = np.linspace(0, 2, 5)
    assert np.allclose(w.psi(0.1, 0.2, 0.3, tau), np.exp(1j * OMEGA * tau), atol=1e-15)
    assert np.array_equal(w.psi_b(0.1, 0.2, 0.3, tau), np.ones(5, complex))


def test_wave_identities_pointwise():
    rng = np.random.default_rng(0)
    x, y, z, tau = rng.uniform(-1, 1, (4, 50))
    w = build_boosted_wave(gaussian(0.7), OMEGA, 0.3, sign=-1)
    psi_b = w.psi_b(x, y, z, tau)
    assert np.allclose(w.psi(x, y, z, tau), psi_b * np.exp(-1j * OMEGA * tau), atol=1e-15)
    assert np.allclose(np.abs(psi_b), np.abs(gaussian(0.7)(x, y, w.xi(z, tau), tau)), atol=1e-15)


def test_boost_term_taylor_coefficient():
    for beta in (0.01, 0.05, 0.1):
        g = 1 / math.sqrt(1 - beta * beta)
        assert abs((g - 1) ** 2 / 2 - beta**4 / 8) <= beta**6


def test_schrodinger_constant_profile_exact():
    rep = schrodinger_residual(build_boosted_wave(constant(), OMEGA), Grid.cube(0.2, 0.05))
    assert rep.max == 0.0


def test_schrodinger_gaussian_second_order():
    w = build_boosted_wave(gaussian(1.0), OMEGA)
    maxes = [schrodinger_residual(w, Grid.cube(0.4, h)).max for h in (0.04, 0.02)]
    assert math.log2(maxes[0] / maxes[1]) == pytest.approx(2.0, abs=0.1)


def test_schrodinger_boosted_stride_order():
    rep = schrodinger_residual(build_boosted_wave(gaussian(1.0), OMEGA, 0.3), Grid.cube(0.3, 0.02))
    assert rep.order_estimate == pytest.approx(2.0, abs=0.1)
    assert rep.max <= 10 * rep.error_estimate


def test_resolution_warning_on_coarse_grid():
    with pytest.warns(ResolutionWarning):
        schrodinger_residual(build_boosted_wave(gaussian(0.1), OMEGA), Grid.cube(0.3, 0.1))


def test_boost_sweep_slope():
    sweep = boost_term_sweep(gaussian(1.0), OMEGA, [0.02, 0.04, 0.08], Grid.cube(0.2, 0.02, order=4))
    assert sweep.measured_slope == pytest.approx(4.0, abs=0.1)
    assert np.allclose(sweep.measured, sweep.analytic, rtol=2e-2)


def test_kg_constant_profile():
    rep, scalar = klein_gordon_residual(build_boosted_wave(constant(), OMEGA), Grid.cube(0.2, 0.05))
    assert rep.max <= 1e-12
    assert scalar.mean.real == pytest.approx(OMEGA**2, abs=1e-9)
    assert scalar.uniform


def test_kg_plane_phase_scalar():
    k = 2.0
    rep, scalar = klein_gordon_residual(build_boosted_wave(plane_phase((k, 0, 0)), OMEGA), Grid.cube(0.2, 0.02))
    # psi = exp(i(k x + Omega tau)) gives (d_tau^2 - lap) psi = -(Omega^2 - k^2) psi
    assert scalar.mean.real == pytest.approx(OMEGA**2 - k**2, rel=1e-4)
    assert scalar.uniform
    assert rep.order_estimate == pytest.approx(2.0, abs=0.1)


def test_kg_zero_scalar_is_wave_equation():
    k = 2.0
    rep, scalar = klein_gordon_residual(build_boosted_wave(plane_phase((k, 0, 0)), k), Grid.cube(0.2, 0.02))
    assert abs(scalar.mean) <= 1e-3
    assert rep.max <= k**4 * 0.02**2 / 12 * 1.01


def test_kg_time_dependent_profile_fails_uniformity():
    _, scalar = klein_gordon_residual(build_boosted_wave(chirp(2.0, 3.0), OMEGA), Grid.cube(0.2, 0.02))
    assert not scalar.uniform


def test_kg_boosted_gaussian_converges():
    w = build_boosted_wave(gaussian(1.0), OMEGA, 0.2)
    maxes = [klein_gordon_residual(w, Grid.cube(0.3, h))[0].max for h in (0.04, 0.02)]
    assert math.log2(maxes[0] / maxes[1]) == pytest.approx(2.0, abs=0.1)


def test_potential_constant():
    dec = potential_decomposition(constant(), OMEGA, Grid.cube(0.5, 0.1))
    assert dec.E == 0.0
    assert np.max(np.abs(dec.U)) == 0.0
    assert dec.regime == "free"


def test_potential_coulomb_like():
    grid = Grid(0.05, (0.5, 0.5, 0.5), (4.0, 4.0, 4.0))
    dec = potential_decomposition(exp_decay(1.0), OMEGA, grid, tail="coulomb")
    assert dec.E == pytest.approx(1 / (2 * OMEGA), rel=1e-3)
    # U = -(1 / Omega) / r in these units
    ratio = dec.U * dec.radius * OMEGA
    assert np.median(ratio) == pytest.approx(-1.0, rel=1e-2)


def test_potential_helmholtz_eigenfunction():
    dec = potential_decomposition(radial_sinc(1.0), OMEGA, Grid.cube(1.0, 0.02))
    assert dec.E == pytest.approx(-1 / (2 * OMEGA), rel=1e-4)
    assert np.max(np.abs(dec.U)) <= 1e-6
    assert dec.regime == "capture"


def test_potential_division_singularity_lists_nodes():
    with pytest.raises(DivisionSingularityError) as info:
        potential_decomposition(radial_sinc(math.pi), OMEGA, Grid.cube(1.2, 0.1))
    assert info.value.nodes
    x, y, z = info.value.nodes[0]
    assert math.sqrt(x * x + y * y + z * z) == pytest.approx(1.0, abs=1e-9)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(0.0)
    with pytest.raises(ValueError):
        Grid(0.1, order=3)
