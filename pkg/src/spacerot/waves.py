"""Boosted wave objects and finite-difference checks of the wave identities.

Time is ``tau = c t``.  A stable profile q(X) with frequency parameter
``Omega`` and boost ``beta`` along z gives

    xi  = gamma (z - beta tau)
    eta = gamma (tau - beta z) - tau
    psi_b(X, tau) = q(x, y, xi) exp(i s Omega eta)
    psi(X, tau)   = psi_b exp(i s Omega tau)

with ``s = +/-1``.  Residuals are evaluated in cleared-denominator form on
uniform Cartesian grids; the exp(i s Omega tau) carrier is differentiated
exactly and finite differences act on ``psi_b`` only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivisionSingularityError, SuperluminalBoostError


class ResolutionWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# profiles

@dataclass(frozen=True)
class SpatialProfile:
    """Complex field q(x, y, z, tau) with optional analytic second derivatives.

    ``laplacian`` and ``d2z`` take the same arguments as ``q``.  For
    profiles that are not time dependent the ``tau`` argument is ignored.
    """

    q: Callable
    laplacian: Callable | None = None
    d2z: Callable | None = None
    time_dependent: bool = False
    name: str = "custom"

    def __call__(self, x, y, z, tau=0.0):
        return self.q(x, y, z, tau)


def constant(value: complex = 1.0) -> SpatialProfile:
    def q(x, y, z, tau):
        return np.full(np.broadcast(x, y, z).shape, value, dtype=complex)

    def zero(x, y, z, tau):
        return np.zeros(np.broadcast(x, y, z).shape, dtype=complex)
    return SpatialProfile(q, zero, zero, name="constant")


def gaussian(sigma: float = 1.0, center=(0.0, 0.0, 0.0)) -> SpatialProfile:
    cx, cy, cz = center
    s2 = sigma * sigma

    def q(x, y, z, tau):
        return np.exp(-((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2) / (2 * s2)).astype(complex)

    def lap(x, y, z, tau):
        r2 = (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2
        return (r2 / s2**2 - 3 / s2) * q(x, y, z, tau)

    def d2z(x, y, z, tau):
        return ((z - cz) ** 2 / s2**2 - 1 / s2) * q(x, y, z, tau)
    return SpatialProfile(q, lap, d2z, name=f"gaussian(sigma={sigma})")


def plane_phase(k=(1.0, 0.0, 0.0)) -> SpatialProfile:
    """Constant-modulus profile exp(i k.X)."""
    kx, ky, kz = k
    k2 = kx * kx + ky * ky + kz * kz

    def q(x, y, z, tau):
        return np.exp(1j * (kx * x + ky * y + kz * z))
    return SpatialProfile(q, lambda x, y, z, tau: -k2 * q(x, y, z, tau),
                          lambda x, y, z, tau: -kz * kz * q(x, y, z, tau), name=f"plane_phase(k={k})")


def exp_decay(a: float = 1.0) -> SpatialProfile:
    """exp(-r / a); Laplacian over q is 1/a^2 - 2/(a r)."""
    def q(x, y, z, tau):
        return np.exp(-np.sqrt(x * x + y * y + z * z) / a).astype(complex)

    def lap(x, y, z, tau):
        r = np.sqrt(x * x + y * y + z * z)
        return (1 / a**2 - 2 / (a * r)) * q(x, y, z, tau)

    def d2z(x, y, z, tau):
        r = np.sqrt(x * x + y * y + z * z)
        return (z * z / (a * a * r * r) - (1 / r - z * z / r**3) / a) * q(x, y, z, tau)
    return SpatialProfile(q, lap, d2z, name=f"exp_decay(a={a})")


def radial_sinc(k: float) -> SpatialProfile:
    """sin(k r) / (k r), a Helmholtz eigenfunction with Laplacian -k^2 q."""
    def q(x, y, z, tau):
        return np.sinc(k * np.sqrt(x * x + y * y + z * z) / np.pi).astype(complex)
    return SpatialProfile(q, lambda x, y, z, tau: -k * k * q(x, y, z, tau), None, name=f"radial_sinc(k={k})")


def chirp(k: float, nu: float) -> SpatialProfile:
    """Time-dependent exp(i (k + nu tau) x); used as a negative control."""
    def q(x, y, z, tau):
        return np.exp(1j * (k + nu * tau) * x) * np.ones(np.broadcast(x, y, z).shape)

    def lap(x, y, z, tau):
        return -((k + nu * tau) ** 2) * q(x, y, z, tau)
    return SpatialProfile(q, lap, lambda x, y, z, tau: np.zeros(np.broadcast(x, y, z).shape, complex),
                          time_dependent=True, name=f"chirp(k={k}, nu={nu})")


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoostParams:
    beta: float

    def __post_init__(self):
        if not abs(self.beta) < 1:
            raise SuperluminalBoostError(f"|beta| must be < 1, got {self.beta}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.beta * self.beta)


@dataclass(frozen=True)
class BoostedWave:
    profile: SpatialProfile
    Omega: float
    boost: BoostParams
    sign: int = 1

    @property
    def beta(self) -> float:
        return self.boost.beta

    @property
    def gamma(self) -> float:
        return self.boost.gamma

    def xi(self, z, tau):
        return self.gamma * (z - self.beta * tau)

    def eta(self, z, tau):
        if self.beta == 0:
            return np.zeros(np.broadcast(z, tau).shape)
        return self.gamma * (tau - self.beta * z) - tau

    def envelope(self, x, y, z, tau):
        """q(x, y, xi)."""
        return self.profile(x, y, self.xi(z, tau), tau)

    def psi_b(self, x, y, z, tau):
        return self.envelope(x, y, z, tau) * np.exp(1j * self.sign * self.Omega * self.eta(z, tau))

    def psi(self, x, y, z, tau):
        return self.psi_b(x, y, z, tau) * np.exp(1j * self.sign * self.Omega * np.asarray(tau))

    def boost_term(self) -> float:
        """(Omega / 2) (gamma - 1)^2, the beta^4-order term of the Schrodinger identity."""
        g = self.gamma
        return 0.5 * self.Omega * (g - 1.0) ** 2


def build_boosted_wave(q: SpatialProfile, Omega: float, beta: float = 0.0, sign: int = 1) -> BoostedWave:
    if not Omega > 0:
        raise ValueError("Omega must be positive")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return BoostedWave(q, float(Omega), BoostParams(float(beta)), sign)


# ---------------------------------------------------------------------------
# grids and stencils

@dataclass(frozen=True)
class Grid:
    """Uniform box [lo, hi]^3 with spacing ``h`` at time ``tau``.

    ``order`` selects 3-point (2) or 5-point (4) second-difference stencils.
    """

    h: float
    lo: tuple = (-0.4, -0.4, -0.4)
    hi: tuple = (0.4, 0.4, 0.4)
    tau: float = 0.0
    dtau: float | None = None
    order: int = 2

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")

    @classmethod
    def cube(cls, half_width: float, h: float, **kw) -> "Grid":
        return cls(h, (-half_width,) * 3, (half_width,) * 3, **kw)

    @property
    def step_tau(self) -> float:
        return self.h if self.dtau is None else self.dtau

    @property
    def half_width(self) -> int:
        return self.order // 2

    @property
    def margin(self) -> int:
        # stride-2 stencils reach twice as far
        return 2 * self.half_width

    def axes(self):
        out = []
        for a, b in zip(self.lo, self.hi):
            n = int(round((b - a) / self.h)) + 1
            out.append(a + self.h * np.arange(n))
        return out

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def core(self, arr):
        m = self.margin
        return arr[m:-m, m:-m, m:-m]

    def to_dict(self) -> dict:
        return {"h": self.h, "extent": [list(self.lo), list(self.hi)], "tau": self.tau, "order": self.order}


_D2 = {2: ((1, 1.0), (0, -2.0)), 4: ((2, -1 / 12), (1, 16 / 12), (0, -30 / 12))}
_D1 = {2: ((1, 0.5),), 4: ((2, -1 / 12), (1, 8 / 12))}


def _shift(f, axis, k, m):
    sl = [slice(m, f.shape[i] - m) for i in range(3)]
    sl[axis] = slice(m + k, f.shape[axis] - m + k)
    return f[tuple(sl)]


def _laplacian(f, grid: Grid, stride: int = 1):
    """Laplacian on the core region (margin excluded)."""
    m, h = grid.margin, grid.h * stride
    out = 0
    for axis in range(3):
        out = out + _d2_axis(f, axis, grid.order, stride, m) / h**2
    return out


def _d2_axis(f, axis, order, stride, m):
    acc = 0
    for k, w in _D2[order]:
        if k == 0:
            acc = acc + w * _shift(f, axis, 0, m)
        else:
            acc = acc + w * (_shift(f, axis, k * stride, m) + _shift(f, axis, -k * stride, m))
    return acc


def _tau_levels(wave: BoostedWave, grid: Grid, fn=None):
    """Fields at tau + j dtau for j in [-2 hw, 2 hw] (both strides)."""
    fn = fn or wave.psi_b
    x, y, z = grid.mesh()
    span = 2 * grid.half_width
    return {j: fn(x, y, z, grid.tau + j * grid.step_tau) for j in range(-span, span + 1)}, (x, y, z)


def _tau_d1(levels, grid, stride):
    acc = 0
    for k, w in _D1[grid.order]:
        acc = acc + w * (levels[k * stride] - levels[-k * stride])
    return grid.core(acc) / (grid.step_tau * stride)


def _tau_d2(levels, grid, stride):
    acc = 0
    for k, w in _D2[grid.order]:
        acc = acc + (w * levels[0] if k == 0 else w * (levels[k * stride] + levels[-k * stride]))
    return grid.core(acc) / (grid.step_tau * stride) ** 2


def _rms(a) -> float:
    return float(np.sqrt(np.mean(np.abs(a) ** 2)))


def _order(coarse: float, fine: float) -> float | None:
    if fine > 0 and coarse > 0:
        return math.log2(coarse / fine)
    return None


@dataclass
class ResidualReport:
    max: float
    rms: float
    grid: dict
    order_estimate: float | None
    error_estimate: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"max": self.max, "rms": self.rms, "grid": self.grid,
               "order_estimate": self.order_estimate, "error_estimate": self.error_estimate}
        out.update(self.extra)
        return out


def _grid_laplacian_of_envelope(wave, grid, xyz, stride):
    """Laplacian and d2/dz2 of Q(X) = q(x, y, xi) in grid coordinates at tau."""
    x, y, z = xyz
    prof = wave.profile
    if prof.laplacian is not None and (wave.beta == 0 or prof.d2z is not None):
        xi = wave.xi(z, grid.tau)
        lap = prof.laplacian(x, y, xi, grid.tau)
        d2 = prof.d2z(x, y, xi, grid.tau) if prof.d2z is not None else 0.0
        g2 = wave.gamma**2
        # d/dz acts on xi with factor gamma
        return grid.core(lap + (g2 - 1.0) * d2), grid.core(g2 * d2)
    Q = wave.envelope(x, y, z, grid.tau)
    return _laplacian(Q, grid, stride), _d2_axis(Q, 2, grid.order, stride, grid.margin) / (grid.h * stride) ** 2


def _schrodinger_parts(wave: BoostedWave, grid: Grid, stride: int, levels, xyz):
    s, W, g = wave.sign, wave.Omega, wave.gamma
    pb = grid.core(levels[0])
    dtau = _tau_d1(levels, grid, stride)
    lap_pb = _laplacian(levels[0], grid, stride)
    lapQ, _ = _grid_laplacian_of_envelope(wave, grid, xyz, stride)
    phase = grid.core(np.exp(1j * s * W * wave.eta(xyz[2], grid.tau)))
    lhs = -1j * s * g * dtau + lap_pb / (2 * W)
    rhs_q = lapQ * phase / (2 * W)
    return lhs, rhs_q, pb


def schrodinger_residual(wave: BoostedWave, grid: Grid, warn_ratio: float = 1e-2) -> ResidualReport:
    """Cleared-denominator residual of

        -i s gamma d(psi_b)/dtau + lap(psi_b) / (2 Omega)
            - [lap(q)/q / (2 Omega) + (Omega / 2)(gamma - 1)^2] psi_b

    with ``lap(q)`` the grid-coordinate Laplacian of q(x, y, xi).  The
    stride-2 evaluation on the same nodes gives the order estimate.
    """
    levels, xyz = _tau_levels(wave, grid)
    res = {}
    for stride in (1, 2):
        lhs, rhs_q, pb = _schrodinger_parts(wave, grid, stride, levels, xyz)
        res[stride] = lhs - rhs_q - wave.boost_term() * pb
    r1, r2 = res[1], res[2]
    mx, mx2 = float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))
    err = float(np.max(np.abs(r2 - r1))) / (2**grid.order - 1)
    scale = _rms(_laplacian(levels[0], grid) / (2 * wave.Omega))
    if scale > 0 and _rms(r1) > warn_ratio * scale:
        warnings.warn(f"residual rms {_rms(r1):.3g} exceeds {warn_ratio} of term scale {scale:.3g}; "
                      "refine the grid", ResolutionWarning, stacklevel=2)
    return ResidualReport(mx, _rms(r1), grid.to_dict(), _order(mx2, mx), err,
                          {"equation": "schrodinger", "beta": wave.beta, "gamma": wave.gamma,
                           "Omega": wave.Omega, "boost_term": wave.boost_term()})


def measured_boost_term(wave: BoostedWave, grid: Grid, floor: float = 1e-8) -> float:
    """Mean over the grid of (LHS - lap(q)/q / (2 Omega)) psi_b / psi_b.

    Estimates (Omega/2)(gamma-1)^2 from the finite-difference data.
    """
    levels, xyz = _tau_levels(wave, grid)
    lhs, rhs_q, pb = _schrodinger_parts(wave, grid, 1, levels, xyz)
    mask = np.abs(pb) > floor
    if not np.any(mask):
        raise DivisionSingularityError("psi_b vanishes on the whole grid")
    return float(np.mean(((lhs - rhs_q)[mask] / pb[mask]).real))


@dataclass
class BoostSweep:
    betas: np.ndarray
    analytic: np.ndarray
    measured: np.ndarray
    analytic_slope: float
    measured_slope: float
    baseline: float = 0.0

    def to_dict(self) -> dict:
        return {"betas": self.betas.tolist(), "analytic": self.analytic.tolist(),
                "measured": self.measured.tolist(), "analytic_slope": self.analytic_slope,
                "measured_slope": self.measured_slope, "baseline": self.baseline}


def boost_term_sweep(profile: SpatialProfile, Omega: float, betas, grid: Grid) -> BoostSweep:
    """Log-log slope of the boost term against beta, closed form and measured.

    The measured values have the beta = 0 measurement subtracted, which
    removes the (beta-independent) truncation error of the profile's Laplacian.
    """
    betas = np.asarray(betas, dtype=float)
    baseline = measured_boost_term(build_boosted_wave(profile, Omega, 0.0), grid)
    analytic, measured = [], []
    for b in betas:
        w = build_boosted_wave(profile, Omega, b)
        analytic.append(w.boost_term())
        measured.append(measured_boost_term(w, grid) - baseline)
    analytic, measured = np.array(analytic), np.array(measured)
    lb = np.log(betas)
    a_slope = float(np.polyfit(lb, np.log(analytic), 1)[0])
    m_slope = float(np.polyfit(lb, np.log(np.abs(measured)), 1)[0]) if np.all(measured != 0) else float("nan")
    return BoostSweep(betas, analytic, measured, a_slope, m_slope, baseline)


def _kg_operator(wave: BoostedWave, grid: Grid, levels, stride):
    """(d_tau^2 - lap) psi with the carrier removed, from psi_b levels."""
    s, W = wave.sign, wave.Omega
    pb = grid.core(levels[0])
    return (_tau_d2(levels, grid, stride) + 2j * s * W * _tau_d1(levels, grid, stride)
            - W * W * pb - _laplacian(levels[0], grid, stride))


@dataclass
class ScalarField:
    values: np.ndarray
    mean: complex
    std: float
    error_estimate: float
    uniform: bool
    factor: float = 10.0

    def to_dict(self) -> dict:
        return {"mean_re": self.mean.real, "mean_im": self.mean.imag, "std": self.std,
                "error_estimate": self.error_estimate, "uniform": self.uniform, "factor": self.factor}


def klein_gordon_residual(wave: BoostedWave, grid: Grid, uniform_factor: float = 10.0,
                          floor: float = 1e-8) -> tuple[ResidualReport, ScalarField]:
    """Residual of (d_tau^2 - lap) psi + [(lap q - beta^2 d_z^2 q)/q + Omega^2] psi = 0
    and the extracted scalar s(X) = -(d_tau^2 - lap) psi / psi.

    The scalar is reported uniform when its spatial standard deviation is at
    most ``uniform_factor`` times its finite-difference error estimate.
    """
    levels, xyz = _tau_levels(wave, grid)
    W, beta = wave.Omega, wave.beta
    phase = grid.core(np.exp(1j * wave.sign * W * wave.eta(xyz[2], grid.tau)))
    pb = grid.core(levels[0])
    res, scal = {}, {}
    for stride in (1, 2):
        box = _kg_operator(wave, grid, levels, stride)
        lapQ, d2Q = _grid_laplacian_of_envelope(wave, grid, xyz, stride)
        res[stride] = box + (lapQ - beta * beta * d2Q) * phase + W * W * pb
        mask = np.abs(pb) > floor
        if not np.any(mask):
            raise DivisionSingularityError("psi vanishes on the whole grid")
        scal[stride] = -box[mask] / pb[mask]
    r1, r2 = res[1], res[2]
    mx, mx2 = float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))
    s1 = scal[1]
    mean = complex(np.mean(s1))
    std = float(np.sqrt(np.mean(np.abs(s1 - mean) ** 2)))
    s_err = float(np.max(np.abs(scal[2] - s1))) / (2**grid.order - 1)
    # second differences lose ~eps/h^2 to rounding
    noise = 16 * np.finfo(float).eps * (abs(mean) + 4.0 / min(grid.h, grid.step_tau) ** 2)
    scalar = ScalarField(s1, mean, std, s_err, std <= uniform_factor * max(s_err, noise), uniform_factor)
    report = ResidualReport(mx, _rms(r1), grid.to_dict(), _order(mx2, mx),
                            float(np.max(np.abs(r2 - r1))) / (2**grid.order - 1),
                            {"equation": "klein_gordon", "beta": beta, "Omega": W,
                             "scalar": scalar.to_dict()})
    return report, scalar


# ---------------------------------------------------------------------------

@dataclass
class PotentialDecomposition:
    """(1 / 2 Omega) lap(q)/q = U + E, energies in units of hbar c.

    With Omega = m c / hbar the factor 1 / (2 Omega) is hbar^2 / 2m divided
    by hbar c, so U and E here are the physical values over hbar c.
    """

    u: np.ndarray
    U: np.ndarray
    E: float
    scale: float
    regime: str
    radius: np.ndarray
    tail: str
    mapping: str = "Omega = m c / hbar"

    def to_dict(self) -> dict:
        return {"E": self.E, "scale": self.scale, "regime": self.regime, "tail": self.tail,
                "mapping": self.mapping, "U_max_abs": float(np.max(np.abs(self.U)))}


def potential_decomposition(q: SpatialProfile, Omega: float, grid: Grid, tail: str = "boundary",
                            analytic: bool = False, zero_tol: float = 1e-12) -> PotentialDecomposition:
    """Split u = lap(q)/q into U + E with U -> 0 at the outer boundary.

    ``tail="boundary"`` takes E from the nodes at the largest grid radius;
    ``tail="coulomb"`` fits u = E' + b / r over the outer half in radius and
    uses the constant.  E < 0 is labelled ``capture``, E >= 0 ``free``.
    """
    if not Omega > 0:
        raise ValueError("Omega must be positive")
    x, y, z = grid.mesh()
    Q = q(x, y, z, grid.tau)
    qc = grid.core(Q)
    bad = np.argwhere(np.abs(qc) <= zero_tol * max(1.0, float(np.max(np.abs(qc)))))
    if bad.size:
        m = grid.margin
        nodes = [tuple(float(ax[i + m]) for ax, i in zip(grid.axes(), idx)) for idx in bad[:20]]
        raise DivisionSingularityError(f"q vanishes at {len(bad)} grid nodes", nodes)
    if analytic and q.laplacian is not None:
        lap = grid.core(q.laplacian(x, y, z, grid.tau))
    else:
        lap = _laplacian(Q, grid)
    u = lap / qc
    if np.max(np.abs(u.imag)) <= 1e-9 * max(1.0, float(np.max(np.abs(u.real)))):
        u = u.real
    scale = 1.0 / (2.0 * Omega)
    r = grid.core(np.sqrt(x * x + y * y + z * z))
    rmax = float(r.max())
    if tail == "boundary":
        sel = r >= rmax * (1 - 1e-9)
        E = scale * float(np.mean(np.real(u[sel])))
    elif tail == "coulomb":
        sel = r >= 0.5 * rmax
        A = np.column_stack([np.ones(int(sel.sum())), 1.0 / r[sel]])
        coef, *_ = np.linalg.lstsq(A, np.real(u[sel]), rcond=None)
        E = scale * float(coef[0])
    else:
        raise ValueError(f"unknown tail {tail!r}")
    U = scale * u - E
    return PotentialDecomposition(u, U, E, scale, "capture" if E < 0 else "free", r, tail)
