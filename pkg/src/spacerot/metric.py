"""Interval quadratic forms induced by a rotation expression.

A form is stored as a symmetric 4x4 matrix ``G`` in the basis
``(c dt, dx, dy, dz)`` so that ``ds'^2 = du G du^T``.  With
``dX' = dX A + X dA`` this gives

    G_tt = 1 - X A' A'^T X^T / c^2
    G_tj = -(A A'^T X^T)_j / c
    G_ij = -(A A^T)_ij

where ``A' = dA/dt``.  Time averages act on the three matrix products
``A' A'^T``, ``A A'^T`` and ``A A^T``, so an average computed once can be
assembled at any point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import AveragingError, NotMSRError, NotOmegaInvariantError
from .rotation import (RotationExpr, eval_expr, eval_with_derivative, frequencies,
                       is_pure_product)

KEYS = ("g_tt", "g_tx", "g_ty", "g_tz", "g_xx", "g_xy", "g_xz", "g_yy", "g_yz", "g_zz")
_INDEX = {"t": 0, "x": 1, "y": 2, "z": 3}


@dataclass(frozen=True)
class SpacetimeEvent:
    x: float
    y: float
    z: float
    t: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z, self.t)):
            raise ValueError("event components must be finite")

    @property
    def X(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class IntervalForm:
    G: np.ndarray
    c: float = 1.0

    def __post_init__(self):
        g = np.asarray(self.G, dtype=float)
        object.__setattr__(self, "G", 0.5 * (g + g.T))

    def coefficient(self, a: str, b: str) -> float:
        """Coefficient of ``da db`` in ds'^2 with time differential ``dt``.

        Off-diagonal entries include the factor 2 of the symmetric split.
        """
        i, j = _INDEX[a], _INDEX[b]
        scale = (self.c if i == 0 else 1.0) * (self.c if j == 0 else 1.0)
        return float(self.G[i, j] * scale * (1.0 if i == j else 2.0))

    @property
    def dt2(self) -> float:
        """Coefficient of dt^2, e.g. c^2 - w^2 rho^2 for a z rotation."""
        return self.coefficient("t", "t")

    def to_dict(self) -> dict:
        out = {}
        for key in KEYS:
            out[key] = float(self.G[_INDEX[key[2]], _INDEX[key[3]]])
        out["c"] = float(self.c)
        return out


@dataclass(frozen=True)
class AveragedMetric(IntervalForm):
    method: str = "exact-period"
    period: float | None = None
    error_bound: float = 0.0

    def to_dict(self) -> dict:
        out = super().to_dict()
        out.update(method=self.method, period=self.period, error_bound=self.error_bound)
        return out


def _assemble(tt, cross, space, X, c) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    g = np.empty((4, 4))
    g[0, 0] = 1.0 - float(X @ tt @ X) / c**2
    g[0, 1:] = g[1:, 0] = -(cross @ X) / c
    g[1:, 1:] = -space
    return g


def _validate(X, c):
    X = np.asarray(X, dtype=float)
    if X.shape != (3,) or not np.all(np.isfinite(X)):
        raise ValueError("X must be a finite 3-vector")
    if not (c > 0 and math.isfinite(c)):
        raise ValueError("c must be a positive finite speed")
    return X


def _products(expr, t):
    a, da = eval_with_derivative(expr, t)
    dat = np.swapaxes(da, -1, -2)
    return da @ dat, a @ dat, a @ np.swapaxes(a, -1, -2)


def interval_general(expr: RotationExpr, X, t: float, c: float = 1.0) -> IntervalForm:
    """Exact instantaneous interval for any rotation, sums included."""
    X = _validate(X, c)
    tt, cross, space = _products(expr, float(t))
    return IntervalForm(_assemble(tt, cross, space, X, c), c)


def interval_msr(expr: RotationExpr, X, t: float, c: float = 1.0) -> IntervalForm:
    """Interval of a pure product, using A A^T = I for the spatial block."""
    if not is_pure_product(expr):
        raise NotMSRError("expression contains a Sum node; use interval_general")
    X = _validate(X, c)
    a, da = eval_with_derivative(expr, float(t))
    tt = da @ da.T
    cross = a @ da.T
    return IntervalForm(_assemble(tt, cross, np.eye(3), X, c), c)


def asr_interval_closed(omega: float, X, c: float = 1.0, sense: int = 1) -> IntervalForm:
    """Time-independent interval of a z rotation:
    (c^2 - w^2 (x^2 + y^2)) dt^2 - 2 (y dx - x dy) w dt - |dX|^2."""
    x, y, _ = _validate(X, c)
    w = sense * omega
    g = -np.eye(4)
    g[0, 0] = 1.0 - omega**2 * (x * x + y * y) / c**2
    g[0, 1] = g[1, 0] = -w * y / c
    g[0, 2] = g[2, 0] = w * x / c
    return IntervalForm(g, c)


# ---------------------------------------------------------------------------
# time averaging

@dataclass(frozen=True)
class AveragingControl:
    abs_tol: float = 1e-10
    nodes_per_panel: int = 16
    max_refinements: int = 12
    max_denominator: int = 1000
    ratio_rtol: float = 1e-12
    window_tol: float = 1e-6
    window_start_periods: int = 8
    max_window_doublings: int = 14
    chunk: int = 200_000


@dataclass(frozen=True)
class AveragedProducts:
    """Time averages of A'A'^T, A A'^T and A A^T for one expression."""

    tt: np.ndarray
    cross: np.ndarray
    space: np.ndarray
    method: str
    period: float | None
    error_bound: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def metric(self, X, c: float = 1.0) -> AveragedMetric:
        X = _validate(X, c)
        return AveragedMetric(_assemble(self.tt, self.cross, self.space, X, c), c,
                              self.method, self.period, self.error_bound)

    def gtt(self, X, c: float = 1.0) -> float:
        """Averaged dt^2 coefficient (times 1, not c^2 scaled) at X."""
        X = np.asarray(X, dtype=float)
        return c**2 - float(X @ self.tt @ X)


def common_frequency(freqs, control: AveragingControl = AveragingControl()) -> float | None:
    """Largest w0 with every frequency an integer multiple of w0, or None.

    Zero frequencies are ignored; None means no common frequency was found
    with denominators up to ``control.max_denominator``.
    """
    w = [float(f) for f in freqs if f > 0]
    if not w:
        return None
    ref = max(w)
    fracs = []
    for f in w:
        fr = Fraction(f / ref).limit_denominator(control.max_denominator)
        if abs(float(fr) * ref - f) > control.ratio_rtol * f:
            return None
        fracs.append(fr)
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), (fr.denominator for fr in fracs))
    nums = [fr.numerator * (lcm // fr.denominator) for fr in fracs]
    g = reduce(math.gcd, nums)
    return ref * g / lcm


def resonances(freqs, max_order: int = 2, rtol: float = 1e-9) -> list[tuple[int, ...]]:
    """Integer vectors n (|n_i| <= max_order, first nonzero positive) with sum n_i w_i = 0.

    The integrands are trigonometric polynomials of degree <= 2 in each leaf
    angle, so an empty list guarantees that cross-leaf harmonics average to
    zero and the published averaged closed forms apply.  A non-empty list
    does not by itself mean they fail.
    """
    w = [float(f) for f in freqs]
    scale = max((abs(f) for f in w), default=0.0)
    found = []
    for n in itertools.product(range(-max_order, max_order + 1), repeat=len(w)):
        nz = [k for k in n if k != 0]
        if not nz or nz[0] < 0:
            continue
        if any(k != 0 and f == 0 for k, f in zip(n, w)):
            continue
        if abs(sum(k * f for k, f in zip(n, w))) <= rtol * scale:
            found.append(n)
    return found


def _gl_average(expr, t0: float, length: float, panels: int, nodes: np.ndarray, weights: np.ndarray,
                chunk: int, window=None):
    edges = t0 + length * np.arange(panels + 1) / panels
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    ts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    ws = (half[:, None] * weights[None, :]).ravel()
    if window is not None:
        ws = ws * window(ts)
    total = [np.zeros((3, 3)) for _ in range(3)]
    # fixed chunk order keeps the reduction deterministic
    for start in range(0, ts.size, chunk):
        sl = slice(start, start + chunk)
        for acc, prod in zip(total, _products(expr, ts[sl])):
            acc += np.einsum("n,nij->ij", ws[sl], prod)
    norm = ws.sum()
    return [acc / norm for acc in total]


def _max_change(a, b) -> float:
    return max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))


def average_products(expr: RotationExpr, control: AveragingControl = AveragingControl()) -> AveragedProducts:
    """Long-time averages of the matrix products entering the interval.

    Commensurate frequencies: mean over one common period with composite
    Gauss-Legendre quadrature, panels doubled until entries change by less
    than ``abs_tol``.  Otherwise: a smooth-window average over a window of
    N slowest periods, N doubled until the change drops below ``window_tol``;
    the last change is reported as the error bound.
    """
    freqs = [f for f in frequencies(expr)]
    if any(f < 0 for f in freqs):
        raise ValueError("frequencies must be >= 0")
    positive = [f for f in freqs if f > 0]
    if not positive:
        tt, cross, space = _products(expr, 0.0)
        return AveragedProducts(tt, cross, space, "constant", None, 0.0)
    nodes, weights = np.polynomial.legendre.leggauss(control.nodes_per_panel)
    w0 = common_frequency(positive, control)
    if w0 is not None:
        period = 2 * math.pi / w0
        harmonics = 2 * sum(positive) / w0
        panels = max(8, int(math.ceil(harmonics / 2)))
        prev = _gl_average(expr, 0.0, period, panels, nodes, weights, control.chunk)
        history = []
        for _ in range(control.max_refinements):
            panels *= 2
            cur = _gl_average(expr, 0.0, period, panels, nodes, weights, control.chunk)
            change = _max_change(cur, prev)
            history.append((panels, change))
            if change <= control.abs_tol:
                return AveragedProducts(*cur, "exact-period", period, change, {"refinements": history})
            prev = cur
        raise AveragingError("exact-period quadrature did not converge",
                             {"period": period, "refinements": history})

    slow = 2 * math.pi / min(positive)
    fast = 2 * math.pi / max(positive)
    periods = control.window_start_periods

    def run(n_periods):
        half = n_periods * slow
        panels = max(8, int(math.ceil(2 * half / fast)) * 2)

        def bump(t):
            s = np.clip(t / half, -1 + 1e-15, 1 - 1e-15)
            return np.exp(-1.0 / (1.0 - s * s))
        return _gl_average(expr, -half, 2 * half, panels, nodes, weights, control.chunk, bump)

    prev = run(periods)
    history = []
    for _ in range(control.max_window_doublings):
        periods *= 2
        cur = run(periods)
        change = _max_change(cur, prev)
        history.append((periods, change))
        if change <= control.window_tol:
            return AveragedProducts(*cur, "window", None, change, {"windows": history})
        prev = cur
    raise AveragingError("window average did not converge", {"windows": history})


def time_average_metric(expr: RotationExpr, X, c: float = 1.0,
                        control: AveragingControl = AveragingControl()) -> AveragedMetric:
    """Long-time average of the interval at X (see :func:`average_products`)."""
    X = _validate(X, c)
    return average_products(expr, control).metric(X, c)


# ---------------------------------------------------------------------------
# published averaged closed forms

def aex_avg_closed(omega: float, X, c: float = 1.0) -> AveragedMetric:
    """Average for z(w)*x(w): [c^2 - (3/2 x^2 + 3/2 y^2 + z^2) w^2] dt^2 - 2 (y dx - x dy) w dt - |dX|^2."""
    x, y, z = _validate(X, c)
    g = -np.eye(4)
    g[0, 0] = 1.0 - (1.5 * x * x + 1.5 * y * y + z * z) * omega**2 / c**2
    g[0, 1] = g[1, 0] = -omega * y / c
    g[0, 2] = g[2, 0] = omega * x / c
    return AveragedMetric(g, c, "closed-form")


def msr_avg_closed(w1: float, w2: float, w3: float, X, c: float = 1.0) -> AveragedMetric:
    """Average for z(w1)*x(w2)*y(w3) at non-resonant frequencies."""
    x, y, z = _validate(X, c)
    bracket = ((x * x + y * y) * w1**2 + (0.5 * y * y + z * z + 0.5 * x * x) * w2**2
               + (0.5 * z * z + 0.75 * y * y + 0.75 * x * x) * w3**2)
    g = -np.eye(4)
    g[0, 0] = 1.0 - bracket / c**2
    g[0, 1] = g[1, 0] = -w1 * y / c
    g[0, 2] = g[2, 0] = w1 * x / c
    return AveragedMetric(g, c, "closed-form")


def ssr_avg_closed(w1: float, w2: float, w3: float, X, c: float = 1.0) -> AveragedMetric:
    """Average for z(w1)+x(w2)+y(w3), coefficients taken verbatim from the
    published closed form:

        {c^2 - [(x^2+y^2) w1^2 + (y^2+z^2) w2^2 + (x^2+z^2) w3^2]} dt^2
        - 2 [(y dx - x dy) w1 - (y dz + z dy) w2 + (z dx - x dz) w3] dt
        - 3 (dx^2 + dy^2 + dz^2)

    The ``(y dz + z dy) w2`` term is symmetric in (y, z) and cannot arise
    from a fixed-axis rotation; the quadrature average gives ``-(y dz - z dy) w2``
    instead.  The other coefficients agree with quadrature at non-resonant
    frequencies.
    """
    if min(w1, w2, w3) < 0:
        raise ValueError("frequencies must be >= 0")
    x, y, z = _validate(X, c)
    g = -3.0 * np.eye(4)
    g[0, 0] = 1.0 - ((x * x + y * y) * w1**2 + (y * y + z * z) * w2**2 + (x * x + z * z) * w3**2) / c**2
    # ds^2 coefficients of dx dt, dy dt, dz dt, halved and divided by c
    g[0, 1] = g[1, 0] = -(y * w1 + z * w3) / c
    g[0, 2] = g[2, 0] = (x * w1 + z * w2) / c
    g[0, 3] = g[3, 0] = (y * w2 + x * w3) / c
    return AveragedMetric(g, c, "closed-form")


# ---------------------------------------------------------------------------

@dataclass
class OmegaInvarianceReport:
    period: float
    cycles: float
    aligned: bool
    norm_before: float
    norm_after: float
    discrepancy: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def omega_invariance_check(expr: RotationExpr, e1: SpacetimeEvent, e2: SpacetimeEvent,
                           base_omega: float, tol: float = 1e-9) -> OmegaInvarianceReport:
    """Compare |X2 A(t2) - X1 A(t1)|^2 with |X2 - X1|^2.

    ``aligned`` is true when t2 - t1 is an integer number of periods
    2 pi / base_omega, where the two must agree.
    """
    if not is_pure_product(expr):
        raise NotOmegaInvariantError("sums are not normalized and have no omega-invariance")
    if not base_omega > 0:
        raise NotOmegaInvariantError("base_omega must be positive")
    for f in frequencies(expr):
        ratio = f / base_omega
        if abs(ratio - round(ratio)) > tol * max(1.0, ratio):
            raise NotOmegaInvariantError(f"frequency {f} is not an integer multiple of {base_omega}")
    d_after = e2.X @ eval_expr(expr, e2.t) - e1.X @ eval_expr(expr, e1.t)
    d_before = e2.X - e1.X
    after, before = float(d_after @ d_after), float(d_before @ d_before)
    period = 2 * math.pi / base_omega
    cycles = (e2.t - e1.t) / period
    aligned = abs(cycles - round(cycles)) <= tol * max(1.0, abs(cycles))
    return OmegaInvarianceReport(period, cycles, aligned, before, after, abs(after - before))


def metric_determinant(form: IntervalForm) -> float:
    """Determinant of the 4x4 coefficient matrix in the (c dt, dx, dy, dz) basis."""
    return float(np.linalg.det(form.G))

