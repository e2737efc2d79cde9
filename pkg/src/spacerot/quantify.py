"""Two-source cancellation in 1D and Bessel-zero size quantification.

Spherical Bessel functions are evaluated from their closed forms and
recurrences: a power series for small x, downward (Miller) recurrence
normalised to j0 or j1 for j_l, upward recurrence for y_l.  j_l and y_l
share their zeros with J_{l+1/2} and Y_{l+1/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BracketError, DomainError

MAX_L = 50
SERIES_X = 1.0


# ---------------------------------------------------------------------------
# spherical Bessel functions

def _j_series(l: int, x: np.ndarray) -> np.ndarray:
    # x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    dfact = math.prod(range(1, 2 * l + 2, 2))
    term = np.ones_like(x)
    total = np.ones_like(x)
    y = -0.5 * x * x
    for k in range(1, 40):
        term = term * y / (k * (2 * l + 2 * k + 1))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return x**l / dfact * total


def _j_miller(l: int, x: np.ndarray) -> np.ndarray:
    start = l + int(np.max(x)) + 20 + int(math.sqrt(40 * (l + int(np.max(x)) + 1)))
    f_next = np.zeros_like(x)
    f = np.full_like(x, 1e-300)
    out = np.zeros_like(x)
    f0 = f1 = None
    for n in range(start, 0, -1):
        # j_{n-1} = (2n+1)/x j_n - j_{n+1}
        f_prev = (2 * n + 1) / x * f - f_next
        f_next, f = f, f_prev
        if n - 1 == l:
            out = f.copy()
        if n == 1:
            f1, f0 = f_next, f
        big = np.abs(f) > 1e250
        if np.any(big):
            f = np.where(big, f * 1e-250, f)
            f_next = np.where(big, f_next * 1e-250, f_next)
            out = np.where(big, out * 1e-250, out)
    if l == 0:
        out = f0
    j0 = np.sin(x) / x
    j1 = np.sin(x) / (x * x) - np.cos(x) / x
    use0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use0, j0 / np.where(f0 == 0, 1.0, f0), j1 / np.where(f1 == 0, 1.0, f1))
    return out * scale


def spherical_jn(l: int, x):
    """Spherical Bessel function of the first kind j_l(x), x >= 0."""
    x = np.asarray(x, dtype=float)
    if l < 0 or l > MAX_L:
        raise DomainError(f"degree l must be in [0, {MAX_L}], got {l}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError("j_l requires finite x >= 0")
    flat = np.atleast_1d(x).astype(float)
    out = np.empty_like(flat)
    small = flat <= SERIES_X
    if np.any(small):
        out[small] = _j_series(l, flat[small])
    if np.any(~small):
        xs = flat[~small]
        if l == 0:
            out[~small] = np.sin(xs) / xs
        elif l == 1:
            out[~small] = np.sin(xs) / (xs * xs) - np.cos(xs) / xs
        else:
            out[~small] = _j_miller(l, xs)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def spherical_yn(l: int, x):
    """Spherical Bessel function of the second kind y_l(x), x > 0."""
    x = np.asarray(x, dtype=float)
    if l < 0 or l > MAX_L:
        raise DomainError(f"degree l must be in [0, {MAX_L}], got {l}")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise DomainError("y_l is singular at x <= 0")
    y0 = -np.cos(x) / x
    if l == 0:
        return y0 if x.ndim else float(y0)
    y1 = -np.cos(x) / (x * x) - np.sin(x) / x
    for n in range(1, l):
        y0, y1 = y1, (2 * n + 1) / x * y1 - y0
    return y1 if x.ndim else float(y1)


def spherical_bessel(kind: str, l: int, x):
    """j_l (``kind="first"``) or y_l (``kind="second"``)."""
    if kind == "first":
        return spherical_jn(l, x)
    if kind == "second":
        return spherical_yn(l, x)
    raise ValueError(f"kind must be 'first' or 'second', got {kind!r}")


# ---------------------------------------------------------------------------
# size spectra

@dataclass(frozen=True)
class ModeSpec:
    l: int
    parity: str = "even"

    def __post_init__(self):
        if self.l < 0:
            raise ValueError("l must be >= 0")
        if self.parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")

    @property
    def kind(self) -> str:
        return "first" if self.parity == "even" else "second"

    def function(self) -> Callable:
        return lambda x: spherical_bessel(self.kind, self.l, x)


@dataclass
class SizeSpectrum:
    k: float
    mode: ModeSpec
    roots: list
    sizes: list

    def to_dict(self) -> dict:
        return {"k": self.k, "mode": {"l": self.mode.l, "parity": self.mode.parity},
                "roots": list(self.roots), "sizes": list(self.sizes)}


def _bisect(f, lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bessel_zeros(mode: ModeSpec, count: int, tol: float = 0.0, max_steps: int = 10_000) -> list[float]:
    """First ``count`` positive zeros of j_l (even) or y_l (odd).

    Zeros exceed l + 1/2 and are more than pi apart for l >= 1 (exactly pi
    for l = 0), so a scan in steps of pi from l + 1/2 brackets one zero per
    step.  Bisection then runs down to ``tol`` (default: until the bracket
    cannot shrink in floating point).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    f = mode.function()
    x = mode.l + 0.5
    fx = f(x)
    roots, trace = [], [(x, fx)]
    for _ in range(max_steps):
        nxt = x + math.pi
        fn = f(nxt)
        trace.append((nxt, fn))
        if fn == 0.0:
            roots.append(nxt)
            nxt += 1e-9
            fn = f(nxt)
        elif (fn > 0) != (fx > 0):
            roots.append(_bisect(f, x, nxt, fx, tol))
        if len(roots) >= count:
            return roots[:count]
        x, fx = nxt, fn
    raise BracketError(f"found only {len(roots)} of {count} zeros", trace)


def quantified_sizes(mode: ModeSpec, k: float, count: int) -> SizeSpectrum:
    """Allowed radii r_i = alpha_i / k from the first ``count`` Bessel zeros."""
    if not k > 0:
        raise ValueError("k must be positive")
    roots = bessel_zeros(mode, count)
    return SizeSpectrum(float(k), mode, roots, [a / k for a in roots])


def boundary_condition_check(mode: ModeSpec, k: float, R: float, tol: float = 1e-9) -> bool:
    """True iff k R lies within ``tol`` of a zero of the mode's Bessel function."""
    if not R > 0:
        raise ValueError("R must be positive")
    x = k * R
    lo = mode.l + 0.5
    if x < lo - tol:
        return False
    # one zero per pi-step of the scan, so this count always reaches past x
    zeros = bessel_zeros(mode, int((x - lo) / math.pi) + 2)
    return any(abs(z - x) <= tol for z in zeros)


# ---------------------------------------------------------------------------
# radial Helmholtz residual

@dataclass
class RadialResidual:
    max: float
    rms: float
    h: float
    r_range: tuple
    order_estimate: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def exterior_solution_residual(mode: ModeSpec, k: float, C1: float, C2: float, r_range, h: float) -> RadialResidual:
    """Residual of R'' + (2/r) R' + (k^2 - l(l+1)/r^2) R = 0 for
    R = C1 j_l(k r) + C2 y_l(k r), with 3-point differences; the order is
    estimated from the stride-2 residual on the same nodes."""
    a, b = r_range
    if not 0 < a < b:
        raise ValueError("r_range must satisfy 0 < r_min < r_max")
    n = int(round((b - a) / h)) + 1
    if n < 9:
        raise ValueError("grid too coarse for r_range")
    r = a + h * np.arange(n)
    l = mode.l
    R = C1 * spherical_jn(l, k * r) + (C2 * spherical_yn(l, k * r) if C2 != 0 else 0.0)
    R = np.broadcast_to(np.asarray(R, dtype=float), r.shape)

    def residual(s):
        m = 2
        c = slice(m, n - m)
        rp, rm, r0 = R[m + s:n - m + s], R[m - s:n - m - s], R[c]
        hs = h * s
        d2 = (rp - 2 * r0 + rm) / hs**2
        d1 = (rp - rm) / (2 * hs)
        rc = r[c]
        return d2 + 2 / rc * d1 + (k * k - l * (l + 1) / rc**2) * r0

    r1, r2 = residual(1), residual(2)
    mx, mx2 = float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))
    order = math.log2(mx2 / mx) if mx > 0 and mx2 > 0 else None
    return RadialResidual(mx, float(np.sqrt(np.mean(r1**2))), h, (a, b), order)


# ---------------------------------------------------------------------------
# one-dimensional two-source model

def sin_profile(xi):
    return np.sin(xi)


@dataclass(frozen=True)
class SourcePair1D:
    """Two sources at -a and +a; the second carries ``sign`` (+1 same, -1 opposite).

    ``profile`` must be 2 pi periodic and change sign under a shift by pi.
    """

    a: float
    sign: int = 1
    profile: Callable = sin_profile
    v: float = 1.0
    tol: float = 1e-12

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        xi = np.linspace(0, 2 * np.pi, 64, endpoint=False) + 0.1234
        u = np.asarray(self.profile(xi), dtype=float)
        if (np.max(np.abs(self.profile(xi + 2 * np.pi) - u)) > self.tol
                or np.max(np.abs(self.profile(xi + np.pi) + u)) > self.tol):
            raise ValueError("profile must satisfy u(xi + 2pi) = u(xi) = -u(xi + pi)")


def two_source_field(pair: SourcePair1D, x, t):
    """Superposed influence at phase position x and time t."""
    x = np.asarray(x, dtype=float)
    u, a, s, vt = pair.profile, pair.a, pair.sign, pair.v * t
    right = u((x + a) - vt) + s * u((x - a) - vt)
    inner = u((x + a) - vt) + s * u((x - a) + vt)
    left = u((x + a) + vt) + s * u((x - a) + vt)
    return np.where(x > a, right, np.where(x < -a, left, inner))


def external_amplitude(profile: Callable, sign: int, a: float, samples: int = 512) -> float:
    """max |u(xi + a) + sign u(xi - a)| over one period; both outer regions
    reduce to this form."""
    xi = 2 * np.pi * np.arange(samples) / samples
    return float(np.max(np.abs(profile(xi + a) + sign * profile(xi - a))))


@dataclass
class CancellationScan:
    a: np.ndarray
    amplitude: np.ndarray
    tol: float

    @property
    def cancellations(self) -> np.ndarray:
        return self.a[self.amplitude <= self.tol]

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "amplitude": self.amplitude.tolist(), "tol": self.tol,
                "cancellations": self.cancellations.tolist()}


def external_cancellation_scan(profile: Callable, sign: int, a_grid, tol: float = 1e-12) -> CancellationScan:
    a = np.asarray(a_grid, dtype=float)
    if np.any(a <= 0) or np.any(a > 4 * np.pi + 1e-12):
        raise ValueError("a_grid must lie in (0, 4 pi]")
    amp = np.array([external_amplitude(profile, sign, ai) for ai in a])
    return CancellationScan(a, amp, tol)
