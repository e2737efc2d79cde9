"""Axis rotations, their products and sums, evaluated as 3x3 matrices.

Convention: points are row vectors and transform as ``X' = X @ A``.

For the coordinate axes the ``+`` sense places ``-sin`` above the diagonal
of the 2x2 block of the rotated plane, with the plane's coordinates taken
in index order: (x, y) for z, (y, z) for x and (x, z) for y.  For z and x
this is the right-hand rule about the axis; for y it is the right-hand rule
about -y.  An arbitrary unit axis ``n`` always follows the right-hand rule
about ``n``, so ``u(0,1,0)(w)`` equals ``y(-w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import InvalidAxisError, InvalidExpressionError

AXIS_TOL = 1e-12

# plane index pairs (i, j): A[i,i] = A[j,j] = cos, A[i,j] = -sense*sin, A[j,i] = +sense*sin
_PLANES = {"x": (1, 2), "y": (0, 2), "z": (0, 1)}
_UNIT = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def _fmt(v: float) -> str:
    return repr(float(v))


@dataclass(frozen=True)
class Axis:
    """Rotation axis: a coordinate label or an arbitrary unit direction."""

    label: str | None = None
    direction: tuple[float, float, float] | None = None

    def __post_init__(self):
        if (self.label is None) == (self.direction is None):
            raise InvalidAxisError("axis needs exactly one of label or direction")
        if self.label is not None and self.label not in _PLANES:
            raise InvalidAxisError(f"unknown axis label {self.label!r}")
        if self.direction is not None:
            d = tuple(float(v) for v in self.direction)
            if len(d) != 3 or not all(math.isfinite(v) for v in d):
                raise InvalidAxisError(f"axis direction must be 3 finite reals, got {self.direction}")
            norm = math.sqrt(sum(v * v for v in d))
            if abs(norm - 1.0) > AXIS_TOL:
                raise InvalidAxisError(f"axis direction {d} has norm {norm!r}, expected 1")
            object.__setattr__(self, "direction", d)

    @classmethod
    def of(cls, spec) -> "Axis":
        if isinstance(spec, Axis):
            return spec
        if isinstance(spec, str):
            return cls(label=spec.lower())
        return cls(direction=tuple(spec))

    @classmethod
    def normalized(cls, vector) -> "Axis":
        v = np.asarray(vector, dtype=float)
        n = np.linalg.norm(v)
        if not np.isfinite(n) or n == 0.0:
            raise InvalidAxisError("cannot normalize a zero or non-finite vector")
        return cls(direction=tuple(v / n))

    @property
    def unit(self) -> np.ndarray:
        """Unit vector the rotation leaves fixed."""
        if self.label is not None:
            return np.array(_UNIT[self.label])
        return np.array(self.direction)

    def angles(self) -> tuple[float, float]:
        """Fixed angles (phi1 in [0, pi], phi2 in (-pi, pi]) with
        ``n = (sin phi1 cos phi2, sin phi1 sin phi2, cos phi1)``."""
        dx, dy, dz = self.unit
        # atan2 keeps full precision for axes near +-z, where acos does not
        phi1 = math.atan2(math.hypot(dx, dy), dz)
        phi2 = math.atan2(dy, dx) if math.hypot(dx, dy) > 0.0 else 0.0
        if phi2 == -math.pi:
            phi2 = math.pi
        return phi1, phi2

    def frame(self) -> np.ndarray:
        """Fixed rotation R (column convention) taking e_z to the axis direction.

        Built from two coordinate-axis rotations by the fixed angles, R = Rz(phi2) Ry(phi1).
        """
        phi1, phi2 = self.angles()
        c1, s1, c2, s2 = math.cos(phi1), math.sin(phi1), math.cos(phi2), math.sin(phi2)
        ry = np.array([[c1, 0.0, s1], [0.0, 1.0, 0.0], [-s1, 0.0, c1]])
        rz = np.array([[c2, -s2, 0.0], [s2, c2, 0.0], [0.0, 0.0, 1.0]])
        return rz @ ry

    def parallel_to(self, other: "Axis") -> bool:
        return bool(np.linalg.norm(np.cross(self.unit, other.unit)) < 1e-12)

    def to_text(self) -> str:
        if self.label is not None:
            return self.label
        return "u(" + ",".join(_fmt(v) for v in self.direction) + ")"


@dataclass(frozen=True)
class AsrSpec:
    axis: Axis
    omega: float
    sense: int = 1

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis.of(self.axis))
        if not math.isfinite(self.omega) or self.omega < 0:
            raise InvalidExpressionError(f"omega must be finite and >= 0, got {self.omega}")
        if self.sense not in (1, -1):
            raise InvalidExpressionError(f"sense must be +1 or -1, got {self.sense}")
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def signed_omega(self) -> float:
        return self.sense * self.omega


@dataclass(frozen=True)
class Leaf:
    spec: AsrSpec

    def to_text(self) -> str:
        w = self.spec.omega if self.spec.sense > 0 else -self.spec.omega
        if self.spec.sense < 0 and w == 0.0:
            w = -0.0
        return f"{self.spec.axis.to_text()}({_fmt(w)})"

    def leaves(self):
        yield self


@dataclass(frozen=True)
class Product:
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise InvalidExpressionError("Product needs at least one factor")

    def to_text(self) -> str:
        return "*".join(f"({t.to_text()})" if isinstance(t, (Sum, Product)) else t.to_text()
                        for t in self.terms)

    def leaves(self):
        for t in self.terms:
            yield from t.leaves()


@dataclass(frozen=True)
class Sum:
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise InvalidExpressionError("Sum needs at least one term")

    def to_text(self) -> str:
        return "+".join(f"({t.to_text()})" if isinstance(t, Sum) else t.to_text()
                        for t in self.terms)

    def canonical_terms(self) -> tuple:
        return tuple(sorted(self.terms, key=lambda t: t.to_text()))

    def leaves(self):
        for t in self.terms:
            yield from t.leaves()


RotationExpr = Union[Leaf, Product, Sum]


def asr(axis, omega: float) -> Leaf:
    """Leaf from a signed frequency; the sign becomes the rotation sense."""
    sense = -1 if math.copysign(1.0, omega) < 0 else 1
    return Leaf(AsrSpec(Axis.of(axis), abs(float(omega)), sense))


def is_pure_product(expr: RotationExpr) -> bool:
    if isinstance(expr, Leaf):
        return True
    if isinstance(expr, Sum):
        return False
    return all(is_pure_product(t) for t in expr.terms)


def frequencies(expr: RotationExpr) -> list[float]:
    return [leaf.spec.omega for leaf in expr.leaves()]


def _check(expr):
    if not isinstance(expr, (Leaf, Product, Sum)):
        raise InvalidExpressionError(f"not a rotation expression: {expr!r}")


def _coord(label: str, theta: np.ndarray) -> np.ndarray:
    i, j = _PLANES[label]
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3))
    k = 3 - i - j
    out[..., k, k] = 1.0
    out[..., i, i] = c
    out[..., j, j] = c
    out[..., i, j] = -s
    out[..., j, i] = s
    return out


def _coord_dot(label: str, theta: np.ndarray, rate: float) -> np.ndarray:
    i, j = _PLANES[label]
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3))
    out[..., i, i] = -s * rate
    out[..., j, j] = -s * rate
    out[..., i, j] = -c * rate
    out[..., j, i] = c * rate
    return out


def _leaf_eval(spec: AsrSpec, t: np.ndarray, derivative: bool) -> np.ndarray:
    rate = spec.signed_omega
    theta = rate * t
    if spec.axis.label is not None:
        return _coord_dot(spec.axis.label, theta, rate) if derivative else _coord(spec.axis.label, theta)
    # right-handed rotation about n: R Az R^T with R taking e_z to n
    base = _coord_dot("z", theta, rate) if derivative else _coord("z", theta)
    r = spec.axis.frame()
    return r @ base @ r.T


def _eval(expr, t: np.ndarray) -> np.ndarray:
    if isinstance(expr, Leaf):
        return _leaf_eval(expr.spec, t, False)
    if isinstance(expr, Product):
        out = _eval(expr.terms[0], t)
        for term in expr.terms[1:]:
            out = out @ _eval(term, t)
        return out
    if isinstance(expr, Sum):
        terms = expr.canonical_terms()
        out = _eval(terms[0], t)
        for term in terms[1:]:
            out = out + _eval(term, t)
        return out
    raise InvalidExpressionError(f"not a rotation expression: {expr!r}")


def _eval_both(expr, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(expr, Leaf):
        return _leaf_eval(expr.spec, t, False), _leaf_eval(expr.spec, t, True)
    if isinstance(expr, Product):
        a, da = _eval_both(expr.terms[0], t)
        for term in expr.terms[1:]:
            b, db = _eval_both(term, t)
            a, da = a @ b, da @ b + a @ db
        return a, da
    if isinstance(expr, Sum):
        terms = expr.canonical_terms()
        a, da = _eval_both(terms[0], t)
        for term in terms[1:]:
            b, db = _eval_both(term, t)
            a, da = a + b, da + db
        return a, da
    raise InvalidExpressionError(f"not a rotation expression: {expr!r}")


def _as_time(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("time must be finite")
    return arr, arr.ndim == 0


def eval_asr(spec: AsrSpec, t) -> np.ndarray:
    """Matrix of a single axis rotation at time(s) ``t``.

    Scalar ``t`` gives a (3, 3) array, an array of times gives (..., 3, 3).
    """
    arr, _ = _as_time(t)
    return _leaf_eval(spec, arr, False)


def eval_expr(expr: RotationExpr, t) -> np.ndarray:
    """Products multiply left to right in list order, sums add entrywise."""
    _check(expr)
    arr, _ = _as_time(t)
    return _eval(expr, arr)


def eval_expr_derivative(expr: RotationExpr, t) -> np.ndarray:
    """Analytic dA/dt (Leibniz rule over products, termwise over sums)."""
    _check(expr)
    arr, _ = _as_time(t)
    return _eval_both(expr, arr)[1]


def eval_with_derivative(expr: RotationExpr, t) -> tuple[np.ndarray, np.ndarray]:
    _check(expr)
    arr, _ = _as_time(t)
    return _eval_both(expr, arr)


def transform_point(expr: RotationExpr, X, t) -> np.ndarray:
    """Row-vector transform X' = X A(t)."""
    x = np.asarray(X, dtype=float)
    if x.shape[-1] != 3 or not np.all(np.isfinite(x)):
        raise ValueError("X must be a finite 3-vector")
    return x @ eval_expr(expr, t)


# ---------------------------------------------------------------------------
# property checks

@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""
    applicable: bool = True

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value,
                "tol": self.tol, "detail": self.detail, "applicable": self.applicable}


@dataclass
class PropertyReport:
    expr: str
    kind: str
    trials: int
    seed: int
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"expr": self.expr, "kind": self.kind, "trials": self.trials, "seed": self.seed,
                "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


NONCOMMUTE_MIN = 1e-3


def _sample_times(expr, trials: int, rng: np.random.Generator) -> np.ndarray:
    w = [f for f in frequencies(expr) if f > 0]
    span = 2 * math.pi / min(w) if w else 1.0
    return rng.uniform(-span, span, size=trials)


def property_report(expr: RotationExpr, trials: int = 100, seed: int = 0, tol: float = 1e-12) -> PropertyReport:
    """Check the product or sum properties of ``expr`` at seeded random times.

    Leaves and pure products are expected to be orthogonal with unit
    determinant and, for adjacent non-parallel leaves, order sensitive.
    Expressions containing a sum are expected to be neither orthogonal nor
    normalized, and to be insensitive to the order of the summed terms.
    Failures are recorded in the report; nothing is raised.
    """
    _check(expr)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    times = _sample_times(expr, trials, rng)
    mats = eval_expr(expr, times)
    eye = np.eye(3)
    orth = float(np.max(np.abs(mats @ np.swapaxes(mats, -1, -2) - eye)))
    dets = np.linalg.det(mats)
    det_dev = float(np.max(np.abs(dets - 1.0)))
    checks: list[Check] = []

    if is_pure_product(expr):
        kind = "leaf" if isinstance(expr, Leaf) else "product"
        inv_dev = float(np.max(np.abs(np.linalg.inv(mats) - np.swapaxes(mats, -1, -2))))
        checks.append(Check("orthogonality", orth <= tol, orth, tol, "max ||A A^T - I||_inf"))
        checks.append(Check("inverse_is_transpose", inv_dev <= 10 * tol, inv_dev, 10 * tol,
                            "max ||A^-1 - A^T||_inf"))
        checks.append(Check("unit_determinant", det_dev <= tol, det_dev, tol, "max |det A - 1|"))
        if isinstance(expr, Product):
            checks.extend(_noncommute_checks(expr, times))
    else:
        kind = "sum"
        checks.append(Check("not_orthogonal", orth > tol, orth, tol,
                            "expected max ||A A^T - I||_inf > tol"))
        checks.append(Check("not_normalized", det_dev > tol, det_dev, tol,
                            f"expected max |det A - 1| > tol; det range [{float(dets.min())!r}, {float(dets.max())!r}]"))
        checks.extend(_sum_order_checks(expr, times, rng))
    return PropertyReport(expr.to_text(), kind, trials, seed, checks)


def _noncommute_checks(expr: Product, times: np.ndarray) -> list[Check]:
    out = []
    base = eval_expr(expr, times)
    for i in range(len(expr.terms) - 1):
        a, b = expr.terms[i], expr.terms[i + 1]
        if isinstance(a, Leaf) and isinstance(b, Leaf) and a.spec.axis.parallel_to(b.spec.axis):
            continue
        if not (isinstance(a, Leaf) and isinstance(b, Leaf)):
            continue
        swapped = list(expr.terms)
        swapped[i], swapped[i + 1] = b, a
        diff = float(np.max(np.abs(base - eval_expr(Product(tuple(swapped)), times))))
        out.append(Check(f"order_sensitive[{i},{i + 1}]", diff >= NONCOMMUTE_MIN, diff, NONCOMMUTE_MIN,
                         "max ||A - A_swapped||_inf over sampled t"))
    return out


def _sum_order_checks(expr, times, rng) -> list[Check]:
    out = []
    for node in _sum_nodes(expr):
        if len(node.terms) < 2:
            continue
        perm = rng.permutation(len(node.terms))
        if np.all(perm == np.arange(len(node.terms))):
            perm = perm[::-1]
        shuffled = Sum(tuple(node.terms[k] for k in perm))
        a = eval_expr(node, times)
        b = eval_expr(shuffled, times)
        diff = float(np.max(np.abs(a - b)))
        out.append(Check(f"order_insensitive[{node.to_text()}]", bool(np.array_equal(a, b)), diff, 0.0,
                         "bit-for-bit equality under a random permutation of terms"))
    return out


def _sum_nodes(expr):
    if isinstance(expr, Sum):
        yield expr
    if isinstance(expr, (Sum, Product)):
        for t in expr.terms:
            yield from _sum_nodes(t)


def random_axis(rng: np.random.Generator) -> Axis:
    v = rng.normal(size=3)
    return Axis.normalized(v)


def random_product(rng: np.random.Generator, n_leaves: int, wmin: float = 0.1, wmax: float = 10.0) -> Product:
    leaves = []
    for _ in range(n_leaves):
        w = float(rng.uniform(wmin, wmax))
        sense = 1 if rng.random() < 0.5 else -1
        leaves.append(Leaf(AsrSpec(random_axis(rng), w, sense)))
    return Product(tuple(leaves))


def parallel_composition_error(w1: float, w2: float, times, axis="z") -> float:
    """max ||A(w1) A(w2) - A(w1 + w2)||_inf over ``times``."""
    t = np.asarray(times, dtype=float)
    a = eval_asr(AsrSpec(axis, w1), t) @ eval_asr(AsrSpec(axis, w2), t)
    return float(np.max(np.abs(a - eval_asr(AsrSpec(axis, w1 + w2), t))))


def property_suite(trials: int = 100, seed: int = 0, tol: float = 1e-12) -> dict:
    """Deterministic battery of property reports used by the ``props`` command."""
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(20):
        reports.append(property_report(random_product(rng, int(rng.integers(1, 5))),
                                        trials, int(rng.integers(2**31)), tol))
    for _ in range(5):
        leaves = [Leaf(AsrSpec(Axis.of(lbl), float(rng.uniform(0.1, 10.0))))
                  for lbl in ("z", "x", "y")[: int(rng.integers(2, 4))]]
        reports.append(property_report(Sum(tuple(leaves)), trials, int(rng.integers(2**31)), tol))
    grid = np.linspace(0.1, 10.0, 5)
    times = rng.uniform(-10.0, 10.0, size=trials)
    par = max(parallel_composition_error(a, b, times) for a in grid for b in grid)
    parallel = Check("parallel_composition", par <= tol, par, tol, "z(w1)*z(w2) vs z(w1+w2)")
    passed = all(r.passed for r in reports) and parallel.passed
    return {"trials": trials, "seed": seed, "tol": tol, "passed": passed,
            "parallel_composition": parallel.to_dict(),
            "reports": [r.to_dict() for r in reports]}
