"""Surfaces where the averaged dt^2 coefficient vanishes, and their meshes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from .errors import MeshError, NoSurfaceError, RootNotFoundError
from .metric import AveragedProducts, AveragingControl, average_products
from .rotation import RotationExpr

SCAN_STEPS = 200


def asr_radius(omega: float, c: float = 1.0) -> float:
    """Cylinder radius c / w of a single axis rotation."""
    if not omega > 0:
        raise NoSurfaceError(f"no stable surface for omega={omega}")
    return c / omega


def msr_radius(theta, w1: float, w2: float, w3: float, c: float = 1.0):
    """Radius of the z(w1)*x(w2)*y(w3) ellipsoid at polar angle ``theta``.

    r(theta)^-2 = (w1/c)^2 s + (w2/c)^2 (1 - s/2) + (w3/c)^2 (1 + s/2) / 2,  s = sin^2 theta
    """
    if max(w1, w2, w3) <= 0:
        raise NoSurfaceError("all frequencies are zero")
    s = np.sin(np.asarray(theta, dtype=float)) ** 2
    bracket = (w1 / c) ** 2 * s + (w2 / c) ** 2 * (1 - 0.5 * s) + 0.5 * (w3 / c) ** 2 * (1 + 0.5 * s)
    with np.errstate(divide="ignore"):
        r = bracket ** -0.5
    return float(r) if np.ndim(r) == 0 else r


def locate_gtt_zero(source, direction, r_max: float, c: float = 1.0,
                    control: AveragingControl = AveragingControl()) -> float:
    """First radius along ``direction`` where the averaged dt^2 coefficient vanishes.

    ``source`` is a rotation expression or precomputed :class:`AveragedProducts`.
    A 200-step scan from the origin brackets the root, then bisection runs to
    an absolute tolerance of 1e-12 * r_max.
    """
    avg = source if isinstance(source, AveragedProducts) else average_products(source, control)
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if n == 0 or not np.isfinite(n):
        raise ValueError("direction must be a nonzero finite vector")
    d = d / n
    if not r_max > 0:
        raise ValueError("r_max must be positive")

    def g(r):
        return avg.gtt(r * d, c)

    g0 = g(0.0)
    if not g0 > 0:
        raise RootNotFoundError("dt^2 coefficient is not positive at the rotation point", [(0.0, g0)])
    profile = [(0.0, g0)]
    lo, glo = 0.0, g0
    for k in range(1, SCAN_STEPS + 1):
        r = r_max * k / SCAN_STEPS
        gr = g(r)
        profile.append((r, gr))
        if gr == 0.0:
            return r
        if gr < 0:
            hi = r
            break
        lo, glo = r, gr
    else:
        raise RootNotFoundError(f"no sign change of the dt^2 coefficient before r_max={r_max}", profile)
    tol = 1e-12 * r_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = g(mid)
        if gm > 0:
            lo = mid
        elif gm < 0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


@dataclass
class StableSurface:
    """Zero set of the averaged dt^2 coefficient.

    ``kind`` is ``cylinder`` (``radius``, ``z_half``), ``ellipsoid``
    (``r_of_theta``) or ``numeric`` (``r_of_dir`` sampled by root finding).
    """

    kind: str
    omegas: tuple
    c: float = 1.0
    radius: float | None = None
    z_half: float | None = None
    r_of_theta: Callable | None = None
    r_of_dir: Callable | None = None
    meta: dict = field(default_factory=dict)

    def radius_at(self, theta, phi):
        if self.kind == "ellipsoid":
            return self.r_of_theta(theta)
        if self.kind == "numeric":
            d = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
            return self.r_of_dir(d)
        raise MeshError("cylinder radius is not a function of direction")


def cylinder_surface(omega: float, c: float = 1.0, z_half: float | None = None) -> StableSurface:
    r = asr_radius(omega, c)
    return StableSurface("cylinder", (omega, 0.0, 0.0), c, radius=r, z_half=3 * r if z_half is None else z_half)


def ellipsoid_surface(w1: float, w2: float, w3: float, c: float = 1.0) -> StableSurface:
    msr_radius(0.0, w1, w2, w3, c)  # raises when all frequencies vanish
    return StableSurface("ellipsoid", (w1, w2, w3), c,
                         r_of_theta=lambda th: msr_radius(th, w1, w2, w3, c))


def numeric_surface(expr: RotationExpr, r_max: float, c: float = 1.0,
                    control: AveragingControl = AveragingControl()) -> StableSurface:
    avg = average_products(expr, control)
    freqs = tuple(leaf.spec.omega for leaf in expr.leaves())
    return StableSurface("numeric", freqs, c,
                         r_of_dir=lambda d: locate_gtt_zero(avg, d, r_max, c),
                         meta={"expr": expr.to_text(), "r_max": r_max})


@dataclass
class SurfaceMesh:
    vertices: np.ndarray
    faces: np.ndarray
    params: np.ndarray | None = None  # (theta, phi, r) per vertex when meaningful

    def edge_counts(self) -> dict:
        counts: dict = {}
        for f in self.faces:
            for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                counts[(int(a), int(b))] = counts.get((int(a), int(b)), 0) + 1
        return counts

    def is_closed_oriented(self) -> bool:
        """Every directed edge appears once and its reverse appears once."""
        counts = self.edge_counts()
        return all(n == 1 and counts.get((b, a)) == 1 for (a, b), n in counts.items())

    def signed_volume(self) -> float:
        v = self.vertices[self.faces]
        return float(np.einsum("ij,ij->i", v[:, 0], np.cross(v[:, 1], v[:, 2])).sum() / 6.0)


def mesh_surface(surface: StableSurface, resolution=(32, 16)) -> SurfaceMesh:
    """Triangulate a stable surface.

    Cylinders give an open ``n_phi x n_z`` tube; ellipsoids and numeric
    surfaces give a closed mesh with ``n_theta`` latitude levels including
    the two poles, wound so normals point outward.
    """
    n_phi, n_second = (int(v) for v in resolution)
    if n_phi < 8 or n_second < 8:
        raise MeshError(f"resolution must be >= 8 in each parameter, got {resolution}")
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    if surface.kind == "cylinder":
        r, zh = surface.radius, surface.z_half
        if r is None or not (math.isfinite(r) and r > 0) or not (zh and zh > 0):
            raise MeshError("degenerate cylinder")
        zs = np.linspace(-zh, zh, n_second)
        verts = np.array([[r * math.cos(p), r * math.sin(p), z] for z in zs for p in phi])
        faces = []
        for j in range(n_second - 1):
            for i in range(n_phi):
                a, b = j * n_phi + i, j * n_phi + (i + 1) % n_phi
                c_, d = a + n_phi, b + n_phi
                faces += [(a, b, d), (a, d, c_)]
        return SurfaceMesh(verts, np.array(faces, dtype=np.int64))

    if surface.kind not in ("ellipsoid", "numeric"):
        raise MeshError(f"unknown surface kind {surface.kind!r}")
    thetas = math.pi * np.arange(n_second) / (n_second - 1)
    verts, params = [], []

    def add(th, ph):
        r = surface.radius_at(th, ph)
        if not (np.isfinite(r) and r > 0):
            raise MeshError(f"non-positive or infinite radius {r} at theta={th}")
        d = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
        verts.append(r * d)
        params.append((th, ph, r))

    add(0.0, 0.0)
    for th in thetas[1:-1]:
        for ph in phi:
            add(th, ph)
    add(math.pi, 0.0)
    south = len(verts) - 1
    rings = n_second - 2
    faces = []
    for i in range(n_phi):
        faces.append((0, 1 + i, 1 + (i + 1) % n_phi))
    for j in range(rings - 1):
        for i in range(n_phi):
            a = 1 + j * n_phi + i
            b = 1 + j * n_phi + (i + 1) % n_phi
            c_, d = a + n_phi, b + n_phi
            faces += [(a, c_, d), (a, d, b)]
    base = 1 + (rings - 1) * n_phi
    for i in range(n_phi):
        faces.append((south, base + (i + 1) % n_phi, base + i))
    return SurfaceMesh(np.array(verts), np.array(faces, dtype=np.int64), np.array(params))


def write_obj(mesh: SurfaceMesh, fh: TextIO) -> None:
    for v in mesh.vertices:
        fh.write("v {:.17g} {:.17g} {:.17g}\n".format(*v))
    for f in mesh.faces:
        fh.write("f {} {} {}\n".format(*(int(i) + 1 for i in f)))


def read_obj(fh: TextIO) -> SurfaceMesh:
    verts, faces = [], []
    for line in fh:
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            verts.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return SurfaceMesh(np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def write_radius_csv(mesh: SurfaceMesh, fh: TextIO) -> None:
    """(theta, phi, r) rows, one per vertex."""
    if mesh.params is None:
        v = mesh.vertices
        r = np.linalg.norm(v, axis=1)
        theta = np.arccos(np.clip(v[:, 2] / np.where(r > 0, r, 1.0), -1, 1))
        params = np.column_stack([theta, np.arctan2(v[:, 1], v[:, 0]), r])
    else:
        params = mesh.params
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(["theta", "phi", "r"])
    for row in params:
        w.writerow([format(float(x), ".17g") for x in row])
