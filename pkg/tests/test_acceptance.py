"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line; the lines are also
repeated in pytest's terminal summary (see conftest.py).
"""

import itertools
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from spacerot.metric import (SpacetimeEvent, aex_avg_closed, average_products, msr_avg_closed,
                             omega_invariance_check, resonances, ssr_avg_closed)
from spacerot.quantify import (ModeSpec, boundary_condition_check, external_amplitude,
                               external_cancellation_scan, quantified_sizes, sin_profile)
from spacerot.rotation import (AsrSpec, Leaf, Product, Sum, asr, eval_asr, eval_expr, random_axis,
                               random_product)
from spacerot.surfaces import asr_radius, locate_gtt_zero, msr_radius
from spacerot.waves import (Grid, boost_term_sweep, build_boosted_wave, chirp, constant, gaussian,
                            klein_gordon_residual, plane_phase, schrodinger_residual)

RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS[n] = line
    print(line)
    assert ok, line


def inf_norm(m):
    return float(np.max(np.sum(np.abs(m), axis=-1)))


def non_resonant_triples(rng, count, top=12):
    """Integer triples free of |n_i| <= 2 resonances, scaled by a random base frequency."""
    out = []
    while len(out) < count:
        ints = rng.integers(1, top + 1, 3)
        if not resonances(ints.tolist()):
            out.append(tuple(float(rng.uniform(0.3, 2.0)) * ints))
    return out


def test_criterion_01_msr_orthogonality():
    rng = np.random.default_rng(2024)
    worst_orth = worst_det = 0.0
    for _ in range(100):
        expr = random_product(rng, int(rng.integers(1, 5)), 0.1, 10.0)
        a = eval_expr(expr, rng.uniform(-100.0, 100.0, 100))
        worst_orth = max(worst_orth, max(inf_norm(m @ m.T - np.eye(3)) for m in a))
        worst_det = max(worst_det, float(np.max(np.abs(np.linalg.det(a) - 1.0))))
    record(1, worst_orth <= 1e-12 and worst_det <= 1e-12,
           f"max ||AA^T - I||_inf = {worst_orth:.3g}, max |det A - 1| = {worst_det:.3g}, tol 1e-12")


def test_criterion_02_parallel_composition():
    rng = np.random.default_rng(7)
    grid = np.linspace(0.1, 10.0, 20)
    worst = 0.0
    for w1, w2 in itertools.product(grid, grid):
        t = rng.uniform(-10.0, 10.0, 50)
        lhs = eval_asr(AsrSpec("z", w1), t) @ eval_asr(AsrSpec("z", w2), t)
        worst = max(worst, max(inf_norm(m) for m in lhs - eval_asr(AsrSpec("z", w1 + w2), t)))
    record(2, worst <= 1e-12, f"max ||A(w1)A(w2) - A(w1+w2)||_inf = {worst:.3g} over 20x20x50, tol 1e-12")


def test_criterion_03_omega_invariance():
    rng = np.random.default_rng(3)
    worst_aligned, weakest_control = 0.0, math.inf
    for _ in range(50):
        base = float(rng.uniform(0.1, 10.0))
        leaves = [Leaf(AsrSpec(random_axis(rng), base * int(rng.integers(1, 4)), int(rng.choice([-1, 1]))))
                  for _ in range(int(rng.integers(1, 4)))]
        expr = Product(tuple(leaves))
        x1, x2 = rng.uniform(-1, 1, (2, 3))
        t1 = float(rng.uniform(-5, 5))
        e1 = SpacetimeEvent(*x1, t1)
        for k in (1, 2, 3, 10):
            rep = omega_invariance_check(expr, e1, SpacetimeEvent(*x2, t1 + 2 * math.pi * k / base), base)
            worst_aligned = max(worst_aligned, rep.discrepancy)
        # negative control: quarter period, off-axis displacement about a single z rotation
        ctrl = omega_invariance_check(asr("z", base), e1, SpacetimeEvent(*x2, t1 + math.pi / (2 * base)), base)
        weakest_control = min(weakest_control, ctrl.discrepancy)
    record(3, worst_aligned <= 1e-12 and weakest_control >= 1e-6,
           f"aligned max discrepancy {worst_aligned:.3g} (tol 1e-12), "
           f"quarter-period min discrepancy {weakest_control:.3g} (need >= 1e-6)")


def test_criterion_04_averaged_metric_oracles():
    rng = np.random.default_rng(4)
    details, ok = [], True

    w, c = float(rng.uniform(0.5, 3.0)), 1.0
    avg = average_products(Product((asr("z", w), asr("x", w))))
    worst = 0.0
    for _ in range(25):
        X = rng.uniform(-1, 1, 3)
        ref = aex_avg_closed(w, X, c).dt2
        worst = max(worst, abs(avg.metric(X, c).dt2 - ref) / abs(ref))
    ok &= worst <= 1e-6
    details.append(f"z*x dt^2 rel err {worst:.2g}")

    def coefficient_error(build, closed):
        worst, where, rest = 0.0, None, 0.0
        off_cross = np.ones((4, 4), bool)
        off_cross[0, 2] = off_cross[2, 0] = False
        for ws in non_resonant_triples(rng, 5):
            avg = average_products(build(ws))
            assert avg.method == "exact-period"
            for _ in range(5):
                X = rng.uniform(-1, 1, 3)
                num, pub = avg.metric(X, 1.5).G, closed(*ws, X, 1.5).G
                diff = np.abs(num - pub)
                scale = np.abs(pub).max()
                rest = max(rest, float(diff[off_cross].max() / scale))
                err = float(diff.max() / scale)
                if err > worst:
                    worst, where = err, np.unravel_index(int(diff.argmax()), diff.shape)
        return worst, where, rest

    msr_err, _, _ = coefficient_error(lambda ws: Product(tuple(asr(a, v) for a, v in zip("zxy", ws))),
                                      msr_avg_closed)
    ok &= msr_err <= 1e-6
    details.append(f"MSR full set rel err {msr_err:.2g}")

    ssr_err, where, rest = coefficient_error(lambda ws: Sum(tuple(asr(a, v) for a, v in zip("zxy", ws))),
                                             ssr_avg_closed)
    ok &= ssr_err <= 1e-6
    details.append(f"SSR full set rel err {ssr_err:.2g} worst at G{tuple(int(i) for i in where)} "
                   f"(all other entries {rest:.2g})")
    record(4, ok, ", ".join(details) + ", tol 1e-6")


def test_criterion_05_stable_surfaces():
    rng = np.random.default_rng(5)
    worst = 0.0
    for ws in non_resonant_triples(rng, 50):
        c = float(rng.uniform(0.5, 2.0))
        d = rng.normal(size=3)
        theta = math.acos(d[2] / np.linalg.norm(d))
        r = locate_gtt_zero(Product(tuple(asr(a, v) for a, v in zip("zxy", ws))), d, 4 * c / min(ws), c)
        worst = max(worst, abs(r / msr_radius(theta, *ws, c) - 1))
        phi = float(rng.uniform(0, 2 * math.pi))
        r = locate_gtt_zero(asr("z", ws[0]), (math.cos(phi), math.sin(phi), 0.0), 4 * c / ws[0], c)
        worst = max(worst, abs(r / asr_radius(ws[0], c) - 1))
    w, c = 1.7, 1.3
    pole = abs(msr_radius(0.0, w, w, w, c) / (c / (w * math.sqrt(1.5))) - 1)
    equator = abs(msr_radius(math.pi / 2, w, w, w, c) / (c / (1.5 * w)) - 1)
    pole_numeric = abs(locate_gtt_zero(Product((asr("z", w), asr("x", w), asr("y", w))), (0, 0, 1), 5.0, c)
                       / (c / (w * math.sqrt(1.5))) - 1)
    ok = worst <= 1e-9 and max(pole, equator, pole_numeric) <= 1e-9
    record(5, ok, f"random samples max rel err {worst:.2g}, equal-w pole {pole:.2g} "
                  f"(root finder {pole_numeric:.2g}), equator {equator:.2g}, tol 1e-9")


def test_criterion_06_schrodinger_residual():
    wave = build_boosted_wave(gaussian(1.0), 5.0)
    maxes = [schrodinger_residual(wave, Grid.cube(0.4, h)).max for h in (0.04, 0.02, 0.01)]
    orders = [math.log2(a / b) for a, b in zip(maxes, maxes[1:])]
    sweep = boost_term_sweep(gaussian(1.0), 5.0, [0.02, 0.04, 0.08], Grid.cube(0.2, 0.02, order=4))
    ok = all(abs(o - 2.0) <= 0.1 for o in orders) and abs(sweep.measured_slope - 4.0) <= 0.1
    record(6, ok, f"orders {orders[0]:.4f}, {orders[1]:.4f} (2.0 +- 0.1), "
                  f"beta slope {sweep.measured_slope:.4f} (4.0 +- 0.1)")


def test_criterion_07_klein_gordon_residual():
    plane, _ = klein_gordon_residual(build_boosted_wave(constant(), 5.0), Grid.cube(0.2, 0.02))
    worst_ratio = 0.0
    for k in ((2.0, 0.0, 0.0), (1.0, -1.5, 0.5)):
        _, scalar = klein_gordon_residual(build_boosted_wave(plane_phase(k), 5.0), Grid.cube(0.2, 0.02))
        worst_ratio = max(worst_ratio, scalar.std / scalar.error_estimate)
    _, control = klein_gordon_residual(build_boosted_wave(chirp(2.0, 3.0), 5.0), Grid.cube(0.2, 0.02))
    ok = plane.max <= 1e-12 and worst_ratio <= 10 and not control.uniform
    record(7, ok, f"plane-phase residual {plane.max:.3g} (tol 1e-12), constant-modulus std/err "
                  f"{worst_ratio:.3g} (<= 10), time-dependent control uniform={control.uniform}")


def _bisect_j1():
    f = lambda x: math.sin(x) / x**2 - math.cos(x) / x  # noqa: E731
    lo, hi = 4.0, 5.0
    assert f(lo) * f(hi) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) * f(lo) > 0 else (lo, mid)
    return 0.5 * (lo + hi)


def test_criterion_08_quantification():
    worst, round_trip = 0.0, True
    for k in (0.5, 1.0, 2.0, 3.7):
        even = quantified_sizes(ModeSpec(0, "even"), k, 10).sizes
        odd = quantified_sizes(ModeSpec(0, "odd"), k, 10).sizes
        worst = max(worst, max(abs(r - n * math.pi / k) for n, r in enumerate(even, 1)),
                    max(abs(r - (n - 0.5) * math.pi / k) for n, r in enumerate(odd, 1)))
        for l, parity in itertools.product(range(3), ("even", "odd")):
            mode = ModeSpec(l, parity)
            round_trip &= all(boundary_condition_check(mode, k, r)
                              for r in quantified_sizes(mode, k, 10).sizes)
    root = quantified_sizes(ModeSpec(1), 1.0, 1).roots[0]
    oracle = _bisect_j1()
    ok = worst <= 1e-12 and abs(root - 4.4934095) <= 1e-6 and abs(root - oracle) <= 1e-6 and round_trip
    record(8, ok, f"l=0 max size err {worst:.2g} (tol 1e-12), l=1 root {root:.10f} vs oracle {oracle:.10f}, "
                  f"round trip {round_trip}")


def test_criterion_09_two_source_cancellation():
    a = np.linspace(0.0, 4 * math.pi, 401)[1:]
    ok, details = True, []
    for sign, expected in ((1, [math.pi / 2 + m * math.pi for m in range(4)]),
                           (-1, [m * math.pi for m in range(1, 5)])):
        scan = external_cancellation_scan(sin_profile, sign, a)
        zeros = scan.cancellations
        found = len(zeros) == len(expected) and np.allclose(zeros, expected, rtol=0, atol=1e-12)
        midway = min(external_amplitude(sin_profile, sign, 0.5 * (p + q)) for p, q in zip(zeros, zeros[1:]))
        ok &= found and midway >= 0.1
        details.append(f"{'same' if sign > 0 else 'opposite'}: zeros at a/pi = "
                       f"{[round(float(z) / math.pi, 3) for z in zeros]}, max amplitude there "
                       f"{float(scan.amplitude[scan.amplitude <= 1e-12].max()):.2g}, min midway {midway:.3g}")
    record(9, ok, "; ".join(details))


def test_criterion_10_determinism():
    outputs = []
    for hash_seed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        proc = subprocess.run([sys.executable, "-m", "spacerot.cli", "props", "--seed", "7"],
                              capture_output=True, env=env, check=False)
        outputs.append(proc)
    same = outputs[0].stdout == outputs[1].stdout and len(outputs[0].stdout) > 0
    ok = same and all(p.returncode == 0 for p in outputs)
    record(10, ok, f"two process runs byte-identical={same}, {len(outputs[0].stdout)} bytes, "
                   f"exit codes {[p.returncode for p in outputs]}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
