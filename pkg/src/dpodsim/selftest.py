"""Fast property checks runnable without pytest (``dpodsim selftest``).

Each check compares a library routine against an independent evaluation
(dense matrices, explicit loops, primal ridge over weighted monomials) on
small random instances and reports the worst deviation.
"""

from __future__ import annotations

import itertools
import time
from math import factorial

import numpy as np

from . import dpod, pa, signal_core as sc, waveform


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def check_dft(rng) -> float:
    n = 12
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    k = np.arange(n) - n // 2
    F = np.exp(-2j * np.pi * np.outer(k, np.arange(n)) / n) / np.sqrt(n)
    return max(_rel(sc.dft(x), F @ x), _rel(sc.idft(F @ x), x))


def check_lowpass(rng) -> float:
    cfg = sc.SubcarrierConfig.centered(64, 40)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    F = np.stack([sc.dft(e) for e in np.eye(64)], axis=1)
    S = np.zeros((64, 64))
    S[cfg.used, cfg.used] = np.eye(cfg.data_size)
    P = np.linalg.inv(F) @ S @ F
    return _rel(sc.cyclic_convolve(sc.lowpass_vector(cfg), x), P @ x)


def check_gmp(rng) -> float:
    x = 0.4 * (rng.standard_normal(24) + 1j * rng.standard_normal(24))
    a = {(k, l): complex(*rng.standard_normal(2)) for k in (0, 1) for l in (0, 2)}
    b = {(1, 0, 1): 0.1 + 0.2j, (1, -1, 2): -0.3j}
    c = pa.GmpCoefficients((0, 1), (0, 2), a, (1,), (-1, 0), (1, 2), b)
    u = pa.clamp(x)
    n = len(u)
    ref = np.zeros(n, dtype=complex)
    for i in range(n):
        for (k, l), v in a.items():
            ref[i] += v * u[(i - l) % n] * abs(u[(i - l) % n]) ** (2 * k)
        for (k, l, m), v in b.items():
            ref[i] += v * u[(i - l) % n] * abs(u[(i - l - m) % n]) ** (2 * k)
    return max(_rel(pa.gmp_apply(x, c), ref), _rel(pa.gmp_apply(1j * x, c), 1j * ref))


def _weighted_features(Y, num_vars, degrees):
    cols = []
    for k in degrees:
        for alpha in itertools.product(range(k + 1), repeat=num_vars):
            if sum(alpha) != k:
                continue
            w = factorial(k) / np.prod([factorial(a) for a in alpha])
            cols.append(np.sqrt(w) * np.prod(Y ** np.array(alpha), axis=1))
    return np.stack(cols, axis=1)


def check_kernel_duality(rng) -> float:
    memory = dpod.MemorySpec((0, 1))
    degrees = dpod.DegreeSet.up_to(3)
    clean = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    received = clean + 0.1 * clean * np.abs(clean) ** 2
    ts = dpod.build_training_set(clean, received, memory)
    lam = 0.01 * np.trace(dpod.gram(ts.inputs, ts.inputs, degrees)) / ts.rows
    model = dpod.kernel_fit(ts, degrees, lam)
    Phi = _weighted_features(ts.inputs, 4, degrees)
    w = np.linalg.solve(Phi.T @ Phi + lam * np.eye(Phi.shape[1]), Phi.T @ ts.targets)
    probe = rng.standard_normal((10, 4))
    return _rel(model.predict_real(probe), _weighted_features(probe, 4, degrees) @ w)


def check_rotation(rng) -> float:
    memory = dpod.SYMMETRIC_MEMORY
    clean = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    received = clean - 0.05 * clean * np.abs(clean) ** 2
    ts = dpod.build_training_set(clean, received, memory)
    worst = 0.0
    for model in (dpod.kernel_fit(ts, dpod.DegreeSet.up_to(3)),
                  dpod.volterra_fit(ts, dpod.enumerate_monomials(10, dpod.DegreeSet.up_to(3)), ridge=1e-6)):
        y = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        worst = max(worst, abs(dpod.predict_complex(model, 1j * y) - 1j * dpod.predict_complex(model, y))
                    / np.linalg.norm(y))
    return worst


def check_monomial_count(rng) -> float:
    worst = 0
    for n in (2, 4, 6):
        for d in (3, 5):
            degrees = dpod.DegreeSet.up_to(d)
            brute = sum(1 for k in degrees for a in itertools.product(range(k + 1), repeat=n) if sum(a) == k)
            worst = max(worst, abs(dpod.enumerate_monomials(n, degrees).size - brute),
                        abs(dpod.monomial_count(n, degrees) - brute))
    return float(worst)


def check_qam_gray(rng) -> float:
    bad = 0
    for order in waveform.SUPPORTED_ORDERS:
        c = waveform.constellation(order)
        bad += abs(np.mean(np.abs(c.points) ** 2) - 1) > 1e-12
        labels = np.arange(order)
        for i in labels:
            d = np.abs(c.points - c.points[i])
            near = labels[np.isclose(d, d[d > 0].min())]
            bad += sum(bin(i ^ j).count("1") != 1 for j in near)
    return float(bad)


CHECKS = [
    ("dft matches dense matrix", check_dft, 1e-12),
    ("lowpass convolution matches projection", check_lowpass, 1e-12),
    ("gmp matches explicit loops and is rotation equivariant", check_gmp, 1e-13),
    ("kernel ridge matches weighted-feature ridge", check_kernel_duality, 1e-8),
    ("compensators commute with rotation by j", check_rotation, 1e-13),
    ("monomial count matches brute force", check_monomial_count, 0.0),
    ("qam fixtures are unit energy and gray", check_qam_gray, 0.0),
]


def run_selftest(seed: int = 0, out=print) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn, tol in CHECKS:
        t0 = time.perf_counter()
        err = fn(rng)
        passed = err <= tol
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}: {err:.3g} (tol {tol:g}, {time.perf_counter() - t0:.2f} s)")
    return ok
