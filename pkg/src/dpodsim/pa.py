"""Behavioural power-amplifier models.

The generalized memory polynomial (GMP) evaluated here is

    y[n] = sum_{k in K_a, l in L_a} a_kl * u[n-l] |u[n-l]|^(2k)
         + sum_{k in K_b, l in L_b, m in M_b} b_klm * u[n-l] |u[n-l-m]|^(2k)

with ``u`` the input clamped to unit magnitude.  Time shifts wrap around
the symbol (cyclic indexing), which matches the per-symbol cyclic model of
the rest of the link but only approximates a streaming amplifier.

Coefficient files are YAML::

    name: small-gmp
    oversampling: 3          # rate the coefficients were designed for
    diagonal:
      K: [0, 1, 2]
      L: [0, 1]
      coefficients:
        - {k: 0, l: 0, value: "1.0+0.0j"}
    cross:                   # optional
      K: [1]
      L: [0]
      M: [1, -1]
      coefficients:
        - {k: 1, l: 0, m: 1, value: "-0.05+0.02j"}

Indices outside the declared sets are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .signal_core import DomainKind, DomainSignal, dft, expect_domain, idft


@dataclass(frozen=True)
class GmpCoefficients:
    K_a: tuple
    L_a: tuple
    a: dict
    K_b: tuple = ()
    L_b: tuple = ()
    M_b: tuple = ()
    b: dict = field(default_factory=dict)
    name: str = ""
    oversampling: int | None = None

    def __post_init__(self):
        if any(k < 0 for k in self.K_a + self.K_b):
            raise ValueError("polynomial orders must be non-negative")
        for (k, l) in self.a:
            if k not in self.K_a or l not in self.L_a:
                raise ValueError(f"diagonal key {(k, l)} outside K_a x L_a")
        for (k, l, m) in self.b:
            if k not in self.K_b or l not in self.L_b or m not in self.M_b:
                raise ValueError(f"cross key {(k, l, m)} outside K_b x L_b x M_b")
        if not self.K_b and self.b:
            raise ValueError("cross coefficients given with empty K_b")

    @property
    def is_memory_polynomial(self) -> bool:
        return not self.K_b

    @property
    def is_memoryless(self) -> bool:
        return not self.K_b and tuple(self.L_a) == (0,)

    @classmethod
    def memoryless(cls, coeffs, name: str = "") -> "GmpCoefficients":
        """``y = sum_k coeffs[k] u |u|^(2k)``."""
        a = {(k, 0): complex(c) for k, c in enumerate(coeffs)}
        return cls(tuple(range(len(coeffs))), (0,), a, name=name)

    @classmethod
    def identity(cls) -> "GmpCoefficients":
        return cls.memoryless([1.0], name="identity")


@dataclass(frozen=True)
class PaConfig:
    backoff_db: float = 6.0
    oversampling: int = 3

    def __post_init__(self):
        if self.backoff_db < 0:
            raise ValueError("backoff_db must be non-negative")
        if self.oversampling < 1:
            raise ValueError("oversampling must be >= 1")


def _index_set(values, what) -> tuple:
    values = tuple(int(v) for v in (values or ()))
    if len(set(values)) != len(values):
        raise ValueError(f"duplicate entries in {what}")
    return values


def _check_keys(entry: dict, allowed: set, where: str):
    unknown = set(entry) - allowed
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")


def parse_coefficients(doc: dict) -> GmpCoefficients:
    _check_keys(doc, {"name", "description", "oversampling", "diagonal", "cross"}, "coefficient file")
    diag = doc.get("diagonal")
    if not diag:
        raise ValueError("coefficient file needs a 'diagonal' section")
    _check_keys(diag, {"K", "L", "coefficients"}, "diagonal")
    K_a, L_a = _index_set(diag.get("K"), "diagonal.K"), _index_set(diag.get("L"), "diagonal.L")
    a = {}
    for entry in diag.get("coefficients", []):
        _check_keys(entry, {"k", "l", "value"}, "diagonal coefficient")
        a[(int(entry["k"]), int(entry["l"]))] = complex(str(entry["value"]).replace(" ", ""))
    K_b = L_b = M_b = ()
    b = {}
    cross = doc.get("cross")
    if cross:
        _check_keys(cross, {"K", "L", "M", "coefficients"}, "cross")
        K_b = _index_set(cross.get("K"), "cross.K")
        L_b = _index_set(cross.get("L"), "cross.L")
        M_b = _index_set(cross.get("M"), "cross.M")
        for entry in cross.get("coefficients", []):
            _check_keys(entry, {"k", "l", "m", "value"}, "cross coefficient")
            key = (int(entry["k"]), int(entry["l"]), int(entry["m"]))
            b[key] = complex(str(entry["value"]).replace(" ", ""))
    over = doc.get("oversampling")
    return GmpCoefficients(K_a, L_a, a, K_b, L_b, M_b, b, name=str(doc.get("name", "")),
                           oversampling=None if over is None else int(over))


def load_coefficients(source) -> GmpCoefficients:
    """Load a coefficient file; bare names resolve to the shipped fixtures."""
    path = Path(source)
    if path.suffix == "" and not path.exists():
        text = resources.files("dpodsim.data.pa").joinpath(f"{source}.yaml").read_text()
    else:
        text = path.read_text()
    return parse_coefficients(yaml.safe_load(text))


def clamp(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return x / np.maximum(np.abs(x), 1.0)


def gmp_apply(x, c: GmpCoefficients) -> np.ndarray:
    """Evaluate the clamped GMP with cyclic time shifts."""
    u = clamp(x)
    mag2 = np.abs(u) ** 2
    y = np.zeros_like(u)
    envelope = {}

    def env(k):
        if k not in envelope:
            envelope[k] = mag2 ** k
        return envelope[k]

    for (k, l), coef in c.a.items():
        y += coef * np.roll(u * env(k), l)
    for (k, l, m), coef in c.b.items():
        y += coef * np.roll(u, l) * np.roll(env(k), l + m)
    return y


def scale_to_backoff(x, backoff_db: float, reference_rms: float | None = None) -> np.ndarray:
    """Scale so the RMS sits ``backoff_db`` below the clamp level 1.

    By default the empirical RMS of ``x`` is used.  Passing the nominal
    ``reference_rms`` of the signal class instead applies the same gain to
    every symbol, as a transmitter with a fixed digital gain would.
    """
    x = np.asarray(x, dtype=complex)
    rms = np.sqrt(np.mean(np.abs(x) ** 2)) if reference_rms is None else reference_rms
    if rms == 0:
        raise ValueError("cannot scale an all-zero signal")
    return x * (10 ** (-backoff_db / 20) / rms)


def resample_up(x, factor: int) -> np.ndarray:
    """Zero-pad the centered spectrum; per-sample amplitude is preserved."""
    x = np.asarray(x.samples if isinstance(x, DomainSignal) else x, dtype=complex)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return x.copy()
    n = x.shape[0]
    big = np.zeros(factor * n, dtype=complex)
    start = (factor * n) // 2 - n // 2
    big[start:start + n] = dft(x)
    return idft(big) * np.sqrt(factor)


def resample_down(y, factor: int) -> np.ndarray:
    """Keep the central ``len(y) / factor`` bins; inverse of :func:`resample_up`."""
    y = np.asarray(y, dtype=complex)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return y.copy()
    if y.shape[0] % factor:
        raise ValueError("length not divisible by factor")
    n = y.shape[0] // factor
    start = (factor * n) // 2 - n // 2
    return idft(dft(y)[start:start + n]) / np.sqrt(factor)


def pa_chain(x, c: GmpCoefficients, cfg: PaConfig, reference_rms: float | None = None) -> DomainSignal:
    """Backoff scaling, oversampled GMP, and decimation back to the symbol rate."""
    x = expect_domain(x, DomainKind.TIME)
    scaled = scale_to_backoff(x, cfg.backoff_db, reference_rms)
    up = resample_up(scaled, cfg.oversampling)
    return DomainSignal.time(resample_down(gmp_apply(up, c), cfg.oversampling))
