"""Gray-coded QAM and the DFT-s-OFDM modulation chain.

Constellations follow the per-axis Gray labelling of the 3GPP TS 38.211
modulation mapper: even-numbered bits of a label drive the in-phase axis, odd
ones the quadrature axis, first bit most significant.  The tables ship as
text fixtures under ``data/constellations`` and are generated by
:func:`gray_qam_points`; a test keeps the two in sync.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.special import erfc
from scipy.optimize import brentq

from .signal_core import DomainKind, DomainSignal, SubcarrierConfig, dft, expect_domain, idft, \
    subcarrier_demap, subcarrier_map

SUPPORTED_ORDERS = (4, 16, 64, 256)


def _pam_level(bits: np.ndarray) -> np.ndarray:
    # 38.211 nesting, e.g. 3 bits: (1-2b0) * (4 - (1-2b1) * (2 - (1-2b2)))
    signs = 1 - 2 * bits.astype(int)
    m = bits.shape[-1]
    level = np.ones(bits.shape[:-1], dtype=int)
    for j in range(m - 1, 0, -1):
        level = 2 ** (m - j) - signs[..., j] * level
    return signs[..., 0] * level


def gray_qam_points(order: int) -> np.ndarray:
    """Unit-energy constellation indexed by label value (MSB = first bit)."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}")
    k = int(np.log2(order))
    labels = np.arange(order)
    bits = (labels[:, None] >> np.arange(k - 1, -1, -1)) & 1
    i = _pam_level(bits[:, 0::2])
    q = _pam_level(bits[:, 1::2])
    pts = i + 1j * q
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


@dataclass(frozen=True)
class QamConstellation:
    order: int
    points: np.ndarray

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    def labels(self) -> np.ndarray:
        k = self.bits_per_symbol
        return (np.arange(self.order)[:, None] >> np.arange(k - 1, -1, -1)) & 1


def format_constellation_table(order: int) -> str:
    pts = gray_qam_points(order)
    k = int(np.log2(order))
    lines = [f"# {order}-QAM, unit average energy; columns: label I Q"]
    for label, p in enumerate(pts):
        lines.append(f"{label:0{k}b} {p.real:+.17e} {p.imag:+.17e}")
    return "\n".join(lines) + "\n"


def parse_constellation_table(text: str) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        label, i, q = line.split()
        rows.append((int(label, 2), float(i) + 1j * float(q)))
    order = len(rows)
    points = np.zeros(order, dtype=complex)
    seen = set()
    for label, p in rows:
        if label >= order or label in seen:
            raise ValueError(f"bad or duplicate label {label:b}")
        seen.add(label)
        points[label] = p
    return points


@functools.lru_cache(maxsize=None)
def constellation(order: int) -> QamConstellation:
    """Load the committed Gray table for ``order``-QAM."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}")
    text = resources.files("dpodsim.data.constellations").joinpath(f"qam{order}.txt").read_text()
    points = parse_constellation_table(text)
    points.setflags(write=False)
    return QamConstellation(order, points)


def qam_map(bits, c: QamConstellation) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    k = c.bits_per_symbol
    if bits.shape[0] % k:
        raise ValueError(f"bit count {bits.shape[0]} not divisible by {k}")
    weights = 1 << np.arange(k - 1, -1, -1)
    labels = bits.reshape(-1, k) @ weights
    return c.points[labels]


def qam_demap_hard(symbols, c: QamConstellation, chunk: int = 4096) -> np.ndarray:
    """Nearest-point decisions; ties go to the lower label."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    labels = np.empty(symbols.shape[0], dtype=np.int64)
    for start in range(0, symbols.shape[0], chunk):
        block = symbols[start:start + chunk]
        d = np.abs(block[:, None] - c.points[None, :])
        labels[start:start + chunk] = np.argmin(d, axis=1)
    return c.labels()[labels].astype(np.uint8).ravel()


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def dfts_modulate(s_d, cfg: SubcarrierConfig) -> DomainSignal:
    """``s_t = F_N^-1 S F_M s_d``."""
    s_d = np.asarray(s_d, dtype=complex)
    if s_d.shape != (cfg.data_size,):
        raise ValueError(f"expected {cfg.data_size} symbols, got {s_d.shape}")
    return DomainSignal.time(idft(subcarrier_map(dft(s_d), cfg)))


def dfts_demodulate(x, cfg: SubcarrierConfig) -> np.ndarray:
    """``F_M^-1 S^T F_N x``, the left inverse of :func:`dfts_modulate`."""
    x = expect_domain(x, DomainKind.TIME, cfg.fft_size)
    return idft(subcarrier_demap(dft(x), cfg))


def ofdm_modulate(s_f, cfg: SubcarrierConfig) -> DomainSignal:
    """Plain OFDM (no transform precoding), for PAPR comparisons."""
    return DomainSignal.time(idft(subcarrier_map(s_f, cfg)))


def papr_db(x) -> float:
    x = np.asarray(x.samples if isinstance(x, DomainSignal) else x)
    p = np.abs(x) ** 2
    return float(10 * np.log10(p.max() / p.mean()))


def qfunc(x):
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2))


def qam_ber_awgn(order: int, snr_db) -> np.ndarray:
    """Nearest-neighbour Gray-QAM bit error approximation at symbol SNR ``Es/N0``."""
    snr = 10 ** (np.asarray(snr_db, dtype=float) / 10)
    k = np.log2(order)
    if order == 4:
        return qfunc(np.sqrt(snr))
    return 4 / k * (1 - 1 / np.sqrt(order)) * qfunc(np.sqrt(3 * snr / (order - 1)))


def snr_for_ber(order: int, ber: float) -> float:
    """Symbol SNR in dB at which :func:`qam_ber_awgn` equals ``ber``."""
    return brentq(lambda s: np.log(max(qam_ber_awgn(order, s), 1e-300)) - np.log(ber), -10.0, 60.0)
