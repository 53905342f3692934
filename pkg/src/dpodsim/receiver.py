"""Frequency-domain equalization and the two compensation placements.

``Placement.TIME`` equalizes per bin, zeroes the guards and returns to the
time domain.  What the compensator then sees is the transmitted PA output
convolved with the lowpass vector of :func:`dpodsim.signal_core.lowpass_vector`,
independent of the channel.  ``Placement.DFTS`` goes one step further to
the M-point DFT-s domain, where every symbol position sees a slightly
different mixture of PA outputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .signal_core import DomainKind, DomainSignal, SubcarrierConfig, dft, expect_domain, idft, \
    subcarrier_demap, subcarrier_map
from .waveform import QamConstellation, dfts_demodulate, qam_demap_hard

ZF_EPSILON = 1e-9


class Placement(enum.Enum):
    TIME = "time"
    DFTS = "dfts"


@dataclass(frozen=True)
class EqualizerKind:
    """Zero forcing when ``noise_var`` is None, LMMSE otherwise."""

    noise_var: float | None = None

    def __post_init__(self):
        if self.noise_var is not None and self.noise_var < 0:
            raise ValueError("noise variance must be non-negative")

    @property
    def name(self) -> str:
        return "zf" if self.noise_var is None else "lmmse"


ZF = EqualizerKind()


def lmmse(noise_var: float) -> EqualizerKind:
    return EqualizerKind(noise_var)


def equalize(X_f, h_f, kind: EqualizerKind = ZF) -> np.ndarray:
    X_f = np.asarray(X_f, dtype=complex)
    h_f = np.asarray(h_f, dtype=complex)
    if X_f.shape != h_f.shape:
        raise ValueError("spectrum and channel response differ in length")
    if kind.noise_var is None:
        weak = np.abs(h_f) <= ZF_EPSILON
        if np.any(weak):
            raise ZeroDivisionError(
                f"zero forcing on {int(weak.sum())} bin(s) with |h_f| <= {ZF_EPSILON}")
        return X_f / h_f
    return X_f * np.conj(h_f) / (np.abs(h_f) ** 2 + kind.noise_var)


def receive_to_domain(x_t, h: ChannelRealization, kind: EqualizerKind, placement: Placement,
                      cfg: SubcarrierConfig) -> DomainSignal:
    """Equalize the used bins with known taps and move to the compensation domain."""
    x_t = expect_domain(x_t, DomainKind.TIME, cfg.fft_size)
    X_used = subcarrier_demap(dft(x_t), cfg)
    h_used = subcarrier_demap(h.frequency_response(cfg.fft_size), cfg)
    eq = equalize(X_used, h_used, kind)
    if placement is Placement.DFTS:
        return DomainSignal.dfts(idft(eq))
    return DomainSignal.time(idft(subcarrier_map(eq, cfg)))


def to_dfts(compensated, cfg: SubcarrierConfig) -> np.ndarray:
    """Estimated DFT-s symbols from a compensated signal in either domain."""
    if isinstance(compensated, DomainSignal) and compensated.kind is DomainKind.DFTS:
        return np.asarray(compensated.samples)
    return dfts_demodulate(compensated, cfg)


def decide_bits(compensated: DomainSignal, placement: Placement, cfg: SubcarrierConfig,
                c: QamConstellation) -> np.ndarray:
    expected = DomainKind.DFTS if placement is Placement.DFTS else DomainKind.TIME
    if compensated.kind is not expected:
        raise TypeError(f"{placement.value} placement expects a {expected.value}-domain signal")
    return qam_demap_hard(to_dfts(compensated, cfg), c)
