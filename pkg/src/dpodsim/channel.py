"""Cyclic multipath channel, AWGN, and block-fading tap generation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal_core import DomainKind, DomainSignal, cyclic_convolve, dft, expect_domain

# 3GPP TR 38.901 TDL-D: normalized delays and powers (dB).  The first
# entry is the specular (LOS) component; the second shares its delay.
_TDL_D_DELAYS = (0.0, 0.0, 0.035, 0.612, 1.363, 1.405, 1.804, 2.596, 1.775, 4.042,
                 7.937, 9.424, 9.708, 12.525)
_TDL_D_POWERS_DB = (-0.2, -13.5, -18.8, -21.0, -22.8, -17.9, -20.1, -21.9, -22.9, -27.8,
                    -23.6, -24.8, -30.0, -27.7)
TDL_D_K_FACTOR_DB = 13.3


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=complex))
        if taps.ndim != 1 or taps.shape[0] < 1:
            raise ValueError("taps must be a non-empty vector")
        if not np.any(taps != 0):
            raise ValueError("at least one tap must be nonzero")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    def padded(self, n: int) -> np.ndarray:
        if self.taps.shape[0] > n:
            raise ValueError(f"{self.taps.shape[0]} taps do not fit a length-{n} symbol")
        out = np.zeros(n, dtype=complex)
        out[:self.taps.shape[0]] = self.taps
        return out

    def frequency_response(self, n: int) -> np.ndarray:
        """Per-bin gain ``h_f`` such that ``dft(h * x) = h_f * dft(x)``."""
        return dft(self.padded(n)) * np.sqrt(n)


IDENTITY_CHANNEL = ChannelRealization(np.array([1.0 + 0j]))


@dataclass(frozen=True)
class PdpProfile:
    """Power-delay profile; ``los_factor`` (linear K) applies to the first tap."""

    delays: tuple
    powers: tuple
    los_factor: float | None = None

    def __post_init__(self):
        if len(self.delays) != len(self.powers) or not self.delays:
            raise ValueError("delays and powers must be non-empty and equally long")
        if any(d < 0 for d in self.delays):
            raise ValueError("delays must be non-negative sample indices")
        p = np.asarray(self.powers, dtype=float)
        if np.any(p < 0) or p.sum() <= 0:
            raise ValueError("powers must be non-negative with positive sum")
        object.__setattr__(self, "delays", tuple(int(d) for d in self.delays))
        object.__setattr__(self, "powers", tuple(float(v) for v in p / p.sum()))
        if self.los_factor is not None and self.los_factor < 0:
            raise ValueError("los_factor must be non-negative")

    @classmethod
    def from_db(cls, delays, powers_db, los_factor_db=None) -> "PdpProfile":
        powers = 10 ** (np.asarray(powers_db, dtype=float) / 10)
        los = None if los_factor_db is None else 10 ** (los_factor_db / 10)
        return cls(tuple(delays), tuple(powers), los)


def tdl_d_profile(delay_spread_s: float, sample_rate_hz: float) -> PdpProfile:
    """TDL-D delays scaled by the delay spread and rounded to whole samples.

    Taps landing on the same sample are merged.  The LOS and first
    Rayleigh component become a single Ricean first tap with K = 13.3 dB.
    """
    delays = np.rint(np.asarray(_TDL_D_DELAYS) * delay_spread_s * sample_rate_hz).astype(int)
    powers = 10 ** (np.asarray(_TDL_D_POWERS_DB) / 10)
    merged = np.zeros(delays.max() + 1)
    np.add.at(merged, delays, powers)
    used = np.flatnonzero(merged)
    return PdpProfile(tuple(used), tuple(merged[used]), 10 ** (TDL_D_K_FACTOR_DB / 10))


def _cn(rng: np.random.Generator, var: float, size=None):
    return np.sqrt(var / 2) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def sample_taps(p: PdpProfile, rng: np.random.Generator) -> ChannelRealization:
    """One block-fading realization with unit expected energy."""
    taps = np.zeros(max(p.delays) + 1, dtype=complex)
    for i, (d, pw) in enumerate(zip(p.delays, p.powers)):
        if i == 0 and p.los_factor is not None:
            k = p.los_factor
            if np.isinf(k):
                los_pw, diffuse_pw = pw, 0.0
            else:
                los_pw, diffuse_pw = pw * k / (k + 1), pw / (k + 1)
            phase = rng.uniform(0, 2 * np.pi)
            taps[d] += np.sqrt(los_pw) * np.exp(1j * phase) + _cn(rng, diffuse_pw)
        else:
            taps[d] += _cn(rng, pw)
    return ChannelRealization(taps)


def apply_channel(x, h: ChannelRealization) -> DomainSignal:
    x = expect_domain(x, DomainKind.TIME)
    return DomainSignal.time(cyclic_convolve(h.padded(x.shape[0]), x))


def noise_variance(x, snr_db: float) -> float:
    """Per-sample noise variance for an ``Es/N0`` of ``snr_db`` at the receiver input."""
    x = x.samples if isinstance(x, DomainSignal) else np.asarray(x)
    power = np.mean(np.abs(x) ** 2)
    if power == 0:
        raise ValueError("signal has zero power")
    if np.isinf(snr_db):
        return 0.0
    return float(power / 10 ** (snr_db / 10))


def add_awgn(x, snr_db: float, rng: np.random.Generator) -> DomainSignal:
    """Add circular complex Gaussian noise; ``snr_db = inf`` adds nothing."""
    tagged = isinstance(x, DomainSignal)
    samples = x.samples if tagged else np.asarray(x, dtype=complex)
    var = noise_variance(samples, snr_db)
    noisy = samples + _cn(rng, var, samples.shape) if var > 0 else samples.copy()
    if tagged:
        return DomainSignal(noisy, x.kind, x.size)
    return DomainSignal.time(noisy)
