"""Domain-tagged signals and the linear building blocks of the link.

All spectra use the unitary, centered DFT: the zero-frequency bin of an
``N``-point spectrum sits at index ``N // 2``.  Natural-order spectra never
leave this module.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class DomainKind(enum.Enum):
    TIME = "time"
    FREQ = "freq"
    DFTS = "dfts"


@dataclass(frozen=True)
class DomainSignal:
    """Complex samples tagged with the domain they live in.

    The tag carries the expected length, so handing e.g. a DFT-s-domain
    vector (length ``M``) to a time-domain operation fails loudly.
    """

    samples: np.ndarray
    kind: DomainKind
    size: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if samples.shape[0] != self.size:
            raise ValueError(
                f"{self.kind.value} signal expects {self.size} samples, got {samples.shape[0]}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain NaN or Inf")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def time(cls, samples) -> "DomainSignal":
        samples = np.asarray(samples, dtype=complex)
        return cls(samples, DomainKind.TIME, samples.shape[0])

    @classmethod
    def freq(cls, samples) -> "DomainSignal":
        samples = np.asarray(samples, dtype=complex)
        return cls(samples, DomainKind.FREQ, samples.shape[0])

    @classmethod
    def dfts(cls, samples) -> "DomainSignal":
        samples = np.asarray(samples, dtype=complex)
        return cls(samples, DomainKind.DFTS, samples.shape[0])

    def __len__(self):
        return self.size


def expect_domain(x, kind: DomainKind, size: int | None = None) -> np.ndarray:
    """Unwrap ``x`` after checking its domain tag.

    Raw arrays pass through unchecked (apart from ``size``); a
    :class:`DomainSignal` of the wrong kind raises ``TypeError``.
    """
    if isinstance(x, DomainSignal):
        if x.kind is not kind:
            raise TypeError(f"expected a {kind.value}-domain signal, got {x.kind.value}")
        samples = x.samples
    else:
        samples = np.asarray(x, dtype=complex)
    if size is not None and samples.shape[0] != size:
        raise ValueError(f"expected {size} samples, got {samples.shape[0]}")
    return samples


@dataclass(frozen=True)
class SubcarrierConfig:
    """Guard-band layout of an ``N``-point OFDM symbol carrying ``M`` data bins."""

    fft_size: int
    data_size: int
    lower_guard: int
    upper_guard: int

    def __post_init__(self):
        if self.data_size < 1:
            raise ValueError("data_size must be at least 1")
        if self.lower_guard < 0 or self.upper_guard < 0:
            raise ValueError("guards must be non-negative")
        if self.lower_guard + self.data_size + self.upper_guard != self.fft_size:
            raise ValueError("lower_guard + data_size + upper_guard must equal fft_size")

    @classmethod
    def centered(cls, fft_size: int, data_size: int) -> "SubcarrierConfig":
        """Split the unused bins evenly, the extra one (if any) going to the upper guard."""
        lower = (fft_size - data_size) // 2
        return cls(fft_size, data_size, lower, fft_size - data_size - lower)

    @property
    def used(self) -> slice:
        return slice(self.lower_guard, self.lower_guard + self.data_size)


def _as_vector(x) -> np.ndarray:
    if isinstance(x, DomainSignal):
        x = x.samples
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1:
        raise ValueError("expected a one-dimensional vector")
    if x.shape[0] == 0:
        raise ValueError("empty input")
    return x


def dft(x) -> np.ndarray:
    """Unitary centered DFT."""
    x = _as_vector(x)
    return np.fft.fftshift(np.fft.fft(x, norm="ortho"))


def idft(X) -> np.ndarray:
    """Inverse of :func:`dft`."""
    X = _as_vector(X)
    return np.fft.ifft(np.fft.ifftshift(X), norm="ortho")


def xi(x) -> np.ndarray:
    """Stack real over imaginary parts: ``[Re(x); Im(x)]``."""
    x = np.asarray(x, dtype=complex)
    return np.concatenate([x.real, x.imag], axis=-1)


def xi_rot(x) -> np.ndarray:
    """``[Im(x); -Re(x)]``, i.e. ``xi(-1j * x)``."""
    x = np.asarray(x, dtype=complex)
    return np.concatenate([x.imag, -x.real], axis=-1)


def xi_inv(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    half = v.shape[-1] // 2
    if 2 * half != v.shape[-1]:
        raise ValueError("real vector must have even length")
    return v[..., :half] + 1j * v[..., half:]


def subcarrier_map(s_f, cfg: SubcarrierConfig) -> np.ndarray:
    s_f = np.asarray(s_f, dtype=complex)
    if s_f.shape[-1] != cfg.data_size:
        raise ValueError(f"expected {cfg.data_size} data bins, got {s_f.shape[-1]}")
    out = np.zeros(s_f.shape[:-1] + (cfg.fft_size,), dtype=complex)
    out[..., cfg.used] = s_f
    return out


def subcarrier_demap(x, cfg: SubcarrierConfig) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != cfg.fft_size:
        raise ValueError(f"expected {cfg.fft_size} bins, got {x.shape[-1]}")
    return x[..., cfg.used].copy()


def cyclic_convolve(a, b) -> np.ndarray:
    """Cyclic convolution ``out[n] = sum_k a[k] b[(n - k) mod N]``.

    With the unitary DFT this equals ``idft(sqrt(N) * dft(a) * dft(b))``;
    the implementation uses unnormalized FFTs, where no factor appears.
    """
    a = _as_vector(a)
    b = _as_vector(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return np.fft.ifft(np.fft.fft(a) * np.fft.fft(b))


def lowpass_vector(cfg: SubcarrierConfig) -> np.ndarray:
    """First column of the circulant projection ``F^-1 S S^T F``.

    Convolving with it zeroes the guard bins, i.e. it is the impulse
    response of an ideal lowpass filter over the used band.
    """
    mask = np.zeros(cfg.fft_size)
    mask[cfg.used] = 1.0
    # dft(delta_0) is flat at 1/sqrt(N)
    return idft(mask / np.sqrt(cfg.fft_size))


def window_indices(length: int, shifts) -> np.ndarray:
    """Index table ``idx[n, i] = (n - shifts[i]) mod length``."""
    shifts = np.asarray(shifts, dtype=int)
    return (np.arange(length)[:, None] - shifts[None, :]) % length


def cyclic_window(y, n: int, shifts) -> np.ndarray:
    """Window ``[y[(n - l_i) mod N] for l_i in shifts]``; negative shifts look ahead."""
    y = np.asarray(y)
    if not 0 <= n < y.shape[0]:
        raise IndexError(f"index {n} out of range for length {y.shape[0]}")
    shifts = np.asarray(shifts, dtype=int)
    return y[(n - shifts) % y.shape[0]]


def cyclic_windows(y, shifts) -> np.ndarray:
    """All windows of ``y`` stacked as rows, shape ``(N, L)``."""
    y = np.asarray(y)
    return y[window_indices(y.shape[0], shifts)]
