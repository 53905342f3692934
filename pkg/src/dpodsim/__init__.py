"""Receiver-side compensation of power-amplifier nonlinearity in DFT-s-OFDM.

Submodules
----------
signal_core  unitary DFT, subcarrier mapping, cyclic windows, complex/real maps
waveform     Gray QAM and the DFT-s-OFDM modulation chain
pa           clamped generalized-memory-polynomial amplifier at an oversampled rate
channel      cyclic multipath, block fading from a power-delay profile, AWGN
receiver     equalization and the time / DFT-s compensation placements
dpod         Volterra, kernel-ridge and memory-polynomial compensators
simulator    Monte-Carlo BER sweeps with CSV output
config       presets and YAML configuration
"""

from .channel import ChannelRealization, PdpProfile, add_awgn, apply_channel, sample_taps, tdl_d_profile
from .config import PRESETS, AlgorithmSpec, SimConfig, load_config, preset_config
from .dpod import (ASYMMETRIC_MEMORY, NO_MEMORY, SYMMETRIC_MEMORY, DegreeSet, KernelModel, MemorySpec,
                   MonomialBasis, MpModel, RankDeficientError, TrainingSet, VolterraModel,
                   build_training_set, compensate, enumerate_monomials, kernel_fit,
                   kernel_fit_via_projection, load_models, monomial_count, mp_fit, predict_complex,
                   save_models, volterra_features, volterra_fit)
from .pa import GmpCoefficients, PaConfig, gmp_apply, load_coefficients, pa_chain
from .receiver import EqualizerKind, Placement, equalize, receive_to_domain
from .signal_core import (DomainKind, DomainSignal, SubcarrierConfig, cyclic_convolve, cyclic_windows, dft,
                          idft, lowpass_vector, subcarrier_demap, subcarrier_map, xi, xi_inv, xi_rot)
from .simulator import BerPoint, Link, read_csv, run_point, run_sweep, train_all, write_csv
from .waveform import QamConstellation, constellation, dfts_demodulate, dfts_modulate, qam_demap_hard, qam_map

__version__ = "0.1.0"
