"""Monte-Carlo BER experiments.

Randomness is derived from the master seed by keyed ``SeedSequence``
spawning: trial ``t`` of algorithm ``a`` at SNR index ``s`` always draws
from ``SeedSequence(seed, spawn_key=(s, a, t))``.  Trials are therefore
independent work units and the results do not depend on how many worker
threads execute them.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.stats

from .channel import IDENTITY_CHANNEL, add_awgn, apply_channel, noise_variance, sample_taps
from .config import AlgorithmSpec, SimConfig
from .dpod import build_training_set, compensate, enumerate_monomials, fit_linear_gain, kernel_fit, \
    mp_fit, volterra_fit
from .pa import GmpCoefficients, load_coefficients, pa_chain, scale_to_backoff
from .receiver import ZF, Placement, lmmse, receive_to_domain, to_dfts
from .signal_core import DomainSignal
from .waveform import constellation, dfts_modulate, qam_demap_hard, qam_map, random_bits

log = logging.getLogger("dpodsim")

CSV_HEADER = ["snr_db", "algorithm", "placement", "bits", "errors", "ber", "evm_db", "trials", "seed"]
EVM_FLOOR_DB = -200.0
_TRAINING_KEY = 2 ** 31 - 1


@dataclass(frozen=True)
class TrialRecord:
    snr_db: float
    algorithm: str
    bits: int
    errors: int
    evm_db: float
    seed: int
    error_energy: float = 0.0
    reference_energy: float = 0.0

    def __post_init__(self):
        if not 0 <= self.errors <= self.bits:
            raise ValueError("bit errors must lie in [0, bits]")


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    algorithm: str
    placement: str
    bits: int
    errors: int
    evm_db: float
    trials: int
    seed: int

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")

    def confidence_interval(self, level: float = 0.95) -> tuple:
        return ber_confidence_interval(self.errors, self.bits, level)


def ber_confidence_interval(errors: int, bits: int, level: float = 0.95) -> tuple:
    """Clopper-Pearson interval for a binomial proportion."""
    a = 1 - level
    lo = 0.0 if errors == 0 else scipy.stats.beta.ppf(a / 2, errors, bits - errors + 1)
    hi = 1.0 if errors == bits else scipy.stats.beta.ppf(1 - a / 2, errors + 1, bits - errors)
    return float(lo), float(hi)


def compute_evm(reference, estimate) -> float:
    """``10 log10(|est - ref|^2 / |ref|^2)``, floored at -200 dB."""
    reference = np.asarray(reference, dtype=complex)
    estimate = np.asarray(estimate, dtype=complex)
    if reference.shape != estimate.shape:
        raise ValueError("length mismatch")
    ref = float(np.sum(np.abs(reference) ** 2))
    if ref == 0:
        raise ValueError("reference has zero energy")
    return _evm_db(float(np.sum(np.abs(estimate - reference) ** 2)), ref)


def _evm_db(err: float, ref: float) -> float:
    if err <= 0:
        return EVM_FLOOR_DB
    return max(EVM_FLOOR_DB, 10 * np.log10(err / ref))


class Link:
    """Transmitter, PA and receiver front end for one configuration."""

    def __init__(self, cfg: SimConfig, coefficients: GmpCoefficients | None = None):
        self.cfg = cfg
        self.coefficients = coefficients if coefficients is not None else load_coefficients(cfg.pa_coefficients)
        self.constellation = constellation(cfg.qam_order)

    @property
    def nominal_rms(self) -> float:
        """Expected RMS of ``s_t`` for unit-energy QAM: ``sqrt(M / N)``."""
        sc = self.cfg.subcarriers
        return float(np.sqrt(sc.data_size / sc.fft_size))

    @property
    def bits_per_symbol(self) -> int:
        return self.cfg.subcarriers.data_size * self.constellation.bits_per_symbol

    def transmit(self, rng, bypass_pa=False):
        """Random payload through modulation and PA: ``(bits, s_d, s_t, pa_out)``."""
        bits = random_bits(rng, self.bits_per_symbol)
        s_d = qam_map(bits, self.constellation)
        s_t = dfts_modulate(s_d, self.cfg.subcarriers)
        if bypass_pa:
            tx = DomainSignal.time(scale_to_backoff(s_t.samples, self.cfg.pa.backoff_db, self.nominal_rms))
        else:
            tx = pa_chain(s_t, self.coefficients, self.cfg.pa, self.nominal_rms)
        return bits, s_d, s_t, tx

    def receive(self, tx, h, snr_db, placement: Placement, rng):
        rx = add_awgn(apply_channel(tx, h), snr_db, rng)
        if self.cfg.equalizer == "zf":
            kind = ZF
        else:
            # noise variance relative to the mean per-bin transmit energy
            sc = self.cfg.subcarriers
            tx_bin = np.mean(np.abs(np.fft.fft(tx.samples, norm="ortho")) ** 2) * sc.fft_size / sc.data_size
            kind = lmmse(noise_variance(rx, snr_db) / tx_bin)
        return receive_to_domain(rx, h, kind, placement, self.cfg.subcarriers)


def training_seed(cfg: SimConfig, alg: AlgorithmSpec) -> np.random.SeedSequence:
    # shared by every algorithm with the same placement and PA, so baselines see identical data
    placement = 0 if alg.placement is Placement.TIME else 1
    return np.random.SeedSequence(cfg.seed, spawn_key=(_TRAINING_KEY, placement, int(alg.bypass_pa)))


def generate_training_data(cfg: SimConfig, alg: AlgorithmSpec, link: Link | None = None,
                           rng: np.random.Generator | None = None):
    """Clean/received symbol pairs over an AWGN link at the training SNR.

    The clean reference is ``s_d`` for DFT-s placement and the undistorted
    time signal ``s_t`` for time placement.
    """
    link = link or Link(cfg)
    rng = rng or np.random.default_rng(training_seed(cfg, alg))
    clean, received = [], []
    for _ in range(cfg.training_symbols):
        _, s_d, s_t, tx = link.transmit(rng, alg.bypass_pa)
        y = link.receive(tx, IDENTITY_CHANNEL, cfg.training_snr_db, alg.placement, rng)
        clean.append(s_d if alg.placement is Placement.DFTS else s_t.samples)
        received.append(y.samples)
    return clean, received


def train_algorithm(cfg: SimConfig, alg: AlgorithmSpec, link: Link | None = None, data=None):
    clean, received = data if data is not None else generate_training_data(cfg, alg, link)
    if alg.kind in ("none", "nopa"):
        return fit_linear_gain(clean, received)
    if alg.kind == "mp":
        return mp_fit(clean, received, alg.degrees, alg.memory)
    ts = build_training_set(clean, received, alg.memory)
    log.info("training %s: %d complex samples, %d real rows", alg.name, ts.complex_samples, ts.rows)
    if alg.kind == "volterra":
        basis = enumerate_monomials(2 * alg.memory.depth, alg.degrees)
        return volterra_fit(ts, basis, alg.ridge)
    return kernel_fit(ts, alg.degrees, rho=alg.rho, max_support=alg.max_support)


def train_all(cfg: SimConfig, link: Link | None = None) -> dict:
    link = link or Link(cfg)
    return {alg.name: train_algorithm(cfg, alg, link) for alg in cfg.algorithms}


def trial_seed(cfg: SimConfig, snr_index: int, alg_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.seed, spawn_key=(snr_index, alg_index, trial))


def run_trial(cfg: SimConfig, alg: AlgorithmSpec, model, snr_db: float, rng: np.random.Generator,
              link: Link | None = None, seed: int = 0) -> TrialRecord:
    """One channel realization carrying ``symbols_per_trial`` fresh payloads."""
    link = link or Link(cfg)
    h = IDENTITY_CHANNEL if cfg.channel is None else sample_taps(cfg.channel, rng)
    bits_sent = errors = 0
    err_energy = ref_energy = 0.0
    for _ in range(cfg.symbols_per_trial):
        bits, s_d, _, tx = link.transmit(rng, alg.bypass_pa)
        y = link.receive(tx, h, snr_db, alg.placement, rng)
        s_hat = to_dfts(compensate(model, y), cfg.subcarriers)
        decided = qam_demap_hard(s_hat, link.constellation)
        bits_sent += bits.shape[0]
        errors += int(np.count_nonzero(decided != bits))
        err_energy += float(np.sum(np.abs(s_hat - s_d) ** 2))
        ref_energy += float(np.sum(np.abs(s_d) ** 2))
    return TrialRecord(snr_db, alg.name, bits_sent, errors, _evm_db(err_energy, ref_energy), seed,
                       err_energy, ref_energy)


def _trial_job(args):
    cfg, alg, model, snr_db, ss, link = args
    return run_trial(cfg, alg, model, snr_db, np.random.default_rng(ss), link,
                     seed=int(ss.generate_state(1)[0]))


def aggregate(records, cfg: SimConfig, alg: AlgorithmSpec, snr_db: float) -> BerPoint:
    bits = sum(r.bits for r in records)
    errors = sum(r.errors for r in records)
    err = sum(r.error_energy for r in records)
    ref = sum(r.reference_energy for r in records)
    return BerPoint(snr_db, alg.name, alg.placement.value, bits, errors,
                    _evm_db(err, ref) if ref > 0 else float("nan"), len(records), cfg.seed)


def _enough(records, cfg: SimConfig) -> bool:
    if cfg.min_errors is None:
        return True
    bits = sum(r.bits for r in records)
    errors = sum(r.errors for r in records)
    return errors >= cfg.min_errors or (cfg.max_bits is not None and bits >= cfg.max_bits)


def run_point(cfg: SimConfig, alg_index: int, snr_index: int, model, link: Link | None = None,
              pool: ThreadPoolExecutor | None = None):
    """Trials for one (SNR, algorithm) pair, in batches of ``cfg.trials``.

    With ``min_errors`` set, batches continue until that many errors (or
    ``max_bits`` bits) have been collected; the stopping decision only
    looks at completed batches, so it is independent of scheduling.
    """
    link = link or Link(cfg)
    alg = cfg.algorithms[alg_index]
    snr = cfg.snr_db[snr_index]
    records = []
    while True:
        start = len(records)
        jobs = [(cfg, alg, model, snr, trial_seed(cfg, snr_index, alg_index, t), link)
                for t in range(start, start + cfg.trials)]
        records.extend(pool.map(_trial_job, jobs) if pool else map(_trial_job, jobs))
        if _enough(records, cfg):
            break
    return aggregate(records, cfg, alg, snr), records


def run_sweep(cfg: SimConfig, models: dict | None = None, output=None, append: bool = False):
    """All (SNR, algorithm) points; returns ``(points, trial_records)``.

    Writes the CSV to ``output`` (or ``cfg.output``) when given.  With
    ``append`` the rows are added to an existing file, which lets a sweep be
    extended with runs under different master seeds.
    """
    link = Link(cfg)
    models = models if models is not None else train_all(cfg, link)
    points, records = [], []
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for si, snr in enumerate(cfg.snr_db):
            for ai, alg in enumerate(cfg.algorithms):
                point, recs = run_point(cfg, ai, si, models[alg.name], link, pool)
                points.append(point)
                records.extend(recs)
                lo, hi = point.confidence_interval()
                log.info("snr=%g dB %-20s ber=%.3e [%.2e, %.2e] evm=%.2f dB (%d bits, %d trials)",
                         snr, alg.name, point.ber, lo, hi, point.evm_db, point.bits, point.trials)
    finally:
        if pool:
            pool.shutdown()
    output = output if output is not None else cfg.output
    if output is not None:
        write_csv(points, output, append=append)
    return points, records


def format_csv(points, header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(CSV_HEADER)
    for p in points:
        writer.writerow([f"{p.snr_db:g}", p.algorithm, p.placement, p.bits, p.errors, f"{p.ber:.6e}",
                         f"{p.evm_db:.4f}", p.trials, p.seed])
    return buf.getvalue()


def write_csv(points, path, append: bool = False) -> None:
    path = Path(path)
    if append and path.exists() and path.stat().st_size > 0:
        with path.open() as fh:
            first = fh.readline().strip()
        if first != ",".join(CSV_HEADER):
            raise ValueError(f"{path} does not carry the expected CSV header")
        with path.open("a") as fh:
            fh.write(format_csv(points, header=False))
    else:
        path.write_text(format_csv(points))


def read_csv(path) -> list:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    return [BerPoint(float(r["snr_db"]), r["algorithm"], r["placement"], int(r["bits"]), int(r["errors"]),
                     float(r["evm_db"]), int(r["trials"]), int(r["seed"])) for r in rows]
