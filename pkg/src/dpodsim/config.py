"""Simulation configuration: presets, YAML loading and validation.

A config file is nested YAML.  Every section is optional and overrides the
selected preset (``desk`` unless ``preset:`` says otherwise)::

    preset: desk
    subcarriers: {fft_size: 1024, data_size: 768, lower_guard: 128, upper_guard: 128}
    modulation: {order: 64}
    pa: {coefficients: memoryless5, backoff_db: 6.0, oversampling: 3}
    channel: {model: awgn}            # or: {model: pdp, delays: [0, 1], powers_db: [0, -10], los_factor_db: 13.3}
                                      # or: {model: tdl-d, delay_spread_ns: 30, sample_rate_mhz: 30.72}
    equalizer: {kind: zf}             # or lmmse
    algorithms:
      - {name: kernel-time-sym, kind: kernel, placement: time, memory: symmetric, degree: 5, rho: 0.005}
    training: {snr_db: 50, symbols: 4}
    sweep: {snr_db: "18:2:26", trials: 20, symbols_per_trial: 10, min_errors: 100, max_bits: 10000000}
    seed: 0
    output: ber.csv
    workers: 1

Unknown keys are rejected.  ``algorithms`` replaces the preset list as a
whole; ``memory`` is a preset name (none/symmetric/asymmetric) or a list
of shifts.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .channel import PdpProfile, tdl_d_profile
from .dpod import DEFAULT_MAX_SUPPORT, DEFAULT_RHO, MEMORY_PRESETS, DegreeSet, MemorySpec
from .pa import PaConfig
from .receiver import Placement
from .signal_core import SubcarrierConfig
from .waveform import SUPPORTED_ORDERS

ALGORITHM_KINDS = ("volterra", "kernel", "mp", "none", "nopa")


@dataclass(frozen=True)
class AlgorithmSpec:
    """One receiver variant.

    ``none`` fits only a complex gain (no nonlinearity compensation);
    ``nopa`` additionally bypasses the PA, giving the linear reference curve.
    """

    name: str
    kind: str
    placement: Placement = Placement.TIME
    memory: MemorySpec = MEMORY_PRESETS["symmetric"]
    degree: int = 5
    rho: float = DEFAULT_RHO
    ridge: float = 0.0
    max_support: int | None = DEFAULT_MAX_SUPPORT

    def __post_init__(self):
        if self.kind not in ALGORITHM_KINDS:
            raise ValueError(f"unknown algorithm kind {self.kind!r}")
        DegreeSet.up_to(self.degree)
        if self.rho <= 0 or self.ridge < 0:
            raise ValueError("rho must be positive and ridge non-negative")

    @property
    def degrees(self) -> DegreeSet:
        return DegreeSet.up_to(self.degree)

    @property
    def bypass_pa(self) -> bool:
        return self.kind == "nopa"


@dataclass(frozen=True)
class SimConfig:
    subcarriers: SubcarrierConfig
    qam_order: int
    pa_coefficients: str
    pa: PaConfig
    channel: PdpProfile | None
    equalizer: str
    algorithms: tuple
    training_snr_db: float = 50.0
    training_symbols: int = 4
    snr_db: tuple = (20.0,)
    trials: int = 10
    symbols_per_trial: int = 1
    min_errors: int | None = None
    max_bits: int | None = None
    seed: int = 0
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.qam_order not in SUPPORTED_ORDERS:
            raise ValueError(f"unsupported QAM order {self.qam_order}")
        if self.equalizer not in ("zf", "lmmse"):
            raise ValueError("equalizer must be zf or lmmse")
        if self.trials < 1 or self.symbols_per_trial < 1 or self.training_symbols < 1:
            raise ValueError("trial and symbol counts must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ValueError("algorithm names must be unique")

    def algorithm(self, name: str) -> AlgorithmSpec:
        for a in self.algorithms:
            if a.name == name:
                return a
        raise KeyError(name)


REFERENCE_ALGORITHMS = [
    {"name": "nopa", "kind": "nopa", "placement": "time", "memory": "none", "degree": 1},
    {"name": "none", "kind": "none", "placement": "time", "memory": "none", "degree": 1},
    {"name": "kernel-time-nomem", "kind": "kernel", "placement": "time", "memory": "none"},
    {"name": "kernel-time-sym", "kind": "kernel", "placement": "time", "memory": "symmetric"},
    {"name": "volterra-time-sym", "kind": "volterra", "placement": "time", "memory": "symmetric"},
    {"name": "kernel-dfts-sym", "kind": "kernel", "placement": "dfts", "memory": "symmetric"},
    {"name": "mp-time-asym", "kind": "mp", "placement": "time", "memory": "asymmetric"},
    {"name": "mp-time-sym", "kind": "mp", "placement": "time", "memory": "symmetric"},
]

# The desk training set is small enough to keep every row as kernel support.
DESK_ALGORITHMS = [dict(a, max_support=8192) if a["kind"] == "kernel" else a
                   for a in REFERENCE_ALGORITHMS]

PRESETS = {
    "desk": {
        "subcarriers": {"fft_size": 1024, "data_size": 768, "lower_guard": 128, "upper_guard": 128},
        "modulation": {"order": 64},
        "pa": {"coefficients": "memoryless5", "backoff_db": 6.0, "oversampling": 3},
        "channel": {"model": "awgn"},
        "equalizer": {"kind": "zf"},
        "algorithms": DESK_ALGORITHMS,
        "training": {"snr_db": 50.0, "symbols": 4},
        "sweep": {"snr_db": [18.0, 22.0, 26.0], "trials": 10, "symbols_per_trial": 2},
        "seed": 0,
        "workers": 1,
    },
    "desk-gmp": {
        "subcarriers": {"fft_size": 1024, "data_size": 768, "lower_guard": 128, "upper_guard": 128},
        "modulation": {"order": 64},
        "pa": {"coefficients": "gmp_cross", "backoff_db": 6.0, "oversampling": 3},
        "channel": {"model": "tdl-d", "delay_spread_ns": 30.0, "sample_rate_mhz": 30.72},
        "equalizer": {"kind": "zf"},
        "algorithms": DESK_ALGORITHMS,
        "training": {"snr_db": 50.0, "symbols": 4},
        "sweep": {"snr_db": [20.0, 24.0, 28.0], "trials": 10, "symbols_per_trial": 2},
        "seed": 0,
        "workers": 1,
    },
    "table1": {
        "subcarriers": {"fft_size": 4096, "data_size": 3240, "lower_guard": 428, "upper_guard": 428},
        "modulation": {"order": 256},
        "pa": {"coefficients": "memoryless5", "backoff_db": 6.0, "oversampling": 3},
        "channel": {"model": "awgn"},
        "equalizer": {"kind": "zf"},
        "algorithms": REFERENCE_ALGORITHMS,
        "training": {"snr_db": 50.0, "symbols": 4},
        "sweep": {"snr_db": [24.0, 28.0, 32.0], "trials": 10, "symbols_per_trial": 1},
        "seed": 0,
        "workers": 1,
    },
}

_TOP_KEYS = {"preset", "subcarriers", "modulation", "pa", "channel", "equalizer", "algorithms",
             "training", "sweep", "seed", "output", "workers"}
_SECTION_KEYS = {
    "subcarriers": {"fft_size", "data_size", "lower_guard", "upper_guard"},
    "modulation": {"order"},
    "pa": {"coefficients", "backoff_db", "oversampling"},
    "channel": {"model", "delays", "powers_db", "los_factor_db", "delay_spread_ns", "sample_rate_mhz"},
    "equalizer": {"kind"},
    "training": {"snr_db", "symbols"},
    "sweep": {"snr_db", "trials", "symbols_per_trial", "min_errors", "max_bits"},
}
_ALGORITHM_KEYS = {"name", "kind", "placement", "memory", "degree", "rho", "ridge", "max_support"}


def _reject_unknown(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")


def parse_snr_grid(spec) -> tuple:
    """``[18, 20]``, ``"18,20"`` or ``"lo:step:hi"`` (inclusive)."""
    if isinstance(spec, (int, float)):
        return (float(spec),)
    if isinstance(spec, str):
        if ":" in spec:
            lo, step, hi = (float(v) for v in spec.split(":"))
            if step <= 0:
                raise ValueError("SNR step must be positive")
            n = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return tuple(round(lo + i * step, 10) for i in range(n))
        return tuple(float(v) for v in spec.split(","))
    return tuple(float(v) for v in spec)


def parse_memory(spec) -> MemorySpec:
    if isinstance(spec, str):
        try:
            return MEMORY_PRESETS[spec]
        except KeyError:
            raise ValueError(f"unknown memory preset {spec!r}") from None
    return MemorySpec(tuple(spec))


def parse_algorithm(d: dict) -> AlgorithmSpec:
    _reject_unknown(d, _ALGORITHM_KEYS, f"algorithm {d.get('name', '?')}")
    kind = d["kind"]
    linear = kind in ("none", "nopa")
    max_support = d.get("max_support", DEFAULT_MAX_SUPPORT)
    return AlgorithmSpec(
        name=str(d.get("name", kind)),
        kind=kind,
        placement=Placement(d.get("placement", "time")),
        memory=parse_memory(d.get("memory", "none" if linear else "symmetric")),
        degree=int(d.get("degree", 1 if linear else 5)),
        rho=float(d.get("rho", DEFAULT_RHO)),
        ridge=float(d.get("ridge", 0.0)),
        max_support=None if max_support is None else int(max_support),
    )


def _parse_channel(d: dict) -> PdpProfile | None:
    model = d.get("model", "awgn")
    if model == "awgn":
        return None
    if model == "pdp":
        return PdpProfile.from_db(d["delays"], d["powers_db"], d.get("los_factor_db"))
    if model == "tdl-d":
        return tdl_d_profile(float(d.get("delay_spread_ns", 30.0)) * 1e-9,
                             float(d.get("sample_rate_mhz", 30.72)) * 1e6)
    raise ValueError(f"unknown channel model {model!r}")


def merge_config(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_document(doc: dict | None = None, preset: str | None = None) -> dict:
    """Preset merged with ``doc``; an explicit ``preset`` argument wins over ``doc['preset']``."""
    doc = dict(doc or {})
    _reject_unknown(doc, _TOP_KEYS, "config")
    for section, keys in _SECTION_KEYS.items():
        if section in doc:
            _reject_unknown(doc[section], keys, section)
    name = preset or doc.pop("preset", None) or "desk"
    doc.pop("preset", None)
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return merge_config(PRESETS[name], doc)


def config_from_document(doc: dict) -> SimConfig:
    sc = doc["subcarriers"]
    sweep = doc["sweep"]
    return SimConfig(
        subcarriers=SubcarrierConfig(int(sc["fft_size"]), int(sc["data_size"]),
                                     int(sc["lower_guard"]), int(sc["upper_guard"])),
        qam_order=int(doc["modulation"]["order"]),
        pa_coefficients=str(doc["pa"]["coefficients"]),
        pa=PaConfig(float(doc["pa"]["backoff_db"]), int(doc["pa"]["oversampling"])),
        channel=_parse_channel(doc["channel"]),
        equalizer=str(doc["equalizer"]["kind"]),
        algorithms=tuple(parse_algorithm(a) for a in doc["algorithms"]),
        training_snr_db=float(doc["training"]["snr_db"]),
        training_symbols=int(doc["training"]["symbols"]),
        snr_db=parse_snr_grid(sweep["snr_db"]),
        trials=int(sweep["trials"]),
        symbols_per_trial=int(sweep.get("symbols_per_trial", 1)),
        min_errors=None if sweep.get("min_errors") is None else int(sweep["min_errors"]),
        max_bits=None if sweep.get("max_bits") is None else int(sweep["max_bits"]),
        seed=int(doc.get("seed", 0)),
        output=doc.get("output"),
        workers=int(doc.get("workers", 1)),
    )


def load_config(path=None, preset: str | None = None, overrides: dict | None = None) -> SimConfig:
    doc = {}
    if path is not None:
        doc = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(doc, dict):
            raise ValueError("config file must hold a mapping")
    resolved = resolve_document(doc, preset)
    if overrides:
        resolved = merge_config(resolved, overrides)
    return config_from_document(resolved)


def preset_config(name: str = "desk", **overrides) -> SimConfig:
    return load_config(preset=name, overrides=overrides or None)
