import pytest
import yaml

from dpodsim import config, dpod
from dpodsim.receiver import Placement


def test_parse_snr_grid():
    assert config.parse_snr_grid("18:2:24") == (18.0, 20.0, 22.0, 24.0)
    assert config.parse_snr_grid("0:0.1:0.3") == (0.0, 0.1, 0.2, 0.3)
    assert config.parse_snr_grid("5,7.5") == (5.0, 7.5)
    assert config.parse_snr_grid(3) == (3.0,)
    assert config.parse_snr_grid([1, 2]) == (1.0, 2.0)
    with pytest.raises(ValueError):
        config.parse_snr_grid("1:0:3")


def test_parse_memory():
    assert config.parse_memory("asymmetric") == dpod.ASYMMETRIC_MEMORY
    assert config.parse_memory([0, 3]).shifts == (0, 3)
    with pytest.raises(ValueError):
        config.parse_memory("wide")


@pytest.mark.parametrize("name", sorted(config.PRESETS))
def test_presets_load(name):
    cfg = config.preset_config(name)
    assert cfg.subcarriers.fft_size == cfg.subcarriers.data_size + cfg.subcarriers.lower_guard \
        + cfg.subcarriers.upper_guard
    assert {a.kind for a in cfg.algorithms} == set(config.ALGORITHM_KINDS)


def test_reference_preset_values():
    cfg = config.preset_config("table1")
    assert (cfg.subcarriers.fft_size, cfg.subcarriers.data_size) == (4096, 3240)
    assert cfg.qam_order == 256
    assert cfg.pa.backoff_db == 6.0 and cfg.pa.oversampling == 3
    assert cfg.training_symbols == 4
    kernel = cfg.algorithm("kernel-time-sym")
    assert kernel.degree == 5 and kernel.rho == 0.005
    assert kernel.memory.shifts == (-2, -1, 0, 1, 2)
    assert cfg.algorithm("mp-time-asym").memory.shifts == (-5, -4, -3, -2, -1, 0)
    assert cfg.algorithm("kernel-dfts-sym").placement is Placement.DFTS


def test_desk_gmp_preset_has_fading():
    cfg = config.preset_config("desk-gmp")
    assert cfg.channel is not None and cfg.channel.los_factor is not None
    assert cfg.pa_coefficients == "gmp_cross"


def test_yaml_overrides(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({
        "preset": "desk",
        "modulation": {"order": 16},
        "sweep": {"snr_db": "10:5:20"},
        "algorithms": [{"name": "k", "kind": "kernel", "memory": [0, 1], "degree": 3, "placement": "dfts"}],
        "channel": {"model": "pdp", "delays": [0, 2], "powers_db": [0, -6]},
    }))
    cfg = config.load_config(path)
    assert cfg.qam_order == 16
    assert cfg.snr_db == (10.0, 15.0, 20.0)
    assert cfg.trials == config.PRESETS["desk"]["sweep"]["trials"]
    (alg,) = cfg.algorithms
    assert alg.memory.shifts == (0, 1) and alg.degree == 3 and alg.placement is Placement.DFTS
    assert cfg.channel.delays == (0, 2)


def test_explicit_preset_argument_wins(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("preset: desk\n")
    assert config.load_config(path, preset="table1").subcarriers.fft_size == 4096


@pytest.mark.parametrize("doc", [
    {"bogus": 1},
    {"sweep": {"snr": 3}},
    {"pa": {"gain": 2}},
    {"algorithms": [{"name": "x", "kind": "kernel", "lambda": 1}]},
    {"algorithms": [{"name": "x", "kind": "spline"}]},
    {"algorithms": [{"name": "x", "kind": "kernel", "degree": 4}]},
    {"algorithms": [{"name": "x", "kind": "mp"}, {"name": "x", "kind": "mp"}]},
    {"channel": {"model": "rayleigh"}},
    {"equalizer": {"kind": "mmse"}},
    {"modulation": {"order": 32}},
    {"preset": "nope"},
])
def test_invalid_documents_rejected(doc, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(ValueError):
        config.load_config(path)


def test_non_mapping_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError):
        config.load_config(path)


def test_algorithm_lookup():
    cfg = config.preset_config("desk")
    assert cfg.algorithm("none").kind == "none"
    with pytest.raises(KeyError):
        cfg.algorithm("missing")
