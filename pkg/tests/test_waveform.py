import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpodsim import signal_core as sc, waveform as wf

from oracles import gray_neighbours_ok


@pytest.mark.parametrize("order", wf.SUPPORTED_ORDERS)
def test_fixture_matches_generator(order):
    np.testing.assert_allclose(wf.constellation(order).points, wf.gray_qam_points(order), atol=1e-15)
    parsed = wf.parse_constellation_table(wf.format_constellation_table(order))
    np.testing.assert_array_equal(parsed, wf.gray_qam_points(order))


@pytest.mark.parametrize("order", wf.SUPPORTED_ORDERS)
def test_gray_and_unit_energy(order):
    pts = wf.constellation(order).points
    assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0, abs=1e-14)
    assert gray_neighbours_ok(pts)
    assert len(np.unique(np.round(pts, 12))) == order


def test_qpsk_labels():
    # first bit selects the in-phase sign, second the quadrature sign
    pts = wf.constellation(4).points * np.sqrt(2)
    np.testing.assert_allclose(pts, [1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


def test_table_parser_rejects_duplicates():
    with pytest.raises(ValueError):
        wf.parse_constellation_table("0 1 0\n0 -1 0\n")


def test_unsupported_order():
    with pytest.raises(ValueError):
        wf.constellation(32)
    with pytest.raises(ValueError):
        wf.gray_qam_points(8)


@settings(max_examples=25, deadline=None)
@given(order=st.sampled_from(wf.SUPPORTED_ORDERS), seed=st.integers(0, 2 ** 32 - 1))
def test_map_demap_round_trip(order, seed):
    c = wf.constellation(order)
    bits = wf.random_bits(np.random.default_rng(seed), 20 * c.bits_per_symbol)
    s = wf.qam_map(bits, c)
    np.testing.assert_array_equal(wf.qam_demap_hard(s, c, chunk=7), bits)
    # small perturbations stay inside the decision region
    np.testing.assert_array_equal(wf.qam_demap_hard(s + 0.01 * (1 + 1j) / np.sqrt(order), c), bits)


def test_qam_map_rejects_partial_symbol():
    with pytest.raises(ValueError):
        wf.qam_map(np.ones(5), wf.constellation(16))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 40), data=st.data())
def test_dfts_round_trip(seed, n, data):
    m = data.draw(st.integers(1, n))
    cfg = sc.SubcarrierConfig.centered(n, m)
    rng = np.random.default_rng(seed)
    s = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    tx = wf.dfts_modulate(s, cfg)
    assert tx.kind is sc.DomainKind.TIME and len(tx) == n
    np.testing.assert_allclose(wf.dfts_demodulate(tx, cfg), s, atol=1e-12)
    assert np.linalg.norm(tx.samples) == pytest.approx(np.linalg.norm(s), rel=1e-12)


def test_dfts_demodulate_rejects_wrong_domain():
    cfg = sc.SubcarrierConfig.centered(8, 4)
    with pytest.raises(TypeError):
        wf.dfts_demodulate(sc.DomainSignal.dfts(np.ones(8)), cfg)


def test_dfts_has_lower_papr_than_ofdm():
    cfg = sc.SubcarrierConfig.centered(1024, 600)
    c = wf.constellation(16)
    rng = np.random.default_rng(3)
    dfts, ofdm = [], []
    for _ in range(20):
        s = wf.qam_map(wf.random_bits(rng, 600 * 4), c)
        dfts.append(wf.papr_db(wf.dfts_modulate(s, cfg)))
        ofdm.append(wf.papr_db(wf.ofdm_modulate(s, cfg)))
    assert np.mean(dfts) < np.mean(ofdm) - 1.5


def test_qpsk_ber_formula():
    assert wf.qam_ber_awgn(4, 0.0) == pytest.approx(wf.qfunc(1.0))
    assert wf.qfunc(0.0) == pytest.approx(0.5)


@pytest.mark.parametrize("order", wf.SUPPORTED_ORDERS)
def test_snr_for_ber_inverts(order):
    s = wf.snr_for_ber(order, 1e-3)
    assert wf.qam_ber_awgn(order, s) == pytest.approx(1e-3, rel=1e-8)


def test_awgn_ber_formula_against_monte_carlo():
    c = wf.constellation(16)
    rng = np.random.default_rng(5)
    snr_db = wf.snr_for_ber(16, 1e-2)
    bits = wf.random_bits(rng, 400_000)
    s = wf.qam_map(bits, c)
    sigma = np.sqrt(10 ** (-snr_db / 10) / 2)
    r = s + sigma * (rng.standard_normal(s.shape) + 1j * rng.standard_normal(s.shape))
    ber = np.mean(wf.qam_demap_hard(r, c) != bits)
    assert ber == pytest.approx(1e-2, rel=0.1)
