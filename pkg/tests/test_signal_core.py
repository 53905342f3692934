import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpodsim import signal_core as sc

from oracles import dense_dft, dense_lowpass, direct_cyclic_convolve, windows_loop


def _cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


@pytest.mark.parametrize("n", [1, 2, 7, 16, 33])
def test_dft_matches_dense_matrix(n):
    x = _cvec(np.random.default_rng(n), n)
    np.testing.assert_allclose(sc.dft(x), dense_dft(x), atol=1e-12)
    np.testing.assert_allclose(sc.idft(sc.dft(x)), x, atol=1e-12)


def test_dft_zero_frequency_is_centered():
    X = sc.dft(np.ones(8))
    assert np.argmax(np.abs(X)) == 4
    assert X[4] == pytest.approx(np.sqrt(8))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 64), seed=st.integers(0, 2 ** 32 - 1))
def test_dft_is_unitary(n, seed):
    x = _cvec(np.random.default_rng(seed), n)
    assert np.linalg.norm(sc.dft(x)) == pytest.approx(np.linalg.norm(x), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 24), seed=st.integers(0, 2 ** 32 - 1))
def test_cyclic_convolve_matches_direct_sum(n, seed):
    rng = np.random.default_rng(seed)
    a, b = _cvec(rng, n), _cvec(rng, n)
    np.testing.assert_allclose(sc.cyclic_convolve(a, b), direct_cyclic_convolve(a, b), atol=1e-10)


def test_cyclic_convolve_rejects_mismatch():
    with pytest.raises(ValueError):
        sc.cyclic_convolve(np.ones(4), np.ones(5))


@pytest.mark.parametrize("n,m", [(8, 5), (16, 16), (64, 40), (63, 20)])
def test_lowpass_vector_projects_onto_used_band(n, m):
    cfg = sc.SubcarrierConfig.centered(n, m)
    x = _cvec(np.random.default_rng(0), n)
    y = sc.cyclic_convolve(sc.lowpass_vector(cfg), x)
    np.testing.assert_allclose(y, dense_lowpass(x, cfg.lower_guard, m), atol=1e-12)
    # idempotent
    np.testing.assert_allclose(sc.cyclic_convolve(sc.lowpass_vector(cfg), y), y, atol=1e-12)


def test_centered_layout():
    cfg = sc.SubcarrierConfig.centered(4096, 3240)
    assert (cfg.lower_guard, cfg.upper_guard) == (428, 428)
    odd = sc.SubcarrierConfig.centered(10, 5)
    assert (odd.lower_guard, odd.upper_guard) == (2, 3)
    with pytest.raises(ValueError):
        sc.SubcarrierConfig(10, 5, 2, 2)
    with pytest.raises(ValueError):
        sc.SubcarrierConfig(10, 0, 5, 5)


def test_subcarrier_map_round_trip():
    cfg = sc.SubcarrierConfig.centered(12, 7)
    s = _cvec(np.random.default_rng(1), 7)
    full = sc.subcarrier_map(s, cfg)
    assert np.count_nonzero(full) == 7
    np.testing.assert_array_equal(sc.subcarrier_demap(full, cfg), s)
    with pytest.raises(ValueError):
        sc.subcarrier_map(np.ones(6), cfg)
    with pytest.raises(ValueError):
        sc.subcarrier_demap(np.ones(11), cfg)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 20), shifts=st.lists(st.integers(-6, 6), min_size=1, max_size=5))
def test_cyclic_windows_match_loop(n, shifts):
    y = np.arange(n) + 0.5j
    W = sc.cyclic_windows(y, shifts)
    np.testing.assert_array_equal(W, windows_loop(y, shifts))
    for i in range(n):
        np.testing.assert_array_equal(sc.cyclic_window(y, i, shifts), W[i])


def test_cyclic_window_bounds():
    with pytest.raises(IndexError):
        sc.cyclic_window(np.ones(4), 4, [0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 10))
def test_real_maps(seed, n):
    x = _cvec(np.random.default_rng(seed), n)
    np.testing.assert_array_equal(sc.xi_inv(sc.xi(x)), x)
    np.testing.assert_allclose(sc.xi_rot(x), sc.xi(-1j * x), atol=0)
    assert sc.xi(x) @ sc.xi_rot(x) == pytest.approx(0, abs=1e-12)


def test_xi_inv_rejects_odd_length():
    with pytest.raises(ValueError):
        sc.xi_inv(np.ones(3))


def test_domain_signal_validation():
    s = sc.DomainSignal.time(np.ones(4))
    assert len(s) == 4 and s.kind is sc.DomainKind.TIME
    with pytest.raises(ValueError):
        s.samples[0] = 2
    with pytest.raises(ValueError):
        sc.DomainSignal(np.ones(3), sc.DomainKind.FREQ, 4)
    with pytest.raises(ValueError):
        sc.DomainSignal.time(np.array([1, np.nan]))
    with pytest.raises(ValueError):
        sc.DomainSignal.time(np.ones((2, 2)))


def test_expect_domain_rejects_wrong_kind():
    d = sc.DomainSignal.dfts(np.ones(3))
    with pytest.raises(TypeError):
        sc.expect_domain(d, sc.DomainKind.TIME)
    np.testing.assert_array_equal(sc.expect_domain(d, sc.DomainKind.DFTS, 3), np.ones(3))
    with pytest.raises(ValueError):
        sc.expect_domain(np.ones(3), sc.DomainKind.TIME, 4)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        sc.dft(np.array([]))
