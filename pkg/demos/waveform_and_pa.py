"""DFT-s-OFDM versus plain OFDM through the clamped amplifier.

Prints PAPR, in-band EVM after the PA and the power leaking into the
guard bands for both waveforms at a few backoff levels.
"""
import numpy as np

from dpodsim import pa, signal_core as sc, waveform as wf

cfg = sc.SubcarrierConfig.centered(1024, 768)
qam = wf.constellation(64)
coeffs = pa.load_coefficients("memoryless5")
rng = np.random.default_rng(1)
nominal_rms = np.sqrt(cfg.data_size / cfg.fft_size)

print(f"{'backoff':>8} {'waveform':>9} {'PAPR dB':>8} {'EVM dB':>8} {'guard dB':>8}")
for backoff in (3.0, 6.0, 9.0):
    for name, modulate in (("dft-s", wf.dfts_modulate), ("ofdm", wf.ofdm_modulate)):
        papr, evm, leak = [], [], []
        for _ in range(20):
            s = wf.qam_map(wf.random_bits(rng, cfg.data_size * 6), qam)
            x = modulate(s, cfg)
            y = pa.pa_chain(x, coeffs, pa.PaConfig(backoff, 3), nominal_rms)
            X, Y = sc.dft(x), sc.dft(y)
            used = np.zeros(cfg.fft_size, bool)
            used[cfg.used] = True
            # best complex gain, so EVM only measures the nonlinear part
            g = np.vdot(X[used], Y[used]) / np.vdot(X[used], X[used])
            papr.append(wf.papr_db(x))
            evm.append(np.sum(np.abs(Y[used] - g * X[used]) ** 2) / np.sum(np.abs(g * X[used]) ** 2))
            leak.append(np.sum(np.abs(Y[~used]) ** 2) / np.sum(np.abs(Y[used]) ** 2))
        print(f"{backoff:8.1f} {name:>9} {np.mean(papr):8.2f} {10 * np.log10(np.mean(evm)):8.2f} "
              f"{10 * np.log10(np.mean(leak)):8.2f}")
