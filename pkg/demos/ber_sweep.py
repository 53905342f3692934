"""Short BER sweep on the desk preset, printed with 95% intervals.

Uses far fewer bits than the acceptance suite; expect wide intervals.
Pass ``desk-gmp`` as the first argument for the fading channel with a
cross-term amplifier.
"""
import sys

from dpodsim import config, simulator

preset = sys.argv[1] if len(sys.argv) > 1 else "desk"
cfg = config.preset_config(preset, sweep={"trials": 4, "symbols_per_trial": 2})
points, _ = simulator.run_sweep(cfg)

for snr in cfg.snr_db:
    print(f"SNR {snr:g} dB")
    for p in points:
        if p.snr_db == snr:
            lo, hi = p.confidence_interval()
            print(f"  {p.algorithm:>20}  BER {p.ber:.2e}  [{lo:.1e}, {hi:.1e}]  EVM {p.evm_db:6.2f} dB")
