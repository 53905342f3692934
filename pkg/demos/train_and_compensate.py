"""Train each compensator on four symbols and report EVM on fresh ones.

The receiver sees the PA output through an ideal lowpass (guard bins
removed), so a compensator needs memory to undo the spreading.  Kernel
ridge and least-squares Volterra share the same function class and land
on nearly the same EVM; the memory polynomial cannot form cross terms
between neighbouring samples.
"""
import time

import numpy as np

from dpodsim import config, dpod, simulator

cfg = config.preset_config("desk", training={"snr_db": 60.0, "symbols": 4})
link = simulator.Link(cfg)
rng = np.random.default_rng(5)

test_clean, test_rx = [], []
for _ in range(10):
    _, s_d, s_t, tx = link.transmit(rng)
    y = link.receive(tx, simulator.IDENTITY_CHANNEL, 60.0, simulator.Placement.TIME, rng)
    test_clean.append(s_t.samples)
    test_rx.append(y.samples)

print(f"{'algorithm':>20} {'params':>7} {'train s':>8} {'EVM dB':>8}")
for alg in cfg.algorithms:
    if alg.placement is not simulator.Placement.TIME or alg.kind == "nopa":
        continue
    t0 = time.perf_counter()
    model = simulator.train_algorithm(cfg, alg, link)
    elapsed = time.perf_counter() - t0
    if isinstance(model, dpod.VolterraModel):
        params = model.h.size
    elif isinstance(model, dpod.KernelModel):
        params = model.beta.size
    else:
        params = model.coeffs.size
    est = np.concatenate([dpod.compensate(model, y) for y in test_rx])
    evm = simulator.compute_evm(np.concatenate(test_clean), est)
    print(f"{alg.name:>20} {params:7d} {elapsed:8.2f} {evm:8.2f}")
