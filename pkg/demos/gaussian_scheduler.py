"""Quantized pairing on Gaussian channels.

First a causal scheduler on a real fading sequence, then exact draws of
matched pairs showing the rate approaching the ideal value as the grid
gets finer.
"""
import numpy as np

from ergodic_alignment import channels, scheduler
from ergodic_alignment.analysis import gauss_achievable

K, snr = 2, 10.0
quant = scheduler.Quantizer(1.0, 1.5)
H = channels.sample_gauss_states(channels.stream(0, "states"), K, 50_000)
plan = scheduler.build_pairing(H, "gauss", quantizer=quant)
print(plan.summary())

ideal = gauss_achievable(snr, 10**6, seed=0).value
for gamma in (0.5, 0.2, 0.1):
    quant = scheduler.Quantizer(gamma, scheduler.default_tau(K))
    H1, H2 = scheduler.sample_matched_pairs(channels.stream(0, "partner"), K, quant, 100_000)
    rate = 0.5 * np.log2(1 + scheduler.effective_snr_array(H1, H2, snr)).mean()
    print(f"gamma {gamma}: mean rate {rate:.4f} (ideal {ideal:.4f})")
