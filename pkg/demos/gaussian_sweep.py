"""Per-user Gaussian rate against half the pairwise outer bound.

Prints the sweep as CSV; pipe it into a plotting tool of your choice.
"""
import sys

from ergodic_alignment.analysis import sweep_csv, sweep_figure

rows = sweep_figure(range(-10, 31, 2), samples=100_000, seed=0, threads=4)
sys.stdout.write(sweep_csv(rows, comment="equal SNR, K = 2, 1e5 samples per point"))
