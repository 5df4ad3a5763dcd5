"""Rate regions of the finite-field model and Gaussian rate estimates.

All rates are in bits per channel use.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import FiniteFieldNoiseModel, noise_entropy, stream

SWEEP_HEADER = ("snr_db", "achievable", "bound_half", "gap", "stderr_ach", "stderr_bound")


@dataclass(frozen=True)
class RateRegion:
    """Rate tuples with R_k + R_l <= cap for every pair of users."""

    K: int
    cap: float

    @classmethod
    def from_noise(cls, q: int, rho: float, K: int) -> "RateRegion":
        return cls(K, math.log2(q) - noise_entropy(FiniteFieldNoiseModel(q, rho)))

    @property
    def symmetric_point(self) -> tuple:
        return (self.cap / 2,) * self.K


def _rates(region: RateRegion, rates) -> np.ndarray:
    r = np.asarray(rates, dtype=float)
    if r.shape[-1] != region.K:
        raise ValueError(f"expected {region.K} rates, got {r.shape[-1]}")
    if np.any(r < 0):
        raise ValueError("rates must be nonnegative")
    return r


def region_contains(region: RateRegion, rates):
    """Pairwise check; ``rates`` may be one tuple or an (N, K) stack."""
    r = _rates(region, rates)
    k, l = np.triu_indices(region.K, 1)
    ok = np.all(r[..., k] + r[..., l] <= region.cap, axis=-1)
    return bool(ok) if r.ndim == 1 else ok


def binding_pairs(region: RateRegion, rates) -> dict:
    """Violated pairs and the tightest pair (first in order among ties), 1-indexed."""
    r = _rates(region, rates)
    pairs = list(itertools.combinations(range(region.K), 2))
    sums = [r[k] + r[l] for k, l in pairs]
    top = max(sums)
    tight = pairs[sums.index(top)]
    return {
        "binding_pair": [tight[0] + 1, tight[1] + 1],
        "binding_sum": top,
        "violated_pairs": [[k + 1, l + 1] for (k, l), s in zip(pairs, sums) if s > region.cap],
        "tight_pairs": [[k + 1, l + 1] for (k, l), s in zip(pairs, sums) if s == region.cap],
    }


def beta(region: RateRegion, r1: float) -> float:
    return min(1.0 - r1 / region.cap, 0.5)


def equivalent_form(region: RateRegion, rates) -> bool:
    """Membership through the largest rate: R_1 <= C and R_k <= beta C for the rest."""
    r = _rates(region, rates)
    if np.any(np.diff(r, axis=-1) > 0):
        raise ValueError("rates must be sorted in descending order")
    r1 = r[..., 0]
    # beta * C, written so that it rounds like the pairwise sums
    b = np.minimum(region.cap - r1, region.cap / 2)
    ok = (r1 <= region.cap) & np.all(r[..., 1:] <= b[..., None], axis=-1)
    return bool(ok) if r.ndim == 1 else ok


def timeshare_split(region: RateRegion, r1: float) -> float:
    """Share of time given to the symmetric scheme so user 1 gets ``r1``.

    The remaining time serves user 1 alone at rate C; the other users then
    get C - r1.
    """
    C = region.cap
    if not C / 2 <= r1 <= C:
        raise ValueError(f"r1 must lie in [C/2, C] = [{C / 2}, {C}]")
    return 2.0 * (1.0 - r1 / C)


def _mean_se(x: np.ndarray) -> tuple:
    n = x.size
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class OuterBound(Estimate):
    terms: tuple = ()
    term_stderr: tuple = ()


def gauss_achievable(snr: float, samples: int, seed: int, rng=None) -> Estimate:
    """Monte Carlo estimate of 0.5 E[log2(1 + 2 |h|^2 snr)], |h|^2 ~ Exp(1)."""
    if snr < 0 or samples < 1:
        raise ValueError("need snr >= 0 and samples >= 1")
    if snr == 0:
        return Estimate(0.0, 0.0, samples)
    rng = rng if rng is not None else stream(seed, "mc")
    g = rng.standard_exponential(samples)
    return Estimate(*_mean_se(0.5 * np.log2(1.0 + 2.0 * g * snr)), samples)


def gauss_outer_bound(snr, pair, samples: int, seed: int, rng=None) -> OuterBound:
    """Monte Carlo estimate of the pairwise sum-rate outer bound for users ``pair``."""
    snr = np.asarray(snr, dtype=float)
    k, l = pair
    if k == l or not (0 <= k < snr.size and 0 <= l < snr.size):
        raise ValueError(f"invalid user pair {pair}")
    sk, sl = snr[k], snr[l]
    rng = rng if rng is not None else stream(seed, "mc")
    # |h|^2 of CN(0,1) is Exp(1); columns: kk, kl, lk, ll
    g = rng.standard_exponential((4, samples))
    gkk, gkl, glk, gll = g
    t1 = np.log2(1.0 + gkl * sl + gkk * sk / (1.0 + glk * sk))
    t2 = np.log2(1.0 + glk * sk + gll * sl / (1.0 + gkl * sl))
    m1, s1 = _mean_se(t1)
    m2, s2 = _mean_se(t2)
    total, se = _mean_se(t1 + t2)
    return OuterBound(total, se, samples, (m1, m2), (s1, s2))


@dataclass(frozen=True)
class GaussRateResult:
    rates: tuple
    rate_stderr: tuple
    bounds: dict
    bound_stderr: dict
    samples: int


def gauss_rates(snr, samples: int, seed: int) -> GaussRateResult:
    """Per-user achievable rates and every pairwise outer bound."""
    snr = np.asarray(snr, dtype=float)
    ach = [gauss_achievable(s, samples, seed, rng=stream(seed, "mc", k))
           for k, s in enumerate(snr)]
    bounds, ses = {}, {}
    for i, (k, l) in enumerate(itertools.combinations(range(snr.size), 2)):
        b = gauss_outer_bound(snr, (k, l), samples, seed, rng=stream(seed, "mc", snr.size + i))
        bounds[(k, l)], ses[(k, l)] = b.value, b.stderr
    return GaussRateResult(tuple(a.value for a in ach), tuple(a.stderr for a in ach),
                           bounds, ses, samples)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def _sweep_point(i: int, snr_db: float, samples: int, seed: int, K: int) -> tuple:
    s = float(db_to_linear(snr_db))
    ach = gauss_achievable(s, samples, seed, rng=stream(seed, "mc", 2 * i))
    best = None
    for j, pair in enumerate(itertools.combinations(range(K), 2)):
        rng = stream(seed, "mc", 2 * i + 1) if j == 0 else \
            stream(seed, "mc", 1_000_000 + i * K * K + j)
        b = gauss_outer_bound([s] * K, pair, samples, seed, rng=rng)
        if best is None or b.value < best.value:
            best = b
    half, half_se = best.value / 2, best.stderr / 2
    return (float(snr_db), ach.value, half, half - ach.value, ach.stderr, half_se)


def sweep_figure(snr_db, samples: int, seed: int, K: int = 2, threads: int = 1) -> list:
    """Symmetric-SNR sweep of the per-user achievable rate against the outer bound.

    Each row is (snr_db, achievable, bound_half, gap, stderr_ach,
    stderr_bound) where bound_half is the smallest pairwise bound divided
    by two and stderr_bound is its standard error.  Point ``i`` draws from
    its own streams, so rows do not depend on ``threads``.
    """
    grid = [float(x) for x in snr_db]
    if not grid:
        raise ValueError("empty SNR grid")
    args = [(i, x, samples, seed, K) for i, x in enumerate(grid)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda a: _sweep_point(*a), args))
    return [_sweep_point(*a) for a in args]


def sweep_csv(rows, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
