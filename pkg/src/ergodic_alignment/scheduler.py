"""Pairing of time slots whose channel states cancel each other's cross links.

Finite-field states pair ``H`` with ``complement_matrix(H)``.  Gaussian
states are first quantized onto the grid ``gamma * (Z + jZ)``; a quantized
matrix pairs with its sign-flipped-off-diagonal twin.

The default matcher is causal: one FIFO queue per state key, and an
arriving slot is matched with the oldest waiting slot whose key is its
complement.  ``causal=False`` reproduces the offline split in which the
first half of each state's occurrences is paired with the second half of
its complement's occurrences.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, stats

from .channels import ChannelState, states_to_array
from .finite_field import complement_array, matrix_codes
from .typicality import state_key_str

FRESH, REPEAT, UNMATCHED, DISCARDED = "fresh", "repeat", "unmatched", "discarded"


@dataclass(frozen=True)
class Quantizer:
    gamma: float
    tau: float = math.inf

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


def default_tau(K: int, discard_prob: float = 1e-3) -> float:
    """Radius for which the union bound on discarding a block equals ``discard_prob``.

    Each |h|^2 is Exp(1), so P(|h| > tau) = exp(-tau^2).
    """
    return math.sqrt(math.log(K * K / discard_prob))


def _round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_indices(h, gamma: float) -> np.ndarray:
    """Integer grid coordinates of the nearest grid point, trailing axis (re, im)."""
    h = np.asarray(h, dtype=complex)
    idx = np.stack([_round_half_away(h.real / gamma), _round_half_away(h.imag / gamma)],
                   axis=-1)
    return idx.astype(np.int64)


def quantize(h, quantizer: Quantizer):
    """Nearest point of ``gamma * (Z + jZ)``; ties round away from zero per axis."""
    idx = quantize_indices(h, quantizer.gamma)
    out = quantizer.gamma * (idx[..., 0] + 1j * idx[..., 1])
    return complex(out) if np.ndim(out) == 0 else out


def gauss_complement(Hq):
    """Keep the diagonal, negate every off-diagonal entry of a (..., K, K) array."""
    Hq = np.asarray(Hq)
    K = Hq.shape[-1]
    out = -Hq
    d = np.arange(K)
    out[..., d, d] = Hq[..., d, d]
    return out


def _complement_indices(idx):
    # idx has shape (..., K, K, 2)
    K = idx.shape[-2]
    out = -idx
    d = np.arange(K)
    out[..., d, d, :] = idx[..., d, d, :]
    return out


@dataclass(frozen=True)
class PairingPlan:
    """Per-slot pairing decisions.

    ``partner[t]`` is the matched slot or -1; ``role[t]`` is one of
    fresh, repeat, unmatched, discarded.  ``keys[t]`` is None for
    discarded slots.
    """

    keys: list = field(repr=False)
    partner: np.ndarray = field(repr=False)
    role: np.ndarray = field(repr=False)
    causal: bool = True

    @property
    def n(self) -> int:
        return len(self.keys)

    @property
    def matched_fraction(self) -> float:
        return float(np.count_nonzero(self.partner >= 0)) / self.n

    @property
    def discarded_fraction(self) -> float:
        return float(np.count_nonzero(self.role == DISCARDED)) / self.n

    def pairs(self) -> np.ndarray:
        """(P, 2) array of (fresh, repeat) slots ordered by fresh slot."""
        fresh = np.nonzero(self.role == FRESH)[0]
        return np.stack([fresh, self.partner[fresh]], axis=1).reshape(-1, 2)

    def summary(self) -> dict:
        return {"n": self.n, "pairs": int(np.count_nonzero(self.role == FRESH)),
                "matched_fraction": self.matched_fraction,
                "discarded_fraction": self.discarded_fraction,
                "causal": self.causal}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "state_key", "partner", "role"])
        for t in range(self.n):
            key = "" if self.keys[t] is None else state_key_str(self.keys[t])
            p = int(self.partner[t])
            w.writerow([t, key, "" if p < 0 else p, self.role[t]])
        return buf.getvalue()


def match_keys(keys: Sequence, comp_keys: Sequence, causal: bool = True):
    """Pair slot indices whose keys are complements of each other.

    ``keys[t] is None`` marks a discarded slot.  Returns ``(partner, role)``.
    """
    n = len(keys)
    if n == 0:
        raise ValueError("cannot build a pairing for an empty sequence")
    partner = np.full(n, -1, dtype=np.int64)
    role = np.full(n, UNMATCHED, dtype=object)
    if causal:
        queues = defaultdict(deque)
        for t, (k, ck) in enumerate(zip(keys, comp_keys)):
            if k is None:
                role[t] = DISCARDED
                continue
            waiting = queues.get(ck)
            if waiting:
                s = waiting.popleft()
                partner[s], partner[t] = t, s
                role[s], role[t] = FRESH, REPEAT
            else:
                queues[k].append(t)
        return partner, role.astype(str)

    groups = defaultdict(list)
    comp_of = {}
    for t, (k, ck) in enumerate(zip(keys, comp_keys)):
        if k is None:
            role[t] = DISCARDED
            continue
        groups[k].append(t)
        comp_of[k] = ck
    done = set()
    for k, slots in groups.items():
        if k in done:
            continue
        ck = comp_of[k]
        done.update((k, ck))
        if ck == k:
            c = len(slots) // 2
            _link(partner, role, slots[:c], slots[c:2 * c])
            continue
        other = groups.get(ck, [])
        c = min(len(slots), len(other)) // 2
        _link(partner, role, slots[:c], other[c:2 * c])
        _link(partner, role, other[:c], slots[c:2 * c])
    return partner, role.astype(str)


def _link(partner, role, fresh, repeat):
    for a, b in zip(fresh, repeat):
        partner[a], partner[b] = b, a
        role[a], role[b] = FRESH, REPEAT


def ff_keys(H, q: int):
    """State keys and complement keys for an (n, K, K) finite-field array."""
    H = np.asarray(H, dtype=np.int64)
    keys = [tuple(r) for r in H.reshape(len(H), -1).tolist()]
    comp = complement_array(H, q)
    comp_keys = [tuple(r) for r in comp.reshape(len(H), -1).tolist()]
    return keys, comp_keys


def ff_codes(H, q: int):
    """Integer state codes and complement codes (faster than tuple keys)."""
    H = np.asarray(H, dtype=np.int64)
    return matrix_codes(H, q).tolist(), matrix_codes(complement_array(H, q), q).tolist()


def gauss_keys(H, quantizer: Quantizer):
    """Quantized keys for an (n, K, K) complex array; None where discarded."""
    H = np.asarray(H, dtype=complex)
    n = len(H)
    keep = np.all(np.abs(H).reshape(n, -1) <= quantizer.tau, axis=1)
    idx = quantize_indices(H, quantizer.gamma)
    flat = idx.reshape(n, -1).tolist()
    cflat = _complement_indices(idx).reshape(n, -1).tolist()
    keys = [tuple(r) if ok else None for r, ok in zip(flat, keep)]
    comp = [tuple(r) if ok else None for r, ok in zip(cflat, keep)]
    return keys, comp


def build_pairing(states, model: str | None = None, quantizer: Quantizer | None = None,
                  q: int | None = None, causal: bool = True) -> PairingPlan:
    """Build the pairing plan for a sequence of channel states.

    ``states`` is a sequence of :class:`ChannelState` or an (n, K, K) array.
    Arrays need ``model`` ("ff" with ``q``, or "gauss"); state sequences
    infer both.  Gaussian pairing needs a ``quantizer``.
    """
    if isinstance(states, np.ndarray):
        arr = states
        if model is None:
            model = "gauss" if np.iscomplexobj(arr) else "ff"
    else:
        states = list(states)
        if not states:
            raise ValueError("cannot build a pairing for an empty sequence")
        first = states[0]
        if model is None:
            model = "ff" if first.is_field else "gauss"
        if model == "ff":
            q = first.payload.q
            if not all(s.payload.is_channel_valid() for s in states):
                raise ValueError("finite-field states must have all entries nonzero")
        arr = states_to_array(states)
    if len(arr) == 0:
        raise ValueError("cannot build a pairing for an empty sequence")
    if model == "ff":
        if q is None:
            raise ValueError("finite-field pairing needs q")
        keys, comp = ff_keys(arr, q)
    elif model == "gauss":
        if quantizer is None:
            raise ValueError("Gaussian pairing needs a quantizer")
        keys, comp = gauss_keys(arr, quantizer)
    else:
        raise ValueError(f"unknown model {model!r}")
    partner, role = match_keys(keys, comp, causal=causal)
    return PairingPlan(keys, partner, role, causal)


def _payload(x):
    return np.asarray(x.payload if isinstance(x, ChannelState) else x, dtype=complex)


def effective_snr(pair, k: int, snr) -> float:
    """Post-combining SNR of user ``k`` for a matched pair of Gaussian states.

    Adding the two outputs doubles the noise variance and leaves the
    residual of each cross link after cancellation.
    """
    H1, H2 = (_payload(x) for x in pair)
    return float(effective_snr_array(H1[None], H2[None], snr)[0, k])


def effective_snr_array(H1, H2, snr) -> np.ndarray:
    """(P, K) effective SNRs for stacks of paired states of shape (P, K, K)."""
    S = np.abs(np.asarray(H1) + np.asarray(H2)) ** 2
    snr = np.broadcast_to(np.asarray(snr, dtype=float), (S.shape[-1],))
    K = S.shape[-1]
    d = np.arange(K)
    signal = S[:, d, d] * snr
    interf = (S * snr[None, None, :]).sum(axis=2) - signal
    return signal / (2.0 + interf)


def sample_in_cells(rng: np.random.Generator, idx, quantizer: Quantizer) -> np.ndarray:
    """CN(0,1) values conditioned to fall in the given grid cells and inside tau.

    ``idx`` has trailing axis (re, im).  Each axis of a cell is an interval
    and the axes are independent under CN(0,1), so each is drawn from a
    truncated normal; draws outside the tau disc are redrawn.
    """
    idx = np.asarray(idx)
    g = quantizer.gamma
    scale = math.sqrt(0.5)
    lo = (idx - 0.5) * g / scale
    hi = (idx + 0.5) * g / scale
    out = np.empty(idx.shape[:-1], dtype=complex)
    todo = np.ones(out.shape, dtype=bool)
    for _ in range(1000):
        m = int(todo.sum())
        if m == 0:
            return out
        x = stats.truncnorm.rvs(lo[todo], hi[todo], size=(m, 2), random_state=rng) * scale
        h = x[:, 0] + 1j * x[:, 1]
        out[todo] = h
        bad = np.zeros_like(todo)
        bad[todo] = np.abs(h) > quantizer.tau
        todo = bad
    raise RuntimeError("could not draw inside the truncation disc")


def sample_matched_pairs(rng: np.random.Generator, K: int, quantizer: Quantizer,
                         n_pairs: int):
    """Draw matched Gaussian pairs directly from their joint law.

    The fresh state is CN(0,1) conditioned on not being discarded.  Given
    its quantized key, the repeat state of a causal match is distributed as
    CN(0,1) conditioned on the complementary key, independently of the
    fresh state's exact value; this draws from that law instead of waiting
    for the key to recur in a long sequence.
    """
    from .channels import sample_complex_normal

    H1 = np.empty((n_pairs, K, K), dtype=complex)
    todo = np.arange(n_pairs)
    while todo.size:
        cand = sample_complex_normal(rng, (todo.size, K, K))
        ok = np.all(np.abs(cand).reshape(todo.size, -1) <= quantizer.tau, axis=1)
        H1[todo[ok]] = cand[ok]
        todo = todo[~ok]
    target = _complement_indices(quantize_indices(H1, quantizer.gamma))
    H2 = sample_in_cells(rng, target, quantizer)
    return H1, H2


def quantized_entry_law(quantizer: Quantizer) -> dict:
    """Law of one quantized entry given the block is kept (|h| <= tau).

    Keys are (re, im) grid indices of every cell that meets the tau disc.
    Cell masses are integrals of the CN(0,1) density over cell and disc.
    """
    g, tau = quantizer.gamma, quantizer.tau
    if not math.isfinite(tau):
        raise ValueError("the quantized alphabet is finite only for finite tau")
    r = int(math.floor(tau / g + 0.5))
    law = {}
    dens = lambda y, x: math.exp(-(x * x + y * y)) / math.pi
    for i in range(-r, r + 1):
        for j in range(-r, r + 1):
            x0, x1 = (i - 0.5) * g, (i + 0.5) * g
            y0, y1 = (j - 0.5) * g, (j + 0.5) * g
            x0, x1 = max(x0, -tau), min(x1, tau)
            if x0 >= x1:
                continue

            def ylo(x, y0=y0):
                return max(y0, -math.sqrt(max(tau * tau - x * x, 0.0)))

            def yhi(x, y1=y1):
                return min(y1, math.sqrt(max(tau * tau - x * x, 0.0)))

            mass, _ = integrate.dblquad(lambda y, x: dens(y, x) if ylo(x) < yhi(x) else 0.0,
                                        x0, x1, lambda x: min(ylo(x), yhi(x)), yhi,
                                        epsabs=1e-13, epsrel=1e-10)
            if mass > 0:
                law[(i, j)] = mass
    total = sum(law.values())
    return {k: v / total for k, v in law.items()}
