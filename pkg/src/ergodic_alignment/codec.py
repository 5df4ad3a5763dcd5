"""Computation codes over GF(q) and the end-to-end alignment protocol.

Every time index is one fading block carrying ``block_length`` channel
uses.  In a matched pair ``(t1, t2)`` each transmitter sends the codeword
of a fresh message in block ``t1`` and repeats it in block ``t2``.
Receiver ``k`` decodes the linear function of all messages seen in each
block, then adds the two estimates: the cross terms cancel and what
remains is a known nonzero multiple of its own message.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .channels import (FiniteFieldNoiseModel, noise_entropy, sample_ff_noise_array,
                       sample_ff_states, stream)
from .finite_field import check_modulus, rank_mod_p, sigma_array
from .scheduler import build_pairing

MAX_CODEBOOK = 10**6


@dataclass(frozen=True)
class LinearCode:
    """Linear code over GF(q) given by an m x n' generator of full row rank."""

    generator: np.ndarray = field(repr=False)
    q: int

    def __post_init__(self):
        G = np.asarray(self.generator, dtype=np.int64) % self.q
        if G.ndim != 2 or G.shape[0] > G.shape[1]:
            raise ValueError("generator must be m x n' with m <= n'")
        if rank_mod_p(G, self.q) != G.shape[0]:
            raise ValueError("generator must have full row rank")
        G.setflags(write=False)
        object.__setattr__(self, "generator", G)

    @property
    def m(self) -> int:
        return self.generator.shape[0]

    @property
    def block_length(self) -> int:
        return self.generator.shape[1]

    @property
    def rate(self) -> float:
        """Bits per channel use."""
        return self.m / self.block_length * math.log2(self.q)

    def codebook(self) -> np.ndarray:
        """All q**m codewords, row i encoding the i-th message in lexicographic order."""
        return all_messages(self.q, self.m) @ self.generator % self.q


def all_messages(q: int, m: int) -> np.ndarray:
    return np.array(list(itertools.product(range(q), repeat=m)), dtype=np.int64).reshape(-1, m)


def random_generator(rng: np.random.Generator, q: int, m: int, n: int) -> np.ndarray:
    """Uniform m x n generator, redrawn until it has full row rank."""
    while True:
        G = rng.integers(0, q, size=(m, n), dtype=np.int64)
        if rank_mod_p(G, q) == m:
            return G


def encode(code: LinearCode, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.int64)
    if w.shape[-1] != code.m:
        raise ValueError(f"message length {w.shape[-1]} != m = {code.m}")
    return w @ code.generator % code.q


def _ml_pick(dist: np.ndarray, q: int, rho: float) -> np.ndarray:
    # Hamming distance is a sufficient statistic; the likelihood decreases
    # with distance iff rho < (q-1)/q.
    thresh = (q - 1) / q
    if rho < thresh:
        return np.argmin(dist, axis=-1)
    if rho > thresh:
        return np.argmax(dist, axis=-1)
    return np.zeros(dist.shape[:-1], dtype=np.int64)


def decode_function(code: LinearCode, y, rho: float) -> np.ndarray:
    """Maximum-likelihood estimate of the message ``u`` behind ``y = uG + z``.

    Exhaustive over all q**m candidates; ties go to the lexicographically
    smallest ``u``.
    """
    if code.q ** code.m > MAX_CODEBOOK:
        raise ValueError("codebook too large for exhaustive decoding")
    y = np.asarray(y, dtype=np.int64) % code.q
    dist = (code.codebook() != y[..., None, :]).sum(axis=-1)
    idx = _ml_pick(dist, code.q, rho)
    return all_messages(code.q, code.m)[idx]


def decode_batch(codebooks: np.ndarray, y: np.ndarray, q: int, rho: float,
                 chunk_elems: int = 2**25) -> np.ndarray:
    """Decode ``y[p, r]`` against ``codebooks[p]``; returns message indices (P, R)."""
    P, Q, n = codebooks.shape
    R = y.shape[1]
    out = np.empty((P, R), dtype=np.int64)
    step = max(1, chunk_elems // (R * Q * n))
    small = np.int8 if q <= 127 else np.int64
    cb8 = codebooks.astype(small)
    y8 = y.astype(small)
    for s in range(0, P, step):
        e = min(P, s + step)
        dist = (cb8[s:e, None, :, :] != y8[s:e, :, None, :]).sum(axis=-1, dtype=np.int16)
        out[s:e] = _ml_pick(dist, q, rho)
    return out


@dataclass(frozen=True)
class ProtocolConfig:
    q: int
    K: int
    rho: float
    m: int = 1
    block_length: int = 1
    causal: bool = True

    def __post_init__(self):
        check_modulus(self.q)
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if not 1 <= self.m <= self.block_length:
            raise ValueError("need 1 <= m <= block_length")
        if self.q ** self.m > MAX_CODEBOOK:
            raise ValueError(f"q**m = {self.q ** self.m} exceeds the exhaustive-decoding "
                             f"limit {MAX_CODEBOOK}")

    @property
    def code_rate(self) -> float:
        return self.m / self.block_length * math.log2(self.q)


@dataclass
class ProtocolReport:
    config: dict
    n: int
    seed: int
    pairs: int
    matched_fraction: float
    noise_entropy: float
    capacity: float
    symmetric_rate: float
    code_rate: float
    achieved_rate: list
    coding_backoff: float
    matching_loss: float
    u_errors: list
    v_errors: list
    message_errors: list
    per_user_error_rate: list
    block_errors: int
    block_error_rate: float
    trace: list | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("trace")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def trace_csv(self) -> str:
        if self.trace is None:
            raise ValueError("run the protocol with trace=True to record a trace")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t1", "t2", "user", "u_ok", "v_ok", "w_ok"])
        w.writerows(self.trace)
        return buf.getvalue()


def _pair_generators(seed: int, cfg: ProtocolConfig, n: int, fresh: np.ndarray):
    G_all = stream(seed, "code").integers(0, cfg.q, size=(n, cfg.m, cfg.block_length),
                                          dtype=np.int64)
    G = G_all[fresh]
    if cfg.m == 1:
        bad = ~np.any(G[:, 0, :] != 0, axis=1)
    else:
        bad = np.array([rank_mod_p(g, cfg.q) < cfg.m for g in G], dtype=bool)
    if bad.any():
        rng = stream(seed, "code-resample")
        for i in np.nonzero(bad)[0]:
            G[i] = random_generator(rng, cfg.q, cfg.m, cfg.block_length)
    return G


def run_protocol(config: ProtocolConfig, n: int, seed: int, trace: bool = False,
                 states: np.ndarray | None = None) -> ProtocolReport:
    """Simulate the alignment protocol over ``n`` fading blocks.

    Each matched pair uses its own generator, shared by all transmitters,
    so the received word is a codeword of the receiver's linear function.
    ``states`` overrides the sampled (n, K, K) channel sequence.
    """
    cfg = config
    q, K, m, nb = cfg.q, cfg.K, cfg.m, cfg.block_length
    if n < 2:
        raise ValueError("n must be at least 2")
    if states is None:
        H = sample_ff_states(stream(seed, "states"), q, K, n)
    else:
        H = np.asarray(states, dtype=np.int64)
        if H.shape != (n, K, K) or np.any(H % q == 0):
            raise ValueError("states must be an (n, K, K) array of nonzero gains")
        H = H % q
    plan = build_pairing(H, "ff", q=q, causal=cfg.causal)
    pairs = plan.pairs()
    P = len(pairs)
    if P == 0:
        raise ValueError(f"n = {n} too small: no complementary pairs were formed")
    t1, t2 = pairs[:, 0], pairs[:, 1]

    W = np.stack([stream(seed, "messages", l).integers(0, q, size=(n, m), dtype=np.int64)[t1]
                  for l in range(K)], axis=1)                       # (P, K, m)
    noise = FiniteFieldNoiseModel(q, cfg.rho)
    Z = [sample_ff_noise_array(stream(seed, "noise", k), noise, (n, nb)) for k in range(K)]
    Z1 = np.stack([z[t1] for z in Z], axis=1)                       # (P, K, nb)
    Z2 = np.stack([z[t2] for z in Z], axis=1)

    G = _pair_generators(seed, cfg, n, t1)                          # (P, m, nb)
    X = np.einsum("pkm,pmn->pkn", W, G) % q                         # (P, K, nb)
    H1, H2 = H[t1], H[t2]
    Y1 = (np.einsum("pkl,pln->pkn", H1, X) + Z1) % q
    Y2 = (np.einsum("pkl,pln->pkn", H2, X) + Z2) % q
    u = np.einsum("pkl,plm->pkm", H1, W) % q
    v = np.einsum("pkl,plm->pkm", H2, W) % q

    msgs = all_messages(q, m)
    codebooks = np.einsum("qm,pmn->pqn", msgs, G) % q
    idx = decode_batch(codebooks, np.concatenate([Y1, Y2], axis=1), q, cfg.rho)
    u_hat, v_hat = msgs[idx[:, :K]], msgs[idx[:, K:]]

    d = np.arange(K)
    h_kk = H1[:, d, d]
    scale = (h_kk + sigma_array(h_kk, q)) % q                       # 1 or 2
    scale_inv = np.where(scale == 1, 1, pow(2, q - 2, q))
    w_hat = (scale_inv[..., None] * (u_hat + v_hat)) % q

    u_ok = np.all(u_hat == u, axis=-1)
    v_ok = np.all(v_hat == v, axis=-1)
    w_ok = np.all(w_hat == W, axis=-1)                              # (P, K)

    hz = noise_entropy(noise)
    cap = math.log2(q) - hz
    mf = plan.matched_fraction
    rate = mf * 0.5 * cfg.code_rate
    msg_err = (~w_ok).sum(axis=0)
    block_err = int(np.count_nonzero(~w_ok.all(axis=1)))
    rows = None
    if trace:
        rows = [(int(a), int(b), k, int(u_ok[p, k]), int(v_ok[p, k]), int(w_ok[p, k]))
                for p, (a, b) in enumerate(pairs) for k in range(K)]
    return ProtocolReport(
        config=asdict(cfg), n=n, seed=seed, pairs=P, matched_fraction=mf,
        noise_entropy=hz, capacity=cap, symmetric_rate=0.5 * cap,
        code_rate=cfg.code_rate, achieved_rate=[rate] * K,
        coding_backoff=0.5 * (cap - cfg.code_rate),
        matching_loss=0.5 * cfg.code_rate * (1.0 - mf),
        u_errors=(~u_ok).sum(axis=0).tolist(), v_errors=(~v_ok).sum(axis=0).tolist(),
        message_errors=msg_err.tolist(), per_user_error_rate=(msg_err / P).tolist(),
        block_errors=block_err, block_error_rate=block_err / P, trace=rows)


def max_message_length(q: int, block_length: int, rate: float) -> int:
    """Largest m whose code rate (m / n') log2 q does not exceed ``rate``."""
    return int(math.floor(block_length * rate / math.log2(q) + 1e-12))
