"""Random channel states and noise for the finite-field and Gaussian models.

Randomness comes from named streams: :func:`stream` derives an independent
PCG64 generator from ``(seed, role, user)`` through numpy's SeedSequence
spawn keys, so adding a user or a role never changes the draws of an
existing stream.  Complex Gaussians use numpy's ziggurat normal sampler,
scaled to variance 1/2 per real axis.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .finite_field import FieldElement, FieldMatrix, check_modulus, is_prime

# Stable integer ids for stream roles.  Append only.
ROLES = {
    "states": 0,
    "noise": 1,
    "messages": 2,
    "code": 3,
    "code-resample": 4,
    "mc": 5,
    "typicality": 6,
    "partner": 7,
}


def stream(seed: int, role: str, user: int = 0) -> np.random.Generator:
    """Independent generator for one (role, user) pair under a 64-bit seed."""
    if role not in ROLES:
        raise KeyError(f"unknown stream role {role!r}")
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=(ROLES[role], int(user)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class FiniteFieldNoiseModel:
    """Noise that is 0 w.p. 1 - rho and uniform on the nonzero symbols otherwise."""

    q: int
    rho: float

    def __post_init__(self):
        if not is_prime(int(self.q)):
            raise ValueError(f"q must be prime, got {self.q}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")

    def pmf(self) -> np.ndarray:
        p = np.full(self.q, self.rho / (self.q - 1))
        p[0] = 1.0 - self.rho
        return p


@dataclass(frozen=True)
class GaussianChannelConfig:
    K: int
    snr: tuple

    def __post_init__(self):
        snr = tuple(float(s) for s in self.snr)
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if len(snr) == 1:
            snr = snr * self.K
        if len(snr) != self.K or any(s < 0 for s in snr):
            raise ValueError("snr must hold K nonnegative values")
        object.__setattr__(self, "snr", snr)


@dataclass(frozen=True)
class ChannelState:
    """Channel realization at time index ``t``.

    ``payload`` is a :class:`FieldMatrix` for the finite-field model or a
    complex (K, K) array for the Gaussian model.
    """

    t: int
    payload: object = field(compare=False)

    @property
    def is_field(self) -> bool:
        return isinstance(self.payload, FieldMatrix)


def noise_entropy(model: FiniteFieldNoiseModel) -> float:
    """Entropy of the noise symbol in bits."""
    rho, q = model.rho, model.q
    h = 0.0
    if rho < 1.0:
        h -= (1.0 - rho) * math.log2(1.0 - rho)
    if rho > 0.0:
        h -= rho * (math.log2(rho) - math.log2(q - 1))
    return h


def sample_ff_states(rng: np.random.Generator, q: int, K: int, n: int) -> np.ndarray:
    """(n, K, K) integer array of i.i.d. uniform nonzero channel gains."""
    check_modulus(q)
    if K < 2:
        raise ValueError("K must be at least 2")
    return rng.integers(1, q, size=(n, K, K), dtype=np.int64)


def sample_ff_state(rng: np.random.Generator, q: int, K: int, t: int = 0) -> ChannelState:
    H = sample_ff_states(rng, q, K, 1)[0]
    return ChannelState(t, FieldMatrix.from_array(H, q))


def sample_ff_noise_array(rng: np.random.Generator, model: FiniteFieldNoiseModel,
                          size) -> np.ndarray:
    hit = rng.random(size) < model.rho
    vals = rng.integers(1, model.q, size=size, dtype=np.int64)
    return np.where(hit, vals, 0)


def sample_ff_noise(rng: np.random.Generator, model: FiniteFieldNoiseModel) -> FieldElement:
    return FieldElement(int(sample_ff_noise_array(rng, model, ())), model.q)


def sample_complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Circular CN(0, 1) samples."""
    z = rng.standard_normal(size=tuple(np.atleast_1d(size)) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def sample_gauss_states(rng: np.random.Generator, K: int, n: int) -> np.ndarray:
    if K < 2:
        raise ValueError("K must be at least 2")
    return sample_complex_normal(rng, (n, K, K))


def sample_gauss_state(rng: np.random.Generator, K: int, t: int = 0) -> ChannelState:
    return ChannelState(t, sample_gauss_states(rng, K, 1)[0])


def states_from_array(arr, q: int | None = None) -> list:
    """Wrap an (n, K, K) array as a list of :class:`ChannelState`."""
    arr = np.asarray(arr)
    if q is None:
        return [ChannelState(t, arr[t]) for t in range(len(arr))]
    return [ChannelState(t, FieldMatrix.from_array(arr[t], q)) for t in range(len(arr))]


def states_to_array(states: Sequence[ChannelState]) -> np.ndarray:
    if not states:
        raise ValueError("empty state sequence")
    if states[0].is_field:
        return np.stack([s.payload.array for s in states])
    return np.stack([np.asarray(s.payload, dtype=complex) for s in states])


CONFIG_KEYS = ("model", "q", "rho", "K", "snr", "seed", "n")


def load_config(source) -> dict:
    """Read a run config from a JSON string, path or mapping.

    Recognised keys: model ("ff" or "gauss"), q, rho, K, snr (list of linear
    SNRs), seed, n.  Unknown keys are kept so callers can extend the document.
    """
    if isinstance(source, dict):
        doc = dict(source)
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        doc = json.loads(text)
    model = doc.get("model", "ff")
    if model not in ("ff", "gauss"):
        raise ValueError(f"model must be 'ff' or 'gauss', got {model!r}")
    if model == "ff" and "q" in doc:
        check_modulus(doc["q"])
    if "K" in doc and int(doc["K"]) < 2:
        raise ValueError("K must be at least 2")
    if "rho" in doc and not 0.0 <= float(doc["rho"]) <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    return doc
