"""Type counts of channel-state sequences and delta-typicality."""
from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Hashable, Iterable

import numpy as np


@dataclass(frozen=True)
class TypeCount:
    counts: dict = field(compare=True)
    n: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.n:
            raise ValueError("counts must sum to n")

    def frequency(self, key) -> float:
        return self.counts.get(key, 0) / self.n

    def to_json(self) -> str:
        return json.dumps({"n": self.n,
                           "counts": {state_key_str(k): c for k, c in
                                      sorted(self.counts.items(), key=lambda kv: repr(kv[0]))}})


def state_key_str(key) -> str:
    if isinstance(key, tuple):
        return ";".join(str(int(v)) for v in key)
    return str(key)


def state_keys(arr) -> list:
    """Hashable key for each matrix in an (n, K, K) integer array."""
    arr = np.asarray(arr)
    return [tuple(row) for row in arr.reshape(len(arr), -1).tolist()]


def count_types(states: Iterable[Hashable]) -> TypeCount:
    counts = Counter(states)
    n = sum(counts.values())
    if n == 0:
        raise ValueError("cannot count types of an empty sequence")
    return TypeCount(dict(counts), n)


class UniformLaw(Mapping):
    """Uniform law on the channel-valid finite-field matrices."""

    def __init__(self, q: int, K: int):
        self.q, self.K = q, K
        self.size = (q - 1) ** (K * K)
        self._p = 1.0 / self.size

    def __getitem__(self, key):
        if (isinstance(key, tuple) and len(key) == self.K * self.K
                and all(1 <= v < self.q for v in key)):
            return self._p
        raise KeyError(key)

    def __iter__(self):
        return itertools.product(range(1, self.q), repeat=self.K * self.K)

    def __len__(self):
        return self.size

    def max_prob(self) -> float:
        return self._p


class ProductLaw(Mapping):
    """Law of a matrix whose entries are i.i.d. with a given entry law.

    Keys are flat tuples made of ``K*K`` consecutive entry keys, each entry
    key being a tuple of length ``width`` (2 for complex grid indices).
    """

    def __init__(self, entry_law: Mapping, K: int):
        self.entry_law = dict(entry_law)
        self.K = K
        self.width = len(next(iter(self.entry_law)))

    def __getitem__(self, key):
        if not isinstance(key, tuple) or len(key) != self.K * self.K * self.width:
            raise KeyError(key)
        p = 1.0
        w = self.width
        for i in range(0, len(key), w):
            p *= self.entry_law[key[i:i + w]]
        return p

    def __iter__(self):
        for combo in itertools.product(self.entry_law, repeat=self.K * self.K):
            yield tuple(v for e in combo for v in e)

    def __len__(self):
        return len(self.entry_law) ** (self.K * self.K)

    def max_prob(self) -> float:
        return max(self.entry_law.values()) ** (self.K * self.K)


def is_delta_typical(counts: TypeCount, law: Mapping, delta: float) -> bool:
    """Whether every state's empirical frequency is within ``delta`` of its law.

    States of the alphabet that never occur count as frequency 0.  A
    counted state outside the alphabet of ``law`` is an error.
    """
    n = counts.n
    for key, c in counts.counts.items():
        try:
            p = law[key]
        except KeyError:
            raise ValueError(f"state {key!r} is not in the law's alphabet") from None
        if abs(c / n - p) > delta:
            return False
    if len(counts.counts) == len(law):
        return True
    max_prob = getattr(law, "max_prob", None)
    if max_prob is not None and max_prob() <= delta:
        return True
    return all(p <= delta for key, p in law.items() if key not in counts.counts)


def check_law(law: Mapping, tol: float = 1e-9) -> None:
    total = math.fsum(law.values())
    if abs(total - 1.0) > tol:
        raise ValueError(f"law sums to {total}, not 1")


def lemma1_bound(n: int, delta: float, alphabet_size: int) -> float:
    """Lower bound on the probability that an i.i.d. sequence is delta-typical."""
    if n < 1 or delta <= 0:
        raise ValueError("need n >= 1 and delta > 0")
    return max(0.0, 1.0 - alphabet_size / (4.0 * n * delta * delta))
