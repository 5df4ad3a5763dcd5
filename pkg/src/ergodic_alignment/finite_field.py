"""Arithmetic over prime fields GF(q) and the complementary channel map.

Scalars are :class:`FieldElement` values, channel matrices are
:class:`FieldMatrix` values.  Both are immutable.  The ``*_array`` helpers
operate on plain integer numpy arrays and are what the simulators use on
long state sequences.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_modulus(q: int) -> int:
    """Return ``q`` if it is an odd prime, else raise ``ValueError``."""
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
        raise ValueError(f"q must be an odd prime, got {q!r}")
    q = int(q)
    if q < 3 or not is_prime(q):
        raise ValueError(f"q must be an odd prime, got {q}")
    return q


@dataclass(frozen=True)
class FieldElement:
    value: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % int(self.q))

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.q != self.q:
                raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other)
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value + v, self.q)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value - v, self.q)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement(v - self.value, self.q)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value * v, self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.q)

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self * inv(FieldElement(v, self.q))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"FieldElement({self.value}, q={self.q})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def neg(a: FieldElement) -> FieldElement:
    return -a


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    """Multiplicative inverse via Fermat's little theorem."""
    if a.value == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse")
    return FieldElement(pow(a.value, a.q - 2, a.q), a.q)


def diagonal_pair(a: FieldElement) -> FieldElement:
    """Partner of a nonzero diagonal gain.

    ``1 - a`` for ``a != 1`` and ``1`` for ``a == 1``, so the result is
    never zero and ``a + diagonal_pair(a)`` is 1 or 2.  The map is an
    involution on the nonzero elements.
    """
    if a.value == 0:
        raise ValueError("diagonal_pair is defined on nonzero elements only")
    if a.value == 1:
        return FieldElement(1, a.q)
    return FieldElement(1 - a.value, a.q)


@dataclass(frozen=True)
class FieldMatrix:
    """Square matrix over GF(q), stored row-major as nested tuples."""

    entries: tuple
    q: int

    def __post_init__(self):
        q = int(self.q)
        rows = tuple(tuple(int(v) % q for v in row) for row in self.entries)
        k = len(rows)
        if k < 2 or any(len(r) != k for r in rows):
            raise ValueError("FieldMatrix must be square with dimension >= 2")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_array(cls, arr, q: int) -> "FieldMatrix":
        return cls(tuple(map(tuple, np.asarray(arr).tolist())), q)

    @property
    def K(self) -> int:
        return len(self.entries)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def __getitem__(self, idx) -> FieldElement:
        i, j = idx
        return FieldElement(self.entries[i][j], self.q)

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        if other.q != self.q:
            raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")
        return FieldMatrix.from_array((self.array + other.array) % self.q, self.q)

    def is_channel_valid(self) -> bool:
        return all(v != 0 for row in self.entries for v in row)

    def key(self) -> tuple:
        return tuple(v for row in self.entries for v in row)

    def to_json(self) -> str:
        return json.dumps({"q": self.q, "entries": [list(r) for r in self.entries]})

    @classmethod
    def from_json(cls, text: str) -> "FieldMatrix":
        doc = json.loads(text)
        return cls(tuple(tuple(r) for r in doc["entries"]), doc["q"])


def complement_matrix(H: FieldMatrix) -> FieldMatrix:
    """Map H to the matrix that cancels its cross links when added to it.

    Off-diagonal entries are negated, diagonal entries go through
    :func:`diagonal_pair`.  ``H + complement_matrix(H)`` is diagonal with
    entries in {1, 2}.
    """
    check_modulus(H.q)
    if not H.is_channel_valid():
        raise ValueError("channel matrix entries must all be nonzero")
    return FieldMatrix.from_array(complement_array(H.array, H.q), H.q)


# ---------------------------------------------------------------- arrays

def sigma_array(a, q: int) -> np.ndarray:
    """Vectorised :func:`diagonal_pair` over integer arrays."""
    a = np.asarray(a, dtype=np.int64)
    return np.where(a == 1, 1, (1 - a) % q)


def complement_array(H, q: int) -> np.ndarray:
    """Complement map applied to the trailing (K, K) axes of ``H``."""
    H = np.asarray(H, dtype=np.int64)
    K = H.shape[-1]
    out = (-H) % q
    diag = np.arange(K)
    out[..., diag, diag] = sigma_array(H[..., diag, diag], q)
    return out


def matrix_codes(H, q: int) -> np.ndarray:
    """Integer code of each channel-valid matrix, base (q-1) in row-major order.

    Codes are a bijection between the (q-1)**(K*K) valid matrices and
    ``range((q-1)**(K*K))``.
    """
    H = np.asarray(H, dtype=np.int64)
    K = H.shape[-1]
    flat = H.reshape(H.shape[:-2] + (K * K,)) - 1
    weights = (q - 1) ** np.arange(K * K - 1, -1, -1, dtype=np.int64)
    return flat @ weights


def matrices_from_codes(codes, q: int, K: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    digits = []
    rest = codes.copy()
    for _ in range(K * K):
        digits.append(rest % (q - 1))
        rest = rest // (q - 1)
    flat = np.stack(digits[::-1], axis=-1) + 1
    return flat.reshape(codes.shape + (K, K))


def rank_mod_p(A, q: int) -> int:
    """Rank of an integer matrix over GF(q) by Gaussian elimination."""
    M = np.array(A, dtype=np.int64) % q
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivots = np.nonzero(M[r:, c])[0]
        if pivots.size == 0:
            continue
        p = r + pivots[0]
        if p != r:
            M[[r, p]] = M[[p, r]]
        M[r] = (M[r] * pow(int(M[r, c]), q - 2, q)) % q
        others = np.nonzero(M[:, c])[0]
        others = others[others != r]
        if others.size:
            M[others] = (M[others] - np.outer(M[others, c], M[r])) % q
        r += 1
    return r
