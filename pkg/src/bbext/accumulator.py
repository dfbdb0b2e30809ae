"""Cryptographic set accumulators with membership witnesses.

Two interchangeable schemes:

- ``hash_tree``: a binary hash tree over the ordered value encodings. Real
  collision resistance from SHA-256 (truncated to k bits); witnesses are
  sibling paths of nominal size k*ceil(log2 n) bits.
- ``bilinear_emulated``: the characteristic-polynomial accumulator evaluated
  in a 2k-bit prime field at a trapdoor scalar s held by the trusted setup.
  Verification checks (H(d) + s) * w == z (mod p) through the setup oracle,
  so no pairing arithmetic is needed; adversaries in this harness are
  scripted, not algebraic. Nominal sizes match the constant-size scheme:
  k bits for the accumulation value and each witness.

Commitment bytes are what travels on the wire; accumulation values produced
locally also retain the accumulated set so witnesses can be created for it.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field

HASH_TREE = "hash_tree"
BILINEAR = "bilinear_emulated"

# Largest primes below 2^256 and 2^512; the emulated scheme works in a
# 2k-bit field so k-bit hashed values sit well inside it.
_PRIMES = {
    128: (1 << 256) - 189,
    256: (1 << 512) - 569,
}


def _hash_k(data: bytes, k: int) -> bytes:
    return hashlib.sha256(data).digest()[: k // 8]


@dataclass(frozen=True)
class AccKey:
    """Public accumulator parameters; the trapdoor never leaves the dealer.

    ``setup_secret`` models the trusted-setup oracle of the emulated scheme:
    party code must only touch it through acc_verify.
    """

    scheme: str
    capacity: int
    k: int
    setup_secret: int | None = field(default=None, repr=False)

    @property
    def prime(self) -> int:
        return _PRIMES[self.k]


@dataclass(frozen=True)
class AccValue:
    data: bytes
    nominal_bits: int
    source_values: tuple[bytes, ...] | None = field(default=None, repr=False, compare=False)

    def bare(self) -> "AccValue":
        """Wire form: the commitment bytes without the local value set."""
        return AccValue(self.data, self.nominal_bits)


@dataclass(frozen=True)
class Witness:
    data: bytes
    nominal_bits: int


def witness_nominal_bits(scheme: str, n: int, k: int) -> int:
    if scheme == HASH_TREE:
        return k * math.ceil(math.log2(n)) if n > 1 else 0
    return k


def acc_gen(scheme: str, n: int, k: int, rng_seed: int = 0) -> AccKey:
    """Create a key for exactly-n-element sets; deterministic in the seed."""
    if scheme not in (HASH_TREE, BILINEAR):
        raise ValueError(f"unknown accumulator scheme {scheme!r}")
    if n < 1:
        raise ValueError("capacity must be at least 1")
    if k not in _PRIMES:
        raise ValueError(f"k must be one of {sorted(_PRIMES)}")
    secret = None
    if scheme == BILINEAR:
        rng = random.Random(("acc-setup", rng_seed, n, k).__repr__())
        secret = rng.randrange(1, _PRIMES[k])
    return AccKey(scheme=scheme, capacity=n, k=k, setup_secret=secret)


def _tree_levels(leaves: list[bytes], k: int) -> list[list[bytes]]:
    width = 1 if len(leaves) <= 1 else 1 << math.ceil(math.log2(len(leaves)))
    level = leaves + [bytes(k // 8)] * (width - len(leaves))
    levels = [level]
    while len(level) > 1:
        level = [_hash_k(level[i] + level[i + 1], k) for i in range(0, len(level), 2)]
        levels.append(level)
    return levels


def acc_eval(ak: AccKey, values: list[bytes] | tuple[bytes, ...]) -> AccValue:
    """Accumulate exactly-capacity distinct values into a short commitment."""
    values = tuple(values)
    if len(values) != ak.capacity:
        raise ValueError(f"expected {ak.capacity} values, got {len(values)}")
    if len(set(values)) != len(values):
        raise ValueError("duplicate values rejected")
    if ak.scheme == HASH_TREE:
        leaves = [_hash_k(v, ak.k) for v in values]
        root = _tree_levels(leaves, ak.k)[-1][0]
        return AccValue(data=root, nominal_bits=ak.k, source_values=values)
    p = ak.prime
    z = 1
    for v in values:
        z = z * ((ak.setup_secret + _int_digest(v, ak.k)) % p) % p
    return AccValue(data=z.to_bytes(2 * ak.k // 8, "big"), nominal_bits=ak.k, source_values=values)


def _int_digest(v: bytes, k: int) -> int:
    return int.from_bytes(_hash_k(v, k), "big")


def acc_create_wit(ak: AccKey, z: AccValue, d: bytes) -> Witness | None:
    """Witness for d under z, or None when d was not accumulated.

    Requires z to have been produced locally by acc_eval (the accumulated
    set is needed to build the witness).
    """
    if z.source_values is None:
        raise ValueError("witness creation needs the locally evaluated accumulation value")
    values = z.source_values
    if d not in values:
        return None
    idx = values.index(d)
    if ak.scheme == HASH_TREE:
        levels = _tree_levels([_hash_k(v, ak.k) for v in values], ak.k)
        path = []
        pos = idx
        for level in levels[:-1]:
            path.append(level[pos ^ 1])
            pos >>= 1
        raw = idx.to_bytes(2, "big") + b"".join(path)
        return Witness(data=raw, nominal_bits=witness_nominal_bits(HASH_TREE, ak.capacity, ak.k))
    p = ak.prime
    w = 1
    for j, v in enumerate(values):
        if j != idx:
            w = w * ((ak.setup_secret + _int_digest(v, ak.k)) % p) % p
    return Witness(data=w.to_bytes(2 * ak.k // 8, "big"), nominal_bits=ak.k)


def acc_verify(ak: AccKey, z: AccValue, w: Witness | None, d: bytes) -> bool:
    """True iff w proves membership of d under z; False on malformed input."""
    if not isinstance(w, Witness) or not isinstance(z, AccValue):
        return False
    if not isinstance(w.data, bytes) or not isinstance(z.data, bytes) or not isinstance(d, bytes):
        return False
    if ak.scheme == HASH_TREE:
        depth = math.ceil(math.log2(ak.capacity)) if ak.capacity > 1 else 0
        step = ak.k // 8
        if len(w.data) != 2 + depth * step or len(z.data) != step:
            return False
        pos = int.from_bytes(w.data[:2], "big")
        if pos >= ak.capacity:
            return False
        node = _hash_k(d, ak.k)
        for lvl in range(depth):
            sib = w.data[2 + lvl * step : 2 + (lvl + 1) * step]
            node = _hash_k(sib + node, ak.k) if pos & 1 else _hash_k(node + sib, ak.k)
            pos >>= 1
        return node == z.data
    size = 2 * ak.k // 8
    if len(w.data) != size or len(z.data) != size:
        return False
    p = ak.prime
    wi = int.from_bytes(w.data, "big")
    zi = int.from_bytes(z.data, "big")
    if wi >= p or zi >= p:
        return False
    return (_int_digest(d, ak.k) + ak.setup_secret) % p * wi % p == zi
