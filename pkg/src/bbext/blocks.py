"""Dissemination building blocks: encode, distribute, reconstruct.

A message is RS-encoded into n indexed symbol-blocks; the accumulator binds
the indexed set to a short commitment z. Distribution sends each party its
own share with a membership witness; reconstruction erases shares whose
witness fails and erasure-decodes the rest.

The canonical share encoding fed to the accumulator is normative for every
scheme and protocol: 16-bit big-endian index followed by the symbol-block
bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from . import rs
from .accumulator import AccKey, AccValue, Witness, acc_create_wit, acc_eval, acc_verify


@dataclass(frozen=True)
class IndexedShare:
    index: int
    share: bytes

    def canonical(self) -> bytes:
        return struct.pack(">H", self.index) + self.share


@dataclass(frozen=True)
class SharePackage:
    indexed_share: IndexedShare
    witness: Witness

    def nominal_bits(self) -> int:
        return 16 + 8 * len(self.indexed_share.share) + self.witness.nominal_bits


def encode(m: bytes, b: int, n: int, bit_len: int | None = None) -> list[IndexedShare]:
    """Split and RS-encode a message into n indexed shares."""
    if bit_len is None:
        bit_len = 8 * len(m)
    data = rs.data_from_bits(m, bit_len, b)
    cw = rs.rs_encode(data, n)
    return [IndexedShare(index=j, share=rs.pack_symbols(cw.symbols[j - 1])) for j in range(1, n + 1)]


def eval_shares(ak: AccKey, shares: list[IndexedShare]) -> AccValue:
    """Accumulate the canonical encodings of a full share set."""
    return acc_eval(ak, [s.canonical() for s in shares])


def make_packages(shares: list[IndexedShare], ak: AccKey, z: AccValue) -> dict[int, SharePackage]:
    """Witnessed packages for every index; z must commit to exactly these shares."""
    out = {}
    for s in shares:
        w = acc_create_wit(ak, z, s.canonical())
        if w is None:
            raise ValueError(f"share {s.index} is not in the accumulated set")
        out[s.index] = SharePackage(indexed_share=s, witness=w)
    return out


def distribute(ctx, shares: list[IndexedShare], ak: AccKey, z: AccValue, step: str,
               kind: str = "share_pkg") -> None:
    """Send package j to party j for every j; own package delivers locally."""
    packages = make_packages(shares, ak, z)
    for j in sorted(packages):
        pkg = packages[j]
        if j == ctx.pid:
            ctx.self_deliver(kind, pkg, step=step)
        else:
            ctx.send(j, kind, pkg, bits=pkg.nominal_bits(), step=step)


def verify_package(ak: AccKey, z: AccValue, pkg: SharePackage, expect_index: int | None = None) -> bool:
    if not isinstance(pkg, SharePackage) or not isinstance(pkg.indexed_share, IndexedShare):
        return False
    share = pkg.indexed_share
    if not isinstance(share.index, int) or not isinstance(share.share, bytes):
        return False
    if not 0 <= share.index < 2**16:
        return False
    if expect_index is not None and share.index != expect_index:
        return False
    return acc_verify(ak, z, pkg.witness, share.canonical())


def reconstruct(packages: dict[int, SharePackage | None], ak: AccKey, z: AccValue,
                d0: int, b: int) -> tuple[bytes, int] | None:
    """Recover the committed (message, bit length), or None on failure.

    Invalid and absent packages become erasures; decoding runs with zero
    error budget and up to d0 erasures.
    """
    n = ak.capacity
    valid: dict[int, bytes] = {}
    for j in range(1, n + 1):
        pkg = packages.get(j)
        if pkg is not None and verify_package(ak, z, pkg, expect_index=j):
            valid[j] = pkg.indexed_share.share
    if len(valid) < n - d0 or not valid:
        return None
    lengths = {len(s) for s in valid.values()}
    if len(lengths) != 1:
        return None
    symbols: list = [None] * n
    for j, raw in valid.items():
        symbols[j - 1] = rs.unpack_symbols(raw)
    cw = rs.Codeword(symbols=symbols, n=n, b=b)
    try:
        data = rs.rs_decode(cw, 0, d0)
    except ValueError:
        return None
    if data is None:
        return None
    try:
        payload, bit_len = rs.bits_from_data(data)
    except ValueError:
        return None
    return payload, bit_len


def encode_package_wire(pkg: SharePackage) -> bytes:
    """index u16 | share-length u32 | share | witness-length u16 | witness."""
    share = pkg.indexed_share.share
    wit = pkg.witness.data
    return (
        struct.pack(">H", pkg.indexed_share.index)
        + struct.pack(">I", len(share))
        + share
        + struct.pack(">H", len(wit))
        + wit
    )


def decode_package_wire(raw: bytes, wit_nominal_bits: int) -> SharePackage:
    if len(raw) < 8:
        raise ValueError("truncated package")
    index = struct.unpack_from(">H", raw, 0)[0]
    share_len = struct.unpack_from(">I", raw, 2)[0]
    off = 6 + share_len
    if len(raw) < off + 2:
        raise ValueError("truncated package")
    wit_len = struct.unpack_from(">H", raw, off)[0]
    if len(raw) != off + 2 + wit_len:
        raise ValueError("package length mismatch")
    share = raw[6:off]
    wit = raw[off + 2 :]
    return SharePackage(
        indexed_share=IndexedShare(index=index, share=share),
        witness=Witness(data=wit, nominal_bits=wit_nominal_bits),
    )
