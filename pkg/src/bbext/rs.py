"""Striped Reed-Solomon codec over GF(2^16) with error-and-erasure decoding.

A message of l bits is padded to a multiple of 16*b bits and cut into b
contiguous blocks; each block holds one 16-bit symbol per stripe, and every
stripe is an independent (n, b) RS codeword. The code is systematic:
codeword symbol j is p(x_j) for the degree-<b polynomial p interpolating the
data at the first b evaluation points, with x_j = j for j in 1..n.

Layout of the padded bit buffer: message bits, then zero padding, then the
original bit length as a 64-bit big-endian trailer occupying the final 64
bits. The fixed trailer position makes length recovery unambiguous.

Decoding with c errors and d erasures requires n - b >= 2c + d. On inputs
outside the unique-decoding radius the decoder returns None (decode
failure) rather than raising; callers that retry rely on this.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import gf

MAX_N = gf.FIELD_SIZE - 1
_TRAILER_BITS = 64


@dataclass
class DataBlocks:
    """b symbol-blocks of uniform stripe count plus the pre-padding bit length."""

    blocks: tuple[np.ndarray, ...]
    original_bit_length: int

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def stripes(self) -> int:
        return len(self.blocks[0]) if self.blocks else 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DataBlocks):
            return NotImplemented
        return (
            self.original_bit_length == other.original_bit_length
            and len(self.blocks) == len(other.blocks)
            and all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))
        )


@dataclass
class Codeword:
    """n optional symbol-blocks; a None entry is an erasure."""

    symbols: list[np.ndarray | None]
    n: int
    b: int

    @property
    def stripes(self) -> int:
        for s in self.symbols:
            if s is not None:
                return len(s)
        return 0


def _check_nb(n: int, b: int) -> None:
    if not (1 <= b <= n <= MAX_N):
        raise ValueError(f"require 1 <= b <= n <= {MAX_N}, got n={n} b={b}")


@lru_cache(maxsize=None)
def _vandermonde_row(x: int, b: int) -> tuple[int, ...]:
    return tuple(gf.gf_pow(x, i) for i in range(b))


@lru_cache(maxsize=None)
def _coeff_to_data_matrix(b: int) -> tuple[tuple[int, ...], ...]:
    # inverse of the b x b Vandermonde at points 1..b
    v = [list(_vandermonde_row(x, b)) for x in range(1, b + 1)]
    return tuple(tuple(r) for r in gf.invert_matrix(v))


@lru_cache(maxsize=None)
def _encode_matrix(n: int, b: int) -> tuple[tuple[int, ...], ...]:
    """n x b matrix taking data values to codeword symbols (top b rows = I)."""
    vinv = _coeff_to_data_matrix(b)
    rows = []
    for j in range(1, n + 1):
        vr = _vandermonde_row(j, b)
        row = []
        for i in range(b):
            acc = 0
            for m in range(b):
                acc ^= gf.gf_mul(vr[m], vinv[m][i])
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=None)
def _recover_matrix(n: int, b: int, positions: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """b x b matrix recovering the data values from symbols at the given rows."""
    enc = _encode_matrix(n, b)
    sub = [list(enc[p - 1]) for p in positions]
    return tuple(tuple(r) for r in gf.invert_matrix(sub))


def _apply_matrix(matrix, vectors: list[np.ndarray], stripes: int) -> list[np.ndarray]:
    out = []
    for row in matrix:
        acc = np.zeros(stripes, dtype=np.uint16)
        for coeff, vec in zip(row, vectors):
            gf.vmul_xor_into(acc, coeff, vec)
        out.append(acc)
    return out


def rs_encode(data: DataBlocks, n: int) -> Codeword:
    """Encode b data blocks into n codeword symbol-blocks (systematic)."""
    b = data.b
    _check_nb(n, b)
    stripes = data.stripes
    enc = _encode_matrix(n, b)
    symbols: list[np.ndarray | None] = [blk.astype(np.uint16).copy() for blk in data.blocks]
    parity = _apply_matrix(enc[b:], list(data.blocks), stripes)
    symbols.extend(parity)
    return Codeword(symbols=symbols, n=n, b=b)


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    # low-to-high coefficients
    num = list(num)
    dd = len(den) - 1
    while len(den) > 1 and den[-1] == 0:
        den = den[:-1]
        dd -= 1
    lead_inv = gf.gf_inv(den[-1])
    quot = [0] * max(len(num) - dd, 0)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c == 0:
            continue
        q = gf.gf_mul(c, lead_inv)
        quot[i - dd] = q
        for k, dc in enumerate(den):
            num[i - dd + k] ^= gf.gf_mul(q, dc)
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return quot, num


def _bw_decode_stripe(received: dict[int, int], n: int, b: int, c: int) -> list[int] | None:
    """Berlekamp-Welch on one stripe: positions -> symbol, up to c errors."""
    pts = sorted(received)
    rows = []
    rhs = []
    for p in pts:
        r = received[p]
        xp = [gf.gf_pow(p, i) for i in range(b + 2 * c)]
        row = xp[: b + c] + [gf.gf_mul(r, xp[i]) for i in range(c)]
        rows.append(row)
        rhs.append(gf.gf_mul(r, gf.gf_pow(p, c)))
    sol = gf.solve_linear(rows, rhs)
    if sol is None:
        return None
    ncoef = sol[: b + c]
    ecoef = sol[b + c :] + [1]  # monic error locator of degree c
    quot, rem = _poly_divmod(ncoef, ecoef)
    if any(rem):
        return None
    if len(quot) > b and any(quot[b:]):
        return None
    quot = (quot + [0] * b)[:b]
    data = [gf.poly_eval(quot, x) for x in range(1, b + 1)]
    mismatches = sum(1 for p in pts if gf.poly_eval(quot, p) != received[p])
    if mismatches > c:
        return None
    return data


def rs_decode(cw: Codeword, c: int, d: int) -> DataBlocks | None:
    """Decode tolerating up to c errors and d erasures; None on failure."""
    n, b = cw.n, cw.b
    _check_nb(n, b)
    if c < 0 or d < 0 or 2 * c + d > n - b:
        raise ValueError(f"decoding radius exceeded: 2*{c}+{d} > {n}-{b}")
    erased = [j for j in range(1, n + 1) if cw.symbols[j - 1] is None]
    if len(erased) > d:
        raise ValueError(f"{len(erased)} erasures exceed budget d={d}")
    present = [j for j in range(1, n + 1) if cw.symbols[j - 1] is not None]
    stripes = cw.stripes
    base = tuple(present[:b])
    rec = _recover_matrix(n, b, base)
    candidate = _apply_matrix(rec, [cw.symbols[p - 1] for p in base], stripes)
    # verify candidate against every present symbol-block
    enc = _encode_matrix(n, b)
    mismatch = np.zeros(stripes, dtype=np.int64)
    reencoded: dict[int, np.ndarray] = {}
    for p in present:
        row = enc[p - 1]
        acc = np.zeros(stripes, dtype=np.uint16)
        for coeff, vec in zip(row, candidate):
            gf.vmul_xor_into(acc, coeff, vec)
        reencoded[p] = acc
        mismatch += (acc != cw.symbols[p - 1]).astype(np.int64)
    bad = np.nonzero(mismatch > c)[0]
    if bad.size and c == 0:
        return None
    blocks = [vec.copy() for vec in candidate]
    for s in map(int, bad):
        rec_stripe = {p: int(cw.symbols[p - 1][s]) for p in present}
        fixed = _bw_decode_stripe(rec_stripe, n, b, c)
        if fixed is None:
            return None
        for i in range(b):
            blocks[i][s] = fixed[i]
    bit_len = _parse_bit_length(blocks)
    if bit_len is None:
        return None
    return DataBlocks(blocks=tuple(blocks), original_bit_length=bit_len)


def rs_decode_reference(cw: Codeword, c: int, d: int) -> DataBlocks | None:
    """Brute-force decoder: tries every b-subset of present positions.

    Exponential; intended as an independent oracle for n <= 10 tests.
    """
    n, b = cw.n, cw.b
    _check_nb(n, b)
    if 2 * c + d > n - b:
        raise ValueError("decoding radius exceeded")
    present = [j for j in range(1, n + 1) if cw.symbols[j - 1] is not None]
    if len(present) < n - d:
        raise ValueError("erasures exceed budget")
    stripes = cw.stripes
    enc = _encode_matrix(n, b)
    seen: dict[bytes, list[np.ndarray]] = {}
    for subset in itertools.combinations(present, b):
        rec = _recover_matrix(n, b, tuple(subset))
        cand = _apply_matrix(rec, [cw.symbols[p - 1] for p in subset], stripes)
        bad_blocks = 0
        for p in present:
            acc = np.zeros(stripes, dtype=np.uint16)
            for coeff, vec in zip(enc[p - 1], cand):
                gf.vmul_xor_into(acc, coeff, vec)
            if not np.array_equal(acc, cw.symbols[p - 1]):
                bad_blocks += 1
        if bad_blocks <= c:
            key = b"".join(v.tobytes() for v in cand)
            seen[key] = cand
    if len(seen) != 1:
        return None
    cand = next(iter(seen.values()))
    bit_len = _parse_bit_length(cand)
    if bit_len is None:
        return None
    return DataBlocks(blocks=tuple(cand), original_bit_length=bit_len)


def padded_bits(bit_len: int, b: int) -> int:
    """Total buffer size for a bit_len-bit message split into b blocks."""
    unit = 16 * b
    total = bit_len + _TRAILER_BITS
    return ((total + unit - 1) // unit) * unit


def share_bits(bit_len: int, b: int) -> int:
    """Size in bits of one symbol-block for a bit_len-bit message."""
    return padded_bits(bit_len, b) // b


def data_from_bits(payload: bytes, bit_len: int, b: int) -> DataBlocks:
    """Pad and split a message into b symbol-blocks with a length trailer."""
    if b < 1:
        raise ValueError("b must be positive")
    if bit_len < 0 or bit_len > 8 * len(payload):
        raise ValueError("bit length inconsistent with payload")
    nbytes = (bit_len + 7) // 8
    total = padded_bits(bit_len, b)
    buf = bytearray(total // 8)
    buf[:nbytes] = payload[:nbytes]
    if bit_len % 8:
        buf[nbytes - 1] &= (0xFF << (8 - bit_len % 8)) & 0xFF
    buf[-8:] = bit_len.to_bytes(8, "big")
    arr = np.frombuffer(bytes(buf), dtype=">u2").astype(np.uint16)
    stripes = total // (16 * b)
    blocks = tuple(arr[i * stripes : (i + 1) * stripes].copy() for i in range(b))
    return DataBlocks(blocks=blocks, original_bit_length=bit_len)


def _parse_bit_length(blocks: list[np.ndarray] | tuple[np.ndarray, ...]) -> int | None:
    buf = _blocks_to_bytes(blocks)
    if len(buf) < 8:
        return None
    bit_len = int.from_bytes(buf[-8:], "big")
    if bit_len > 8 * len(buf) - _TRAILER_BITS:
        return None
    return bit_len


def _blocks_to_bytes(blocks) -> bytes:
    return b"".join(blk.astype(">u2").tobytes() for blk in blocks)


def bits_from_data(data: DataBlocks) -> tuple[bytes, int]:
    """Recover (payload bytes, bit length) from decoded blocks.

    Raises ValueError when the trailer or zero padding is inconsistent.
    """
    buf = _blocks_to_bytes(data.blocks)
    bit_len = int.from_bytes(buf[-8:], "big")
    if bit_len > 8 * len(buf) - _TRAILER_BITS:
        raise ValueError("length trailer out of range")
    nbytes = (bit_len + 7) // 8
    payload = bytearray(buf[:nbytes])
    if bit_len % 8:
        mask = (0xFF << (8 - bit_len % 8)) & 0xFF
        if payload[-1] & ~mask & 0xFF:
            raise ValueError("nonzero bits beyond message length")
    if any(buf[nbytes:-8]):
        raise ValueError("nonzero padding")
    return bytes(payload), bit_len


def pack_symbols(block: np.ndarray) -> bytes:
    """Serialize a symbol-block as fixed-width 16-bit big-endian elements."""
    return block.astype(">u2").tobytes()


def unpack_symbols(raw: bytes) -> np.ndarray:
    if len(raw) % 2:
        raise ValueError("symbol-block bytes must be 16-bit aligned")
    return np.frombuffer(raw, dtype=">u2").astype(np.uint16)
