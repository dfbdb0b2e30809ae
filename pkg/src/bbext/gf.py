"""Arithmetic in GF(2^16).

Field elements are ints in [0, 2^16). Addition is XOR; multiplication is
carried out through log/antilog tables built once at import for the fixed
irreducible polynomial x^16 + x^12 + x^3 + x + 1 (0x1100B).

Vector variants operate elementwise on numpy uint16 arrays so that striped
codec operations stay fast for long messages.
"""

from __future__ import annotations

import numpy as np

FIELD_BITS = 16
FIELD_SIZE = 1 << FIELD_BITS
ORDER = FIELD_SIZE - 1  # multiplicative group order
_PRIM_POLY = 0x1100B


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(2 * ORDER, dtype=np.int64)
    log = np.zeros(FIELD_SIZE, dtype=np.int64)
    x = 1
    for i in range(ORDER):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & FIELD_SIZE:
            x ^= _PRIM_POLY
    if x != 1:
        raise AssertionError("generator 2 is not primitive for 0x1100B")
    exp[ORDER:] = exp[:ORDER]
    log[0] = -1  # sentinel, never a valid exponent
    return exp, log

_EXP, _LOG = _build_tables()


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(_EXP[_LOG[a] + _LOG[b]])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^16)")
    return int(_EXP[ORDER - _LOG[a]])


def gf_div(a: int, b: int) -> int:
    return gf_mul(a, gf_inv(b))


def gf_pow(a: int, e: int) -> int:
    if a == 0:
        return 0 if e else 1
    return int(_EXP[(_LOG[a] * e) % ORDER])


def vmul(scalar: int, v: np.ndarray) -> np.ndarray:
    """Multiply every element of uint16 array v by a scalar."""
    out = np.zeros(v.shape, dtype=np.uint16)
    if scalar == 0:
        return out
    mask = v != 0
    if mask.any():
        out[mask] = _EXP[(_LOG[scalar] + _LOG[v[mask].astype(np.int64)]) % ORDER]
    return out


def vmul_xor_into(acc: np.ndarray, scalar: int, v: np.ndarray) -> None:
    """acc ^= scalar * v, elementwise, in place."""
    if scalar == 0:
        return
    mask = v != 0
    if mask.any():
        acc[mask] ^= _EXP[(_LOG[scalar] + _LOG[v[mask].astype(np.int64)]) % ORDER].astype(np.uint16)


def poly_eval(coeffs: list[int], x: int) -> int:
    """Evaluate a polynomial given low-to-high coefficients."""
    acc = 0
    for c in reversed(coeffs):
        acc = gf_mul(acc, x) ^ c
    return acc


def solve_linear(a: list[list[int]], b: list[int]) -> list[int] | None:
    """Solve A*x = b over GF(2^16) by Gaussian elimination.

    A is m x k (rows may exceed unknowns). Returns one solution with free
    variables set to zero, or None when the system is inconsistent.
    """
    m = len(a)
    k = len(a[0]) if m else 0
    rows = [list(row) + [rhs] for row, rhs in zip(a, b)]
    pivot_cols: list[int] = []
    r = 0
    for col in range(k):
        piv = next((i for i in range(r, m) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = gf_inv(rows[r][col])
        rows[r] = [gf_mul(inv, v) for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [vi ^ gf_mul(f, vr) for vi, vr in zip(rows[i], rows[r])]
        pivot_cols.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if rows[i][k] != 0:
            return None
    x = [0] * k
    for i, col in enumerate(pivot_cols):
        x[col] = rows[i][k]
    return x


def invert_matrix(a: list[list[int]]) -> list[list[int]]:
    """Invert a square matrix over GF(2^16). Raises on singular input."""
    k = len(a)
    aug = [list(row) + [1 if i == j else 0 for j in range(k)] for i, row in enumerate(a)]
    for col in range(k):
        piv = next((i for i in range(col, k) if aug[i][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = gf_inv(aug[col][col])
        aug[col] = [gf_mul(inv, v) for v in aug[col]]
        for i in range(k):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [vi ^ gf_mul(f, vc) for vi, vc in zip(aug[i], aug[col])]
    return [row[k:] for row in aug]
