"""Arithmetic in the finite field of order 256.

Field elements are plain integers in [0, 255] (or uint8 numpy arrays for bulk
operations).  The field is constructed from the irreducible polynomial

    p(x) = x^8 + x^4 + x^3 + x^2 + 1   (0x11D)

which is the conventional choice for byte-oriented Reed-Solomon codecs.
Addition is bitwise XOR; multiplication goes through exp/log tables built at
import time.  All operations are pure and stateless.
"""

from __future__ import annotations

import numpy as np

#: Irreducible polynomial defining the field (includes the x^8 term).
PRIMITIVE_POLY = 0x11D

#: Multiplicative order of the field's generator alpha = x.
ORDER = 255


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    # EXP is doubled so that exp[log a + log b] never needs a reduction mod 255.
    exp = np.zeros(512, dtype=np.int64)
    log = np.zeros(256, dtype=np.int64)
    x = 1
    for i in range(ORDER):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIMITIVE_POLY
    exp[ORDER : 2 * ORDER] = exp[:ORDER]
    exp[2 * ORDER :] = exp[: 512 - 2 * ORDER]
    return exp, log


EXP, LOG = _build_tables()


def gf_mul(a: int, b: int) -> int:
    """Product of two field elements."""
    if a == 0 or b == 0:
        return 0
    return int(EXP[LOG[a] + LOG[b]])


def gf_inv(a: int) -> int:
    """Multiplicative inverse; raises ZeroDivisionError for 0."""
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return int(EXP[ORDER - LOG[a]])


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by 0 in GF(256)")
    if a == 0:
        return 0
    return int(EXP[(LOG[a] - LOG[b]) % ORDER])


def gf_pow(a: int, e: int) -> int:
    """a raised to an arbitrary integer exponent (a != 0 for negative e)."""
    if a == 0:
        if e < 0:
            raise ZeroDivisionError("0 has no inverse in GF(256)")
        return 1 if e == 0 else 0
    return int(EXP[(LOG[a] * e) % ORDER])


def gf_mul_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of two uint8 arrays."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = EXP[(LOG[a] + LOG[b]) % ORDER]
    out = np.where((a == 0) | (b == 0), 0, out)
    return out.astype(np.uint8)


def poly_mul(p: list[int], q: list[int]) -> list[int]:
    """Product of polynomials with coefficients in the field (highest degree first)."""
    out = [0] * (len(p) + len(q) - 1)
    for i, pc in enumerate(p):
        if pc == 0:
            continue
        for j, qc in enumerate(q):
            if qc:
                out[i + j] ^= gf_mul(pc, qc)
    return out


def poly_eval(p: list[int], x: int) -> int:
    """Horner evaluation of a polynomial (highest degree first)."""
    acc = 0
    for c in p:
        acc = gf_mul(acc, x) ^ c
    return acc
