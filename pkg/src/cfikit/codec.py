"""Error-correcting codes used by the extraction algorithms.

Three code families are provided:

* ``Hamming74`` -- the perfect (7,4,3) binary Hamming code (table driven).
* ``ReedSolomon`` -- RS(n=255, k=32, d=224) over GF(256), systematic,
  narrow-sense (first consecutive root alpha^1), bounded-distance decoding
  of up to t=111 symbol errors via Berlekamp-Massey + Chien + Forney.
* ``BchCode`` -- binary narrow-sense BCH codes of length 2^m - 1 for
  m in [3, 10], built from cyclotomic cosets, plus a shortened variant for
  responses whose length is not 2^m - 1.

Decoding failure is an explicit value: decoders return ``None`` when no
codeword lies within the correction radius (never an exception).  Corrected
results are verified by re-encoding, so a returned message is always the
message of a true codeword within distance t of the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .gf256 import EXP, LOG, ORDER, gf_mul, poly_mul


@dataclass(frozen=True)
class CodeSpec:
    """Parameters of a code: length, dimension, minimum distance, capability."""

    name: str
    n: int
    k: int
    d: int
    t: int

    def __post_init__(self):
        if self.t != (self.d - 1) // 2:
            raise ValueError("t must equal floor((d-1)/2)")
        if self.d > self.n - self.k + 1:
            raise ValueError("d exceeds the Singleton bound")


HAMMING74_SPEC = CodeSpec("Hamming74", n=7, k=4, d=3, t=1)
RS255_SPEC = CodeSpec("RS255", n=255, k=32, d=224, t=111)


# ---------------------------------------------------------------------------
# Hamming (7,4,3)
# ---------------------------------------------------------------------------

def _build_hamming_tables() -> tuple[np.ndarray, np.ndarray]:
    # Systematic layout: bits 0..3 message, bits 4..6 parity.
    enc = np.zeros(16, dtype=np.uint8)
    for m in range(16):
        m0, m1, m2, m3 = (m >> 0) & 1, (m >> 1) & 1, (m >> 2) & 1, (m >> 3) & 1
        p0 = m0 ^ m1 ^ m3
        p1 = m0 ^ m2 ^ m3
        p2 = m1 ^ m2 ^ m3
        enc[m] = m | (p0 << 4) | (p1 << 5) | (p2 << 6)
    dec = np.zeros(128, dtype=np.uint8)
    for m in range(16):
        c = int(enc[m])
        dec[c] = m
        for b in range(7):
            dec[c ^ (1 << b)] = m
    return enc, dec


_HAMMING_ENC, _HAMMING_DEC = _build_hamming_tables()


def hamming74_encode(message: int) -> int:
    """Encode a 4-bit message into a 7-bit codeword."""
    if not 0 <= message < 16:
        raise ValueError("message must be a 4-bit value")
    return int(_HAMMING_ENC[message])


def hamming74_decode(word: int) -> int:
    """Decode a 7-bit word to the message of the nearest codeword.

    The code is perfect, so decoding always succeeds.
    """
    if not 0 <= word < 128:
        raise ValueError("word must be a 7-bit value")
    return int(_HAMMING_DEC[word])


# ---------------------------------------------------------------------------
# Reed-Solomon over GF(256)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _rs_encode_kernel(msg, gen, exp, log, n, k):  # pragma: no cover - jitted
    nroots = n - k
    work = np.zeros(n, dtype=np.int64)
    work[:k] = msg
    for i in range(k):
        coef = work[i]
        if coef != 0:
            lc = log[coef]
            for j in range(1, nroots + 1):
                if gen[j] != 0:
                    work[i + j] ^= exp[lc + log[gen[j]]]
    out = np.empty(n, dtype=np.uint8)
    out[:k] = msg
    for j in range(nroots):
        out[k + j] = work[k + j]
    return out


@njit(cache=True)
def _rs_decode_one(word, gen, exp, log, syn_tab, n, k, t, msg):  # pragma: no cover
    """Bounded-distance decode of one word into msg; returns 1 on success."""
    nroots = n - k

    # Syndromes S_j = r(alpha^(j+1)) via the precomputed power table
    # syn_tab[j, i] = (n-1-i)(j+1) mod 255.
    wlog = np.empty(n, dtype=np.int64)
    for i in range(n):
        wlog[i] = log[word[i]] if word[i] != 0 else -1
    synd = np.zeros(nroots, dtype=np.int64)
    nonzero = 0
    for j in range(nroots):
        acc = 0
        for i in range(n):
            if wlog[i] >= 0:
                acc ^= exp[wlog[i] + syn_tab[j, i]]
        synd[j] = acc
        if acc != 0:
            nonzero = 1
    if nonzero == 0:
        for i in range(k):
            msg[i] = word[i]
        return 1

    # Berlekamp-Massey, errors only.  Polynomials ascending, lam[0] == 1.
    lam = np.zeros(t + 2, dtype=np.int64)
    prev = np.zeros(t + 2, dtype=np.int64)
    tmp = np.zeros(t + 2, dtype=np.int64)
    lam[0] = 1
    prev[0] = 1
    L = 0
    m = 1
    b = 1
    for r in range(nroots):
        d = synd[r]
        for i in range(1, L + 1):
            if lam[i] != 0 and synd[r - i] != 0:
                d ^= exp[log[lam[i]] + log[synd[r - i]]]
        if d == 0:
            m += 1
            continue
        if 2 * L <= r:
            if r + 1 - L > t:  # locator degree would exceed capability
                return 0
            coef_log = (log[d] - log[b]) % ORDER
            for i in range(t + 2):
                tmp[i] = lam[i]
            for i in range(t + 2 - m):
                if prev[i] != 0:
                    lam[i + m] ^= exp[coef_log + log[prev[i]]]
            L = r + 1 - L
            for i in range(t + 2):
                prev[i] = tmp[i]
            b = d
            m = 1
        else:
            coef_log = (log[d] - log[b]) % ORDER
            for i in range(t + 2 - m):
                if i + m <= t + 1 and prev[i] != 0:
                    lam[i + m] ^= exp[coef_log + log[prev[i]]]
            m += 1

    if L > t:
        return 0
    deg = 0
    for i in range(t + 1, -1, -1):
        if lam[i] != 0:
            deg = i
            break
    if deg != L:
        return 0

    # Incremental Chien search over x = alpha^s, s = 0..254; a root at
    # alpha^s means locator X = alpha^(255-s), i.e. an error at degree
    # p = (255 - s) mod 255, array index n-1-p.
    llog = np.empty(deg + 1, dtype=np.int64)
    for i in range(deg + 1):
        llog[i] = log[lam[i]] if lam[i] != 0 else -1
    off = llog.copy()
    err_deg = np.empty(deg, dtype=np.int64)
    err_s = np.empty(deg, dtype=np.int64)
    nerr = 0
    for s in range(ORDER):
        acc = 0
        for i in range(deg + 1):
            if off[i] >= 0:
                acc ^= exp[off[i]]
                off[i] += i
                if off[i] >= ORDER:
                    off[i] -= ORDER
        if acc == 0:
            p = (ORDER - s) % ORDER
            if nerr >= deg or p >= n:
                return 0
            err_deg[nerr] = p
            err_s[nerr] = s
            nerr += 1
    if nerr != deg:
        return 0

    # Forney with first consecutive root alpha^1: deg(omega) < L, and
    # e = omega(Xinv) / lam'(Xinv) at Xinv = alpha^s.
    omega = np.zeros(deg, dtype=np.int64)
    for i in range(deg + 1):
        if lam[i] == 0:
            continue
        li = log[lam[i]]
        for a in range(deg - i):
            if synd[a] != 0:
                omega[i + a] ^= exp[li + log[synd[a]]]
    for e in range(nerr):
        s = err_s[e]
        om = 0
        for i in range(deg - 1, -1, -1):
            if om != 0:
                om = exp[log[om] + s]
            if omega[i] != 0:
                om ^= omega[i]
        dp = 0
        for i in range(1, deg + 1, 2):
            if lam[i] != 0:
                dp ^= exp[(log[lam[i]] + s * (i - 1)) % ORDER]
        if dp == 0:
            return 0
        if om != 0:
            mag = exp[(log[om] - log[dp]) % ORDER]
            word[n - 1 - err_deg[e]] ^= mag

    # Verify by re-encoding the (systematic) message part.
    work = np.zeros(n, dtype=np.int64)
    for i in range(k):
        work[i] = word[i]
    for i in range(k):
        coef = work[i]
        if coef != 0:
            lc = log[coef]
            for j in range(1, nroots + 1):
                if gen[j] != 0:
                    work[i + j] ^= exp[lc + log[gen[j]]]
    for j in range(nroots):
        if work[k + j] != word[k + j]:
            return 0
    for i in range(k):
        msg[i] = word[i]
    return 1


@njit(cache=True)
def _rs_decode_batch(words, gen, exp, log, syn_tab, n, k, t):  # pragma: no cover
    nw = words.shape[0]
    oks = np.zeros(nw, dtype=np.uint8)
    msgs = np.zeros((nw, k), dtype=np.uint8)
    buf = np.empty(n, dtype=np.int64)
    for w in range(nw):
        for i in range(n):
            buf[i] = words[w, i]
        oks[w] = _rs_decode_one(buf, gen, exp, log, syn_tab, n, k, t, msgs[w])
    return oks, msgs


class ReedSolomon:
    """Systematic RS(n, k) over GF(256), narrow sense (roots alpha^1..alpha^(n-k))."""

    def __init__(self, n: int = 255, k: int = 32):
        if not 1 <= k < n <= 255:
            raise ValueError("need 1 <= k < n <= 255")
        self.n = n
        self.k = k
        self.nroots = n - k
        self.d = n - k + 1
        self.t = (self.d - 1) // 2
        gen = [1]
        for j in range(1, self.nroots + 1):
            gen = poly_mul(gen, [1, int(EXP[j])])
        self._gen = np.array(gen, dtype=np.int64)
        # syn_tab[j, i] = exponent of alpha at which coefficient i (of degree
        # n-1-i) contributes to syndrome j (root alpha^(j+1)).
        j_idx = np.arange(1, self.nroots + 1, dtype=np.int64)[:, None]
        i_deg = np.arange(n - 1, -1, -1, dtype=np.int64)[None, :]
        self._syn_tab = (j_idx * i_deg) % ORDER

    @property
    def spec(self) -> CodeSpec:
        return CodeSpec("RS255" if self.n == 255 else f"RS{self.n}",
                        self.n, self.k, self.d, self.t)

    def encode(self, message: np.ndarray | bytes) -> np.ndarray:
        msg = np.frombuffer(bytes(message), dtype=np.uint8) if isinstance(
            message, (bytes, bytearray)) else np.asarray(message, dtype=np.uint8)
        if msg.shape != (self.k,):
            raise ValueError(f"message must have exactly {self.k} symbols")
        return _rs_encode_kernel(msg.astype(np.int64), self._gen, EXP, LOG,
                                 self.n, self.k)

    def decode(self, word: np.ndarray | bytes) -> np.ndarray | None:
        """Return the message if a codeword lies within distance t, else None."""
        w = np.frombuffer(bytes(word), dtype=np.uint8) if isinstance(
            word, (bytes, bytearray)) else np.asarray(word, dtype=np.uint8)
        if w.shape != (self.n,):
            raise ValueError(f"word must have exactly {self.n} symbols")
        oks, msgs = _rs_decode_batch(w[None, :], self._gen, EXP, LOG,
                                     self._syn_tab, self.n, self.k, self.t)
        return msgs[0] if oks[0] else None

    def decode_many(self, words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Batch decode [m, n] words; returns (ok flags, [m, k] messages)."""
        words = np.asarray(words, dtype=np.uint8)
        if words.ndim != 2 or words.shape[1] != self.n:
            raise ValueError(f"words must be [m, {self.n}]")
        return _rs_decode_batch(words, self._gen, EXP, LOG, self._syn_tab,
                                self.n, self.k, self.t)


@lru_cache(maxsize=None)
def rs255() -> ReedSolomon:
    """The shared RS(255, 32) codec instance."""
    return ReedSolomon(255, 32)


# ---------------------------------------------------------------------------
# Binary BCH family
# ---------------------------------------------------------------------------

# Primitive polynomials for GF(2^m), m = 3..10 (x^m term included).
_PRIM_POLY_2M = {
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
}


class _GF2m:
    """Exp/log tables for GF(2^m)."""

    def __init__(self, m: int):
        self.m = m
        self.order = (1 << m) - 1
        poly = _PRIM_POLY_2M[m]
        self.exp = [0] * (2 * self.order)
        self.log = [0] * (1 << m)
        x = 1
        for i in range(self.order):
            self.exp[i] = x
            self.log[x] = i
            x <<= 1
            if x & (1 << m):
                x ^= poly
        for i in range(self.order, 2 * self.order):
            self.exp[i] = self.exp[i - self.order]

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]


class ParameterError(ValueError):
    """Raised for infeasible code parameters."""


def _cyclotomic_coset(i: int, n: int) -> frozenset[int]:
    out = set()
    x = i % n
    while x not in out:
        out.add(x)
        x = (2 * x) % n
    return frozenset(out)


def _bit_poly_mod(num: int, den: int) -> int:
    dd = den.bit_length() - 1
    while num.bit_length() - 1 >= dd and num:
        num ^= den << (num.bit_length() - 1 - dd)
    return num


class BchCode:
    """Narrow-sense binary BCH code of length n = 2^m - 1 with capability >= t."""

    def __init__(self, n: int, t_target: int):
        m = (n + 1).bit_length() - 1
        if n < 7 or n != (1 << m) - 1 or m not in _PRIM_POLY_2M:
            raise ParameterError(f"length must be 2^m - 1 for m in [3,10], got {n}")
        if t_target < 1:
            raise ParameterError("t_target must be >= 1")
        self.n = n
        self.m = m
        self.field = _GF2m(m)
        gen, roots = self._build_generator(t_target)
        k = n - (gen.bit_length() - 1)
        if k < 1:
            raise ParameterError(
                f"t={t_target} is not achievable at length {n}; "
                f"achievable t values: {self._achievable_ts()}")
        self.generator = gen
        self.k = k
        self._roots = roots
        # Guaranteed distance from the BCH bound: with roots at the
        # consecutive exponents 1..m the distance is at least m + 1.
        m_run = 0
        while m_run + 1 in roots:
            m_run += 1
        self.d = m_run + 1
        self.t = (self.d - 1) // 2

    def _achievable_ts(self) -> list[int]:
        ts = []
        t = 1
        while True:
            gen, _ = self._build_generator(t)
            if self.n - (gen.bit_length() - 1) < 1:
                break
            ts.append(t)
            t += 1
        return ts

    def _build_generator(self, t: int) -> tuple[int, frozenset[int]]:
        gf = self.field
        cosets = []
        covered: set[int] = set()
        for i in range(1, 2 * t + 1):
            if i % self.n not in covered:
                c = _cyclotomic_coset(i, self.n)
                cosets.append(c)
                covered |= c
        gen = 1
        for coset in cosets:
            # minimal polynomial of alpha^i over GF(2): prod (x - alpha^j), j in coset
            poly = [1]
            for j in sorted(coset):
                root = gf.exp[j]
                nxt = [0] * (len(poly) + 1)
                for deg, c in enumerate(poly):
                    nxt[deg] ^= gf.mul(c, root)
                    nxt[deg + 1] ^= c
                poly = nxt
            bits = 0
            for deg, c in enumerate(poly):
                if c not in (0, 1):
                    raise AssertionError("minimal polynomial not binary")
                if c:
                    bits |= 1 << deg
            gen = _bit_poly_carryless_mul(gen, bits)
        return gen, frozenset(covered)

    @property
    def spec(self) -> CodeSpec:
        return CodeSpec(f"BCH({self.n},{self.k})", self.n, self.k, self.d, self.t)

    def encode(self, message: np.ndarray) -> np.ndarray:
        """Systematic encode of k message bits into n code bits."""
        msg = np.asarray(message, dtype=np.uint8)
        if msg.shape != (self.k,):
            raise ValueError(f"message must have exactly {self.k} bits")
        mint = 0
        for b in msg[::-1]:
            mint = (mint << 1) | int(b)
        nroots = self.n - self.k
        rem = _bit_poly_mod(mint << nroots, self.generator)
        out = np.zeros(self.n, dtype=np.uint8)
        out[:self.k] = msg
        for i in range(nroots):
            out[self.k + i] = (rem >> i) & 1
        return out

    def _syndromes(self, word: np.ndarray) -> list[int]:
        gf = self.field
        n2t = 2 * self.t
        synd = []
        # Bit i of the word is the coefficient of x^i.
        nz = np.nonzero(word)[0]
        for j in range(1, n2t + 1):
            acc = 0
            for i in nz:
                acc ^= gf.exp[(int(i) * j) % self.n]
            synd.append(acc)
        return synd

    def decode(self, word: np.ndarray) -> np.ndarray | None:
        """Bounded-distance decode of n bits; None when beyond the radius."""
        w = np.asarray(word, dtype=np.uint8).copy()
        if w.shape != (self.n,):
            raise ValueError(f"word must have exactly {self.n} bits")
        gf = self.field
        synd = self._syndromes(w)
        if not any(synd):
            return w[:self.k].copy()
        nroots = 2 * self.t
        lam = [1] + [0] * nroots
        prev = [1] + [0] * nroots
        L, m, b = 0, 1, 1
        for r in range(nroots):
            d = synd[r]
            for i in range(1, L + 1):
                if lam[i] and synd[r - i]:
                    d ^= gf.mul(lam[i], synd[r - i])
            if d == 0:
                m += 1
                continue
            coef = gf.exp[(gf.log[d] - gf.log[b]) % gf.order]
            if 2 * L <= r:
                tmp = lam[:]
                for i in range(nroots + 1 - m):
                    if prev[i]:
                        lam[i + m] ^= gf.mul(coef, prev[i])
                L, prev, b, m = r + 1 - L, tmp, d, 1
            else:
                for i in range(nroots + 1 - m):
                    if prev[i]:
                        lam[i + m] ^= gf.mul(coef, prev[i])
                m += 1
        deg = max((i for i, c in enumerate(lam) if c), default=0)
        if L > self.t or deg != L:
            return None
        flips = []
        for p in range(self.n):
            acc = 0
            for i in range(deg, -1, -1):
                if acc:
                    acc = gf.exp[(gf.log[acc] + gf.order - p) % gf.order]
                if lam[i]:
                    acc ^= lam[i]
            if acc == 0:
                flips.append(p)
        if len(flips) != L:
            return None
        for p in flips:
            w[p] ^= 1
        if any(self._syndromes(w)):
            return None
        return w[:self.k].copy()


def _bit_poly_carryless_mul(a: int, b: int) -> int:
    out = 0
    i = 0
    while a >> i:
        if (a >> i) & 1:
            out ^= b << i
        i += 1
    return out


def bch_make(n_bits: int, t_target: int) -> BchCode:
    """Build a binary BCH code of length ``n_bits`` correcting >= ``t_target`` errors."""
    return BchCode(n_bits, t_target)


class ShortenedBch:
    """A BCH code shortened to an arbitrary length by pinning leading data bits to 0."""

    def __init__(self, length: int, t_target: int):
        m = 3
        while (1 << m) - 1 < length and m <= 10:
            m += 1
        if m > 10:
            raise ParameterError(f"length {length} exceeds the supported BCH range")
        base = BchCode((1 << m) - 1, t_target)
        self.shorten = base.n - length
        if base.k - self.shorten < 1:
            raise ParameterError(
                f"cannot shorten BCH({base.n},{base.k}) to length {length}")
        self.base = base
        self.n = length
        self.k = base.k - self.shorten
        self.t = base.t
        self.d = base.d

    @property
    def spec(self) -> CodeSpec:
        return CodeSpec(f"sBCH({self.n},{self.k})", self.n, self.k, self.d, self.t)

    def encode(self, message: np.ndarray) -> np.ndarray:
        msg = np.asarray(message, dtype=np.uint8)
        if msg.shape != (self.k,):
            raise ValueError(f"message must have exactly {self.k} bits")
        full = np.zeros(self.base.k, dtype=np.uint8)
        full[self.shorten:] = msg
        return self.base.encode(full)[self.shorten:]

    def decode(self, word: np.ndarray) -> np.ndarray | None:
        w = np.asarray(word, dtype=np.uint8)
        if w.shape != (self.n,):
            raise ValueError(f"word must have exactly {self.n} bits")
        full = np.zeros(self.base.n, dtype=np.uint8)
        full[self.shorten:] = w
        msg = self.base.decode(full)
        if msg is None or msg[:self.shorten].any():
            # The pinned prefix is known-zero: a "correction" that lands
            # there decodes outside the shortened code.
            return None
        return msg[self.shorten:]
