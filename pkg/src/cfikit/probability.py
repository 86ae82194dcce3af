"""High-precision probability kernels.

Everything here is pure and deterministic.  Binomial tails are computed in
log space (natural log internally, log10 at the interface) so that values far
below the smallest positive double, such as 1e-280 tails or the asymptotic
surrogates around 1e-4900, remain exact to within ~1e-12 in the log.

The module also houses the maximum-likelihood read-count machinery for the
genome-edit scheme (detection rate, decision boundary, per-position error,
clone-success curve), the hypergeometric support-overlap bound used in the
unclonability chain, Hamming-ball volumes, and the majorization predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

LOG10_E = math.log10(math.e)


# ---------------------------------------------------------------------------
# Log-domain probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogProb:
    """A probability carried as log10(p), with exact zero kept separate."""

    log10_value: float
    is_exact_zero: bool = False

    def __post_init__(self):
        if not self.is_exact_zero and self.log10_value > 1e-12:
            raise ValueError(f"log10 of a probability must be <= 0, got {self.log10_value}")

    @staticmethod
    def zero() -> "LogProb":
        return LogProb(-math.inf, is_exact_zero=True)

    @staticmethod
    def one() -> "LogProb":
        return LogProb(0.0)

    @staticmethod
    def from_linear(p: float) -> "LogProb":
        if p < 0 or p > 1 + 1e-12:
            raise ValueError(f"not a probability: {p}")
        if p == 0:
            return LogProb.zero()
        return LogProb(min(0.0, math.log10(p)))

    @property
    def value(self) -> float:
        """Linear-domain value (0.0 when below the double range)."""
        if self.is_exact_zero:
            return 0.0
        return 10.0 ** self.log10_value

    def __float__(self) -> float:
        return self.value


def _logsumexp(terms: Sequence[float]) -> float:
    """Sum of exp(terms) in log space; terms are natural-log values."""
    finite = [t for t in terms if t != -math.inf]
    if not finite:
        return -math.inf
    hi = max(finite)
    # Accumulate from the smallest term so that tiny contributions are not
    # dropped before larger ones arrive.
    acc = math.fsum(math.exp(t - hi) for t in sorted(finite))
    return hi + math.log(acc)


@dataclass(frozen=True)
class BinomialSpec:
    """Trial count and success probability of a binomial random variable."""

    n: int
    p: float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")


def log_binom_pmf(n: int, p: float, k: int) -> float:
    """Natural log of P[Binom(n, p) = k]; -inf for impossible outcomes."""
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    if p == 0.0:
        return 0.0 if k == 0 else -math.inf
    if p == 1.0:
        return 0.0 if k == n else -math.inf
    lc = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return lc + k * math.log(p) + (n - k) * math.log1p(-p)


def _binom_range_log10(n: int, p: float, lo: int, hi: int) -> LogProb:
    if lo > hi:
        return LogProb.zero()
    if p == 0.0:
        return LogProb.one() if lo == 0 else LogProb.zero()
    if p == 1.0:
        return LogProb.one() if hi == n else LogProb.zero()
    ln = _logsumexp([log_binom_pmf(n, p, k) for k in range(lo, hi + 1)])
    if ln == -math.inf:
        return LogProb.zero()
    return LogProb(min(0.0, ln * LOG10_E))


def binom_cdf(spec: BinomialSpec, t: int) -> LogProb:
    """P[X <= t] for X ~ Binom(spec.n, spec.p), as a LogProb."""
    if not 0 <= t <= spec.n:
        raise ValueError(f"t={t} out of range [0, {spec.n}]")
    if t == spec.n:
        return LogProb.one()
    return _binom_range_log10(spec.n, spec.p, 0, t)


def binom_sf(spec: BinomialSpec, frm: int) -> LogProb:
    """P[X >= frm] for X ~ Binom(spec.n, spec.p), as a LogProb."""
    if not 0 <= frm <= spec.n:
        raise ValueError(f"from={frm} out of range [0, {spec.n}]")
    if frm == 0:
        return LogProb.one()
    return _binom_range_log10(spec.n, spec.p, frm, spec.n)


def binom_cdf_exact(n: int, p: Fraction, t: int) -> Fraction:
    """Exact rational P[X <= t]; the independent oracle for small n."""
    if not 0 <= t <= n:
        raise ValueError("t out of range")
    q = 1 - p
    acc = Fraction(0)
    for k in range(t + 1):
        acc += math.comb(n, k) * p**k * q**(n - k)
    return acc


# ---------------------------------------------------------------------------
# Hamming balls and the unpredictability bound
# ---------------------------------------------------------------------------

def hamming_ball_volume(ell: int, kappa: int, alphabet: int = 4) -> int:
    """Number of strings of length ell within Hamming distance kappa (exact)."""
    if not 0 <= kappa <= ell:
        raise ValueError("need 0 <= kappa <= ell")
    return sum(math.comb(ell, j) * (alphabet - 1) ** j for j in range(kappa + 1))


def sigma_bound(ell: int, kappa: int, q: int, alphabet: int = 4) -> LogProb:
    """Prediction-success bound (1 + q * ball_volume) / alphabet^ell, clamped at 1."""
    if ell < 1 or kappa < 0 or q < 0:
        raise ValueError("parameters must be positive")
    num = 1 + q * hamming_ball_volume(ell, kappa, alphabet)
    den_log10 = ell * math.log10(alphabet)
    num_log10 = math.log10(num)
    if num_log10 >= den_log10:
        return LogProb.one()
    return LogProb(num_log10 - den_log10)


# ---------------------------------------------------------------------------
# Support-overlap (hypergeometric) bound
# ---------------------------------------------------------------------------

def overlap_distribution(universe: int, support: int, literal: bool = False) -> list[Fraction]:
    """Distribution of the overlap size of two uniform ``support``-subsets.

    With ``literal=False`` this is the hypergeometric law
    P[j] = C(s,j) C(N-s, s-j) / C(N,s), which sums to 1.  With
    ``literal=True`` the count C(N-s, s-j) is replaced by C(N-s-j, s-j);
    that variant does not normalize and is exposed only for comparison.
    """
    if support > universe or support < 0:
        raise ValueError("need 0 <= support <= universe")
    den = math.comb(universe, support)
    probs = []
    for j in range(support + 1):
        if literal:
            nn = universe - support - j
            num = math.comb(support, j) * (math.comb(nn, support - j) if nn >= 0 else 0)
        else:
            num = math.comb(support, j) * math.comb(universe - support, support - j)
        probs.append(Fraction(num, den))
    return probs

def overlap_pe_bound(universe: int, support: int, literal: bool = False) -> float:
    """(1/s) * E[overlap] of two uniform s-subsets; equals s/universe analytically."""
    probs = overlap_distribution(universe, support, literal=literal)
    mean = sum(j * pj for j, pj in enumerate(probs))
    return float(mean / support)


# ---------------------------------------------------------------------------
# Maximum-likelihood read rule for edit detection
# ---------------------------------------------------------------------------

def detect_rate(p_edit: float, p_seq_err: float) -> float:
    """Per-read probability of reporting an edit at an edited key-site."""
    return p_edit * (1.0 - p_seq_err) + (1.0 - p_edit) * p_seq_err


def decision_boundary(p_seq_err: float, p_edit: float) -> float:
    """Threshold on the fraction of edit-reporting reads, from the ML rule.

    Defined only for 0 < p_seq_err < p_detect < 1; the degenerate rates
    p_seq_err = 0 or p_edit = 0 make the log-likelihood ratio singular.
    """
    if p_seq_err <= 0.0 or p_edit <= 0.0:
        raise ValueError("decision boundary undefined for p_seq_err = 0 or p_edit = 0")
    pd = detect_rate(p_edit, p_seq_err)
    if not p_seq_err < pd < 1.0:
        raise ValueError(f"need p_seq_err < p_detect < 1, got {p_seq_err} vs {pd}")
    num = math.log1p(-p_seq_err) - math.log1p(-pd)
    den = (math.log(pd) - math.log1p(-pd)
           - math.log(p_seq_err) + math.log1p(-p_seq_err))
    return num / den


def ml_threshold(q: int, p_seq_err: float, p_edit: float) -> int:
    """Read-count threshold: decide key-site iff more than this many edit reads.

    Ties in the likelihood ratio decide "not key-site".  Degenerate cases are
    resolved by the rule itself: with p_seq_err = 0 any edit read is proof
    (threshold 0); with identical hypotheses nothing is ever a key-site
    (threshold q).
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    if q == 0:
        return 0
    pd = detect_rate(p_edit, p_seq_err)
    if pd == p_seq_err:
        return q
    if p_seq_err == 0.0:
        return 0
    return math.floor(q * decision_boundary(p_seq_err, p_edit))


@dataclass(frozen=True)
class MlDecision:
    """Fixed ML decision context for a given coverage and noise rates."""

    p_edit: float
    p_seq_err: float
    q: int
    p_detect: float = field(init=False)
    ell_star: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p_detect", detect_rate(self.p_edit, self.p_seq_err))
        object.__setattr__(self, "ell_star", ml_threshold(self.q, self.p_seq_err, self.p_edit))
        if not 0 <= self.ell_star <= self.q:
            raise AssertionError("threshold escaped [0, q]")

    def decide(self, edit_reads: int) -> bool:
        """True iff the read count says "key-site"."""
        return edit_reads > self.ell_star


def ml_p_err(q: int, p_seq_err: float, p_edit: float) -> float:
    """Per-position error rate of the ML rule under a 0.5 key-site prior.

    0.5 * (P[count <= threshold | key-site] + P[count > threshold | not key-site]).
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    pd = detect_rate(p_edit, p_seq_err)
    if q == 0:
        return 0.5
    if pd == p_seq_err:
        # Indistinguishable hypotheses: always decide "not key-site".
        return 0.5
    ls = ml_threshold(q, p_seq_err, p_edit)
    miss = binom_cdf(BinomialSpec(q, pd), ls).value
    if ls + 1 > q:
        false_alarm = 0.0
    else:
        false_alarm = binom_sf(BinomialSpec(q, p_seq_err), ls + 1).value
    return 0.5 * (miss + false_alarm)


def clone_success_gse(t: int, n_chal: int, q: int,
                      p_seq_err: float, p_edit: float) -> LogProb:
    """Analytic clone-game success curve for the genome-edit scheme.

    BinCDF(t; n_chal, p_err * p_detect + (1 - p_err)(1 - p_detect)) with
    p_err = ml_p_err(q).
    """
    if not 0 <= t <= n_chal:
        raise ValueError("need 0 <= t <= n_chal")
    p_err = ml_p_err(q, p_seq_err, p_edit)
    pd = detect_rate(p_edit, p_seq_err)
    p_param = p_err * pd + (1.0 - p_err) * (1.0 - pd)
    return binom_cdf(BinomialSpec(n_chal, p_param), t)


# ---------------------------------------------------------------------------
# Wilson score interval
# ---------------------------------------------------------------------------

def wilson_interval(successes: int, trials: int,
                    confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials, trials >= 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    from statistics import NormalDist
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials
                         + z2 / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# Majorization
# ---------------------------------------------------------------------------

def majorizes(p: Sequence[float], q: Sequence[float], tol: float = 1e-12) -> bool:
    """True iff p majorizes q (sorted-descending prefix sums dominate).

    Both vectors must have equal length and sum to 1 within 1e-9.  Works for
    floats and exact Fractions alike.
    """
    if len(p) != len(q):
        raise ValueError("length mismatch")
    for v, name in ((p, "p"), (q, "q")):
        if abs(float(sum(v)) - 1.0) > 1e-9:
            raise ValueError(f"{name} is not normalized")
    ps = sorted(p, reverse=True)
    qs = sorted(q, reverse=True)
    acc_p, acc_q = 0, 0  # ints so Fraction inputs stay exact
    for a, b in zip(ps, qs):
        acc_p += a
        acc_q += b
        if acc_p < acc_q - tol:
            return False
    return True
