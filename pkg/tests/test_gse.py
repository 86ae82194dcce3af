import math
from fractions import Fraction

import numpy as np
import pytest

from cfikit.core import ChallengeError, cfs_reconstruct, cfs_setup, estimate_robustness, make_cfs
from cfikit.gse import (
    GseExtractor,
    GseProfile,
    SeqModel,
    adversary_full_scan,
    decide_bits,
    gse_gen,
    gse_respond,
)
from cfikit.probability import (
    BinomialSpec,
    binom_cdf,
    binom_cdf_exact,
    binom_sf,
    detect_rate,
    ml_p_err,
    ml_threshold,
)


def per_position_error_rates(q: int, ps: float, pe: float) -> tuple[float, float]:
    """(error at a key-site, error at a non-key-site) under the ML rule."""
    ls = ml_threshold(q, ps, pe)
    pd = detect_rate(pe, ps)
    e1 = binom_cdf(BinomialSpec(q, pd), ls).value
    e0 = binom_sf(BinomialSpec(q, ps), ls + 1).value if ls + 1 <= q else 0.0
    return e1, e0


def convolved_success(n1: int, n0: int, t: int, e1: float, e0: float) -> float:
    """Exact P[Binom(n1,e1) + Binom(n0,e0) <= t]."""
    total = 0.0
    for a in range(min(n1, t) + 1):
        pa = math.comb(n1, a) * e1**a * (1 - e1) ** (n1 - a)
        for b in range(min(n0, t - a) + 1):
            total += pa * math.comb(n0, b) * e0**b * (1 - e0) ** (n0 - b)
    return total


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def test_gen_seed_determinism():
    a = gse_gen(genome_length=50_000, n_sites=100, seed=5)
    b = gse_gen(genome_length=50_000, n_sites=100, seed=5)
    assert np.array_equal(a.key_sites, b.key_sites)


def test_gen_all_positions_key_sites():
    prof = gse_gen(genome_length=64, n_sites=64, seed=1)
    assert np.array_equal(prof.key_sites, np.arange(64))


def test_gen_oversubscription():
    with pytest.raises(ValueError):
        gse_gen(genome_length=10, n_sites=11)


def test_gen_sites_sorted_distinct_in_range():
    prof = gse_gen(genome_length=10_000, n_sites=500, seed=2)
    assert np.all(np.diff(prof.key_sites) > 0)
    assert prof.key_sites[0] >= 0 and prof.key_sites[-1] < 10_000


def test_gen_spacing_uniform_ks():
    # KS-style check of site positions against the uniform distribution.
    n = 2_000
    prof = gse_gen(genome_length=1_000_000, n_sites=n, seed=3)
    u = np.sort(prof.key_sites / 1_000_000)
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    d = max(np.max(np.abs(ecdf_hi - u)), np.max(np.abs(u - ecdf_lo)))
    assert d < 1.63 / math.sqrt(n)  # alpha = 0.01 critical value


def test_descriptor_round_trip():
    prof = gse_gen(genome_length=5_000, n_sites=50, seed=9)
    clone = GseProfile.from_descriptor(prof.to_descriptor())
    assert np.array_equal(clone.key_sites, prof.key_sites)


# ---------------------------------------------------------------------------
# responses
# ---------------------------------------------------------------------------

def test_respond_zero_seq_err_edited_site_reads_one():
    # P[miss] = (1 - p_edit)^coverage ~ 4.5e-5 at coverage 1e4.
    prof = gse_gen(genome_length=1_000, n_sites=500, seed=4)
    rng = np.random.default_rng(0)
    seq = SeqModel(p_seq_err=0.0, coverage=10_000)
    x = prof.key_sites[:200].astype(np.int64)
    bits = gse_respond(prof, x, seq, rng)
    assert bits.sum() >= 199  # one miss in 200 already has probability < 1%


def test_respond_zero_seq_err_unedited_is_zero():
    prof = gse_gen(genome_length=10_000, n_sites=10, seed=5)
    rng = np.random.default_rng(1)
    seq = SeqModel(p_seq_err=0.0, coverage=1_000)
    sites = set(prof.key_sites.tolist())
    x = np.array([c for c in range(3_000) if c not in sites][:500], dtype=np.int64)
    bits = gse_respond(prof, x, seq, rng)
    assert bits.sum() == 0


def test_respond_error_rate_matches_mixture_formula():
    # Per-position decision error vs the 0.5-prior mixture oracle.
    prof = gse_gen(genome_length=200_000, n_sites=20_000, seed=6)
    q, ps, pe = 1_000, 0.0005, 0.001
    rng = np.random.default_rng(2)
    n_each = 15_000
    x1 = prof.key_sites[:n_each].astype(np.int64)
    sites = set(prof.key_sites.tolist())
    x0 = np.array([c for c in range(60_000) if c not in sites][:n_each],
                  dtype=np.int64)
    seq = SeqModel(p_seq_err=ps, coverage=q)
    bits1 = gse_respond(prof, x1, seq, rng)
    bits0 = gse_respond(prof, x0, seq, rng)
    err = 0.5 * ((bits1 == 0).mean() + (bits0 == 1).mean())
    want = ml_p_err(q, ps, pe)
    sigma = math.sqrt(want * (1 - want) / (2 * n_each))
    assert abs(err - want) <= 3 * sigma


def test_infinite_coverage_limit_reproduces_enrollment():
    prof = gse_gen(genome_length=50_000, n_sites=1_000, seed=7)
    rng = np.random.default_rng(3)
    seq = SeqModel(p_seq_err=0.0, coverage=100_000)
    cfs = make_cfs("gse", seed=7, profile=prof, p_seq_err=0.0,
                   coverage=100_000, n_chal=20, t=3)
    x = cfs.cf.sample_challenge(rng)
    truth = cfs.cf.reference_response(x)
    bits = gse_respond(prof, x, seq, rng)
    assert np.array_equal(bits, truth)


def test_challenge_validation():
    cfs = make_cfs("gse", seed=8, genome_length=1_000, n_sites=100)
    with pytest.raises(ChallengeError):
        cfs.cf.validate_challenge(np.array([1, 1, 2]))
    with pytest.raises(ChallengeError):
        cfs.cf.validate_challenge(np.array([5_000]))


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------

def test_extract_round_trip_and_radius():
    ex = GseExtractor(15, 3)
    rng = np.random.default_rng(4)
    y = rng.integers(0, 2, 15, dtype=np.uint8)
    z, h = ex.extract(y, b"", rng)
    assert ex.extract(y, h)[0] == z
    y2 = y.copy()
    y2[:3] ^= 1
    assert ex.extract(y2, h)[0] == z
    y3 = y.copy()
    y3[:4] ^= 1  # beyond t: fail or different (bounded-distance)
    out = ex.extract(y3, h)[0]
    assert out is None or out != z


@pytest.mark.parametrize("n,t", [(15, 1), (15, 3), (31, 5)])
def test_extract_robustness_matches_single_read_formula(n, t):
    # The single-read abstraction (symmetric error p_e = 0.036) is the
    # p_edit = 1, coverage = 1 case; robustness is BinCDF(t; n, 0.036).
    pe_read = 0.036
    prof = gse_gen(genome_length=100_000, n_sites=50_000, seed=n * 10 + t)
    prof.p_edit = 1.0
    cfs = make_cfs("gse", seed=n, profile=prof, p_seq_err=pe_read, coverage=1,
                   n_chal=n, t=t)
    trials = 4_000
    est = estimate_robustness(cfs, cfs.cf.sample_challenge(
        np.random.default_rng(5)), trials, seed=6)
    want = float(binom_cdf_exact(n, Fraction(36, 1000), t))
    sigma = math.sqrt(want * (1 - want) / trials)
    assert abs(est.point - want) <= 3 * sigma


def test_estimate_robustness_covers_convolution_oracle():
    # Spec example regime: 20 positions, coverage 1000, p_seq_err 5e-4.
    q, ps, pe = 1_000, 0.0005, 0.001
    prof = gse_gen(genome_length=100_000, n_sites=1_000, seed=11, p_edit=pe)
    cfs = make_cfs("gse", seed=11, profile=prof, p_seq_err=ps, coverage=q,
                   n_chal=20, t=3)
    rng = np.random.default_rng(7)
    x = cfs.cf.sample_challenge(rng)  # 10 key-sites + 10 others
    e1, e0 = per_position_error_rates(q, ps, pe)
    want = convolved_success(10, 10, 3, e1, e0)
    est = estimate_robustness(cfs, x, 4_000, seed=8)
    assert est.covers(want)


# ---------------------------------------------------------------------------
# adversary
# ---------------------------------------------------------------------------

def test_full_scan_zero_reads_all_zero():
    prof = gse_gen(genome_length=10_000, n_sites=100, seed=12)
    rng = np.random.default_rng(9)
    bits = adversary_full_scan(prof, 0, SeqModel(), np.arange(50), rng)
    assert bits.sum() == 0


def test_full_scan_error_matches_ml_p_err():
    prof = gse_gen(genome_length=400_000, n_sites=40_000, seed=13)
    ps, pe = 0.0005, 0.001
    rng = np.random.default_rng(10)
    sites = prof.key_sites[:20_000]
    others = np.setdiff1d(np.arange(100_000), prof.key_sites)[:20_000]
    cands = np.concatenate([sites, others])
    truth = np.concatenate([np.ones(20_000), np.zeros(20_000)])
    for q in (10, 100, 1_000):
        bits = adversary_full_scan(prof, q, SeqModel(p_seq_err=ps), cands, rng)
        err = 0.5 * ((bits[:20_000] == 0).mean() + (bits[20_000:] == 1).mean())
        want = ml_p_err(q, ps, pe)
        sigma = math.sqrt(want * (1 - want) / len(cands))
        assert abs(err - want) <= 3 * sigma, (q, err, want)
    assert truth.shape == cands.shape


def test_full_scan_large_q_small_error():
    prof = gse_gen(genome_length=100_000, n_sites=10_000, seed=14)
    rng = np.random.default_rng(11)
    cands = np.concatenate([prof.key_sites[:5_000],
                            np.setdiff1d(np.arange(40_000), prof.key_sites)[:5_000]])
    bits = adversary_full_scan(prof, 100_000, SeqModel(p_seq_err=0.0005),
                               cands, rng)
    err = 0.5 * ((bits[:5_000] == 0).mean() + (bits[5_000:] == 1).mean())
    want = ml_p_err(100_000, 0.0005, 0.001)
    assert err <= want + 3 * math.sqrt(want * (1 - want) / 10_000) + 1e-3
    assert err < 0.01


def test_challenge_csv_round_trip():
    from cfikit.gse import challenge_from_csv, challenge_to_csv

    x = np.array([5, 99, 12_345], dtype=np.int64)
    text = challenge_to_csv(x)
    assert text.splitlines()[0] == "coordinate"
    assert np.array_equal(challenge_from_csv(text), x)
    with pytest.raises(ValueError):
        challenge_from_csv("5\n99\n")


def test_response_string_round_trip():
    from cfikit.gse import response_from_string, response_to_string

    bits = np.array([1, 0, 0, 1, 1], dtype=np.uint8)
    s = response_to_string(bits)
    assert s == "10011"
    assert np.array_equal(response_from_string(s), bits)
    with pytest.raises(ValueError):
        response_from_string("10x")


def test_honest_and_adversary_share_decision_rule():
    # Same counts, same threshold: decide_bits is the single code path.
    counts = np.array([0, 1, 2, 5, 9, 10])
    a = decide_bits(counts, 1_000, 0.0005, 0.001)
    b = decide_bits(counts, 1_000, 0.0005, 0.001)
    assert np.array_equal(a, b)
    ls = ml_threshold(1_000, 0.0005, 0.001)
    assert np.array_equal(a, (counts > ls).astype(np.uint8))
