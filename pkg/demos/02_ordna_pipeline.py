"""The operable-random-DNA pipeline, stage by stage.

A pool of molecules with random input and output segments is challenged by
selection PCR: reads of the amplified output parts are profiled into 8-mers,
sketched by 30 MinHash runs of 255 byte-coordinates, and locked into RS(255,
32) fuzzy vaults.  At the paper's 17% post-MinHash byte error rate, each
vault still unlocks (111 of 255 byte errors are correctable), so replicas
reconstruct the same 32-byte output while foreign pools produce nothing.
"""

import numpy as np

from cfikit.core import cfs_reconstruct, cfs_setup, keygen_enroll, keygen_reconstruct, make_cfs
from cfikit.ordna import (
    OrdnaNoise,
    bases_to_str,
    kmer_profile,
    minhash_sketch,
    select_pcr,
    vault_lock,
    vault_unlock,
)

rng = np.random.default_rng(42)
cfs = make_cfs("ordna", seed=7, pool_size=50_000, reads=60)
profile = cfs.cf.profile

print("== pool ==")
print("descriptor:", profile.to_descriptor())
inp, out = profile.molecule(123)
print(f"molecule #123 inputs: {bases_to_str(inp)}  output: {bases_to_str(out)}")

print("\n== selection PCR + k-mer profile ==")
reads = select_pcr(profile, inp, OrdnaNoise(read_sub_rate=0.01), 60, rng)
prof = kmer_profile(reads, k=8)
print(f"{reads.shape[0]} reads of {reads.shape[1]} nt; "
      f"{prof.total} 8-mers over a support of {prof.support} (< 200)")

print("\n== MinHash sketch and one fuzzy vault ==")
sketch = minhash_sketch(prof)
print(f"sketch: {sketch.runs} runs x {sketch.length} byte coordinates")
w = sketch.digests[0]
helper_row, z_row = vault_lock(w, rng)
w_noisy = w.copy()
pos = rng.choice(255, 100, replace=False)  # 100 byte errors < 111
w_noisy[pos] ^= rng.integers(1, 256, 100).astype(np.uint8)
unlocked = vault_unlock(helper_row, w_noisy)
print(f"unlock with 100/255 byte errors recovered z: "
      f"{unlocked is not None and bytes(unlocked) == bytes(z_row)}")

print("\n== end-to-end: the chemical function system ==")
x = cfs.cf.sample_challenge(rng)
z, h = cfs_setup(cfs, x, rng)
print(f"setup: z = {z.hex()[:24]}..., helper = {len(h)} bytes (30 vaults)")
ok = sum(cfs_reconstruct(cfs, x, h, rng) == z for _ in range(25))
print(f"reconstructions at 17% byte noise: {ok}/25 agree")

print("\n== distributed key generation ==")
key, h2 = keygen_enroll(cfs, x, rng)
parties = [cfs.replica(seed=100 + i) for i in range(4)]
recovered = [keygen_reconstruct(p, x, h2, rng) for p in parties]
print(f"4 replica holders recovered the same 32-byte key: "
      f"{all(k == key for k in recovered)}")
foreign = make_cfs("ordna", seed=31337, pool_size=50_000, reads=60)
print(f"a foreign pool recovers the key: "
      f"{keygen_reconstruct(foreign, x, h2, rng) == key}")
