"""Walk through the framework on the smallest scheme: fluorescence dyes.

A dye mixture answers a handful of excitation challenges with a 7-bit color
pattern; measurement flips each bit with probability p.  The extractor locks
a random 4-bit value against the enrolled pattern with the perfect (7,4,3)
Hamming code, so reconstruction tolerates one flipped bit and the challenge
robustness has the closed form (1-p)^7 + 7p(1-p)^6.
"""

import numpy as np

from cfikit.core import (
    authenticate,
    cfs_reconstruct,
    cfs_setup,
    estimate_robustness,
    make_cfs,
)

p = 0.05
cfs = make_cfs("dye", seed=2026, flip_prob=p)
rng = np.random.default_rng(0)

print("== setup / reconstruction ==")
x = cfs.cf.sample_challenge(rng)
z, helper = cfs_setup(cfs, x, rng)
print(f"challenge {x}: output z = {z.hex()}, helper = {helper.hex()} "
      f"(tag {helper[0]}, version {int.from_bytes(helper[1:3], 'little')})")
agreements = sum(cfs_reconstruct(cfs, x, helper, rng) == z for _ in range(20))
print(f"20 noisy reconstructions, {agreements} agreed with the setup output")

print("\n== robustness vs the closed form ==")
closed_form = (1 - p) ** 7 + 7 * p * (1 - p) ** 6
est = estimate_robustness(cfs, x, trials=20_000, seed=1)
print(f"closed form      : {closed_form:.4f}")
print(f"Monte Carlo      : {est.point:.4f}  "
      f"(Wilson 95% [{est.wilson_lo:.4f}, {est.wilson_hi:.4f}], "
      f"{est.trials} trials)")
print(f"interval covers the closed form: {est.covers(closed_form)}")

print("\n== authentication ==")
replica = cfs.cf.with_seed(7)          # same profile, fresh noise
fake = make_cfs("dye", seed=999, flip_prob=p).cf  # independent profile
genuine = sum(authenticate(cfs, replica, c, rng) for c in range(16))
counterfeit = sum(authenticate(cfs, fake, c, rng) for c in range(16))
print(f"genuine replica accepted on {genuine}/16 challenges")
print(f"counterfeit accepted on {counterfeit}/16 challenges "
      "(a 4-bit output space coincides with probability 1/16)")
