"""Genome-edit scheme: the ML read rule and the full-scan adversary.

Edited key-sites show up in a fraction p_edit of cells, so a read reports an
edit with rate p_detect at a key-site and p_seq_err elsewhere.  The
maximum-likelihood rule thresholds the read count; the same rule serves the
honest verifier and the genome-scanning adversary, whose per-position error
p_err(q) falls with the read budget q.  The open cloning game prices the
scan at one unit per full-genome pass and compares the counterfeit's
extracted output against the authentic one.
"""

import numpy as np

from cfikit.games import FullScanAdversary, run_open_clone_game, scheme_sampler
from cfikit.gse import SeqModel, adversary_full_scan, gse_gen
from cfikit.probability import clone_success_gse, decision_boundary, ml_p_err, ml_threshold

print("== decision boundary ==")
for ps in (0.0005, 0.01, 0.036):
    print(f"p_seq_err = {ps:<7}: threshold fraction l/q = "
          f"{decision_boundary(ps, 0.001):.5f}")

print("\n== per-position inference error vs read budget ==")
prof = gse_gen(genome_length=200_000, n_sites=20_000, seed=5, p_edit=0.001)
rng = np.random.default_rng(6)
n_each = 10_000
sites = prof.key_sites[:n_each]
others = np.setdiff1d(np.arange(60_000), prof.key_sites)[:n_each]
cands = np.concatenate([sites, others])
print(f"{'q':>7} {'threshold':>9} {'empirical':>10} {'analytic':>9}")
for q in (10, 100, 1000, 10_000):
    bits = adversary_full_scan(prof, q, SeqModel(p_seq_err=0.0005), cands, rng)
    err = 0.5 * ((bits[:n_each] == 0).mean() + (bits[n_each:] == 1).mean())
    print(f"{q:>7} {ml_threshold(q, 0.0005, 0.001):>9} "
          f"{err:>10.4f} {ml_p_err(q, 0.0005, 0.001):>9.4f}")

print("\n== open cloning game (symmetric single-read regime) ==")
params = dict(genome_length=50_000, n_sites=2_000, p_edit=1.0,
              p_seq_err=0.25, coverage=1, n_chal=20, t=2)
gen = scheme_sampler("gse", **params)
print(f"{'q_ops':>6} {'game success':>12} {'analytic curve':>14}")
for q_ops in (10, 100, 1000):
    est = run_open_clone_game(gen, FullScanAdversary(), q_ops, trials=600, seed=7)
    want = clone_success_gse(2, 20, q_ops, 0.25, 1.0).value
    print(f"{q_ops:>6} {est.point:>12.4f} {want:>14.4f}")
print("(one operation unit = one full-genome read pass)")
