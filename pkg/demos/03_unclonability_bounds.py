"""The quantitative security chain, from k-mer overlap to 1e-280.

Two independently synthesized pools share k-mers only by chance: the
expected weighted-Jaccard similarity of two uniform 200-element supports in
the 4^8 universe is 200/4^8 < 0.0031, so the per-coordinate sketch agreement
rate is below 0.0031 and the probability that a counterfeit's sketch lands
within the vault's 111-error radius (144 of 255 agreements) is a binomial
tail below 1e-280.  The prediction bound (1 + q Phi(ell, kappa))/4^ell gives
the Table-style grid, and its n^d-scaled version vanishes for every
polynomial degree -- the asymptotic-unpredictability surrogate.
"""

from cfikit.bounds import (
    negligibility_surrogate,
    table_unpredictability,
    unclonability_chain,
)
from cfikit.probability import hamming_ball_volume, sigma_bound

print("== unclonability chain ==")
chain = unclonability_chain(s=200, k=8, n=255, t=111)
print(f"p_e bound (hypergeometric overlap): {chain['p_e_bound']:.7f} < 0.0031")
print(f"  (paper's literal collision count: "
      f"{chain['p_e_bound_literal_formula']:.7f}, not normalized)")
print(f"log10 tau = BinSF(255, p_e, 144):   {chain['tau_log10']:.1f} <= -280")

print("\n== prediction bounds (ell = 13) ==")
art = table_unpredictability(ell=13)
header = "kappa " + "".join(f"{q:>10}" for q in art.cols)
print(header)
for kappa, row in zip(art.rows, art.cells):
    print(f"{kappa:>5} " + "".join(f"{v:10.1e}" for v in row))
print("ball volumes:", {k: hamming_ball_volume(13, k) for k in (1, 2, 3)})
print("(the kappa=1 row uses the table's q*(1+Phi) rule; the theorem's")
print(" 1+q*Phi values are recorded in the artifact manifest)")

print("\n== asymptotic surrogate ==")
for d in (1, 4, 8):
    vals = negligibility_surrogate(d, [64, 256, 1024, 4096])
    chain_str = " > ".join(f"{v:8.1f}" for v in vals)
    print(f"d={d}: log10(n^d * sigma) over n=64..4096: {chain_str}")
print("strictly decreasing in n for every d: the bound is negligible")

print("\n== a guessing adversary ==")
print(f"sigma(ell=13, kappa=1, q=0) = {sigma_bound(13, 1, 0).value:.3e} "
      "(one blind guess out of 4^13)")
