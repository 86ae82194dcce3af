import json
import math
from fractions import Fraction
from itertools import permutations

import pytest

from cfikit.bounds import (
    PRINTED_TABLE1,
    PRINTED_TABLE2,
    TABLE2_NS,
    TABLE2_RATIOS,
    SchurInstance,
    decision_boundary_csv,
    decision_boundary_curve,
    negligibility_surrogate,
    ordna_robustness_value,
    schur_check,
    table_gse_robustness,
    table_unpredictability,
    unclonability_chain,
    _sig2,
)
from cfikit.probability import binom_cdf_exact


def test_sig2_rounding():
    assert _sig2(6.109e-7) == 6.1e-7
    assert _sig2(1.0) == 1.0
    assert _sig2(0.0) == 0.0


# ---------------------------------------------------------------------------
# unpredictability table
# ---------------------------------------------------------------------------

def test_table1_reproduces_all_printed_cells():
    art = table_unpredictability()
    for i, kappa in enumerate(art.rows):
        for j, _q in enumerate(art.cols):
            assert _sig2(art.cells[i][j]) == _sig2(PRINTED_TABLE1[kappa][j])
            assert art.provenance[i][j] == "paper-match"


def test_table1_records_theorem_discrepancy():
    art = table_unpredictability()
    # the kappa=1 row differs from the theorem formula in 5 of 6 cells
    assert len(art.mismatches) == 5
    assert all(m["cell"][0] == 1 for m in art.mismatches)
    theorem = art.extra_cell_data["theorem"]
    assert theorem[0][1] == pytest.approx(401 / 4**13, rel=1e-12)


def test_table1_example_cells():
    art = table_unpredictability()
    assert art.cell(1, 1) == pytest.approx(6.1e-7, rel=0.02)
    assert art.cell(2, 100) == pytest.approx(1.1e-3, rel=0.02)
    assert art.cell(3, 10**4) == 1.0  # clamped


def test_table1_csv_and_manifest():
    art = table_unpredictability()
    csv = art.to_csv()
    assert csv.splitlines()[0] == "kappa\\q,1,10,100,1000,10000,100000"
    man = art.manifest()
    assert man["table_id"] == "unpredictability"
    json.dumps(man)  # must be serializable


# ---------------------------------------------------------------------------
# unclonability chain + robustness value
# ---------------------------------------------------------------------------

def test_chain_printed_bounds():
    chain = unclonability_chain(200, 8)
    assert chain["p_e_bound"] <= 0.0031
    assert chain["p_e_bound"] == pytest.approx(200 / 4**8, abs=1e-6)
    assert chain["tau_log10"] <= -280
    assert chain["claims"]["p_e_below_0.0031"]
    assert chain["claims"]["tau_log10_below_-280"]


def test_chain_literal_variant_close_but_distinct():
    chain = unclonability_chain(200, 8)
    lit = chain["p_e_bound_literal_formula"]
    assert lit != chain["p_e_bound"]
    assert lit == pytest.approx(chain["p_e_bound"], rel=0.01)
    assert chain["tau_log10_literal_formula"] <= -280


def test_chain_degenerate_full_support():
    chain = unclonability_chain(4**4, 4)
    assert chain["p_e_bound"] == pytest.approx(1.0, abs=1e-9)
    assert chain["tau_log10"] == 0.0  # BinSF at p=1 is trivially one


def test_ordna_robustness_report():
    rep = ordna_robustness_value()
    assert rep["claim_holds_as_upper_bound"]
    assert rep["exact_failure"] <= 1.7e-15
    assert -24 < rep["exact_failure_log10"] < -22
    assert rep["mismatch"]["printed"] == 1.7e-15


def test_ordna_robustness_small_instance_oracle():
    # same computation at desk size matches exact rational enumeration
    from cfikit.probability import BinomialSpec, binom_sf
    got = binom_sf(BinomialSpec(20, 0.17), 9).value
    want = float(1 - binom_cdf_exact(20, Fraction(17, 100), 8))
    assert got == pytest.approx(want, rel=1e-12)


# ---------------------------------------------------------------------------
# genome-scheme robustness grid
# ---------------------------------------------------------------------------

def test_table2_cdf_and_sf_values():
    cdf = table_gse_robustness("cdf")
    sf = table_gse_robustness("sf")
    want_cdf = float(binom_cdf_exact(10, Fraction(36, 1000), 3))
    assert cdf.cell(10, 0.3) == pytest.approx(want_cdf, rel=1e-12)
    assert sf.cell(10, 0.3) == pytest.approx(1 - want_cdf, rel=1e-9)
    # limits: t/n -> 0.9 has cdf ~ 1 and sf ~ 0
    assert cdf.cell(200, 0.9) == pytest.approx(1.0, abs=1e-12)
    assert sf.cell(200, 0.9) < 1e-100


def test_table2_reports_mismatch_not_agreement():
    for mode in ("cdf", "sf"):
        art = table_gse_robustness(mode)
        assert len(art.mismatches) == 35  # every printed cell disagrees
        assert all(tag == "mismatch-reported"
                   for row in art.provenance for tag in row)
        assert any("p = 0.15" in note for note in art.notes)


def test_table2_interpretations_are_complementary():
    cdf = table_gse_robustness("cdf")
    sf = table_gse_robustness("sf")
    for n in TABLE2_NS:
        for r in TABLE2_RATIOS:
            assert cdf.cell(n, r) + sf.cell(n, r) == pytest.approx(1.0, abs=1e-9)


def test_table2_rejects_unknown_interpretation():
    with pytest.raises(ValueError):
        table_gse_robustness("pdf")


# ---------------------------------------------------------------------------
# decision boundary curve
# ---------------------------------------------------------------------------

def test_boundary_curve_strictly_increasing():
    pts = decision_boundary_curve(0.001, 0.05, 200)
    ts = [t for _, t in pts]
    assert all(a < b for a, b in zip(ts, ts[1:]))


def test_boundary_curve_contains_known_point():
    pts = decision_boundary_curve(0.001, 0.05, 100)
    # p_e = 0.036 maps to ~0.0365 at p_edit = 0.001
    closest = min(pts, key=lambda pt: abs(pt[0] - 0.036))
    assert closest[1] == pytest.approx(0.0365, rel=0.01)


def test_boundary_csv_format():
    pts = decision_boundary_curve(0.001, 0.01, 5)
    csv = decision_boundary_csv(pts)
    assert csv.splitlines()[0] == "p_e,t"
    assert len(csv.splitlines()) == 6


def test_boundary_curve_domain_errors():
    with pytest.raises(ValueError):
        decision_boundary_curve(0.05, 0.01)


# ---------------------------------------------------------------------------
# Schur concavity
# ---------------------------------------------------------------------------

def test_schur_extreme_vs_uniform():
    inst = SchurInstance(3, 2)
    f_point = inst.F((Fraction(1), Fraction(0), Fraction(0)))
    f_unif = inst.F((Fraction(1, 3),) * 3)
    assert f_point <= f_unif


def test_schur_symmetry_exact():
    inst = SchurInstance(3, 2)
    p = (Fraction(5, 10), Fraction(3, 10), Fraction(2, 10))
    vals = {inst.F(tuple(p[i] for i in perm))
            for perm in permutations(range(3))}
    assert len(vals) == 1


def test_schur_brute_force_oracle_m2_s1():
    # Independent hand enumeration for m=2, s=1: X, Y are one-hot draws.
    # For p = (a, 1-a), F = mean over the 2 permutations of P[X == Y-ish]:
    #   identity: a^2 + (1-a)^2 ; swap: 2a(1-a)
    # so F(p) = (a^2 + (1-a)^2 + 2a(1-a)) / 2 = 1/2 for every p.
    inst = SchurInstance(2, 1)
    for a in (Fraction(1, 2), Fraction(3, 10), Fraction(1)):
        assert inst.F((a, 1 - a)) == Fraction(1, 2)


def test_schur_check_instances_pass():
    for m in (2, 3):
        for s in (2, 3):
            rep = schur_check(m, s)
            assert rep.ok, (m, s)
            assert rep.symmetry_violations == 0
            assert rep.majorization_violations == 0


def test_schur_check_finer_grid_m3_s2():
    rep = schur_check(3, 2, grid_step=Fraction(1, 20))
    assert rep.ok
    assert rep.n_points == 231


def test_schur_instance_bounds():
    with pytest.raises(ValueError):
        SchurInstance(6, 2)
    with pytest.raises(ValueError):
        SchurInstance(3, 5)


# ---------------------------------------------------------------------------
# asymptotic surrogate
# ---------------------------------------------------------------------------

def test_negligibility_surrogate_decreasing_sampled():
    for d in (1, 3, 8):
        vals = negligibility_surrogate(d, [64, 100, 256, 1000, 4096])
        assert all(a > b for a, b in zip(vals, vals[1:]))
