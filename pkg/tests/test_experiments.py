"""Unit tests for the experiment drivers (small instances only; the full
acceptance-scale runs live in test_acceptance.py)."""

from fractions import Fraction

import pytest

from maxtype.core import SpaceError, WeightedFunction
from maxtype.experiments import (Report, dirac_rwt_check, exhaustive_rwt_max,
                                 extremal_function, extremal_norm_identity,
                                 glue_consistency_check, growth_table,
                                 leaf_subset_rwt_check, lower_bound_L,
                                 mode_agreement_check, random_function,
                                 rwt_search, strong11_check, trial_rng)
from maxtype.generators import (build_first_gen, build_second_gen,
                                derive_sequences, tiny_custom_params)
from maxtype.scalar import rel_close, scalar


def test_report_mechanics():
    r = Report("demo", {"k": 1})
    assert r.passed
    r.add_row(a=1)
    r.fail()
    assert not r.passed and r.rows == [{"a": 1}]


def test_extremal_function_values():
    sp = build_first_gen(derive_sequences(2, 2), "quotient")
    f = extremal_function(sp, 2)
    assert f[sp.idx(("xb", 2, 1, 1))] == 2  # 2^((2-1)/(2-1))
    assert f[sp.idx(("xb", 2, 2, 1))] == 1
    assert f[sp.idx(("xb", 1, 1, 1))] == 0
    with pytest.raises(SpaceError):
        extremal_function(sp, 3)


def test_extremal_norm_identity_small():
    for p0 in (Fraction(3, 2), 2, 3):
        sp = build_first_gen(derive_sequences(p0, 3), "quotient")
        for n in (1, 2, 3):
            measured, predicted = extremal_norm_identity(sp, n)
            assert rel_close(measured, predicted, Fraction(1, 10**25)), (p0, n)


def test_lower_bound_values():
    # p0 = 2: L(n) = (1/8) * (n^2 / n) = n / 8
    for n in (1, 2, 5):
        L, s = lower_bound_L(2, n)
        assert L == Fraction(n, 8) and s == n * n


def test_trial_rng_splittable():
    a = trial_rng(7, 3).random(4).tolist()
    b = trial_rng(7, 3).random(4).tolist()
    c = trial_rng(7, 4).random(4).tolist()
    assert a == b != c


def test_random_function_support_and_determinism():
    sp = build_second_gen(derive_sequences(2, 1), "quotient")
    f = random_function(sp, trial_rng(0, 0))
    g = random_function(sp, trial_rng(0, 0))
    assert f.values == g.values
    assert any(v > 0 for v in f.values)
    assert all(v >= 0 for v in f.values)


def test_growth_table_first_gen():
    rep = growth_table(2, 3, "first")
    assert rep.passed and len(rep.rows) == 3
    for row in rep.rows:
        assert row["R"] >= row["L"]
        assert row["leaf_min_times_2m"] >= 1
    # the certified bounds are n/8 for p0 = 2
    assert rel_close(rep.rows[1]["L"], Fraction(2, 8))


def test_growth_table_second_gen_noncentered():
    rep = growth_table(Fraction(3, 2), 2, "second")
    assert rep.passed and rep.params["operator"] == "noncentered"


def test_strong11_small():
    sp = build_second_gen(derive_sequences(2, 1), "quotient")
    rep = strong11_check(sp, trials=25, seed=1)
    assert rep.passed
    assert rep.rows[-1]["max_ratio"] <= 6
    with pytest.raises(SpaceError):
        strong11_check(build_first_gen(derive_sequences(2, 1), "quotient"))


def test_dirac_rwt_small():
    for gen, build in (("first", build_first_gen), ("second", build_second_gen)):
        sp = build(derive_sequences(2, 2), "quotient")
        rep = dirac_rwt_check(sp, 2)
        assert rep.passed, gen
        assert all(r["value"] <= 4 for r in rep.rows)


def test_leaf_subset_rwt_small_budget():
    rep = leaf_subset_rwt_check(2, 1, "first", 2, subsets=60, seed=3)
    assert rep.passed
    tail = rep.rows[-1]
    assert tail["subsets_tested"] >= 60
    assert tail["max_value"] <= 2


def test_leaf_subset_rwt_second_gen():
    rep = leaf_subset_rwt_check(2, 1, "second", 2, subsets=60, seed=3)
    assert rep.passed


def test_rwt_search_exhaustive_known_max():
    sp = build_first_gen(derive_sequences(2, 1), "explicit")
    rep = rwt_search(sp, 2, mode="exhaustive")
    assert rep.passed
    assert rep.rows[0]["max_exact"] == "43/27"
    assert rep.rows[0]["subsets"] == (1 << 17) - 1


def test_rwt_search_random_mode():
    sp = build_first_gen(derive_sequences(2, 1), "quotient")
    rep = rwt_search(sp, 2, mode="random", budget=50, seed=0)
    assert rep.passed
    # the random search can never beat the exhaustive maximum
    assert rep.rows[0]["max_value"] <= scalar(Fraction(43, 27)) * (
        1 + scalar("1e-30"))
    again = rwt_search(sp, 2, mode="random", budget=50, seed=0)
    assert str(again.rows[0]["max_value"]) == str(rep.rows[0]["max_value"])
    with pytest.raises(SpaceError):
        rwt_search(sp, 2, mode="simulated-annealing")


def test_exhaustive_rwt_max_tiny():
    sp = build_first_gen(tiny_custom_params(), "explicit")
    best, mask, nsub = exhaustive_rwt_max(sp, 2)
    assert best == 1 and nsub == 511 and 0 < mask < 512


def test_glue_consistency_small():
    a = build_first_gen(derive_sequences(2, 1), "explicit")
    b = build_second_gen(derive_sequences(2, 1), "explicit")
    rep = glue_consistency_check(a, b, trials=10, seed=0)
    assert rep.passed
    assert rep.rows[-1]["failures"] == 0
    assert rep.rows[-1]["worst_rel_diff"] == 0  # identity is exact here


def test_mode_agreement_small():
    rep = mode_agreement_check(2, 1, "first")
    assert rep.passed
    rep = mode_agreement_check(2, 1, "second")
    assert rep.passed
    for row in rep.rows:
        assert row["worst_rel_diff"] <= scalar(Fraction(1, 10**20))
