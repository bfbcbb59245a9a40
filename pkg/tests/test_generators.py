"""Unit tests for parameter derivation, space builders and gluing."""

from fractions import Fraction

import pytest

from maxtype.core import ball
from maxtype.generators import (GenParams, ParamError, SpaceError,
                                build_first_gen, build_second_gen,
                                derive_sequences, floor_a, glue, glue_parts,
                                normalization_weights, structural_ball,
                                tiny_custom_params, validate_params)
from maxtype.scalar import rel_close, scalar


# -- floor(a_i) -----------------------------------------------------------


def test_floor_a_integer_p0():
    assert [floor_a(2, i) for i in (1, 2, 3, 4)] == [1, 3, 5, 7]
    assert [floor_a(3, i) for i in (1, 2, 3)] == [1, 7, 19]


def test_floor_a_fractional_p0():
    # a_2 = 2*sqrt(2) - 1 ~ 1.83, a_3 = 3*sqrt(3) - 2*sqrt(2) ~ 2.37,
    # a_4 = 8 - 3*sqrt(3) ~ 2.80
    assert [floor_a(Fraction(3, 2), i) for i in (1, 2, 3, 4)] == [1, 1, 2, 2]


def test_floor_a_rejects_bad_input():
    with pytest.raises(ParamError):
        floor_a(1, 2)
    with pytest.raises(ParamError):
        floor_a(2, 0)


# -- derive_sequences -----------------------------------------------------


def test_preset_p2_worked_values():
    p = derive_sequences(2, 2)
    assert p.tau == {(1, 1): 16, (2, 1): 512, (2, 2): 768}
    assert p.m == {1: Fraction(8), 2: Fraction(128)}
    assert p.F[(2, 1)] == Fraction(1, 2)
    assert p.G[1] == Fraction(1, 16)
    assert p.is_exact


def test_preset_identity_p2():
    p = derive_sequences(2, 4)
    for n in range(1, 5):
        for i in range(1, n + 1):
            # tau * i / m_n = 2^n (2i - 1) for p0 = 2
            assert Fraction(p.tau[(n, i)] * i) / p.m[n] == (1 << n) * (2 * i - 1)


def test_preset_identity_general():
    for p0 in (Fraction(3, 2), Fraction(2), Fraction(3)):
        p = derive_sequences(p0, 3)
        for n in range(1, 4):
            mn = scalar(p.m[n])
            for i in range(1, n + 1):
                lhs = scalar(p.tau[(n, i)]) * i / mn ** scalar(p0 - 1)
                rhs = (1 << n) * p.a_floor[i]
                assert rel_close(lhs, rhs, Fraction(1, 10**25))


def test_derive_rejects_bad_p0():
    with pytest.raises(ParamError):
        derive_sequences(1, 2)
    with pytest.raises(ParamError):
        derive_sequences(Fraction(1, 2), 2)


def test_p3_is_not_exact_rational():
    p = derive_sequences(3, 2)
    assert not p.is_exact  # 1/(p0-1) = 1/2 forces mpfr parameters


# -- validation -----------------------------------------------------------


def test_validate_flags_bad_tau():
    p = derive_sequences(2, 2)
    bad = GenParams(p0=p.p0, nmax=2, tau={**p.tau, (2, 2): 3}, F=p.F,
                    m=p.m, a_floor=p.a_floor, G=p.G, preset=False)
    msgs = validate_params(bad)
    assert any("tau" in m and "not an integer" in m for m in msgs)


def test_validate_flags_small_m():
    p = derive_sequences(2, 1)
    bad = GenParams(p0=p.p0, nmax=1, tau=p.tau, F=p.F, m={1: Fraction(1)},
                    a_floor=p.a_floor, G=p.G, preset=False)
    msgs = validate_params(bad)
    assert any("m_1" in m for m in msgs)


def test_validate_second_gen_needs_G():
    p = derive_sequences(2, 1)
    nog = GenParams(p0=p.p0, nmax=1, tau=p.tau, F=p.F, m=p.m,
                    a_floor=p.a_floor, G=None, preset=False)
    assert any("G" in m for m in validate_params(nog, "second"))


def test_presets_valid_up_to_n6():
    for p0 in (Fraction(3, 2), Fraction(2), Fraction(3)):
        p = derive_sequences(p0, 6)
        assert validate_params(p, "first") == []
        assert validate_params(p, "second") == []


# -- normalization --------------------------------------------------------


def test_normalization_worked_values():
    p = derive_sequences(2, 2)
    d = normalization_weights(p, "first")
    assert d[1] == 1
    assert d[2] == Fraction(129, 524293)  # = 64.5 / 262146.5


def test_level_halving_both_generations():
    for gen, build in (("first", build_first_gen), ("second", build_second_gen)):
        sp = build(derive_sequences(2, 4), "quotient")
        masses = {}
        for i, lab in enumerate(sp.labels):
            masses[lab[1]] = masses.get(lab[1], 0) + \
                sp.exact_masses[i] * sp.mults[i]
        for n in range(2, 5):
            assert masses[n] * 2 == masses[n - 1], (gen, n)


# -- builders -------------------------------------------------------------


def test_explicit_counts_and_masses():
    x1 = build_first_gen(derive_sequences(2, 1), "explicit")
    assert len(x1) == 17 and rel_close(x1.total_mass(), 129)
    x2 = build_first_gen(derive_sequences(2, 2), "explicit")
    assert len(x2) == 1300 and rel_close(x2.total_mass(), Fraction(387, 2))
    y1 = build_second_gen(derive_sequences(2, 1), "explicit")
    assert len(y1) == 33 and rel_close(y1.total_mass(), 130)


def test_quotient_reproduces_explicit_bookkeeping():
    p = derive_sequences(2, 2)
    ex = build_first_gen(p, "explicit")
    qt = build_first_gen(p, "quotient")
    assert qt.npoints == len(ex) == 1300
    assert sum(m * c for m, c in zip(qt.exact_masses, qt.mults)) == \
        sum(ex.exact_masses)


def test_explicit_cap():
    with pytest.raises(SpaceError):
        build_first_gen(derive_sequences(2, 3), "explicit", cap=1000)


def test_splits_create_part_orbits():
    p = derive_sequences(2, 1)
    sp = build_first_gen(p, "quotient", splits={(1, 1, 1): 5})
    ins = [lab for lab in sp.labels if len(lab) == 5 and lab[4] == 1]
    outs = [lab for lab in sp.labels if len(lab) == 5 and lab[4] == 0]
    assert len(ins) == 1 and len(outs) == 1
    assert sp.mults[sp.idx(ins[0])] == 5
    assert sp.mults[sp.idx(outs[0])] == 11


def test_splits_rejected_out_of_range():
    p = derive_sequences(2, 1)
    with pytest.raises(ParamError):
        build_first_gen(p, "quotient", splits={(1, 1, 1): 16})
    with pytest.raises(ParamError):
        build_first_gen(p, "explicit", splits={(1, 1, 1): 5})


def test_block_partition_and_nesting():
    p = derive_sequences(2, 3)
    for n in range(1, 4):
        for i2 in range(1, n + 1):
            t = p.tau[(n, i2)]
            for i in range(1, i2 + 1):
                w = t >> (i - 1)
                # blocks partition 1..tau into 2^(i-1) equal pieces
                assert w * (1 << (i - 1)) == t
                # nesting: the level-i block of a leaf contains its finer block
                for k in (1, t // 2, t):
                    blk_i = ((k - 1) << (i - 1)) // t + 1
                    blk_fine = ((k - 1) << (i2 - 1)) // t + 1
                    coarse_of_fine = ((blk_fine - 1) >> (i2 - i)) + 1
                    assert blk_i == coarse_of_fine


def test_mass_dominance_facts():
    for p0 in (Fraction(3, 2), 2, 3):
        p = derive_sequences(p0, 3)
        sp = build_first_gen(p, "quotient")
        d = sp.structure.d
        for n in range(1, 4):
            dn = scalar(d[n])
            mn = scalar(p.m[n])
            light = sum((sp.masses[i] * sp.mults[i]
                         for i, lab in enumerate(sp.labels)
                         if lab[0] == "xb" and lab[1] == n), scalar(0))
            # every leaf mass >= d_n m_n >= d_n 2^n >= mu(branches of S_n)
            assert dn * mn >= dn * (1 << n) >= light * (1 - scalar("1e-30"))


def test_second_gen_branch_adjacency():
    y2 = build_second_gen(derive_sequences(2, 2), "explicit")
    a = y2.idx(("yb", 2, 1, 1))
    b = y2.idx(("yb", 2, 2, 2))
    assert y2.dist(a, b) == 1
    assert y2.dist(a, y2.idx(("yb", 1, 1, 1))) == 2


def test_second_gen_pair_balls():
    y1 = build_second_gen(derive_sequences(2, 1), "explicit")
    got = {y1.labels[i] for i, _ in ball(y1, ("yl", 1, 1, 1), 1.5)}
    assert got == {("yl", 1, 1, 1), ("ym", 1, 1, 1)}
    got = {y1.labels[i] for i, _ in ball(y1, ("ym", 1, 1, 4), 1.5)}
    assert got == {("ym", 1, 1, 4), ("yl", 1, 1, 4), ("yb", 1, 1, 1)}


def test_structural_ball_equals_scan_small():
    for build, p0 in ((build_first_gen, 2), (build_second_gen, 2),
                      (build_first_gen, Fraction(3, 2))):
        sp = build(derive_sequences(p0, 2), "explicit")
        step = max(1, len(sp) // 40)
        for ci in range(0, len(sp), step):
            for r in (1, 1.5, 2.5):
                assert ball(sp, ci, r) == structural_ball(sp, ci, r)


def test_structural_ball_rejects_foreign():
    a = build_first_gen(derive_sequences(2, 1), "explicit")
    b = build_second_gen(derive_sequences(2, 1), "explicit")
    z = glue(a, b)
    with pytest.raises(SpaceError):
        structural_ball(z, 0, 1.5)


# -- glue -----------------------------------------------------------------


def test_glue_masses_and_distances():
    a = build_first_gen(derive_sequences(2, 1), "explicit")
    b = build_second_gen(derive_sequences(2, 1), "explicit")
    z = glue(a, b)
    assert rel_close(z.total_mass(), 259)
    x = z.idx(("A", ("xb", 1, 1, 1)))
    y = z.idx(("B", ("yb", 1, 1, 1)))
    assert z.dist(x, y) == 2
    ia, ib = glue_parts(z)
    assert len(ia) == 17 and len(ib) == 33


def test_glue_preserves_within_part_distances():
    a = build_first_gen(derive_sequences(2, 1), "explicit")
    b = build_second_gen(derive_sequences(2, 1), "explicit")
    z = glue(a, b)
    assert z.dist(z.idx(("A", ("xb", 1, 1, 1))), z.idx(("A", ("xl", 1, 1, 3)))) == 1
    assert z.dist(z.idx(("B", ("ym", 1, 1, 2))), z.idx(("B", ("yl", 1, 1, 2)))) == 1


def test_tiny_custom_space():
    sp = build_first_gen(tiny_custom_params(), "explicit")
    assert len(sp) == 9
    assert sum(sp.exact_masses) == Fraction(9, 2)
    assert validate_params(tiny_custom_params()) == []
