"""Unit tests for spaces, balls, averages and norms.

The worked values (masses 1 and 8, totals 129, averages 1/9 and 1/129)
come from independent hand evaluation of the preset closed forms at
p0 = 2, N = 1.
"""

from fractions import Fraction

import pytest

from maxtype.core import (Space, SpaceError, WeightedFunction, average, ball,
                          lp_norm, make_ballset, weak_quasinorm)
from maxtype.generators import build_first_gen, derive_sequences
from maxtype.scalar import rel_close, scalar


@pytest.fixture(scope="module")
def x1():
    return build_first_gen(derive_sequences(2, 1), "explicit")


def test_space_rejects_nonpositive_mass():
    with pytest.raises(SpaceError):
        Space("explicit", [("a",), ("b",)], [1, 0], dist=lambda a, b: 2)


def test_space_rejects_duplicate_labels():
    with pytest.raises(SpaceError):
        Space("explicit", [("a",), ("a",)], [1, 1], dist=lambda a, b: 2)


def test_explicit_mode_requires_mult_one():
    with pytest.raises(SpaceError):
        Space("explicit", [("a",)], [1], mults=[2], dist=lambda a, b: 2)


def test_ball_radius_one_is_singleton(x1):
    for ci in range(len(x1)):
        assert ball(x1, ci, 1) == make_ballset([(ci, 1)])


def test_ball_leaf_star(x1):
    # B(x'_{1,1,3}, 1.5) = {x'_{1,1,3}, x_{1,1,1}}
    leaf = x1.idx(("xl", 1, 1, 3))
    branch = x1.idx(("xb", 1, 1, 1))
    assert ball(x1, ("xl", 1, 1, 3), 1.5) == make_ballset([(leaf, 1), (branch, 1)])


def test_ball_radius_above_two_is_everything(x1):
    assert ball(x1, 0, 2.5) == x1.full_ballset()


def test_ball_branch_radius_two_n2():
    x2 = build_first_gen(derive_sequences(2, 2), "explicit")
    b = ball(x2, ("xb", 2, 2, 1), 2)
    labels = {x2.labels[i] for i, _ in b}
    expect = {("xb", 2, 2, 1)} | {("xl", 2, 2, k) for k in range(1, 385)}
    assert labels == expect


def test_ball_rejects_bad_radius(x1):
    with pytest.raises(SpaceError):
        ball(x1, 0, 0)


def test_average_examples(x1):
    f = WeightedFunction.delta(x1, ("xb", 1, 1, 1))
    e = ball(x1, ("xl", 1, 1, 1), 1.5)
    assert rel_close(average(x1, f, e), Fraction(1, 9))
    assert rel_close(average(x1, f, x1.full_ballset()), Fraction(1, 129))


def test_average_of_constant_is_constant(x1):
    f = WeightedFunction.constant(x1, scalar(3))
    assert average(x1, f, x1.full_ballset()) == 3


def test_average_within_min_max(x1):
    f = WeightedFunction([i % 5 for i in range(len(x1))])
    for ci in range(0, len(x1), 3):
        a = average(x1, f, ball(x1, ci, 1.5))
        assert min(f.values) <= a <= max(f.values)


def test_average_empty_set_errors(x1):
    f = WeightedFunction.constant(x1, 1)
    with pytest.raises(SpaceError):
        average(x1, f, ())


def test_lp_norm_extremal(x1):
    f = WeightedFunction.delta(x1, ("xb", 1, 1, 1))
    assert rel_close(lp_norm(x1, f, 2) ** 2, 1)


def test_lp_norm_indicator_full(x1):
    f = WeightedFunction.constant(x1, 1)
    for p in (1, 2, 3):
        assert rel_close(lp_norm(x1, f, p) ** p, 129)


def test_lp_norm_homogeneous(x1):
    f = WeightedFunction([i % 3 for i in range(len(x1))])
    c = scalar(Fraction(7, 3))
    assert rel_close(lp_norm(x1, f.scaled(c), 2), c * lp_norm(x1, f, 2))


def test_lp_norm_rejects_p_below_one(x1):
    with pytest.raises(SpaceError):
        lp_norm(x1, WeightedFunction.constant(x1, 1), 0.5)


def test_weak_quasinorm_single_point(x1):
    # v * w^(1/p) for a scaled Dirac at a point of mass 8
    f = WeightedFunction.delta(x1, ("xl", 1, 1, 1), value=3)
    assert rel_close(weak_quasinorm(x1, f, 2) ** 2, 9 * 8)


def test_weak_quasinorm_constant(x1):
    g = WeightedFunction.constant(x1, 5)
    assert rel_close(weak_quasinorm(x1, g, 2) ** 2, 25 * 129)


def test_weak_quasinorm_zero(x1):
    assert weak_quasinorm(x1, WeightedFunction.constant(x1, 0), 2) == 0


def test_weak_quasinorm_mcf1(x1):
    # g = M^c f_1: value 1 at the branch, 1/9 at the 16 leaves
    vals = [1 if lab[0] == "xb" else Fraction(1, 9) for lab in x1.labels]
    g = WeightedFunction(vals)
    assert rel_close(weak_quasinorm(x1, g, 2) ** 2, Fraction(129, 81))


def test_chebyshev_inequality(x1):
    import random

    rnd = random.Random(7)
    for _ in range(20):
        g = WeightedFunction([rnd.random() for _ in range(len(x1))])
        for p in (1, 2, 3):
            assert weak_quasinorm(x1, g, p) <= lp_norm(x1, g, p) * (1 + scalar("1e-30"))


def test_weighted_function_rejects_negative():
    with pytest.raises(ValueError):
        WeightedFunction([1, -1])
