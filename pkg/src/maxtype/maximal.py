"""Centered and non-centered maximal operators, evaluated exactly.

With distances confined to {1, 2} every point has at most three distinct
balls around it (singleton, "star", whole space), so the supremum over
radii is a maximum over finitely many averages.  Explicit spaces are
handled by a generic distance scan with representative thresholds taken
from the sorted distinct distances; quotient spaces go through the
structural ball families attached by the generator.
"""

from __future__ import annotations

import gmpy2

from .core import (Space, SpaceError, WeightedFunction, average, lp_norm,
                   make_ballset, tree_sum, weak_quasinorm)
from .scalar import scalar


def _require_nonneg(f: WeightedFunction):
    # WeightedFunction enforces nonnegativity at construction; double use
    # of raw lists would bypass it.
    if any(v < 0 for v in f.values):
        raise SpaceError("maximal operators act on f >= 0")


def _explicit_balls_at(space: Space, ci: int):
    """Balls centered at ci: one per distinct distance threshold."""
    d = space.dist
    row = [0 if y == ci else d(ci, y) for y in range(len(space))]
    balls = []
    for t in sorted(set(row)):
        balls.append(tuple(y for y in range(len(space)) if row[y] <= t))
    return balls


def maximal_centered(space: Space, f: WeightedFunction) -> WeightedFunction:
    _require_nonneg(f)
    if space.mode == "quotient":
        return _maximal_quotient(space, f, centered=True)
    n = len(space)
    full = space.full_ballset()
    avg_full = average(space, f, full)
    out = []
    for ci in range(n):
        best = f[ci]  # the singleton ball realizes f itself
        for members in _explicit_balls_at(space, ci)[1:-1]:
            a = average(space, f, make_ballset((y, 1) for y in members))
            if a > best:
                best = a
        if avg_full > best:
            best = avg_full
        out.append(best)
    return WeightedFunction(out)


def maximal_noncentered(space: Space, f: WeightedFunction) -> WeightedFunction:
    _require_nonneg(f)
    if space.mode == "quotient":
        return _maximal_quotient(space, f, centered=False)
    n = len(space)
    avg_full = average(space, f, space.full_ballset())
    best = [max(f[i], avg_full) for i in range(n)]
    seen = set()
    for ci in range(n):
        for members in _explicit_balls_at(space, ci)[1:-1]:
            if members in seen:
                continue
            seen.add(members)
            a = average(space, f, make_ballset((y, 1) for y in members))
            for y in members:
                if a > best[y]:
                    best[y] = a
    return WeightedFunction(best)


def _maximal_quotient(space: Space, f: WeightedFunction, centered: bool) -> WeightedFunction:
    st = space.structure
    if st is None:
        raise SpaceError("quotient space without structural ball support")
    if centered:
        avg_full = average(space, f, space.full_ballset())
        out = []
        for oi in range(len(space)):
            _, star, _ = st.centered_balls(space, oi)
            best = max(f[oi], avg_full, average(space, f, star))
            out.append(best)
        return WeightedFunction(out)
    classes, touch = st.all_classes(space)
    avgs = [average(space, f, b) for b in classes]
    out = []
    for oi in range(len(space)):
        out.append(max(avgs[ci] for ci in touch[oi]))
    return WeightedFunction(out)


def maximal_local(space: Space, f: WeightedFunction, operator: str) -> WeightedFunction:
    """Maximal operator restricted to balls of radius <= 2 (explicit mode).

    In a glued union, balls of radius <= 2 centered in one part stay inside
    that part while any radius > 2 returns the whole union; the part-local
    supremum therefore excludes the ball realized only at radius > 2.  Note
    that a radius-2 ball may still happen to cover the whole part (e.g. a
    star at a center within distance 1 of everything): what is excluded is
    the radius range, not a particular point set.
    """
    _require_nonneg(f)
    if space.mode != "explicit":
        raise SpaceError("local maximal operator requires an explicit space")
    n = len(space)
    best = [f[i] for i in range(n)]
    seen = set()
    for ci in range(n):
        d = space.dist
        row = [0 if y == ci else d(ci, y) for y in range(n)]
        members = tuple(y for y in range(n) if row[y] <= 1)
        if operator == "centered":
            a = average(space, f, make_ballset((y, 1) for y in members))
            if a > best[ci]:
                best[ci] = a
        elif operator == "noncentered":
            if members in seen:
                continue
            seen.add(members)
            a = average(space, f, make_ballset((y, 1) for y in members))
            for y in members:
                if a > best[y]:
                    best[y] = a
        else:
            raise SpaceError(f"unknown operator {operator!r}")
    return WeightedFunction(best)


_OPS = {"centered": maximal_centered, "noncentered": maximal_noncentered}


def apply_operator(space: Space, f: WeightedFunction, operator: str) -> WeightedFunction:
    try:
        op = _OPS[operator]
    except KeyError:
        raise SpaceError(f"unknown operator {operator!r}") from None
    return op(space, f)


def weak_ratio(space: Space, f: WeightedFunction, p, operator: str = "centered") -> gmpy2.mpfr:
    """||Op f||_{p,inf}^p / ||f||_p^p for f not identically zero."""
    if all(v == 0 for v in f.values):
        raise SpaceError("weak ratio of the zero function")
    p = scalar(p)
    g = apply_operator(space, f, operator)
    return weak_quasinorm(space, g, p) ** p / lp_norm(space, f, p) ** p


def maximal_char(space: Space, selected, operator: str = "noncentered") -> WeightedFunction:
    """Op applied to the characteristic function of the selected orbits.

    Quotient spaces get a sparse evaluation: only ball classes meeting the
    set can beat the whole-space average, so classes with no selected
    member are skipped.  Explicit spaces fall back to the generic path.
    """
    sel = sorted({space.idx(s) for s in selected})
    if not sel:
        raise SpaceError("empty point set")
    chi = WeightedFunction.indicator(space, sel)
    if space.mode != "quotient":
        return apply_operator(space, chi, operator)
    st = space.structure
    mu_sel = tree_sum(space.masses[i] * space.mults[i] for i in sel)
    a_full = mu_sel / space.total_mass()
    selset = set(sel)
    if operator == "centered":
        one = scalar(1)
        out = []
        for oi in range(len(space)):
            best = a_full
            if oi in selset:
                best = max(best, one)
            _, star, _ = st.centered_balls(space, oi)
            a = average(space, chi, star)
            if a > best:
                best = a
            out.append(best)
        return WeightedFunction(out)
    if operator != "noncentered":
        raise SpaceError(f"unknown operator {operator!r}")
    classes, touch = st.all_classes(space)
    hot = sorted({ci for oi in sel for ci in touch[oi]})
    best = [a_full] * len(space)
    for ci in hot:
        b = classes[ci]
        if not any(i in selset for i, _ in b):
            continue
        a = average(space, chi, b)
        for i, _ in b:
            if a > best[i]:
                best[i] = a
    return WeightedFunction(best)


def rwt_functional(space: Space, E, p, operator: str = "noncentered") -> gmpy2.mpfr:
    """sup_l l^p mu({Op chi_E > l}) / ||chi_E||_p^p, evaluated exactly.

    The supremum over thresholds is realized over the distinct values v of
    Op chi_E through the {>= v} superlevel convention.
    """
    p = scalar(p)
    sel = sorted({space.idx(s) for s in E})
    if not sel:
        raise SpaceError("empty point set")
    g = maximal_char(space, sel, operator)
    mu_e = tree_sum(space.masses[i] * space.mults[i] for i in sel)
    return weak_quasinorm(space, g, p) ** p / mu_e
