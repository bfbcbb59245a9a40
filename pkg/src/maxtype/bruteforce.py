"""Independent straightforward oracle for the exhaustive subset search.

Deliberately written from scratch against the definitions only: balls come
from a direct distance scan (not the structural case lists), every subset
is re-evaluated from nothing (no Gray-code increments), and all arithmetic
is exact integers / `fractions.Fraction`.  Slower than the kernels by
design; its job is to certify them bit-for-bit on small spaces.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from .core import Space, SpaceError


def _exact_weights(space: Space):
    if space.mode != "explicit" or space.exact_masses is None:
        raise SpaceError("oracle needs an explicit space with exact masses")
    den = 1
    for m in space.exact_masses:
        den = lcm(den, m.denominator)
    return [int(m * den) for m in space.exact_masses]


def _all_balls(space: Space):
    """Every ball of the space by scanning all centers and radii, deduped."""
    P = len(space)
    d = space.dist
    balls = set()
    for c in range(P):
        row = [0 if y == c else d(c, y) for y in range(P)]
        for r in sorted(set(row)):
            balls.add(tuple(y for y in range(P) if row[y] <= r))
    return sorted(balls)


def oracle_rwt_max(space: Space, p) -> Fraction:
    """max over nonempty U of sup_v v^p mu({M chi_U >= v}) / mu(U).

    M is the non-centered operator: at x, the best average of chi_U over
    any ball containing x.  Exact rational output; integer p only.
    """
    p = Fraction(p)
    if p.denominator != 1:
        raise SpaceError("oracle requires integer p")
    p = p.numerator
    w = _exact_weights(space)
    P = len(space)
    balls = _all_balls(space)
    members = [list(b) for b in balls]
    bmass = [sum(w[t] for t in b) for b in members]
    contains = [[b for b in range(len(balls)) if j in members[b]] for j in range(P)]

    best = Fraction(0)
    for mask in range(1, 1 << P):
        sel_mass = sum(w[j] for j in range(P) if (mask >> j) & 1)
        bsel = [sum(w[t] for t in members[b] if (mask >> t) & 1)
                for b in range(len(balls))]
        vals = [max(Fraction(bsel[b], bmass[b]) for b in contains[j])
                for j in range(P)]
        for v in set(vals):
            if v == 0:
                continue
            level_mass = sum(w[j] for j in range(P) if vals[j] >= v)
            cand = v**p * Fraction(level_mass, sel_mass)
            if cand > best:
                best = cand
    return best
