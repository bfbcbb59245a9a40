"""Pure-Python mirrors of the compiled kernels.

Same contracts as `maxtype._kernels`, implemented independently with
plain Python integers (hence no overflow caps).  Used as the import-time
fallback when the compiled extension is unavailable, and as the
cross-check implementation in the test suite and benchmarks.
"""

from __future__ import annotations

from fractions import Fraction


def _block_of(k: int, i: int, t: int) -> int:
    """Dyadic block (granularity 2^(i-1)) containing leaf index k, 1-based."""
    return ((k - 1) << (i - 1)) // t + 1


def _metric(gen, ka, na, ia, ja, kb, nb, ib, jb, tau):
    if na != nb:
        return 2
    if gen == 0:
        if ka == kb:
            return 2
        if ka == 2:  # swap so a is the branch
            ka, kb = kb, ka
            ia, ib = ib, ia
            ja, jb = jb, ja
        if ib < ia:
            return 2
        return 1 if _block_of(jb, ia, tau[na, ib]) == ja else 2
    if ka == 0 and kb == 0:
        return 1
    if ka == kb:
        return 2
    if ka > kb:
        ka, kb = kb, ka
        ia, ib = ib, ia
        ja, jb = jb, ja
    if ka == 0 and kb == 1:
        if ib < ia:
            return 2
        return 1 if _block_of(jb, ia, tau[na, ib]) == ja else 2
    if ka == 1 and kb == 2:
        return 1 if (ia == ib and ja == jb) else 2
    return 2


def _star_member(gen, ka, na, ia, ja, kb, nb, ib, jb, tau):
    if na != nb:
        return 0
    if gen == 0:
        if ka == 0:
            if kb != 2 or ib < ia:
                return 0
            lo = ((ja - 1) * tau[na, ib]) >> (ia - 1)
            hi = (ja * tau[na, ib]) >> (ia - 1)
            return 1 if lo < jb <= hi else 0
        if ka != 2 or kb != 0 or ib > ia:
            return 0
        return 1 if _block_of(ja, ib, tau[na, ia]) == jb else 0
    if ka == 0:
        if kb == 0:
            return 1
        if kb != 1 or ib < ia:
            return 0
        lo = ((ja - 1) * tau[na, ib]) >> (ia - 1)
        hi = (ja * tau[na, ib]) >> (ia - 1)
        return 1 if lo < jb <= hi else 0
    if ka == 1:
        if kb == 2:
            return 1 if (ia == ib and ja == jb) else 0
        if kb != 0 or ib > ia:
            return 0
        return 1 if _block_of(ja, ib, tau[na, ia]) == jb else 0
    return 1 if (kb == 1 and ia == ib and ja == jb) else 0


def ball_scan_mismatches(gen, kind, nn, ii, jk, tau):
    """All-pairs dual check; see `_kernels.ball_scan_mismatches`.

    `tau` may be a numpy array, a dict keyed by (n, i), or anything else
    supporting `tau[n, i]`.
    """
    kind = [int(v) for v in kind]
    nn = [int(v) for v in nn]
    ii = [int(v) for v in ii]
    jk = [int(v) for v in jk]
    tv = tau
    P = len(kind)
    bad = 0
    for c in range(P):
        kc, nc, ic, jc = kind[c], nn[c], ii[c], jk[c]
        for y in range(P):
            if y == c:
                d, m15 = 0, 1
            else:
                d = _metric(gen, kc, nc, ic, jc, kind[y], nn[y], ii[y], jk[y], tv)
                m15 = _star_member(gen, kc, nc, ic, jc, kind[y], nn[y], ii[y], jk[y], tv)
            if (d < 1) != (y == c):
                bad += 1
            if (d <= 1) != (m15 != 0):
                bad += 1
            if d > 2:
                bad += 1
    return P * P, bad


def exhaustive_rwt_scan(weights, ball_members, full_mass, p_exp):
    """Gray-code walk of all nonempty subsets; see `_kernels` docstring.

    Exact arithmetic on Python integers throughout; no size caps beyond
    the 22-point subset bound.
    """
    P = len(weights)
    if P > 22:
        raise ValueError("exhaustive scan capped at 22 points")
    p_exp = int(p_exp)
    if p_exp < 1:
        raise ValueError("p must be a positive integer")
    w = [int(v) for v in weights]
    full_mass = int(full_mass)
    B = len(ball_members)
    bmass = [sum(w[t] for t in ball) for ball in ball_members]
    bsel = [0] * B
    point_balls = [[] for _ in range(P)]
    for b, ball in enumerate(ball_members):
        for t in ball:
            point_balls[t].append(b)

    best = (0, 1, 0)  # num, den, mask
    best_frac = Fraction(0)
    sel_mass = 0
    gray_prev = 0
    for m in range(1, (1 << P)):
        gray = m ^ (m >> 1)
        diff = gray ^ gray_prev
        gray_prev = gray
        while diff:
            flip = (diff & -diff).bit_length() - 1
            diff &= diff - 1
            if (gray >> flip) & 1:
                sel_mass += w[flip]
                for b in point_balls[flip]:
                    bsel[b] += w[flip]
            else:
                sel_mass -= w[flip]
                for b in point_balls[flip]:
                    bsel[b] -= w[flip]
        vals = []
        for j in range(P):
            if (gray >> j) & 1:
                v = Fraction(1)
            else:
                v = Fraction(sel_mass, full_mass)
            for b in point_balls[j]:
                cand = Fraction(bsel[b], bmass[b])
                if cand > v:
                    v = cand
            vals.append(v)
        order = sorted(range(P), key=lambda j: vals[j])
        cum = 0
        for t in range(P - 1, -1, -1):
            j = order[t]
            cum += w[j]
            if t > 0 and vals[order[t - 1]] == vals[j]:
                continue
            if vals[j] == 0:
                continue
            cand = vals[j] ** p_exp * Fraction(cum, sel_mass)
            if cand > best_frac:
                best_frac = cand
                best = (cand.numerator, cand.denominator, gray)
    return best
