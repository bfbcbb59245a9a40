# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Two inner loops dominate the verification workload and are far too slow in
interpreted Python at production sizes:

* the all-pairs ball-equivalence scan (metric rule vs closed-form ball
  case list, every center, every point, all three representative radii);
* the exhaustive subset walk of the restricted-weak-type search on small
  explicit spaces (Gray-code updates over every nonempty subset, exact
  integer arithmetic).

Pure-Python mirrors live in `maxtype.kernels_py`; `maxtype.kernels`
selects the implementation at import time and the test suite checks the
two against each other on small inputs.
"""

from libc.stdlib cimport free, malloc


cdef inline long long _block_of(long long k, long long i, long long t) nogil:
    # dyadic block (granularity 2^(i-1)) containing leaf index k, 1-based
    return ((k - 1) << (i - 1)) / t + 1


cdef inline int _metric(int gen, int ka, long long na, long long ia, long long ja,
                        int kb, long long nb, long long ib, long long jb,
                        long long[:, :] tau) nogil:
    # distance rule; assumes the two points are different
    cdef int tk
    cdef long long tl
    if na != nb:
        return 2
    if gen == 0:
        if ka == kb:
            return 2
        if ka == 2:  # swap so a is the branch
            tk = ka; ka = kb; kb = tk
            tl = ia; ia = ib; ib = tl
            tl = ja; ja = jb; jb = tl
        if ib < ia:
            return 2
        return 1 if _block_of(jb, ia, tau[na, ib]) == ja else 2
    # second generation: 0 branch, 1 middle, 2 leaf
    if ka == 0 and kb == 0:
        return 1
    if ka == kb:
        return 2
    if ka > kb:
        tk = ka; ka = kb; kb = tk
        tl = ia; ia = ib; ib = tl
        tl = ja; ja = jb; jb = tl
    if ka == 0 and kb == 1:
        if ib < ia:
            return 2
        return 1 if _block_of(jb, ia, tau[na, ib]) == ja else 2
    if ka == 1 and kb == 2:
        return 1 if (ia == ib and ja == jb) else 2
    return 2


cdef inline int _star_member(int gen, int ka, long long na, long long ia, long long ja,
                             int kb, long long nb, long long ib, long long jb,
                             long long[:, :] tau) nogil:
    # closed-form case list for the middle radius 1 < r <= 2, center = a;
    # assumes the two points are different (the center itself is handled
    # by the caller)
    cdef long long lo, hi
    if na != nb:
        return 0
    if gen == 0:
        if ka == 0:
            # branch center: the nested dyadic leaf block
            if kb != 2 or ib < ia:
                return 0
            lo = ((ja - 1) * tau[na, ib]) >> (ia - 1)
            hi = (ja * tau[na, ib]) >> (ia - 1)
            return 1 if (lo < jb <= hi) else 0
        # leaf center: the branch chain above it
        if ka != 2 or kb != 0 or ib > ia:
            return 0
        return 1 if _block_of(ja, ib, tau[na, ia]) == jb else 0
    if ka == 0:
        if kb == 0:
            return 1  # all branches of the level are mutually at distance 1
        if kb != 1 or ib < ia:
            return 0
        lo = ((ja - 1) * tau[na, ib]) >> (ia - 1)
        hi = (ja * tau[na, ib]) >> (ia - 1)
        return 1 if (lo < jb <= hi) else 0
    if ka == 1:
        if kb == 2:  # the paired leaf
            return 1 if (ia == ib and ja == jb) else 0
        if kb != 0 or ib > ia:
            return 0
        return 1 if _block_of(ja, ib, tau[na, ia]) == jb else 0
    # leaf center: only the paired middle point
    return 1 if (kb == 1 and ia == ib and ja == jb) else 0


def ball_scan_mismatches(int gen, int[:] kind, long long[:] nn, long long[:] ii,
                         long long[:] jk, long long[:, :] tau):
    """All-pairs dual check of the metric scan against the ball case list.

    For every ordered pair (center, point) and the representative radii
    {1, 1.5, 2.5} the scan membership (dist < r) is compared against the
    independently coded closed-form membership.  Returns
    (pairs_checked, mismatches).
    """
    cdef Py_ssize_t P = kind.shape[0]
    cdef Py_ssize_t c, y
    cdef long long bad = 0
    cdef int d, m15, kc
    cdef long long nc, ic, jc
    with nogil:
        for c in range(P):
            kc = kind[c]; nc = nn[c]; ic = ii[c]; jc = jk[c]
            for y in range(P):
                if y == c:
                    d = 0
                    m15 = 1
                else:
                    d = _metric(gen, kc, nc, ic, jc, kind[y], nn[y], ii[y], jk[y], tau)
                    m15 = _star_member(gen, kc, nc, ic, jc, kind[y], nn[y], ii[y], jk[y], tau)
                # r = 1: the open ball is the singleton
                if (d < 1) != (y == c):
                    bad += 1
                # r = 1.5: the star
                if (d <= 1) != (m15 != 0):
                    bad += 1
                # r = 2.5: the whole truncation (distances never exceed 2)
                if d > 2:
                    bad += 1
    return P * P, int(bad)


def exhaustive_rwt_scan(weights_in, ball_members, full_mass_in, p_exp_in):
    """Walk every nonempty subset of a small explicit space in Gray order.

    `weights_in` are exact integer-scaled point masses, `ball_members` the
    distinct non-singleton balls as index tuples.  For each subset U the
    non-centered maximal function of chi_U is formed (max over singleton,
    containing balls, whole space), the superlevel masses are swept and
    sup_v v^p mu{M chi_U >= v} / mu(U) is tracked, all in exact integer
    arithmetic (p a positive integer).  Returns (num, den, mask) with the
    best functional value num/den and the realizing subset bitmask.

    Fits in 64-bit arithmetic provided weights, full_mass and their p-th
    powers stay below 2^62; the caller (maxtype.kernels) checks this and
    falls back to the pure-Python mirror otherwise.
    """
    cdef Py_ssize_t P = len(weights_in)
    if P > 22:
        raise ValueError("exhaustive scan capped at 22 points")
    cdef int p_exp = int(p_exp_in)
    if p_exp < 1:
        raise ValueError("p must be a positive integer")
    cdef long long full_mass = int(full_mass_in)
    cdef Py_ssize_t B = len(ball_members)
    cdef Py_ssize_t b, t, j, i, q
    cdef long long *w = <long long *> malloc(P * sizeof(long long))
    for j in range(P):
        w[j] = int(weights_in[j])
    cdef long long *bmass = <long long *> malloc((B if B else 1) * sizeof(long long))
    cdef long long *bsel = <long long *> malloc((B if B else 1) * sizeof(long long))
    cdef long long s
    point_balls = [[] for _ in range(P)]
    for b in range(B):
        s = 0
        for t in ball_members[b]:
            s += w[t]
            point_balls[t].append(b)
        bmass[b] = s
        bsel[b] = 0
    cdef int total_refs = 0
    for j in range(P):
        total_refs += len(point_balls[j])
    cdef int *poff = <int *> malloc((P + 1) * sizeof(int))
    cdef int *pball = <int *> malloc((total_refs if total_refs else 1) * sizeof(int))
    cdef int pos = 0
    for j in range(P):
        poff[j] = pos
        for b in point_balls[j]:
            pball[pos] = b
            pos += 1
    poff[P] = pos

    # per-point value of M chi_U as an exact fraction
    cdef long long *vnum = <long long *> malloc(P * sizeof(long long))
    cdef long long *vden = <long long *> malloc(P * sizeof(long long))
    cdef int *order = <int *> malloc(P * sizeof(int))

    cdef long long sel_mass = 0
    cdef unsigned long long gray_prev = 0, gray, diff, m
    cdef unsigned long long nmask = (<unsigned long long> 1 << P) - 1
    cdef int flip, key
    cdef long long cum, cnum, cden, cand_num, cand_den
    cdef long long best_num = 0, best_den = 1
    cdef unsigned long long best_mask = 0
    cdef int improved

    with nogil:
        for m in range(1, nmask + 1):
            gray = m ^ (m >> 1)
            diff = gray ^ gray_prev
            gray_prev = gray
            while diff:
                flip = 0
                while not ((diff >> flip) & 1):
                    flip += 1
                diff &= diff - <unsigned long long> 1
                if (gray >> flip) & 1:
                    sel_mass += w[flip]
                    for i in range(poff[flip], poff[flip + 1]):
                        bsel[pball[i]] += w[flip]
                else:
                    sel_mass -= w[flip]
                    for i in range(poff[flip], poff[flip + 1]):
                        bsel[pball[i]] -= w[flip]
            for j in range(P):
                if (gray >> j) & 1:
                    vnum[j] = 1; vden[j] = 1
                else:
                    vnum[j] = sel_mass; vden[j] = full_mass
                for i in range(poff[j], poff[j + 1]):
                    b = pball[i]
                    if bsel[b] * vden[j] > vnum[j] * bmass[b]:
                        vnum[j] = bsel[b]; vden[j] = bmass[b]
            # insertion sort of the point indices by value, ascending
            for j in range(P):
                key = j
                q = j
                while q > 0 and vnum[order[q - 1]] * vden[key] > vnum[key] * vden[order[q - 1]]:
                    order[q] = order[q - 1]
                    q -= 1
                order[q] = key
            # superlevel sweep over distinct values, descending
            cum = 0
            for t in range(P - 1, -1, -1):
                j = order[t]
                cum += w[j]
                if t > 0 and vnum[order[t - 1]] * vden[j] == vnum[j] * vden[order[t - 1]]:
                    continue  # same value: keep accumulating
                if vnum[j] == 0:
                    continue
                cnum = 1; cden = 1
                for q in range(p_exp):
                    cnum *= vnum[j]
                    cden *= vden[j]
                cand_num = cnum * cum
                cand_den = cden * sel_mass
                if cand_num * best_den > best_num * cand_den:
                    best_num = cand_num
                    best_den = cand_den
                    best_mask = gray
    res = (int(best_num), int(best_den), int(best_mask))
    free(w); free(bmass); free(bsel)
    free(poff); free(pball); free(vnum); free(vden); free(order)
    return res
