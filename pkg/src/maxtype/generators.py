"""Construction of the two-layer and three-layer branch/leaf space families.

The first-generation family X has, per level n, branch points x_{n,i,j}
(i = 1..n, j = 1..2^(i-1)) and leaf points x'_{n,i,k} (k = 1..tau_{n,i}).
Distance is 1 exactly between a branch (n,i,j) and the leaves of its dyadic
block, 2 otherwise.  The second-generation family Y inserts a cheap middle
layer y^o between branches and leaves and makes all branches of a level
mutually adjacent.  Masses are d_n * F(n,i) (branch), d_n * m_n * i (leaf)
and d_n * G(n) (middle), where d_n is normalized so each level carries half
the mass of the previous one.

Both families can be built explicitly (every point stored) or in quotient
mode, where leaves are grouped into their finest dyadic blocks: within such
a block all points are mutually exchangeable, so one stored orbit with a
multiplicity represents the whole block exactly.  Orbit blocks may be split
into a "selected" and a "rest" part to represent characteristic functions
of partial blocks while staying in quotient mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import gmpy2

from .core import BallSet, Space, SpaceError, make_ballset
from .scalar import scalar, tree_sum, two_pow

DEFAULT_POINT_CAP = 2_000_000


class ParamError(ValueError):
    pass


# -- parameter bundle ----------------------------------------------------


@dataclass(frozen=True)
class GenParams:
    """Parameter bundle: p0, floor(a_i), tau, F, m and (optionally) G.

    Numeric entries are exact `Fraction`s whenever the construction allows
    (1/(p0-1) integral, or hand-built integer parameters); otherwise mpfr.
    """

    p0: Fraction
    nmax: int
    tau: Mapping[tuple, int]
    F: Mapping[tuple, object]
    m: Mapping[int, object]
    a_floor: Mapping[int, int]
    G: Optional[Mapping[int, object]] = None
    preset: bool = False

    @property
    def is_exact(self) -> bool:
        vals = list(self.F.values()) + list(self.m.values())
        if self.G is not None:
            vals += list(self.G.values())
        return all(isinstance(v, Fraction) for v in vals)

    def sum_tau(self, n: int) -> int:
        return sum(self.tau[(n, i)] for i in range(1, n + 1))

    def levels(self):
        return range(1, self.nmax + 1)


def _as_fraction_p0(p0) -> Fraction:
    if isinstance(p0, str):
        p0 = Fraction(p0)
    p0 = Fraction(p0)
    if p0 <= 1:
        raise ParamError("p0 must be greater than 1")
    return p0


def floor_a(p0, i: int) -> int:
    """floor(a_i) with a_1 = 1 and a_i = i^p0 - (i-1)^p0.

    Exact for integer p0.  For fractional p0 the value is bracketed with
    directed-rounding evaluations at increasing precision until the floor
    is unambiguous.
    """
    p0 = _as_fraction_p0(p0)
    if i < 1:
        raise ParamError("index must be positive")
    if i == 1:
        return 1
    if p0.denominator == 1:
        p = p0.numerator
        return i**p - (i - 1) ** p
    for prec in (192, 384, 768, 1536, 4096, 16384):
        with gmpy2.context(precision=prec, round=gmpy2.RoundDown,
                           emax=gmpy2.get_context().emax,
                           emin=gmpy2.get_context().emin):
            lo = gmpy2.mpfr(i) ** gmpy2.mpfr(gmpy2.mpq(p0)) - _pow_up(i - 1, p0)
        with gmpy2.context(precision=prec, round=gmpy2.RoundUp,
                           emax=gmpy2.get_context().emax,
                           emin=gmpy2.get_context().emin):
            hi = gmpy2.mpfr(i) ** gmpy2.mpfr(gmpy2.mpq(p0)) - _pow_down(i - 1, p0)
        flo = int(gmpy2.floor(lo))
        fhi = int(gmpy2.floor(hi))
        if flo == fhi:
            return flo
    raise ParamError(f"could not resolve floor(a_{i}) for p0={p0}")


def _pow_rounded(base: int, p0: Fraction, mode):
    ctx = gmpy2.get_context().copy()
    ctx.round = mode
    with ctx:
        return gmpy2.mpfr(base) ** gmpy2.mpfr(gmpy2.mpq(p0))


def _pow_up(base: int, p0: Fraction):
    return _pow_rounded(base, p0, gmpy2.RoundUp)


def _pow_down(base: int, p0: Fraction):
    return _pow_rounded(base, p0, gmpy2.RoundDown)


def derive_sequences(p0, nmax: int) -> GenParams:
    """The preset bundle: tau, F, m from the closed forms, plus G.

    tau is computed in exact big-integer arithmetic; F, m, G stay exact
    rationals when 1/(p0-1) is an integer and fall back to mpfr otherwise.
    """
    p0 = _as_fraction_p0(p0)
    if nmax < 1:
        raise ParamError("nmax must be at least 1")
    inv = Fraction(1) / (p0 - 1)
    fp0 = math.floor(p0)
    exact = inv.denominator == 1

    a = {i: floor_a(p0, i) for i in range(1, nmax + 1)}
    tau = {}
    F: dict = {}
    m: dict = {}
    G: dict = {}
    for n in range(1, nmax + 1):
        fact = math.factorial(n)
        for i in range(1, n + 1):
            assert fact % i == 0
            tau[(n, i)] = a[i] * (1 << (2 * n * fp0)) * (fact // i)
            e = (i - n) * inv
            F[(n, i)] = _pow2_exact(e) if exact else two_pow(scalar(e))
        em = (2 * n * fp0 - n) * inv
        if exact:
            m[n] = _pow2_exact(em) * Fraction(fact) ** inv.numerator
        else:
            m[n] = two_pow(scalar(em)) * scalar(fact) ** scalar(inv)
        st = sum(tau[(n, i)] for i in range(1, n + 1))
        eg = (1 - n) * inv
        if exact:
            G[n] = _pow2_exact(eg) / st
        else:
            G[n] = two_pow(scalar(eg)) / scalar(st)
    return GenParams(p0=p0, nmax=nmax, tau=tau, F=F, m=m, a_floor=a, G=G, preset=True)


def _pow2_exact(e: Fraction) -> Fraction:
    assert e.denominator == 1
    e = e.numerator
    return Fraction(2) ** e


def validate_params(params: GenParams, generation: str = "first") -> list:
    """Check the construction constraints; returns a list of violations."""
    out = []
    if params.p0 <= 1:
        out.append("p0 <= 1")
    for n in params.levels():
        for i in range(1, n + 1):
            t = params.tau.get((n, i))
            if t is None or t < 1:
                out.append(f"tau_{{{n},{i}}} missing or nonpositive")
                continue
            if t % (1 << (i - 1)) != 0:
                out.append(f"tau_{{{n},{i}}}/2^{i-1} not an integer")
            fv = params.F.get((n, i))
            if fv is None or not (0 < _num(fv) <= 1):
                out.append(f"F({n},{i}) outside (0, 1]")
        mv = params.m.get(n)
        if mv is None or _num(mv) < (1 << n):
            out.append(f"m_{n} < 2^{n}")
        if generation == "second":
            gv = None if params.G is None else params.G.get(n)
            if gv is None:
                out.append(f"G({n}) missing")
            elif not (0 < _num(gv) * params.sum_tau(n) <= 1):
                out.append(f"G({n}) outside (0, 1/sum tau]")
        if params.preset:
            # tau * i / m^(p0-1) = 2^n * floor(a_i), checked numerically
            mv_s = scalar(_num(params.m[n]))
            for i in range(1, n + 1):
                lhs = scalar(params.tau[(n, i)]) * i / mv_s ** scalar(params.p0 - 1)
                rhs = scalar((1 << n) * params.a_floor[i])
                if abs(lhs - rhs) > abs(rhs) * scalar("1e-30"):
                    out.append(f"preset identity fails at (n,i)=({n},{i})")
    return out


def _num(v):
    return scalar(v) if not isinstance(v, Fraction) else v


def normalization_weights(params: GenParams, generation: str = "first") -> dict:
    """Level scalings d_n making mu(level n) = mu(level n-1)/2, d_1 = 1.

    Works on the per-level weight W_n (level mass with d_n factored out):
    d_n = d_{n-1} * W_{n-1} / (2 W_n).  Exact rational when the parameter
    bundle is exact.
    """
    exact = params.is_exact
    W = {}
    for n in params.levels():
        if exact:
            w = Fraction(0)
            for i in range(1, n + 1):
                w += (1 << (i - 1)) * params.F[(n, i)]
                w += params.m[n] * params.tau[(n, i)] * i
                if generation == "second":
                    w += params.G[n] * params.tau[(n, i)]
            W[n] = w
        else:
            terms = []
            for i in range(1, n + 1):
                terms.append(scalar(1 << (i - 1)) * scalar(_num(params.F[(n, i)])))
                terms.append(scalar(_num(params.m[n])) * scalar(params.tau[(n, i)] * i))
                if generation == "second":
                    terms.append(scalar(_num(params.G[n])) * scalar(params.tau[(n, i)]))
            W[n] = tree_sum(terms)
    d = {1: Fraction(1) if exact else scalar(1)}
    for n in range(2, params.nmax + 1):
        d[n] = d[n - 1] * W[n - 1] / (2 * W[n])
    return d


# -- structural ball provider -------------------------------------------


def _anc_block(jprime: int, i_fine: int, i_coarse: int) -> int:
    """Index of the granularity-2^(i_coarse-1) block containing fine block jprime."""
    return ((jprime - 1) >> (i_fine - i_coarse)) + 1


class GenStructure:
    """Structural ball families for a generated space.

    Knows, per orbit, the three distinct balls centered at any of its
    points (singleton / star / whole truncation) and can enumerate every
    distinct ball of the space for the non-centered operator.
    """

    def __init__(self, generation: str, params: GenParams, d: dict):
        self.generation = generation
        self.params = params
        self.d = d
        # filled by the builder:
        self.branch_orbits = {}   # n -> list of (i, j, orbit_index)
        self.block_parts = {}     # ("xl"|"ym"|"yl", n, i, j) -> list of (orbit_index, count)
        self.orbit_info = []      # per orbit: dict describing role
        self._classes_cache = None
        self._star_cache = {}

    # ordered [singleton, star, full]
    def centered_balls(self, space: Space, oi: int) -> list:
        star = self._star_cache.get(oi)
        if star is None:
            star = self._star(space, oi, self.orbit_info[oi])
            self._star_cache[oi] = star
        return [make_ballset([(oi, 1)]), star, space.full_ballset()]

    def ball(self, space: Space, oi: int, radius) -> BallSet:
        singleton, star, full = self.centered_balls(space, oi)
        if radius <= 1:
            return singleton
        if radius <= 2:
            return star
        return full

    def _star(self, space: Space, oi: int, info) -> BallSet:
        n = info["n"]
        kind = info["kind"]
        if kind == "branch":
            i, j = info["i"], info["j"]
            pairs = [(oi, 1)]
            if self.generation == "second":
                pairs = [(b, 1) for (_, _, b) in self.branch_orbits[n]]
            layer = "xl" if self.generation == "first" else "ym"
            for i2 in range(i, n + 1):
                lo = (j - 1) << (i2 - i)
                for j2 in range(lo + 1, lo + (1 << (i2 - i)) + 1):
                    pairs.extend(self.block_parts[(layer, n, i2, j2)])
            return make_ballset(pairs)
        if kind in ("leaf", "mid") and self.generation == "second":
            partner = info["partner"]
            pairs = [(oi, 1), (partner, 1)]
            if kind == "mid":
                i2, j2 = info["i"], info["j"]
                for i in range(1, i2 + 1):
                    b = self._branch_orbit(n, i, _anc_block(j2, i2, i))
                    pairs.append((b, 1))
            return make_ballset(pairs)
        # first generation leaf block
        i2, j2 = info["i"], info["j"]
        pairs = [(oi, 1)]
        for i in range(1, i2 + 1):
            pairs.append((self._branch_orbit(n, i, _anc_block(j2, i2, i)), 1))
        return make_ballset(pairs)

    def _branch_orbit(self, n, i, j):
        for (bi, bj, oi) in self.branch_orbits[n]:
            if bi == i and bj == j:
                return oi
        raise SpaceError(f"no branch orbit ({n},{i},{j})")

    def all_classes(self, space: Space):
        """Deduplicated distinct balls plus, per orbit, the classes that
        contain at least one of its points."""
        if self._classes_cache is not None:
            return self._classes_cache
        seen = {}
        order = []
        for oi in range(len(space)):
            for b in self.centered_balls(space, oi):
                if b not in seen:
                    seen[b] = len(order)
                    order.append(b)
        touch = [[] for _ in range(len(space))]
        for ci, b in enumerate(order):
            for i, c in b:
                touch[i].append(ci)
        self._classes_cache = (order, touch)
        return self._classes_cache


# -- explicit metric and closed-form balls ------------------------------


def _first_gen_dist(kinds, ns, iis, jks, tau):
    def dist(a: int, b: int) -> int:
        if a == b:
            return 0
        if ns[a] != ns[b] or kinds[a] == kinds[b]:
            return 2
        if kinds[a] == 2:  # make a the branch
            a, b = b, a
        n, i, j = ns[a], iis[a], jks[a]
        i2, k = iis[b], jks[b]
        if i2 < i:
            return 2
        # leaf k lies in dyadic block j at granularity 2^(i-1)
        blk = ((k - 1) << (i - 1)) // tau[(n, i2)] + 1
        return 1 if blk == j else 2

    return dist


def _second_gen_dist(kinds, ns, iis, jks, tau):
    # kinds: 0 branch, 1 middle, 2 leaf
    def dist(a: int, b: int) -> int:
        if a == b:
            return 0
        if ns[a] != ns[b]:
            return 2
        ka, kb = kinds[a], kinds[b]
        if ka == 0 and kb == 0:
            return 1
        if ka == kb:
            return 2
        if ka > kb:
            a, b = b, a
            ka, kb = kb, ka
        if ka == 0 and kb == 1:
            n, i, j = ns[a], iis[a], jks[a]
            i2, k = iis[b], jks[b]
            if i2 < i:
                return 2
            blk = ((k - 1) << (i - 1)) // tau[(n, i2)] + 1
            return 1 if blk == j else 2
        if ka == 1 and kb == 2:
            return 1 if (iis[a] == iis[b] and jks[a] == jks[b]) else 2
        return 2

    return dist


def structural_ball(space: Space, center, radius) -> BallSet:
    """Closed-form ball from the explicit case list (no distance scan).

    Must agree with the generic `core.ball` on every input; glued or
    foreign spaces are rejected.
    """
    if radius <= 0:
        raise SpaceError("radius must be positive")
    st = space.structure
    if st is None or not isinstance(st, GenStructure):
        raise SpaceError("structural balls require a generated space")
    ci = space.idx(center)
    if space.mode == "quotient":
        return st.ball(space, ci, radius)
    if radius <= 1:
        return make_ballset([(ci, 1)])
    if radius > 2:
        return space.full_ballset()
    lab = space.labels[ci]
    params = st.params
    idx = space.index
    pairs = [(ci, 1)]
    if lab[0] in ("xb", "yb"):
        _, n, i, j = lab
        if lab[0] == "yb":
            pairs = [(idx[("yb", n, bi, bj)], 1)
                     for bi in range(1, n + 1) for bj in range(1, (1 << (bi - 1)) + 1)]
        layer = "xl" if lab[0] == "xb" else "ym"
        for i2 in range(i, n + 1):
            t = params.tau[(n, i2)]
            lo = (j - 1) * t >> (i - 1)
            hi = j * t >> (i - 1)
            pairs.extend((idx[(layer, n, i2, k)], 1) for k in range(lo + 1, hi + 1))
    elif lab[0] == "xl":
        _, n, i2, k = lab
        for i in range(1, i2 + 1):
            blk = ((k - 1) << (i - 1)) // params.tau[(n, i2)] + 1
            pairs.append((idx[("xb", n, i, blk)], 1))
    elif lab[0] == "ym":
        _, n, i2, k = lab
        pairs.append((idx[("yl", n, i2, k)], 1))
        for i in range(1, i2 + 1):
            blk = ((k - 1) << (i - 1)) // params.tau[(n, i2)] + 1
            pairs.append((idx[("yb", n, i, blk)], 1))
    elif lab[0] == "yl":
        _, n, i2, k = lab
        pairs.append((idx[("ym", n, i2, k)], 1))
    else:
        raise SpaceError(f"foreign point label {lab!r}")
    return make_ballset(pairs)


# -- builders ------------------------------------------------------------


def build_first_gen(params: GenParams, mode: str = "explicit",
                    splits: Optional[dict] = None,
                    cap: int = DEFAULT_POINT_CAP) -> Space:
    return _build(params, "first", mode, splits, cap)


def build_second_gen(params: GenParams, mode: str = "explicit",
                     splits: Optional[dict] = None,
                     cap: int = DEFAULT_POINT_CAP) -> Space:
    if params.G is None:
        raise ParamError("second generation requires G")
    return _build(params, "second", mode, splits, cap)


def _build(params, generation, mode, splits, cap):
    violations = validate_params(params, generation)
    if violations:
        raise ParamError("invalid parameters: " + "; ".join(violations))
    d = normalization_weights(params, generation)
    if mode == "explicit":
        if splits:
            raise ParamError("splits apply to quotient mode only")
        return _build_explicit(params, generation, d, cap)
    if mode == "quotient":
        return _build_quotient(params, generation, d, splits or {})
    raise ParamError(f"unknown mode {mode!r}")


def _build_explicit(params, generation, d, cap):
    total = 0
    layers = 2 if generation == "first" else 3
    for n in params.levels():
        total += (1 << n) - 1 + (layers - 1) * params.sum_tau(n)
        if total > cap:
            raise SpaceError(
                f"explicit mode needs {total}+ points, over the cap {cap}")
    labels = []
    masses = []
    exact = params.is_exact
    exact_masses = [] if exact else None
    kinds, ns, iis, jks = [], [], [], []

    def add(lab, mass, kind):
        labels.append(lab)
        masses.append(scalar(_num(mass)))
        if exact:
            exact_masses.append(mass)
        kinds.append(kind)
        ns.append(lab[1])
        iis.append(lab[2])
        jks.append(lab[3])

    bprefix = "xb" if generation == "first" else "yb"
    for n in params.levels():
        dn = d[n]
        for i in range(1, n + 1):
            for j in range(1, (1 << (i - 1)) + 1):
                add((bprefix, n, i, j), _mul(dn, params.F[(n, i)]), 0)
        if generation == "second":
            for i in range(1, n + 1):
                for k in range(1, params.tau[(n, i)] + 1):
                    add(("ym", n, i, k), _mul(dn, params.G[n]), 1)
        lprefix = "xl" if generation == "first" else "yl"
        for i in range(1, n + 1):
            leafmass = _mul(_mul(dn, params.m[n]), i)
            for k in range(1, params.tau[(n, i)] + 1):
                add((lprefix, n, i, k), leafmass, 2)
    distf = (_first_gen_dist if generation == "first" else _second_gen_dist)(
        kinds, ns, iis, jks, params.tau)
    st = GenStructure(generation, params, d)
    return Space("explicit", labels, masses, dist=distf, structure=st,
                 exact_masses=exact_masses,
                 meta={"generation": generation, "mode": "explicit",
                       "p0": str(params.p0), "nmax": params.nmax})


def _mul(a, b):
    if isinstance(a, Fraction) and isinstance(b, (Fraction, int)):
        return a * b
    return scalar(_num(a)) * scalar(_num(b) if not isinstance(b, int) else b)


def _build_quotient(params, generation, d, splits):
    st = GenStructure(generation, params, d)
    labels = []
    masses = []
    mults = []
    exact = params.is_exact
    exact_masses = [] if exact else None
    info = []

    def add(lab, mass, mult, inf):
        labels.append(lab)
        masses.append(scalar(_num(mass)))
        if exact:
            exact_masses.append(mass)
        mults.append(mult)
        info.append(inf)
        return len(labels) - 1

    bprefix = "xb" if generation == "first" else "yb"
    for n in params.levels():
        dn = d[n]
        st.branch_orbits[n] = []
        for i in range(1, n + 1):
            for j in range(1, (1 << (i - 1)) + 1):
                oi = add((bprefix, n, i, j), _mul(dn, params.F[(n, i)]), 1,
                         {"kind": "branch", "n": n, "i": i, "j": j})
                st.branch_orbits[n].append((i, j, oi))
        for i in range(1, n + 1):
            w = params.tau[(n, i)] >> (i - 1)
            for j in range(1, (1 << (i - 1)) + 1):
                c = splits.get((n, i, j), None)
                if c is not None and not (0 < c < w):
                    raise ParamError(f"split count for block ({n},{i},{j}) "
                                     f"must be in (0, {w})")
                if generation == "first":
                    leafmass = _mul(_mul(dn, params.m[n]), i)
                    parts = []
                    if c is None:
                        oi = add(("xl", n, i, j), leafmass, w,
                                 {"kind": "leaf", "n": n, "i": i, "j": j})
                        parts.append((oi, w))
                    else:
                        for tag, cnt in ((1, c), (0, w - c)):
                            oi = add(("xl", n, i, j, tag), leafmass, cnt,
                                     {"kind": "leaf", "n": n, "i": i, "j": j})
                            parts.append((oi, cnt))
                    st.block_parts[("xl", n, i, j)] = parts
                else:
                    midmass = _mul(dn, params.G[n])
                    leafmass = _mul(_mul(dn, params.m[n]), i)
                    mparts, lparts = [], []
                    pieces = [(None, w)] if c is None else [(1, c), (0, w - c)]
                    for tag, cnt in pieces:
                        mlab = ("ym", n, i, j) if tag is None else ("ym", n, i, j, tag)
                        llab = ("yl", n, i, j) if tag is None else ("yl", n, i, j, tag)
                        mo = add(mlab, midmass, cnt,
                                 {"kind": "mid", "n": n, "i": i, "j": j})
                        lo = add(llab, leafmass, cnt,
                                 {"kind": "leaf", "n": n, "i": i, "j": j})
                        info[mo]["partner"] = lo
                        info[lo]["partner"] = mo
                        mparts.append((mo, cnt))
                        lparts.append((lo, cnt))
                    st.block_parts[("ym", n, i, j)] = mparts
                    st.block_parts[("yl", n, i, j)] = lparts
    st.orbit_info = info
    return Space("quotient", labels, masses, mults=mults, structure=st,
                 exact_masses=exact_masses,
                 meta={"generation": generation, "mode": "quotient",
                       "p0": str(params.p0), "nmax": params.nmax,
                       "splits": dict(splits)})


def tiny_custom_params() -> GenParams:
    """Hand-built 9-point first-generation bundle used as an oracle fixture:
    tau_{1,1}=1, tau_{2,1}=tau_{2,2}=2, F = 1, m_n = 2^n."""
    tau = {(1, 1): 1, (2, 1): 2, (2, 2): 2}
    return GenParams(
        p0=Fraction(2), nmax=2, tau=tau,
        F={k: Fraction(1) for k in tau},
        m={1: Fraction(2), 2: Fraction(4)},
        a_floor={}, G=None, preset=False)


# -- gluing --------------------------------------------------------------


def glue(a: Space, b: Space) -> Space:
    """Disjoint union at mutual distance 2 with summed measure.

    Point labels are namespaced ("A", label) / ("B", label); within-part
    distances and masses are preserved.  Explicit mode only.
    """
    if a.mode != "explicit" or b.mode != "explicit":
        raise SpaceError("glue requires explicit spaces")
    labels = [("A", lab) for lab in a.labels] + [("B", lab) for lab in b.labels]
    masses = list(a.masses) + list(b.masses)
    na = len(a)
    da, db = a.dist, b.dist

    def dist(x: int, y: int) -> int:
        if x == y:
            return 0
        if x < na and y < na:
            return da(x, y)
        if x >= na and y >= na:
            return db(x - na, y - na)
        return 2

    exact = None
    if a.exact_masses is not None and b.exact_masses is not None:
        exact = list(a.exact_masses) + list(b.exact_masses)
    return Space("explicit", labels, masses, dist=dist, exact_masses=exact,
                 meta={"glue": True, "na": na,
                       "parts": (a.meta.get("generation"), b.meta.get("generation"))})


def glue_parts(z: Space):
    """Index ranges of the two glued parts."""
    if not z.meta.get("glue"):
        raise SpaceError("not a glued space")
    na = z.meta["na"]
    return list(range(na)), list(range(na, len(z)))
