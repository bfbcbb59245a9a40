"""Experiment drivers: growth tables, strong-(1,1) sweeps, subset searches.

Each driver returns a `Report`: a parameter echo, deterministic rows of
named scalar columns and a pass/fail verdict, with every asserted bound
recorded next to the measured value.  All randomness is counter-based
(Philox keyed by (seed, trial)), so results do not depend on scheduling
and repeat runs are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import Space, SpaceError, WeightedFunction, average, lp_norm
from .generators import (GenParams, build_first_gen, build_second_gen, floor_a,
                         glue, glue_parts)
from .maximal import (apply_operator, maximal_centered, maximal_noncentered,
                      rwt_functional, weak_ratio)
from .scalar import ONE, precision_bits, rel_diff, scalar, tree_sum, two_pow

#: conservative umbrella bound for the subset functional over ALL subsets;
#: only the per-family constants (2 and 4) are derived, so this global
#: cap is a regression choice and is flagged as such in reports
UMBRELLA_RWT_BOUND = 64

#: per-family constants
DIRAC_RWT_BOUND = 4
LEAF_RWT_BOUND = 2
STRONG11_BOUND = 6


@dataclass
class Report:
    experiment: str
    params: dict
    rows: list = field(default_factory=list)
    verdict: str = "pass"
    golden_ref: Optional[str] = None
    notes: list = field(default_factory=list)

    def add_row(self, **cols):
        self.rows.append(cols)

    def fail(self):
        self.verdict = "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


# -- deterministic function families -------------------------------------


def extremal_function(space: Space, n: int) -> WeightedFunction:
    """The level-n test function: value 2^((n-i)/(p0-1)) on each level-n
    branch point (i, j), zero elsewhere.  Orbit-constant by construction."""
    st = space.structure
    if st is None:
        raise SpaceError("extremal functions require a generated space")
    params = st.params
    if not 1 <= n <= params.nmax:
        raise SpaceError(f"level {n} outside 1..{params.nmax}")
    inv = Fraction(1) / (params.p0 - 1)
    vals = [0] * len(space)
    bkind = "xb" if st.generation == "first" else "yb"
    for oi, lab in enumerate(space.labels):
        if lab[0] == bkind and lab[1] == n:
            i = lab[2]
            e = (n - i) * inv
            vals[oi] = (Fraction(2) ** e.numerator if e.denominator == 1
                        else two_pow(scalar(e)))
    return WeightedFunction(vals)


def extremal_norm_identity(space: Space, n: int):
    """(measured ||f_n||_{p0}^{p0}, predicted 2^(n-1) n d_n) for the space."""
    st = space.structure
    params = st.params
    f = extremal_function(space, n)
    p0 = scalar(params.p0)
    measured = lp_norm(space, f, p0) ** p0
    dn = st.d[n]
    predicted = scalar(dn if not isinstance(dn, Fraction) else dn) * (1 << (n - 1)) * n
    return measured, predicted


# -- randomness -----------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, trial): splittable, so the
    stream of any trial is independent of how trials are scheduled."""
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), trial]))


def random_function(space: Space, rng: np.random.Generator) -> WeightedFunction:
    """Random f >= 0: support by per-trial Bernoulli inclusion, values
    log-uniform over [2^-40, 2^40]; never identically zero."""
    P = len(space)
    q = rng.uniform(0.05, 1.0)
    mask = rng.random(P) < q
    if not mask.any():
        mask[int(rng.integers(P))] = True
    exps = rng.uniform(-40.0, 40.0, P)
    vals = [two_pow(scalar(float(exps[i]))) if mask[i] else 0 for i in range(P)]
    return WeightedFunction(vals)


# -- growth of the weak-type ratio ----------------------------------------


def lower_bound_L(p0, n: int):
    """L(n) = 2^(1-2 p0) * (sum_{i<=n} floor(a_i)) / n, exact rational in
    the exponent-free part."""
    s = sum(floor_a(p0, i) for i in range(1, n + 1))
    p0 = Fraction(p0)
    e = 1 - 2 * p0
    if e.denominator == 1:
        return Fraction(2) ** e.numerator * Fraction(s, n), s
    return two_pow(scalar(e)) * scalar(Fraction(s, n)), s


def growth_table(p0, nmax: int, generation: str = "first",
                 operator: Optional[str] = None, mode: str = "quotient",
                 derive=None) -> Report:
    """Rows n = 1..nmax: measured ratio R(n), certified lower bound L(n),
    and the leaf-level check min over the level's leaves of Op f_n * 2 m_n
    >= 1.  Asserts R(n) >= L(n) per row.

    The first generation is probed with the centered operator, the second
    with the non-centered one (where its weak type fails), unless an
    operator is forced.
    """
    from .generators import derive_sequences

    if derive is None:
        derive = derive_sequences
    if operator is None:
        operator = "centered" if generation == "first" else "noncentered"
    params = derive(p0, nmax)
    build = build_first_gen if generation == "first" else build_second_gen
    space = build(params, mode)
    st = space.structure
    rep = Report("growth-table", {
        "p0": str(Fraction(p0)), "nmax": nmax, "generation": generation,
        "operator": operator, "mode": mode, "precision_bits": precision_bits(),
    })
    lkind = "xl" if generation == "first" else "yl"
    p0s = scalar(Fraction(p0))
    for n in range(1, nmax + 1):
        f = extremal_function(space, n)
        R = weak_ratio(space, f, p0s, operator)
        L, sum_a = lower_bound_L(p0, n)
        Ls = scalar(L) if isinstance(L, Fraction) else L
        g = apply_operator(space, f, operator)
        leaf_min = min(g[oi] for oi, lab in enumerate(space.labels)
                       if lab[0] == lkind and lab[1] == n)
        mn = scalar(params.m[n]) if isinstance(params.m[n], Fraction) else params.m[n]
        leaf_ok = bool(leaf_min * 2 * mn >= 1)
        ok = bool(R >= Ls) and leaf_ok
        rep.add_row(n=n, R=R, L=Ls, sum_floor_a=sum_a,
                    leaf_min_times_2m=leaf_min * 2 * mn,
                    bound="R >= L and leaf >= 1/(2m_n)", ok=ok)
        if not ok:
            rep.fail()
    return rep


# -- strong (1,1) on the second generation --------------------------------


def strong11_check(space: Space, trials: int = 1000, seed: int = 0) -> Report:
    """Max ||M^c f||_1 / ||f||_1 over seeded random f plus a deterministic
    family (constants, all Diracs, the extremal f_n); asserts <= 6."""
    if space.meta.get("generation") != "second":
        raise SpaceError("strong (1,1) check targets second-generation spaces")
    rep = Report("strong11-check", {
        "trials": trials, "seed": seed, "nmax": space.meta.get("nmax"),
        "p0": space.meta.get("p0"), "mode": space.mode,
        "precision_bits": precision_bits(),
    })
    one = scalar(1)
    best = scalar(0)
    best_src = None

    def probe(f: WeightedFunction, src: str):
        nonlocal best, best_src
        ratio = lp_norm(space, maximal_centered(space, f), one) / lp_norm(space, f, one)
        if ratio > best:
            best, best_src = ratio, src
        return ratio

    probe(WeightedFunction.constant(space, 1), "constant")
    for oi in range(len(space)):
        probe(WeightedFunction.delta(space, oi), f"dirac:{space.labels[oi]}")
    for n in range(1, space.meta["nmax"] + 1):
        probe(extremal_function(space, n), f"extremal:{n}")
    for t in range(trials):
        probe(random_function(space, trial_rng(seed, t)), f"trial:{t}")
    ok = bool(best <= STRONG11_BOUND)
    rep.add_row(max_ratio=best, argmax=str(best_src),
                bound=f"<= {STRONG11_BOUND}", ok=ok)
    if not ok:
        rep.fail()
    return rep


# -- restricted-weak-type searches ----------------------------------------


def dirac_rwt_check(space: Space, p) -> Report:
    """rwt_functional for every branch-point Dirac set; asserts <= 4."""
    rep = Report("dirac-rwt", {
        "p": str(Fraction(p)), "p0": space.meta.get("p0"),
        "nmax": space.meta.get("nmax"), "mode": space.mode,
        "generation": space.meta.get("generation"),
        "precision_bits": precision_bits(),
    })
    p = scalar(Fraction(p))
    bkinds = ("xb", "yb")
    for oi, lab in enumerate(space.labels):
        if lab[0] not in bkinds:
            continue
        val = rwt_functional(space, [oi], p, "noncentered")
        ok = bool(val <= DIRAC_RWT_BOUND)
        rep.add_row(label=str(lab), value=val, bound=f"<= {DIRAC_RWT_BOUND}", ok=ok)
        if not ok:
            rep.fail()
    return rep


def leaf_subset_rwt_check(p0, nmax: int, generation: str, p,
                          subsets: int = 10000, seed: int = 0,
                          per_block_cap: int = 64) -> Report:
    """Subsets of the leaf families (and mid families for the second
    generation): functional <= 2.

    Within one finest dyadic block all points are exchangeable, so a
    subset is determined up to isometry by its size; sizes are exhausted
    when the block is small (<= per_block_cap), sampled densely otherwise.
    Across blocks, random count vectors are drawn.  At least `subsets`
    subsets are tested in total.
    """
    from .generators import derive_sequences

    params = derive_sequences(p0, nmax)
    build = build_first_gen if generation == "first" else build_second_gen
    layers = ("xl",) if generation == "first" else ("yl", "ym")
    rep = Report("leaf-subset-rwt", {
        "p0": str(Fraction(p0)), "nmax": nmax, "generation": generation,
        "p": str(Fraction(p)), "subsets": subsets, "seed": seed,
        "precision_bits": precision_bits(),
    })
    ps = scalar(Fraction(p))
    tested = 0
    worst = scalar(0)
    worst_src = None

    def run_case(splits, level, layer, src):
        nonlocal tested, worst, worst_src
        sp = build(params, "quotient", splits=splits)
        # E = union of the "selected" part orbits of the split blocks plus
        # whole blocks marked with count == block size
        sel = []
        for oi, lab in enumerate(sp.labels):
            if lab[0] != layer or lab[1] != level:
                continue
            key = (lab[1], lab[2], lab[3])
            if key in splits:
                if len(lab) == 5 and lab[4] == 1:
                    sel.append(oi)
            elif key in full_blocks:
                sel.append(oi)
        if not sel:
            return
        val = rwt_functional(sp, sel, ps, "noncentered")
        tested += 1
        if val > worst:
            worst, worst_src = val, src
        if val > LEAF_RWT_BOUND:
            rep.add_row(source=src, value=val, bound=f"<= {LEAF_RWT_BOUND}", ok=False)
            rep.fail()

    rng = trial_rng(seed, 0)
    for n in range(1, nmax + 1):
        for layer in layers:
            for i in range(1, n + 1):
                w = params.tau[(n, i)] >> (i - 1)
                nblocks = 1 << (i - 1)
                # exhaustive (or dense) size sweep inside block (n, i, 1)
                if w <= per_block_cap:
                    sizes = range(1, w + 1)
                else:
                    base = {1, 2, 3, w // 2, w - 2, w - 1, w}
                    base.update(int(v) for v in
                                rng.integers(1, w, per_block_cap - len(base)))
                    sizes = sorted(base)
                for c in sizes:
                    full_blocks = set()
                    if c == w:
                        splits = {}
                        full_blocks.add((n, i, 1))
                    else:
                        splits = {(n, i, 1): c}
                    run_case(splits, n, layer, f"{layer} n={n} i={i} size={c}")
            # random count vectors across all blocks of the level
            blocks = [(n, i, j) for i in range(1, n + 1)
                      for j in range(1, (1 << (i - 1)) + 1)]
            for t in range(40 * n):
                splits = {}
                full_blocks = set()
                for key in blocks:
                    wi = params.tau[(n, key[1])] >> (key[1] - 1)
                    c = int(rng.integers(0, min(wi, 1 << 30) + 1))
                    if c == 0:
                        continue
                    if c >= wi:
                        full_blocks.add(key)
                    else:
                        splits[key] = c
                if not splits and not full_blocks:
                    continue
                for layer in layers:
                    run_case(splits, n, layer,
                             f"{layer} n={n} random-vector t={t}")
    # top up with random single-block cases until the budget is met
    t = 0
    while tested < subsets:
        n = int(rng.integers(1, nmax + 1))
        i = int(rng.integers(1, n + 1))
        j = int(rng.integers(1, (1 << (i - 1)) + 1))
        w = params.tau[(n, i)] >> (i - 1)
        c = int(rng.integers(1, min(w, 1 << 30)))
        full_blocks = set()
        layer = layers[t % len(layers)]
        run_case({(n, i, j): c}, n, layer, f"{layer} topup t={t}")
        t += 1
    rep.add_row(subsets_tested=tested, max_value=worst, argmax=str(worst_src),
                bound=f"<= {LEAF_RWT_BOUND}", ok=rep.passed)
    return rep


def rwt_search(space: Space, p, mode: str = "exhaustive",
               budget: int = 1000, seed: int = 0) -> Report:
    """Maximum of the subset functional sup_l l^p mu{M chi_U >= l}/mu(U).

    Exhaustive mode (explicit spaces, <= 22 points) walks every nonempty
    subset through the exact-integer kernel; random mode samples `budget`
    Bernoulli subsets and reports the running maximum.  The umbrella
    assertion <= 64 is a regression cap, not a derived bound; the proved
    constants are the per-family ones (4 for branch Diracs, 2 for
    leaf/mid subsets).
    """
    rep = Report("rwt-search", {
        "p": str(Fraction(p)), "mode": mode, "space_points": space.npoints,
        "space_mode": space.mode, "precision_bits": precision_bits(),
        "p0": space.meta.get("p0"), "nmax": space.meta.get("nmax"),
        "generation": space.meta.get("generation"),
    })
    rep.notes.append("umbrella bound 64 is a regression cap, not a "
                     "derived constant; the proved per-family bounds "
                     "are 4 (branch Diracs) and 2 (leaf/mid subsets)")
    if mode == "exhaustive":
        best, mask, nsub = exhaustive_rwt_max(space, p)
        ok = bool(scalar(best) <= UMBRELLA_RWT_BOUND)
        rep.add_row(subsets=nsub, max_value=scalar(best),
                    max_exact=f"{best.numerator}/{best.denominator}",
                    argmax_mask=mask, bound=f"<= {UMBRELLA_RWT_BOUND}", ok=ok)
        if not ok:
            rep.fail()
        return rep
    if mode != "random":
        raise SpaceError(f"unknown search mode {mode!r}")
    rep.params["budget"] = budget
    rep.params["seed"] = seed
    ps = scalar(Fraction(p))
    best = scalar(0)
    best_t = None
    for t in range(budget):
        rng = trial_rng(seed, t)
        q = rng.uniform(0.05, 1.0)
        mask = rng.random(len(space)) < q
        sel = [i for i in range(len(space)) if mask[i]]
        if not sel:
            sel = [int(rng.integers(len(space)))]
        val = rwt_functional(space, sel, ps, "noncentered")
        if val > best:
            best, best_t = val, t
    ok = bool(best <= UMBRELLA_RWT_BOUND)
    rep.add_row(subsets=budget, max_value=best, argmax_trial=best_t,
                bound=f"<= {UMBRELLA_RWT_BOUND}", ok=ok)
    if not ok:
        rep.fail()
    return rep


def integer_weights(space: Space):
    """Exact integer-scaled masses (weights, scale) with mass = w / scale."""
    if space.exact_masses is None:
        raise SpaceError("exact masses unavailable for this space")
    if any(m != 1 for m in space.mults):
        raise SpaceError("integer weights require an explicit space")
    from math import lcm

    den = 1
    for m in space.exact_masses:
        den = lcm(den, m.denominator)
    w = [int(m * den) for m in space.exact_masses]
    return w, den


def distinct_balls(space: Space):
    """Distinct non-singleton balls of an explicit space as index tuples."""
    from .core import ball

    seen = set()
    for ci in range(len(space)):
        for r in (1.5, 2.5):
            b = tuple(i for i, _ in ball(space, ci, r))
            if len(b) > 1:
                seen.add(b)
    return sorted(seen)


def exhaustive_rwt_max(space: Space, p):
    """Best subset functional over all nonempty subsets, exact rational.

    Exactness requires integer p and exact rational masses; both hold for
    the preset spaces with integral 1/(p0-1) and hand-built integer
    parameters.
    """
    p = Fraction(p)
    if p.denominator != 1:
        raise SpaceError("exhaustive search requires integer p")
    from . import kernels

    w, _den = integer_weights(space)
    balls = distinct_balls(space)
    best, mask = kernels.exhaustive_rwt_subsets(w, balls, sum(w), int(p))
    return best, mask, (1 << len(space)) - 1


# -- gluing ---------------------------------------------------------------


def glue_consistency_check(A: Space, B: Space, trials: int = 500,
                           seed: int = 0, rel_tol=None) -> Report:
    """On Z = glue(A, B): M_Z f(x) = max(M^loc_part(f|part)(x), avg_Z(f))
    for every x, both operators, for seeded random f plus degenerate cases.

    M^loc is the part-local maximal operator over balls of radius <= 2:
    those are exactly the part-internal balls of Z, while every radius > 2
    yields all of Z (whose average is the second argument of the max).
    The whole-part average itself is NOT a ball average of Z, so the full
    part-space operator would overshoot; see maximal.maximal_local.
    """
    from .maximal import maximal_local
    from .scalar import REL_TOL

    if rel_tol is None:
        rel_tol = REL_TOL
    tol = scalar(rel_tol)
    Z = glue(A, B)
    ia, ib = glue_parts(Z)
    rep = Report("glue-check", {
        "trials": trials, "seed": seed, "total_mass": Z.total_mass(),
        "precision_bits": precision_bits(),
    })
    rep.notes.append("identity uses the part-local operator (balls of "
                     "radius <= 2): the whole-part set is only realized at "
                     "radius > 2, and those radii give all of Z instead")
    worst = scalar(0)
    failures = 0

    def check(f: WeightedFunction, src: str):
        nonlocal worst, failures
        avg_z = average(Z, f, Z.full_ballset())
        fa = WeightedFunction([f[i] for i in ia])
        fb = WeightedFunction([f[i] for i in ib])
        for op in ("centered", "noncentered"):
            mz = apply_operator(Z, f, op)
            ma = maximal_local(A, fa, op)
            mb = maximal_local(B, fb, op)
            for t, x in enumerate(ia):
                expect = max(ma[t], avg_z)
                d = rel_diff(mz[x], expect)
                if d > worst:
                    worst = d
                if d > tol:
                    failures += 1
                    rep.add_row(source=src, operator=op, point=str(Z.labels[x]),
                                got=mz[x], expected=expect, ok=False)
            for t, x in enumerate(ib):
                expect = max(mb[t], avg_z)
                d = rel_diff(mz[x], expect)
                if d > worst:
                    worst = d
                if d > tol:
                    failures += 1
                    rep.add_row(source=src, operator=op, point=str(Z.labels[x]),
                                got=mz[x], expected=expect, ok=False)

    check(WeightedFunction.constant(Z, 1), "constant")
    onlyB = [0] * len(Z)
    for x in ib:
        onlyB[x] = 1
    check(WeightedFunction(onlyB), "chi_B")
    for t in range(trials):
        check(random_function(Z, trial_rng(seed, t)), f"trial:{t}")
    ok = failures == 0
    rep.add_row(trials=trials, failures=failures, worst_rel_diff=worst,
                bound=f"rel diff <= {Fraction(rel_tol)}", ok=ok)
    if not ok:
        rep.fail()
    return rep


# -- mode agreement -------------------------------------------------------


def mode_agreement_check(p0, nmax: int, generation: str, rel_tol=None) -> Report:
    """Explicit vs quotient evaluation of Op f_n for both operators."""
    from .generators import derive_sequences
    from .scalar import REL_TOL

    if rel_tol is None:
        rel_tol = REL_TOL
    tol = scalar(rel_tol)
    params = derive_sequences(p0, nmax)
    build = build_first_gen if generation == "first" else build_second_gen
    ex = build(params, "explicit")
    qt = build(params, "quotient")
    rep = Report("mode-agreement", {
        "p0": str(Fraction(p0)), "nmax": nmax, "generation": generation,
        "precision_bits": precision_bits(),
    })
    # map each explicit point to its quotient orbit
    st = qt.structure
    orbit_of = {}
    for oi, lab in enumerate(qt.labels):
        if lab[0] in ("xb", "yb"):
            orbit_of[lab] = oi
    for key, parts in st.block_parts.items():
        layer, n, i, j = key
        (oi, _), = parts  # no splits here: one orbit per block
        w = params.tau[(n, i)] >> (i - 1)
        for k in range((j - 1) * w + 1, j * w + 1):
            orbit_of[(layer, n, i, k)] = oi
    for n in range(1, nmax + 1):
        fe = extremal_function(ex, n)
        fq = extremal_function(qt, n)
        for op in ("centered", "noncentered"):
            ge = apply_operator(ex, fe, op)
            gq = apply_operator(qt, fq, op)
            worst = scalar(0)
            for t, lab in enumerate(ex.labels):
                d = rel_diff(ge[t], gq[orbit_of[lab]])
                if d > worst:
                    worst = d
            ok = bool(worst <= tol)
            rep.add_row(n=n, operator=op, worst_rel_diff=worst,
                        bound=f"rel diff <= {Fraction(rel_tol)}", ok=ok)
            if not ok:
                rep.fail()
    return rep
