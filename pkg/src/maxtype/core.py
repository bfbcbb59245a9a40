"""Finite metric measure spaces: balls, averages, weighted norms.

A `Space` is a finite list of labelled points with strictly positive masses
and a {1,2}-valued metric.  Two representation modes exist:

* explicit: every point is stored individually (multiplicity 1) and the
  metric is a callable on point indices; balls are found by distance scan.
* quotient: each stored "orbit" stands for `mult` mutually exchangeable
  points (identical mass, identical distance profile); balls are provided
  structurally by the generator that built the space.

A ball (and more generally any measurable subset handed to `average`) is a
canonical tuple of (index, count) pairs, where count says how many of the
orbit's points lie in the set.  In explicit mode all counts are 1.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import gmpy2

from .scalar import scalar, tree_sum

Label = tuple
BallSet = tuple  # tuple of (index, count), sorted by index


class SpaceError(ValueError):
    pass


def make_ballset(pairs: Iterable[tuple]) -> BallSet:
    return tuple(sorted((int(i), int(c)) for i, c in pairs if c))


class Space:
    """Immutable finite metric measure space (explicit or quotient mode)."""

    __slots__ = (
        "mode", "labels", "index", "masses", "mults", "exact_masses",
        "dist", "structure", "meta", "_total_mass", "_npoints",
    )

    def __init__(
        self,
        mode: str,
        labels: Sequence[Label],
        masses: Sequence,
        mults: Optional[Sequence[int]] = None,
        dist: Optional[Callable[[int, int], int]] = None,
        structure=None,
        exact_masses: Optional[Sequence[Fraction]] = None,
        meta: Optional[dict] = None,
    ):
        if mode not in ("explicit", "quotient"):
            raise SpaceError(f"unknown mode {mode!r}")
        self.mode = mode
        self.labels = list(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise SpaceError("duplicate point labels")
        self.masses = [scalar(m) for m in masses]
        if any(m <= 0 for m in self.masses):
            raise SpaceError("all point masses must be strictly positive")
        self.mults = [int(m) for m in (mults if mults is not None else [1] * len(self.labels))]
        if mode == "explicit" and any(m != 1 for m in self.mults):
            raise SpaceError("explicit mode requires multiplicity 1")
        if any(m < 1 for m in self.mults):
            raise SpaceError("multiplicities must be positive")
        if len(self.masses) != len(self.labels) or len(self.mults) != len(self.labels):
            raise SpaceError("field length mismatch")
        self.dist = dist
        self.structure = structure
        self.exact_masses = list(exact_masses) if exact_masses is not None else None
        self.meta = dict(meta or {})
        self._total_mass = None
        self._npoints = sum(self.mults)

    # -- basic queries ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def npoints(self) -> int:
        """Number of underlying points (sum of multiplicities)."""
        return self._npoints

    def idx(self, point) -> int:
        """Accept either a label or an integer index."""
        if isinstance(point, int):
            if not 0 <= point < len(self.labels):
                raise SpaceError(f"point index {point} out of range")
            return point
        try:
            return self.index[point]
        except KeyError:
            raise SpaceError(f"unknown point {point!r}") from None

    def total_mass(self) -> gmpy2.mpfr:
        if self._total_mass is None:
            self._total_mass = tree_sum(
                m * w for m, w in zip(self.masses, self.mults)
            )
        return self._total_mass

    def mass_of(self, subset) -> gmpy2.mpfr:
        """Measure of a ballset / index iterable (tree-summed, index order)."""
        pairs = _as_pairs(self, subset)
        return tree_sum(self.masses[i] * c for i, c in pairs)

    def full_ballset(self) -> BallSet:
        return tuple((i, self.mults[i]) for i in range(len(self.labels)))


class WeightedFunction:
    """Nonnegative function given per point (per orbit in quotient mode)."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence):
        self.values = [scalar(v) for v in values]
        if any(v < 0 for v in self.values):
            raise ValueError("function values must be nonnegative")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @classmethod
    def constant(cls, space: Space, c) -> "WeightedFunction":
        return cls([c] * len(space))

    @classmethod
    def delta(cls, space: Space, point, value=1) -> "WeightedFunction":
        vals = [0] * len(space)
        vals[space.idx(point)] = value
        return cls(vals)

    @classmethod
    def indicator(cls, space: Space, points) -> "WeightedFunction":
        vals = [0] * len(space)
        for p in points:
            vals[space.idx(p)] = 1
        return cls(vals)

    def support(self):
        return [i for i, v in enumerate(self.values) if v > 0]

    def scaled(self, c) -> "WeightedFunction":
        c = scalar(c)
        return WeightedFunction([v * c for v in self.values])


def _as_pairs(space: Space, subset) -> BallSet:
    if isinstance(subset, tuple) and all(
        isinstance(e, tuple) and len(e) == 2 for e in subset
    ):
        return subset
    return make_ballset((space.idx(p), 1) for p in subset)


# -- operations ----------------------------------------------------------


def ball(space: Space, center, radius) -> BallSet:
    """Open ball {y : dist(center, y) < radius}.

    Explicit mode scans every point through the metric.  Quotient mode
    delegates to the structural ball family attached by the generator.
    """
    if radius <= 0:
        raise SpaceError("radius must be positive")
    ci = space.idx(center)
    if space.mode == "explicit":
        if space.dist is None:
            raise SpaceError("explicit space without a metric")
        d = space.dist
        return make_ballset(
            (i, 1) for i in range(len(space.labels)) if (0 if i == ci else d(ci, i)) < radius
        )
    if space.structure is None:
        raise SpaceError("quotient space without structural ball support")
    return space.structure.ball(space, ci, radius)


def average(space: Space, f: WeightedFunction, subset) -> gmpy2.mpfr:
    """Mass-weighted average of f over the subset; errors on empty sets."""
    pairs = _as_pairs(space, subset)
    if not pairs:
        raise SpaceError("average over the empty set")
    num = tree_sum(f[i] * space.masses[i] * c for i, c in pairs)
    den = tree_sum(space.masses[i] * c for i, c in pairs)
    return num / den


def lp_norm(space: Space, f: WeightedFunction, p) -> gmpy2.mpfr:
    """Weighted l^p norm (sum |f|^p * mass * multiplicity) ** (1/p)."""
    p = scalar(p)
    if p < 1:
        raise SpaceError("p must be >= 1")
    total = tree_sum(
        (f[i] ** p) * space.masses[i] * space.mults[i]
        for i in range(len(space))
    )
    if total == 0:
        return gmpy2.mpfr(0)
    return total ** (1 / p)


def weak_quasinorm(space: Space, g: WeightedFunction, p) -> gmpy2.mpfr:
    """Weak-l^p quasi-norm sup_l l * mu{|g| > l}^(1/p).

    The supremum over thresholds is attained in the limit l -> v from below
    at the finitely many distinct values v of g, so it is evaluated exactly
    as max over v of v * mu({g >= v})^(1/p).
    """
    p = scalar(p)
    if p < 1:
        raise SpaceError("p must be >= 1")
    by_value = {}
    for i, v in enumerate(g.values):
        if v > 0:
            by_value.setdefault(v, []).append(i)
    if not by_value:
        return gmpy2.mpfr(0)
    best = gmpy2.mpfr(0)
    cum = gmpy2.mpfr(0)
    for v in sorted(by_value, reverse=True):
        idxs = by_value[v]
        cum = cum + tree_sum(space.masses[i] * space.mults[i] for i in idxs)
        cand = v * cum ** (1 / p)
        if cand > best:
            best = cand
    return best
