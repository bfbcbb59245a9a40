"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Exports the two hot-kernel entry points with a uniform interface:

* `ball_scan_mismatches(space)` — all-pairs dual check that the metric
  scan and the closed-form ball case lists define the same balls at every
  representative radius, on an explicit generated space.
* `exhaustive_rwt_subsets(weights, ball_members, full_mass, p)` — exact
  best restricted-weak-type functional over every nonempty subset of a
  small explicit space; returns a `fractions.Fraction` and the bitmask.

`USING_COMPILED` records which implementation was selected at import.
The compiled subset scan works in 64-bit arithmetic, so it is used only
when the worst-case products provably fit; otherwise the unbounded
pure-Python walk runs regardless of the import-time selection.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import kernels_py
from .core import Space, SpaceError

try:
    from . import _kernels as _impl

    USING_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _impl = kernels_py
    USING_COMPILED = False


_KIND_CODE = {"xb": 0, "yb": 0, "ym": 1, "xl": 2, "yl": 2}


def label_arrays(space: Space):
    """Flatten an explicit generated space into kernel-ready int arrays.

    Returns (gen, kind, n, i, jk, tau) where gen is 0 for first-generation
    and 1 for second-generation spaces, the four vectors hold the label
    fields per point, and tau is the (nmax+1, nmax+1) table of leaf counts.
    """
    if space.mode != "explicit":
        raise SpaceError("label arrays require an explicit space")
    st = space.structure
    generation = space.meta.get("generation")
    if st is None or generation not in ("first", "second"):
        raise SpaceError("space was not produced by a generator")
    params = st.params
    P = len(space)
    kind = np.empty(P, dtype=np.int32)
    nn = np.empty(P, dtype=np.int64)
    ii = np.empty(P, dtype=np.int64)
    jk = np.empty(P, dtype=np.int64)
    for t, lab in enumerate(space.labels):
        k, n, i, j = lab
        kind[t] = _KIND_CODE[k]
        nn[t] = n
        ii[t] = i
        jk[t] = j
    nmax = params.nmax
    tau = np.zeros((nmax + 1, nmax + 1), dtype=np.int64)
    for (n, i), v in params.tau.items():
        if v > np.iinfo(np.int64).max:
            raise SpaceError("tau value exceeds the kernel integer range")
        tau[n, i] = v
    return (0 if generation == "first" else 1), kind, nn, ii, jk, tau


def ball_scan_mismatches(space: Space, force_python: bool = False):
    """Run the all-pairs ball dual check; returns (pairs_checked, mismatches)."""
    gen, kind, nn, ii, jk, tau = label_arrays(space)
    impl = kernels_py if force_python else _impl
    return impl.ball_scan_mismatches(gen, kind, nn, ii, jk, tau)


def exhaustive_rwt_subsets(weights, ball_members, full_mass, p,
                           force_python: bool = False):
    """Best subset functional as (Fraction, mask); exact for integer p >= 1."""
    p = int(p)
    weights = [int(v) for v in weights]
    full_mass = int(full_mass)
    if sum(weights) != full_mass:
        raise SpaceError("weights do not sum to the stated total mass")
    impl = _impl
    # candidate cross-comparisons in the C kernel multiply two values each
    # bounded by full_mass^(p+1); stay well inside signed 64 bits
    if force_python or full_mass ** (2 * (p + 1)) >= 2 ** 62:
        impl = kernels_py
    num, den, mask = impl.exhaustive_rwt_scan(weights, ball_members, full_mass, p)
    return Fraction(num, den), mask
