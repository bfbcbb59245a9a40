"""Extended-precision scalars with a wide exponent range.

All measure and function values in this package are MPFR floats (via gmpy2)
evaluated under a single global context: configurable mantissa precision
(default 128 bits) and an exponent range far beyond hardware floats, so that
quantities spanning 2^(+-10^6) never overflow or flush to zero.

The module also provides the deterministic reduction primitive used
everywhere a sum is taken: `tree_sum` reduces a sequence pairwise in fixed
index order, so results are bit-stable regardless of how callers schedule
work.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

import gmpy2

DEFAULT_PRECISION = 128

#: relative tolerance used by inequality assertions throughout the package
REL_TOL = Fraction(1, 10**20)

_EXP_LIMIT = min(gmpy2.get_emax_max(), 1 << 40)


def configure(precision_bits: int = DEFAULT_PRECISION):
    """Set the global MPFR context: precision plus a wide exponent range.

    Returns the context.  Call once at program start; all mpfr values
    created afterwards use the new precision.
    """
    if precision_bits < 2:
        raise ValueError("precision must be at least 2 bits")
    ctx = gmpy2.get_context()
    ctx.precision = precision_bits
    ctx.emax = _EXP_LIMIT
    ctx.emin = -_EXP_LIMIT
    return ctx


configure()


def precision_bits() -> int:
    return gmpy2.get_context().precision


_MPFR = type(gmpy2.mpfr(0))


def scalar(x) -> gmpy2.mpfr:
    """Convert ints, floats, strings, Fractions or mpq to mpfr."""
    if type(x) is _MPFR:
        return x
    if isinstance(x, Fraction):
        return gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))
    return gmpy2.mpfr(x)


ZERO = scalar(0)
ONE = scalar(1)


def two_pow(e) -> gmpy2.mpfr:
    """2**e for a real (mpfr, int or Fraction) exponent e."""
    return gmpy2.mpfr(2) ** scalar(e)


def tree_sum(values: Iterable) -> gmpy2.mpfr:
    """Pairwise-tree sum in fixed index order.

    Deterministic by construction: the reduction tree depends only on the
    length of the input, never on scheduling.
    """
    vals = [v if type(v) is _MPFR else scalar(v) for v in values]
    if not vals:
        return gmpy2.mpfr(0)
    while len(vals) > 1:
        nxt = []
        for k in range(0, len(vals) - 1, 2):
            nxt.append(vals[k] + vals[k + 1])
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def rel_diff(a, b) -> gmpy2.mpfr:
    """|a-b| / max(|a|,|b|), zero when both vanish."""
    a = scalar(a)
    b = scalar(b)
    m = max(abs(a), abs(b))
    if m == 0:
        return gmpy2.mpfr(0)
    return abs(a - b) / m


def rel_close(a, b, tol=REL_TOL) -> bool:
    return rel_diff(a, b) <= scalar(tol)


def sign(x) -> int:
    x = scalar(x)
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def to_exp2(x) -> str:
    """Lossless base-2 rendering: '<sign>0.<binary digits>e<exponent>'.

    The value is sign * 0.digits * 2**exponent.  Round-trips exactly via
    `from_exp2` at the same or higher precision.
    """
    x = scalar(x)
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        return "0"
    digits, exp, _ = x.digits(2)
    neg = digits.startswith("-")
    if neg:
        digits = digits[1:]
    digits = digits.rstrip("0") or "0"
    return f"{'-' if neg else ''}0.{digits}e{exp}"


def from_exp2(s: str) -> gmpy2.mpfr:
    """Parse the `to_exp2` format back to mpfr (exact at equal precision)."""
    s = s.strip()
    if s in ("nan", "inf", "-inf"):
        return gmpy2.mpfr(s)
    if s == "0":
        return gmpy2.mpfr(0)
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    mant, exp = s.split("e")
    if not mant.startswith("0."):
        raise ValueError(f"bad exp2 literal: {s!r}")
    digits = mant[2:]
    m = int(digits, 2)
    val = gmpy2.mpfr(m) * two_pow(int(exp) - len(digits))
    return -val if neg else val


def to_dec(x, sig: int = 40) -> str:
    """Decimal rendering for humans; `sig` significant digits."""
    x = scalar(x)
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        return "0"
    digits, exp, _ = x.digits(10)
    neg = digits.startswith("-")
    if neg:
        digits = digits[1:]
    digits = digits[:sig].rstrip("0") or "0"
    return f"{'-' if neg else ''}0.{digits}e{exp}"
