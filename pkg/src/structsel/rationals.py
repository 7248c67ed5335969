"""Exact rational arithmetic helpers.

All public data structures carry :class:`fractions.Fraction` values.  The
solver hot path uses ``gmpy2.mpq`` when available (same semantics, several
times faster); results are normalized back to ``Fraction`` at the boundary.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

try:
    from gmpy2 import mpq as _mpq

    def rat(numerator=0, denominator=1):
        """Fast internal rational; interchangeable with Fraction in arithmetic."""
        return _mpq(numerator, denominator)

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    def rat(numerator=0, denominator=1):
        return Fraction(numerator, denominator)

    HAVE_GMPY2 = False

RationalLike = Union[int, str, Fraction]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse an integer, "p/q" string, or Fraction into a Fraction.

    Raises ValueError for floats and malformed strings; exactness is a
    package-wide invariant, so float input is rejected outright.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"not an exact rational: {value!r} (floats are not accepted)")


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "p" or "p/q" for files and reports."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_fraction(value) -> Fraction:
    """Normalize any exact rational (Fraction, mpq, int) to Fraction."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value.numerator, value.denominator) if hasattr(value, "numerator") else Fraction(value)


def is_integral(value) -> bool:
    return value.denominator == 1
