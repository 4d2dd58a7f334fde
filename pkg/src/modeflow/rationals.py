"""Exact rational arithmetic used everywhere in the package.

All decision paths run on exact rationals; no floating point is allowed to
leak into guard evaluation, LP pivoting or witness replay.  gmpy2's ``mpq``
is used when available (it is several times faster than ``fractions.Fraction``
on small numbers) with a stdlib fallback.  Both types interoperate freely
with ``Fraction`` in comparisons and hashing, and both print as ``p/q``.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as Rational
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    Rational = Fraction

ZERO = Rational(0)
ONE = Rational(1)


class RationalFormatError(ValueError):
    """Raised for malformed rational literals such as ``"1.5"`` or ``"1/0"``."""


def rat(value, den=None):
    """Coerce ``value`` to the package rational type.

    Accepts ints, existing rationals/Fractions, and strings of the form
    ``"p"`` or ``"p/q"`` with integer parts.  Decimal notation is rejected:
    the model file format only admits integers and quotient strings.
    """
    if den is not None:
        if den == 0:
            raise RationalFormatError("zero denominator")
        return Rational(value, den)
    if isinstance(value, (int, Fraction)) or type(value) is type(ZERO):
        return Rational(value)
    if isinstance(value, str):
        text = value.strip()
        num, sep, denom = text.partition("/")
        try:
            if sep:
                return rat(int(num), int(denom))
            return Rational(int(num))
        except ValueError as exc:
            raise RationalFormatError(f"not a rational literal: {value!r}") from exc
    raise RationalFormatError(f"cannot interpret {value!r} as a rational")


def rat_str(q) -> str:
    """Serialize a rational as ``"p"`` or ``"p/q"`` (lowest terms)."""
    return str(q)


def as_fraction(q) -> Fraction:
    """Convert to ``fractions.Fraction`` (for callers that insist on stdlib)."""
    return Fraction(q.numerator, q.denominator)
