"""Exact rational helpers shared by the parser, evaluator and log writer."""

from __future__ import annotations

from fractions import Fraction

__all__ = ["parse_rational", "format_rational"]


def parse_rational(text: str) -> Fraction:
    """Parse ``"5"``, ``"2.0"``, ``"-0.5"`` or ``"1/3"`` into a Fraction."""
    return Fraction(text.strip())


def format_rational(value: Fraction | int) -> str:
    """Render a rational as a short decimal when it terminates.

    Trailing zeros are dropped (``Fraction(2)`` -> ``"2"``). Non-terminating
    values fall back to ``"p/q"`` so that the text still parses back exactly.
    """
    q = Fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    den = q.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    # smallest power of ten that the denominator divides
    k = 0
    while (10**k) % q.denominator:
        k += 1
    scaled = abs(q.numerator) * 10**k // q.denominator
    sign = "-" if q < 0 else ""
    whole, frac = divmod(scaled, 10**k)
    frac_text = str(frac).rjust(k, "0").rstrip("0")
    return f"{sign}{whole}.{frac_text}"
