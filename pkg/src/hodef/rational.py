"""Exact rational scalars.

Every computation in this package runs over Q with arbitrary precision.
Two interchangeable backends are supported: gmpy2.mpq (fast, C-implemented)
and fractions.Fraction (stdlib fallback).  The backend is chosen once at
import time; set HODEF_RATIONAL=fraction or =gmpy2 to force one.

All client code should treat scalars as opaque field elements obtained from
``rat()`` and use ordinary arithmetic operators on them.
"""

import os
from fractions import Fraction

_choice = os.environ.get("HODEF_RATIONAL", "").strip().lower()

if _choice in ("", "gmpy2", "mpq"):
    try:
        from gmpy2 import mpq as _mpq
        BACKEND = "gmpy2"
    except ImportError:
        if _choice:
            raise
        _mpq = None
        BACKEND = "fraction"
else:
    if _choice not in ("fraction", "fractions"):
        raise ValueError("HODEF_RATIONAL must be 'gmpy2' or 'fraction', got %r" % _choice)
    _mpq = None
    BACKEND = "fraction"

if BACKEND == "gmpy2":
    def rat(num=0, den=1):
        return _mpq(num, den)
else:
    def rat(num=0, den=1):
        return Fraction(num, den)

ZERO = rat(0)
ONE = rat(1)


def rat_from_string(s):
    """Parse 'p' or 'p/q' (q > 0 after normalization); raises ValueError on junk."""
    s = s.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        d = int(den)
        if d == 0:
            raise ValueError("zero denominator in %r" % s)
        return rat(int(num), d)
    return rat(int(s))


def rat_to_string(q):
    """Canonical 'p' or 'p/q' form, identical across backends."""
    num, den = q.numerator, q.denominator
    if den == 1:
        return str(num)
    return "%d/%d" % (num, den)
