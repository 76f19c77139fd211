"""Scalars that stay exact when the input was exact.

JSON integers and "p/q" strings become sympy rationals, floats stay floats.
Complex values are either sympy Gaussian rationals (re + I*im) or Python
complex numbers. The helpers below accept both kinds so that the geometry
formulas can be written once.
"""

import math
from fractions import Fraction
from typing import Any, Iterable, Union

import sympy

Real = Union[sympy.Basic, float, int]
Scalar = Union[sympy.Basic, complex, float, int]
TauValue = Union[Fraction, float]


def parse_real(value: Any) -> Real:
    """int / "p/q" / "1.25" -> sympy Rational, float -> float"""

    if isinstance(value, bool):
        raise ValueError(f"boolean is not a number: {value!r}")
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return sympy.Rational(value.strip())
        except (TypeError, ValueError, sympy.SympifyError):
            raise ValueError(f"not an exact rational literal: {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value: {value!r}")
        return value
    if isinstance(value, sympy.Basic) and value.is_real:
        return value
    raise ValueError(f"unsupported real value: {value!r}")


def parse_complex(pair: Any) -> Scalar:
    """[re, im] pair (or a bare real) -> exact Gaussian rational or complex"""

    if isinstance(pair, (list, tuple)):
        if len(pair) != 2:
            raise ValueError(f"complex value must be [re, im], got {pair!r}")
        re_value, im_value = parse_real(pair[0]), parse_real(pair[1])
    else:
        re_value, im_value = parse_real(pair), sympy.Integer(0)

    if is_exact(re_value) and is_exact(im_value):
        return canon(re_value + sympy.I * im_value)
    return complex(float(re_value), float(im_value))


def is_exact(value: Any) -> bool:
    if isinstance(value, sympy.Basic):
        return not value.has(sympy.Float)
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def all_exact(values: Iterable[Any]) -> bool:
    return all(is_exact(v) for v in values)


def canon(value: Scalar) -> Scalar:
    """Normal form re + I*im for sympy values; numbers pass through"""

    if isinstance(value, sympy.Basic):
        return sympy.expand_complex(value)
    return value


def inexact(value: Scalar) -> Scalar:
    """Drop exactness: sympy -> complex/float"""

    if isinstance(value, sympy.Basic):
        re_value, im_value = sympy.re(value), sympy.im(value)
        if im_value == 0:
            return float(re_value)
        return complex(float(re_value), float(im_value))
    return value


def re_part(value: Scalar) -> Real:
    if isinstance(value, sympy.Basic):
        return sympy.re(value)
    return value.real if isinstance(value, complex) else value


def im_part(value: Scalar) -> Real:
    if isinstance(value, sympy.Basic):
        return sympy.im(value)
    return value.imag if isinstance(value, complex) else 0.0


def conj(value: Scalar) -> Scalar:
    if isinstance(value, sympy.Basic):
        return sympy.conjugate(value)
    return value.conjugate()


def floor_int(value: Real) -> int:
    if isinstance(value, sympy.Basic):
        return int(sympy.floor(value))
    return math.floor(value)


def round_int(value: Real) -> int:
    return floor_int(value + (sympy.Rational(1, 2) if isinstance(value, sympy.Basic) else 0.5))


def as_float(value: Real) -> float:
    return float(value)


def as_complex(value: Scalar) -> complex:
    if isinstance(value, sympy.Basic):
        return complex(float(sympy.re(value)), float(sympy.im(value)))
    return complex(value)


def to_tau(value: Real) -> TauValue:
    """sympy Rational -> Fraction, everything else -> float"""

    if isinstance(value, Fraction):
        return value
    if isinstance(value, (sympy.Integer, sympy.Rational)):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, sympy.Basic):
        if value.is_Rational:
            return Fraction(int(value.p), int(value.q))
        return float(value)
    return float(value)


def parse_tau(value: Any) -> TauValue:
    return to_tau(parse_real(value))


def rational_json(value: Union[Fraction, float, int]) -> Union[list, float]:
    """Exact values as [num, den], inexact ones as plain floats"""

    if isinstance(value, Fraction):
        return [value.numerator, value.denominator]
    if isinstance(value, int) and not isinstance(value, bool):
        return [value, 1]
    return float(value)


def complex_json(value: Scalar) -> list:
    z = as_complex(value)
    return [z.real, z.imag]


def exact_complex_json(value: Scalar) -> list:
    """[re, im] with "p/q" strings for exact parts"""

    if is_exact(value):
        return [str(sympy.re(value)), str(sympy.im(value))]
    return complex_json(value)


def scalar_equal(a: Scalar, b: Scalar, tolerance: float = 1e-9) -> bool:
    if is_exact(a) and is_exact(b):
        return canon(sympy.sympify(a) - sympy.sympify(b)) == 0
    return abs(as_complex(a) - as_complex(b)) <= tolerance
