"""Certified real and complex arithmetic over exact rational enclosures.

Conventions used throughout the package:

* Angles are measured in *turns*: the point of the unit circle at angle
  ``theta`` turns is ``e^{2 pi i theta}``.  A turn value is an exact
  ``fractions.Fraction`` whenever possible.
* A certified real is a :class:`Bound`: a closed interval with exact
  rational endpoints guaranteed to contain the true value.  Interval
  arithmetic over Fractions is exact, so rigor is never lost to rounding;
  transcendental entry points (sin, sqrt, pi) go through mpmath's interval
  context at a configurable working precision and their dyadic endpoints
  are pulled back into Fractions exactly.
* The *chord* of a turn ``t`` is ``|e^{2 pi i t} - 1| = 2 |sin(pi t)|``.
  It depends only on the distance from ``t`` to the nearest integer and is
  monotone in that distance, which lets callers take sups and infs over
  finite residue sets by exact Fraction comparison, evaluating only the
  extremal residue.

The working precision defaults to 128 bits and is a process-global knob
(set once per experiment run, e.g. from the command line).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from decimal import Decimal, localcontext
from typing import Iterable, Union

from mpmath import iv

_BITS = 128

RationalLike = Union[int, Fraction]

# Exact chord values: residue distance -> chord.  2 sin(pi/6) = 1 is the
# only nontrivial rational chord besides the endpoints.
_EXACT_CHORDS = {
    Fraction(0): Fraction(0),
    Fraction(1, 6): Fraction(1),
    Fraction(1, 2): Fraction(2),
}


def set_bits(bits: int) -> None:
    """Set the global working precision for transcendental enclosures."""
    global _BITS
    if bits < 8:
        raise ValueError("working precision below 8 bits is meaningless")
    _BITS = int(bits)


def get_bits() -> int:
    return _BITS


def _mpf_tuple_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    if man == 0 and exp == 0:
        return Fraction(0)
    v = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -v if sign else v


def _to_iv(x: RationalLike):
    """Exact rational -> interval scalar (endpoints correctly rounded)."""
    iv.prec = _BITS
    fr = Fraction(x)
    return iv.mpf(fr.numerator) / iv.mpf(fr.denominator)


@dataclass(frozen=True)
class Bound:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"inverted bound [{self.lo}, {self.hi}]")

    # -- constructors -------------------------------------------------

    @staticmethod
    def exact(x: RationalLike) -> "Bound":
        fr = Fraction(x)
        return Bound(fr, fr)

    @staticmethod
    def from_iv(x) -> "Bound":
        a, b = x._mpi_
        return Bound(_mpf_tuple_to_fraction(a), _mpf_tuple_to_fraction(b))

    # -- queries ------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def certainly_le(self, x: RationalLike) -> bool:
        return self.hi <= Fraction(x)

    def certainly_lt(self, x: RationalLike) -> bool:
        return self.hi < Fraction(x)

    def certainly_ge(self, x: RationalLike) -> bool:
        return self.lo >= Fraction(x)

    def certainly_gt(self, x: RationalLike) -> bool:
        return self.lo > Fraction(x)

    def contains(self, x: RationalLike) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def intersects(self, other: "Bound") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    # -- exact interval arithmetic -------------------------------------

    def __add__(self, other: "Bound") -> "Bound":
        other = _as_bound(other)
        return Bound(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Bound") -> "Bound":
        other = _as_bound(other)
        return Bound(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Bound":
        return Bound(-self.hi, -self.lo)

    def __mul__(self, other: "Bound") -> "Bound":
        other = _as_bound(other)
        products = (self.lo * other.lo, self.lo * other.hi,
                    self.hi * other.lo, self.hi * other.hi)
        return Bound(min(products), max(products))

    __radd__ = __add__
    __rmul__ = __mul__

    def scale(self, c: RationalLike) -> "Bound":
        c = Fraction(c)
        if c >= 0:
            return Bound(self.lo * c, self.hi * c)
        return Bound(self.hi * c, self.lo * c)

    def abs(self) -> "Bound":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Bound(Fraction(0), max(-self.lo, self.hi))

    def max_with(self, other: "Bound") -> "Bound":
        other = _as_bound(other)
        return Bound(max(self.lo, other.lo), max(self.hi, other.hi))

    def min_with(self, other: "Bound") -> "Bound":
        other = _as_bound(other)
        return Bound(min(self.lo, other.lo), min(self.hi, other.hi))

    def sqrt(self) -> "Bound":
        if self.lo < 0:
            raise ValueError("sqrt of an interval reaching below 0")
        iv.prec = _BITS
        lo = iv.sqrt(_to_iv(self.lo))._mpi_[0]
        hi = iv.sqrt(_to_iv(self.hi))._mpi_[1]
        return Bound(max(Fraction(0), _mpf_tuple_to_fraction(lo)),
                     _mpf_tuple_to_fraction(hi))

    def dec(self, digits: int = 40) -> str:
        return dec_str(self.mid, digits)

    def __repr__(self) -> str:
        if self.is_exact:
            return f"Bound({self.lo})"
        return f"Bound[{dec_str(self.lo, 24)}, {dec_str(self.hi, 24)}]"


def _as_bound(x) -> Bound:
    if isinstance(x, Bound):
        return x
    return Bound.exact(x)


def bound_max(bounds: Iterable[Bound]) -> Bound:
    """Enclosure of max over a nonempty finite family."""
    it = iter(bounds)
    acc = next(it)
    for b in it:
        acc = acc.max_with(b)
    return acc


def bound_min(bounds: Iterable[Bound]) -> Bound:
    it = iter(bounds)
    acc = next(it)
    for b in it:
        acc = acc.min_with(b)
    return acc


def bound_sum(bounds: Iterable[Bound]) -> Bound:
    acc = Bound.exact(0)
    for b in bounds:
        acc = acc + b
    return acc


def pi_bound() -> Bound:
    iv.prec = _BITS
    return Bound.from_iv(iv.pi)


def two_pi_upper() -> Fraction:
    """Exact rational upper bound of 2 pi at the working precision."""
    return pi_bound().hi * 2


def residue_distance(t: RationalLike) -> Fraction:
    """Distance from a turn value to the nearest integer, in [0, 1/2]."""
    r = Fraction(t) % 1
    return min(r, 1 - r)


def chord(t: RationalLike) -> Bound:
    """Certified |e^{2 pi i t} - 1| for an exact turn value t."""
    d = residue_distance(Fraction(t))
    exact = _EXACT_CHORDS.get(d)
    if exact is not None:
        return Bound.exact(exact)
    iv.prec = _BITS
    val = 2 * iv.sin(iv.pi * _to_iv(d))
    b = Bound.from_iv(val)
    # sin is evaluated on [0, 1/2] turns where the chord lies in [0, 2]
    return Bound(max(Fraction(0), b.lo), min(Fraction(2), b.hi))


def sin_turns(t: RationalLike) -> Bound:
    """Certified sin(2 pi t)."""
    fr = Fraction(t) % 1
    if fr.denominator in (1, 2):
        return Bound.exact(0)
    if fr.denominator == 4:
        return Bound.exact(1 if fr.numerator == 1 else -1)
    iv.prec = _BITS
    b = Bound.from_iv(iv.sin(2 * iv.pi * _to_iv(fr)))
    return Bound(max(Fraction(-1), b.lo), min(Fraction(1), b.hi))


def cos_turns(t: RationalLike) -> Bound:
    """Certified cos(2 pi t)."""
    fr = Fraction(t) % 1
    if fr.denominator == 1:
        return Bound.exact(1)
    if fr.denominator == 2:
        return Bound.exact(-1)
    if fr.denominator == 3:
        return Bound.exact(Fraction(-1, 2))
    if fr.denominator == 4:
        return Bound.exact(0)
    if fr.denominator == 6:
        return Bound.exact(Fraction(1, 2) if fr.numerator in (1, 5) else Fraction(-1, 2))
    iv.prec = _BITS
    b = Bound.from_iv(iv.cos(2 * iv.pi * _to_iv(fr)))
    return Bound(max(Fraction(-1), b.lo), min(Fraction(1), b.hi))


@dataclass(frozen=True)
class CBound:
    """Certified complex number: a rectangle re x im of exact rationals."""

    re: Bound
    im: Bound

    @staticmethod
    def exact(re: RationalLike, im: RationalLike = 0) -> "CBound":
        return CBound(Bound.exact(re), Bound.exact(im))

    @staticmethod
    def from_turns(t: RationalLike) -> "CBound":
        """Enclosure of e^{2 pi i t}."""
        return CBound(cos_turns(t), sin_turns(t))

    @property
    def is_exact(self) -> bool:
        return self.re.is_exact and self.im.is_exact

    def __add__(self, other: "CBound") -> "CBound":
        return CBound(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "CBound") -> "CBound":
        return CBound(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "CBound") -> "CBound":
        return CBound(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    def scale(self, c: RationalLike) -> "CBound":
        return CBound(self.re.scale(c), self.im.scale(c))

    def abs2(self) -> Bound:
        a = self.re.abs()
        b = self.im.abs()
        return a * a + b * b

    def abs(self) -> Bound:
        return self.abs2().sqrt()

    def dist_to_one(self) -> Bound:
        return (self - CBound.exact(1)).abs()


def cbound_prod(factors: Iterable[CBound]) -> CBound:
    acc = CBound.exact(1)
    for f in factors:
        acc = acc * f
    return acc


def dec_str(fr: Fraction, digits: int = 40) -> str:
    """Decimal rendering of an exact rational (display only, not a bound)."""
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(fr.numerator) / Decimal(fr.denominator)
    return format(d, "g")
