"""Exact arithmetic in the ring Q(sqrt5)[c^(1/3), c^(-1/3)].

Every symbolic coefficient of the conserved densities is a finite sum of
terms ``q * c^(k/3)`` with ``q = a + b*sqrt(5)`` and ``a, b`` rational.
Rationals are :class:`fractions.Fraction`; ``c^(1/3)`` is a formal symbol
``t`` with ``t**3 = c`` so exponents are stored as integers ``k``.

Example
-------
>>> x = RingElem.monomial(Fraction(-1, 3), -3)   # -1/(3c)
>>> str(x)
'-1/3*c^(-1)'
>>> x.evaluate(1.0)
-0.3333333333333333
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational as _RationalABC

from .errors import NotAMonomial, ZeroDivisor, ZeroParameter

__all__ = [
    "QuadExt",
    "RingElem",
    "ring_add",
    "ring_mul",
    "ring_invert",
    "ring_eval",
    "as_fraction",
    "SQRT5",
]


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to :class:`Fraction`.

    Floats are refused: every constant here must be exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, _RationalABC)) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class QuadExt:
    """Element ``a + b*sqrt(5)`` of Q(sqrt5)."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = as_fraction(a)
        self.b = as_fraction(b)

    @classmethod
    def _raw(cls, a, b):
        obj = cls.__new__(cls)
        obj.a = a
        obj.b = b
        return obj

    def __add__(self, other):
        other = _quad(other)
        return QuadExt._raw(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt._raw(-self.a, -self.b)

    def __sub__(self, other):
        other = _quad(other)
        return QuadExt._raw(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return _quad(other) - self

    def __mul__(self, other):
        other = _quad(other)
        if not self.b and not other.b:
            return QuadExt._raw(self.a * other.a, _ZERO)
        return QuadExt._raw(
            self.a * other.a + 5 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 5 b^2``."""
        return self.a * self.a - 5 * self.b * self.b

    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b)

    def inverse(self) -> "QuadExt":
        if self.is_zero():
            raise ZeroDivisor("inverse of zero in Q(sqrt5)")
        nrm = self.norm()
        # a^2 = 5 b^2 has no rational solution besides zero
        assert nrm != 0
        return QuadExt(self.a / nrm, -self.b / nrm)

    def __truediv__(self, other):
        return self * _quad(other).inverse()

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __eq__(self, other):
        try:
            other = _quad(other)
        except TypeError:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(5.0)

    def __repr__(self):
        return f"QuadExt({self.a}, {self.b})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt5"
        return f"({self.a}+{self.b}*sqrt5)"


SQRT5 = QuadExt(0, 1)
_ZERO = Fraction(0)


def _quad(value) -> QuadExt:
    if isinstance(value, QuadExt):
        return value
    return QuadExt(as_fraction(value), 0)


class RingElem:
    """Finite sum ``sum_k q_k c^(k/3)`` with ``q_k`` in Q(sqrt5).

    Instances are treated as immutable. The zero element has no terms.

    Parameters
    ----------
    terms : dict, optional
        Map from the third-exponent ``k`` to a :class:`QuadExt` (or anything
        coercible to one). Zero coefficients are dropped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for k, q in terms.items():
                q = _quad(q)
                if not q.is_zero():
                    clean[int(k)] = q
        self.terms = clean

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def monomial(cls, q, k: int = 0) -> "RingElem":
        """Return ``q * c^(k/3)``."""
        return cls({k: q})

    @classmethod
    def one(cls) -> "RingElem":
        return cls({0: QuadExt(1)})

    @classmethod
    def zero(cls) -> "RingElem":
        return cls._raw({})

    @classmethod
    def c_power(cls, k: int) -> "RingElem":
        """Return ``c^(k/3)``."""
        return cls({k: QuadExt(1)})

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = _ring(other)
        out = dict(self.terms)
        for k, q in other.terms.items():
            if k in out:
                s = out[k] + q
                if s.is_zero():
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = q
        return RingElem._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return RingElem._raw({k: -q for k, q in self.terms.items()})

    def __sub__(self, other):
        return self + (-_ring(other))

    def __rsub__(self, other):
        return _ring(other) - self

    def __mul__(self, other):
        other = _ring(other)
        if len(self.terms) == 1 and len(other.terms) == 1:
            ((k1, q1),) = self.terms.items()
            ((k2, q2),) = other.terms.items()
            return RingElem._raw({k1 + k2: q1 * q2})
        out = {}
        for k1, q1 in self.terms.items():
            for k2, q2 in other.terms.items():
                k = k1 + k2
                prod = q1 * q2
                if k in out:
                    out[k] = out[k] + prod
                else:
                    out[k] = prod
        return RingElem({k: q for k, q in out.items() if not q.is_zero()})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = RingElem.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "RingElem":
        return ring_invert(self)

    def __truediv__(self, other):
        return self * ring_invert(_ring(other))

    def __rtruediv__(self, other):
        return _ring(other) * ring_invert(self)

    # queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def monomial_parts(self):
        """Return ``(q, k)`` for a single-term element."""
        if len(self.terms) != 1:
            raise NotAMonomial(f"{self} is not a single monomial")
        ((k, q),) = self.terms.items()
        return q, k

    def is_rational_coefficients(self) -> bool:
        """True when no term carries a sqrt5 component."""
        return all(q.b == 0 for q in self.terms.values())

    def __eq__(self, other):
        try:
            other = _ring(other)
        except TypeError:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted((k, q.a, q.b) for k, q in self.terms.items())))

    # evaluation -----------------------------------------------------------
    def evaluate(self, c_value: float) -> float:
        return ring_eval(self, c_value)

    def at_cube(self, t) -> Fraction:
        """Exact value at ``c = t**3`` for rational ``t``.

        Only defined when no term has a sqrt5 component.
        """
        t = as_fraction(t)
        if t == 0:
            raise ZeroParameter("c must be nonzero")
        total = Fraction(0)
        for k, q in self.terms.items():
            if q.b != 0:
                raise ValueError("element has a sqrt5 component; not rational")
            total += q.a * t**k
        return total

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "terms": [
                {"k": k, "a": _frac_str(q.a), "b": _frac_str(q.b)}
                for k, q in sorted(self.terms.items())
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "RingElem":
        return cls(
            {
                int(t["k"]): QuadExt(Fraction(t["a"]), Fraction(t["b"]))
                for t in data["terms"]
            }
        )

    def __repr__(self):
        return f"RingElem({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, q in sorted(self.terms.items()):
            parts.append(str(q) if k == 0 else f"{q}*c^({Fraction(k, 3)})")
        return " + ".join(parts)


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _ring(value) -> RingElem:
    if isinstance(value, RingElem):
        return value
    if isinstance(value, QuadExt):
        return RingElem({0: value})
    return RingElem({0: QuadExt(as_fraction(value))})


def ring_add(x: RingElem, y: RingElem) -> RingElem:
    """Exact sum."""
    return _ring(x) + _ring(y)


def ring_mul(x: RingElem, y: RingElem) -> RingElem:
    """Exact product; exponents add in thirds."""
    return _ring(x) * _ring(y)


def ring_invert(x: RingElem) -> RingElem:
    """Invert a monomial ``q c^(k/3)``.

    Raises
    ------
    ZeroDivisor
        If ``x`` is zero.
    NotAMonomial
        If ``x`` has two or more terms.
    """
    x = _ring(x)
    if not x.terms:
        raise ZeroDivisor("cannot invert zero")
    q, k = x.monomial_parts()
    return RingElem._raw({-k: q.inverse()})


def real_cbrt(value: float) -> float:
    """Real cube root, negative for negative input."""
    return math.copysign(abs(value) ** (1.0 / 3.0), value)


def ring_eval(x: RingElem, c_value: float, precision: int = 53) -> float:
    """Evaluate ``x`` at a real nonzero parameter value.

    Negative ``c_value`` uses the real cube root. ``precision`` is the number
    of mantissa bits requested; values up to 53 are served in double
    precision, larger ones through :mod:`decimal`.
    """
    c_value = float(c_value)
    if c_value == 0.0:
        raise ZeroParameter("c must be nonzero")
    if precision <= 53:
        t = real_cbrt(c_value)
        r5 = math.sqrt(5.0)
        return math.fsum(
            (float(q.a) + float(q.b) * r5) * t**k for k, q in x.terms.items()
        )
    return float(_eval_decimal(x, c_value, precision))


def _eval_decimal(x, c_value, precision):
    import decimal

    digits = int(precision * 0.30103) + 10
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        cv = decimal.Decimal(c_value)
        sign = -1 if cv < 0 else 1
        # Newton iteration for the real cube root
        a = abs(cv)
        t = decimal.Decimal(abs(c_value) ** (1.0 / 3.0))
        for _ in range(200):
            nt = (2 * t + a / (t * t)) / 3
            if nt == t:
                break
            t = nt
        t = t * sign
        r5 = decimal.Decimal(5).sqrt()
        total = decimal.Decimal(0)
        for k, q in x.terms.items():
            qa = decimal.Decimal(q.a.numerator) / q.a.denominator
            qb = decimal.Decimal(q.b.numerator) / q.b.denominator
            total += (qa + qb * r5) * t**k
        return total
