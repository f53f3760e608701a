"""Truncated power series in w, w_x, w_xx, ... with exact ring coefficients.

A monomial ``w_0^a0 w_1^a1 ... w_n^an`` (``w_i`` is the i-th x-derivative of
``w``) is keyed by the exponent tuple ``(a0, ..., an)`` with trailing zeros
trimmed. A :class:`DiffSeries` keeps every homogeneity degree up to a fixed
truncation ``D`` and silently drops the rest.

The conserved densities ``rho[n]`` of the Degasperis-Procesi hierarchy are
produced by :func:`rho_seq` from ``p = -(c + w)^(1/3)``.

Two normalisations of the recursion are available through ``scheme``:

``"unit"``
    ``rho[n+2] * p^2`` on the left-hand side. This reproduces the closed
    form for ``c_m`` (``c_2 = -1/(3 c^(5/3))``) and ``S_1 = -14/(81 c^(8/3))``.
``"riccati"``
    ``3 * rho[n+2] * p^2``, the factor obtained by expanding the Riccati
    equation ``rho - rho_xx = 3 rho rho_x + rho^3 + lambda m`` in powers of
    the spectral parameter. Only this normalisation yields integrals that are
    conserved beyond the first few orders.

Both share ``rho[0]`` and ``rho[1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .coeff_ring import QuadExt, RingElem, ring_invert
from .errors import NonInvertibleConstantTerm, TruncMismatch

__all__ = [
    "SCHEMES",
    "DiffSeries",
    "ClassCertificate",
    "degree",
    "weight",
    "dseries_add",
    "dseries_mul",
    "dseries_dx",
    "dseries_invert",
    "taylor_p",
    "rho_seq",
    "recursion_residual",
    "classify",
    "scheme_factor",
]

SCHEMES = ("unit", "riccati")


def scheme_factor(scheme: str) -> int:
    """Coefficient multiplying ``rho[n+2] p^2`` in the recursion."""
    if scheme == "unit":
        return 1
    if scheme == "riccati":
        return 3
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _trim(alpha):
    n = len(alpha)
    while n and alpha[n - 1] == 0:
        n -= 1
    return tuple(alpha[:n])


def degree(alpha) -> int:
    """Homogeneity degree ``sum(alpha)``."""
    return sum(alpha)


def weight(alpha) -> int:
    """Derivative weight ``sum(i * alpha_i)``."""
    return sum(i * a for i, a in enumerate(alpha))


def _add_index(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return tuple(out)


class DiffSeries:
    """Degree-truncated differential polynomial.

    Parameters
    ----------
    terms : dict
        Map exponent tuple -> :class:`RingElem`. Zero coefficients and terms
        of degree above ``trunc_degree`` are discarded.
    trunc_degree : int
        Highest homogeneity degree kept.
    order : int, optional
        Upper bound on the derivative index present. Inferred when omitted.
    """

    __slots__ = ("terms", "trunc_degree", "order")

    def __init__(self, terms, trunc_degree: int, order: int | None = None):
        clean = {}
        for alpha, coeff in terms.items():
            alpha = _trim(tuple(alpha))
            if sum(alpha) > trunc_degree:
                continue
            if not isinstance(coeff, RingElem):
                coeff = RingElem({0: coeff})
            if coeff:
                clean[alpha] = coeff
        self.terms = clean
        self.trunc_degree = trunc_degree
        top = max((len(a) - 1 for a in clean), default=0)
        if order is None:
            order = max(top, 0)
        elif top > order:
            raise ValueError(f"term with derivative index {top} exceeds order {order}")
        self.order = order

    @classmethod
    def _raw(cls, terms, trunc_degree, order):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.trunc_degree = trunc_degree
        obj.order = order
        return obj

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, value, trunc_degree: int) -> "DiffSeries":
        if not isinstance(value, RingElem):
            value = RingElem({0: value})
        return cls({(): value}, trunc_degree, 0)

    @classmethod
    def zero(cls, trunc_degree: int) -> "DiffSeries":
        return cls._raw({}, trunc_degree, 0)

    @classmethod
    def variable(cls, i: int, trunc_degree: int) -> "DiffSeries":
        """The series ``w_i`` (i-th derivative of w)."""
        alpha = [0] * (i + 1)
        alpha[i] = 1
        return cls({tuple(alpha): RingElem.one()}, trunc_degree, i)

    @classmethod
    def monomial(cls, alpha, coeff, trunc_degree: int) -> "DiffSeries":
        return cls({tuple(alpha): coeff}, trunc_degree)

    # arithmetic -----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, DiffSeries):
            raise TypeError("expected a DiffSeries")
        if other.trunc_degree != self.trunc_degree:
            raise TruncMismatch(
                f"truncation degrees differ: {self.trunc_degree} vs {other.trunc_degree}"
            )

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for alpha, coeff in other.terms.items():
            if alpha in out:
                s = out[alpha] + coeff
                if s:
                    out[alpha] = s
                else:
                    del out[alpha]
            else:
                out[alpha] = coeff
        return DiffSeries._raw(out, self.trunc_degree, max(self.order, other.order))

    def __neg__(self):
        return DiffSeries._raw(
            {a: -c for a, c in self.terms.items()}, self.trunc_degree, self.order
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "DiffSeries":
        """Multiply every coefficient by a ring element or rational."""
        if not isinstance(factor, RingElem):
            factor = RingElem({0: factor})
        if not factor:
            return DiffSeries.zero(self.trunc_degree)
        out = {}
        for alpha, coeff in self.terms.items():
            prod = coeff * factor
            if prod:
                out[alpha] = prod
        return DiffSeries._raw(out, self.trunc_degree, self.order)

    def __mul__(self, other):
        if not isinstance(other, DiffSeries):
            return self.scale(other)
        self._check(other)
        D = self.trunc_degree
        left = sorted(((sum(a), a, c) for a, c in self.terms.items()), key=lambda t: t[0])
        right = sorted(((sum(a), a, c) for a, c in other.terms.items()), key=lambda t: t[0])
        out = {}
        for d1, a1, c1 in left:
            room = D - d1
            for d2, a2, c2 in right:
                if d2 > room:
                    break
                alpha = _add_index(a1, a2)
                prod = c1 * c2
                if alpha in out:
                    out[alpha] = out[alpha] + prod
                else:
                    out[alpha] = prod
        out = {a: c for a, c in out.items() if c}
        return DiffSeries._raw(out, D, max(self.order, other.order))

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("use dseries_invert for negative powers")
        result = DiffSeries.constant(RingElem.one(), self.trunc_degree)
        for _ in range(n):
            result = result * self
        return result

    def dx(self) -> "DiffSeries":
        return dseries_dx(self)

    def invert(self) -> "DiffSeries":
        return dseries_invert(self)

    # structure ------------------------------------------------------------
    def homogeneous(self, d: int) -> "DiffSeries":
        """Degree-``d`` part."""
        return DiffSeries._raw(
            {a: c for a, c in self.terms.items() if sum(a) == d},
            self.trunc_degree,
            self.order,
        )

    def degree_range(self, lo: int, hi: int | None = None) -> "DiffSeries":
        """Part with ``lo <= degree <= hi``."""
        hi = self.trunc_degree if hi is None else hi
        return DiffSeries._raw(
            {a: c for a, c in self.terms.items() if lo <= sum(a) <= hi},
            self.trunc_degree,
            self.order,
        )

    def coeff(self, alpha) -> RingElem:
        return self.terms.get(_trim(tuple(alpha)), RingElem.zero())

    def constant_term(self) -> RingElem:
        return self.terms.get((), RingElem.zero())

    def is_zero(self) -> bool:
        return not self.terms

    def min_degree(self) -> int | None:
        return min((sum(a) for a in self.terms), default=None)

    def max_weight(self) -> int:
        return max((weight(a) for a in self.terms), default=0)

    def with_trunc(self, D: int) -> "DiffSeries":
        """Re-truncate (dropping terms above ``D`` when lowering)."""
        return DiffSeries(self.terms, D, self.order)

    def __eq__(self, other):
        if not isinstance(other, DiffSeries):
            return NotImplemented
        return self.trunc_degree == other.trunc_degree and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self):
        """Terms in canonical order: by degree, then lexicographic index."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]))

    # numeric evaluation ---------------------------------------------------
    def evaluate(self, derivs, c_value: float):
        """Evaluate on sampled derivatives.

        Parameters
        ----------
        derivs : sequence of arrays
            ``derivs[i]`` holds samples of ``w_i``; at least ``order + 1``
            entries.
        c_value : float
            Value of the parameter c.
        """
        import numpy as np

        total = np.zeros_like(np.asarray(derivs[0], dtype=float))
        for alpha, coeff in self.terms.items():
            term = np.full_like(total, coeff.evaluate(c_value))
            for i, a in enumerate(alpha):
                if a:
                    term = term * np.asarray(derivs[i]) ** a
            total = total + term
        return total

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "trunc_degree": self.trunc_degree,
            "order": self.order,
            "terms": [
                {"alpha": list(a), "coeff": c.to_json()} for a, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DiffSeries":
        terms = {tuple(t["alpha"]): RingElem.from_json(t["coeff"]) for t in data["terms"]}
        return cls(terms, data["trunc_degree"], data["order"])

    def __repr__(self):
        return f"DiffSeries(D={self.trunc_degree}, order={self.order}, {len(self.terms)} terms)"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for alpha, coeff in self.sorted_terms():
            mono = "*".join(
                f"w{i}" if a == 1 else f"w{i}^{a}" for i, a in enumerate(alpha) if a
            )
            parts.append(f"({coeff})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def dseries_add(f: DiffSeries, g: DiffSeries) -> DiffSeries:
    """Termwise sum (truncation degrees must agree)."""
    return f + g


def dseries_mul(f: DiffSeries, g: DiffSeries) -> DiffSeries:
    """Product with every degree above the truncation discarded."""
    return f * g


def dseries_dx(f: DiffSeries) -> DiffSeries:
    """Total x-derivative using ``d/dx w_i = w_{i+1}``."""
    out = {}
    for alpha, coeff in f.terms.items():
        for i, a in enumerate(alpha):
            if not a:
                continue
            new = list(alpha) + ([0] if i + 1 == len(alpha) else [])
            new[i] -= 1
            new[i + 1] += 1
            key = _trim(new)
            term = coeff * a if a != 1 else coeff
            if key in out:
                out[key] = out[key] + term
            else:
                out[key] = term
    out = {a: c for a, c in out.items() if c}
    return DiffSeries._raw(out, f.trunc_degree, f.order + 1)


def dseries_invert(f: DiffSeries) -> DiffSeries:
    """Multiplicative inverse through degree ``D``.

    Writes ``f = f0 (1 + g)`` with ``g`` of degree >= 1 and sums the
    geometric series ``f0^-1 sum_k (-g)^k`` for ``k <= D``.

    Raises
    ------
    NonInvertibleConstantTerm
        If the constant term is zero or not a monomial.
    """
    f0 = f.constant_term()
    if not f0 or not f0.is_monomial():
        raise NonInvertibleConstantTerm(f"constant term {f0} is not an invertible monomial")
    D = f.trunc_degree
    inv0 = ring_invert(f0)
    g = DiffSeries._raw(
        {a: c * inv0 for a, c in f.terms.items() if a}, D, f.order
    )
    neg_g = -g
    one = DiffSeries.constant(RingElem.one(), D)
    total = one
    power = one
    for _ in range(D):
        power = power * neg_g
        if power.is_zero():
            break
        total = total + power
    return total.scale(inv0)


def _binom_third(n: int) -> Fraction:
    """``binom(1/3, n)`` as an exact fraction."""
    out = Fraction(1)
    x = Fraction(1, 3)
    for i in range(n):
        out *= (x - i) / (i + 1)
    return out


@lru_cache(maxsize=None)
def taylor_p(D: int) -> DiffSeries:
    """Expansion of ``p = -(c + w)^(1/3)`` through degree ``D``.

    The coefficient of ``w^n`` is ``-binom(1/3, n) c^(1/3 - n)``.
    """
    terms = {}
    for n in range(D + 1):
        terms[(n,) if n else ()] = RingElem({1 - 3 * n: QuadExt(-_binom_third(n))})
    return DiffSeries(terms, D, 0)


def _cauchy_pairs(seq, total):
    """Yield ``(seq[k1], seq[k2])`` for ``k1 + k2 = total``."""
    for k1 in range(total + 1):
        yield seq[k1], seq[total - k1]


@lru_cache(maxsize=None)
def _rho_seq_cached(N: int, D: int, scheme: str):
    s = scheme_factor(scheme)
    p = taylor_p(D)
    px = p.dx()
    pxx = px.dx()
    inv_p = dseries_invert(p)
    inv_p2 = inv_p * inv_p
    inv_p3 = inv_p2 * inv_p
    rho0 = -(px * inv_p)
    rho1 = (
        -(px * px * inv_p3)
        + (pxx * inv_p2).scale(Fraction(2, 3))
        + inv_p.scale(Fraction(1, 3))
    )
    rhos = [rho0, rho1]
    # p * rho[k] is reused by the quadratic sum and the derivative term
    rho_p = [rho0 * p, rho1 * p]
    lead = inv_p2.scale(Fraction(1, s))
    while len(rhos) <= N:
        n = len(rhos) - 2
        rhs = _recursion_rhs(rhos, rho_p, n, D)
        nxt = lead * rhs
        nxt.order = n + 3
        rhos.append(nxt)
        rho_p.append(nxt * p)
    return tuple(rhos[: N + 1])


def _recursion_rhs(rhos, rho_p, n, D):
    """``s p^2 rho[n+2]`` from the lower levels.

    ``rho[n] - rho[n]_xx - 3 sum p rho rho - sum rho rho rho
    - 3 (rho[n+1] p)_x - 3 sum rho rho_x``.
    """
    rn = rhos[n]
    acc = rn - rn.dx().dx()
    quad = DiffSeries.zero(D)
    for k1 in range(n + 2):
        quad = quad + rho_p[k1] * rhos[n + 1 - k1]
    acc = acc - quad.scale(3)
    if n >= 0:
        cub = DiffSeries.zero(D)
        pair_sums = {}
        for k1 in range(n + 1):
            for k2 in range(n + 1 - k1):
                k3 = n - k1 - k2
                key = (k1, k2)
                if key not in pair_sums:
                    pair_sums[key] = rhos[k1] * rhos[k2]
                cub = cub + pair_sums[key] * rhos[k3]
        acc = acc - cub
    acc = acc - rho_p[n + 1].dx().scale(3)
    mixed = DiffSeries.zero(D)
    for k1 in range(n + 1):
        mixed = mixed + rhos[k1] * rhos[n - k1].dx()
    acc = acc - mixed.scale(3)
    return acc


def rho_seq(N: int, D: int, scheme: str = "unit"):
    """Conserved densities ``rho[0..N]`` truncated at degree ``D``.

    Parameters
    ----------
    N : int
        Highest level computed.
    D : int
        Truncation degree, at least 2.
    scheme : {"unit", "riccati"}
        Normalisation of the recursion, see the module docstring.

    Returns
    -------
    tuple of DiffSeries
        ``rho[n]`` has ``order = n + 1``.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if D < 2:
        raise ValueError("truncation degree must be at least 2")
    scheme_factor(scheme)
    return _rho_seq_cached(N, D, scheme)


def recursion_residual(rhos, n: int, scheme: str = "unit") -> DiffSeries:
    """Residual of the level-``n`` recursion with ``rho[n+2]`` substituted back.

    Exactly zero through the truncation degree when the recursion is solved
    correctly.
    """
    D = rhos[0].trunc_degree
    p = taylor_p(D)
    rho_p = [r * p for r in rhos[: n + 2]]
    rhs = _recursion_rhs(rhos, rho_p, n, D)
    return (rhos[n + 2] * p * p).scale(scheme_factor(scheme)) - rhs


@dataclass(frozen=True)
class ClassCertificate:
    """Outcome of :func:`classify`."""

    in_sigma: bool
    affine_top: bool
    min_degree: int | None


def classify(f: DiffSeries, claimed_order: int) -> ClassCertificate:
    """Check the weight bound and affinity in the top derivative.

    ``in_sigma`` holds when every monomial has weight at most
    ``claimed_order``. ``affine_top`` holds when ``w_{claimed_order}``
    appears at most linearly and, where it appears, no intermediate
    derivative ``w_1 .. w_{claimed_order - 1}`` multiplies it.
    """
    in_sigma = True
    affine = True
    top = claimed_order
    for alpha in f.terms:
        if weight(alpha) > claimed_order:
            in_sigma = False
        if len(alpha) - 1 > top:
            affine = False
            continue
        a_top = alpha[top] if len(alpha) > top else 0
        if top == 0:
            continue
        if a_top > 1:
            affine = False
        elif a_top == 1 and any(alpha[1:top]):
            affine = False
    return ClassCertificate(in_sigma, affine, f.min_degree())
