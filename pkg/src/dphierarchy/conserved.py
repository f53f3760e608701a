"""Conserved functionals built from the densities ``rho[n]``.

Integrals are taken over a circle of unit volume (``int 1 dx = 1``) and are
understood modulo total derivatives. Only the quadratic part is brought to a
canonical diagonal form ``sum_i d_i int (w_i)^2``; cubic and higher parts are
kept as unreduced densities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .coeff_ring import SQRT5, QuadExt, RingElem, ring_invert
from .diffpoly import DiffSeries, rho_seq, scheme_factor, taylor_p
from .errors import (
    ClosedFormMismatch,
    DegenerateLeadingCoefficient,
    ParityViolation,
    VanishingSn,
)

__all__ = [
    "QuadraticForm",
    "ConservedFunctional",
    "LinearCoeffTable",
    "ibp_reduce",
    "gamma",
    "linear_table",
    "linear_closed_form",
    "compute_Sn",
    "compute_Sn_regrouped",
    "quad_top_relation",
    "quad_consistency",
    "m1_expansion",
    "triangularize",
    "k_quadratic_fourier",
]


class QuadraticForm:
    """Diagonal quadratic functional ``sum_i d_i int (d^i w / dx^i)^2``.

    Parameters
    ----------
    coeffs : dict
        Map derivative order ``i`` -> :class:`RingElem`; zeros dropped.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {int(i): c for i, c in (coeffs or {}).items() if c}

    def __getitem__(self, i) -> RingElem:
        return self.coeffs.get(i, RingElem.zero())

    def __add__(self, other):
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, RingElem.zero()) + c
        return QuadraticForm(out)

    def __neg__(self):
        return QuadraticForm({i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "QuadraticForm":
        return QuadraticForm({i: c * factor for i, c in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def top(self):
        """Return ``(i, d_i)`` for the highest nonzero order, or ``None``."""
        if not self.coeffs:
            return None
        i = max(self.coeffs)
        return i, self.coeffs[i]

    def support(self):
        return sorted(self.coeffs)

    def fourier_weight(self, j: int, t=1) -> Fraction:
        """Weight of ``|u_j|^2`` at ``c = t^3`` with ``w_j = (1 + j^2) u_j``."""
        total = Fraction(0)
        for i, c in self.coeffs.items():
            total += c.at_cube(t) * Fraction(j) ** (2 * i) * (1 + j * j) ** 2
        return total

    def __eq__(self, other):
        if not isinstance(other, QuadraticForm):
            return NotImplemented
        return self.coeffs == other.coeffs

    def to_json(self) -> dict:
        return {str(i): c.to_json() for i, c in sorted(self.coeffs.items())}

    def __repr__(self):
        inner = ", ".join(f"{i}: {c}" for i, c in sorted(self.coeffs.items()))
        return f"QuadraticForm({{{inner}}})"


@dataclass
class ConservedFunctional:
    """A functional ``constant + quadratic + int(higher)``.

    Attributes
    ----------
    n : int
        Label (the level of ``rho`` for a Gamma, or the F index).
    quadratic : QuadraticForm
    higher : DiffSeries
        Degree >= 3 remainder density, not canonicalised.
    linear_coeff_top : RingElem
        Coefficient of the highest-order linear monomial of the density
        before integration (``c_n`` for ``Gamma[n]``).
    constant : RingElem
        Value of the functional at ``w = 0`` (unit volume).
    """

    n: int
    quadratic: QuadraticForm
    higher: DiffSeries
    linear_coeff_top: RingElem = field(default_factory=RingElem.zero)
    constant: RingElem = field(default_factory=RingElem.zero)
    label: str = ""

    def combine(self, other: "ConservedFunctional", factor) -> "ConservedFunctional":
        """Return ``self + factor * other``."""
        factor = factor if isinstance(factor, RingElem) else RingElem({0: factor})
        D = max(self.higher.trunc_degree, other.higher.trunc_degree)
        return ConservedFunctional(
            n=self.n,
            quadratic=self.quadratic + other.quadratic.scale(factor),
            higher=self.higher.with_trunc(D) + other.higher.with_trunc(D).scale(factor),
            linear_coeff_top=self.linear_coeff_top,
            constant=self.constant + other.constant * factor,
            label=self.label,
        )

    def scale(self, factor) -> "ConservedFunctional":
        factor = factor if isinstance(factor, RingElem) else RingElem({0: factor})
        return ConservedFunctional(
            n=self.n,
            quadratic=self.quadratic.scale(factor),
            higher=self.higher.scale(factor),
            linear_coeff_top=self.linear_coeff_top,
            constant=self.constant * factor,
            label=self.label,
        )

    def density(self) -> DiffSeries:
        """A density whose integral equals this functional (unit volume)."""
        D = self.higher.trunc_degree
        terms = dict(self.higher.terms)
        if self.constant:
            terms[()] = self.constant
        for i, c in self.quadratic.coeffs.items():
            alpha = [0] * (i + 1)
            alpha[i] = 2
            terms[tuple(alpha)] = terms.get(tuple(alpha), RingElem.zero()) + c
        return DiffSeries(terms, D)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "label": self.label,
            "constant": self.constant.to_json(),
            "quadratic": self.quadratic.to_json(),
            "linear_coeff_top": self.linear_coeff_top.to_json(),
            "higher": self.higher.to_json(),
        }


def _ibp_sign(k1: int, k2: int) -> int:
    return -1 if (k1 - (k1 + k2) // 2) % 2 else 1


def ibp_reduce(density: DiffSeries):
    """Diagonalise the quadratic part of ``int density dx``.

    ``int w_{k1} w_{k2}`` becomes ``(-1)^(k1 - s) int (w_s)^2`` with
    ``s = (k1 + k2)/2`` when ``k1 + k2`` is even and vanishes otherwise.
    Degree-1 terms integrate to zero (zero-mean ``w``).

    Returns
    -------
    (QuadraticForm, DiffSeries)
        The diagonal quadratic form and the degree >= 3 remainder.
    """
    coeffs = {}
    for alpha, coeff in density.terms.items():
        if sum(alpha) != 2:
            continue
        idx = [i for i, a in enumerate(alpha) for _ in range(a)]
        k1, k2 = idx
        if (k1 + k2) % 2:
            continue
        s = (k1 + k2) // 2
        term = coeff if _ibp_sign(k1, k2) > 0 else -coeff
        coeffs[s] = coeffs.get(s, RingElem.zero()) + term
    return QuadraticForm(coeffs), density.degree_range(3)


def _linear_top(rho: DiffSeries, m: int) -> RingElem:
    alpha = [0] * (m + 2)
    alpha[m + 1] = 1
    return rho.coeff(alpha)


def gamma(n: int, D: int, scheme: str = "unit") -> ConservedFunctional:
    """``Gamma[n] = int rho[n] dx`` with its quadratic part diagonalised.

    Raises
    ------
    ParityViolation
        If ``n`` is even and the quadratic part is nonzero.
    """
    if D < 3:
        raise ValueError("truncation degree must be at least 3")
    return _gamma_cached(n, D, scheme)


@lru_cache(maxsize=None)
def _gamma_cached(n, D, scheme):
    rho = rho_seq(n, D, scheme)[n]
    quad, rest = ibp_reduce(rho)
    if n % 2 == 0 and not quad.is_zero():
        raise ParityViolation(f"Gamma[{n}] has quadratic part {quad}")
    return ConservedFunctional(
        n=n,
        quadratic=quad,
        higher=rest,
        linear_coeff_top=_linear_top(rho, n),
        constant=rho.constant_term(),
        label=f"Gamma{n}",
    )


# linear coefficients ------------------------------------------------------


def _ab():
    """Roots ``a, b = (3 +- sqrt5) / (2 c^(1/3))`` of the unit-scheme recursion."""
    a = RingElem({-1: QuadExt(Fraction(3, 2), Fraction(1, 2))})
    b = RingElem({-1: QuadExt(Fraction(3, 2), Fraction(-1, 2))})
    return a, b


def _d1d2():
    """Weights fixed by ``c_0 = -1/(3c)`` and ``c_1 = -2/(9 c^(4/3))``.

    ``d1`` pairs with ``a = (3 + sqrt5)/(2 c^(1/3))``.
    """
    d1 = RingElem({-3: QuadExt(Fraction(-3, 18), Fraction(1, 18))})
    d2 = RingElem({-3: QuadExt(Fraction(-3, 18), Fraction(-1, 18))})
    return d1, d2


def linear_closed_form(m: int) -> RingElem:
    """``c_m = d1 a^m + d2 b^m`` for the unit-scheme linear coefficients."""
    a, b = _ab()
    d1, d2 = _d1d2()
    return d1 * a**m + d2 * b**m


def linear_recursion_step(cn: RingElem, cn1: RingElem, scheme: str = "unit") -> RingElem:
    """``c_{n+2}`` from ``c_n`` and ``c_{n+1}``.

    Top linear terms of the recursion give
    ``s c^(2/3) c_{n+2} = -c_n + 3 c^(1/3) c_{n+1}``.
    """
    s = scheme_factor(scheme)
    inv = RingElem({-2: QuadExt(Fraction(1, s))})
    return inv * (-cn + RingElem({1: QuadExt(3)}) * cn1)


@dataclass
class LinearCoeffTable:
    """Top linear coefficients ``c_m`` read off the densities."""

    c: list
    scheme: str = "unit"
    closed_form_checked: bool = False

    def __getitem__(self, m):
        return self.c[m]

    def __len__(self):
        return len(self.c)


def linear_table(N: int, scheme: str = "unit", check: bool = True) -> LinearCoeffTable:
    """Read ``c_0..c_N`` off ``rho[0..N]`` and verify them.

    The recursion identity is checked for both schemes; the closed form
    ``d1 a^m + d2 b^m`` applies only to the unit scheme.

    Raises
    ------
    ClosedFormMismatch
        If a coefficient disagrees with the recursion or the closed form.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    rhos = rho_seq(N, 2, scheme)
    cs = [_linear_top(rhos[m], m) for m in range(N + 1)]
    table = LinearCoeffTable(cs, scheme)
    if check:
        for m in range(N - 1):
            if linear_recursion_step(cs[m], cs[m + 1], scheme) != cs[m + 2]:
                raise ClosedFormMismatch(f"c_{m + 2} violates the linear recursion")
        if scheme == "unit":
            for m in range(N + 1):
                if linear_closed_form(m) != cs[m]:
                    raise ClosedFormMismatch(f"c_{m} differs from d1 a^m + d2 b^m")
            table.closed_form_checked = True
    return table


# quadratic coefficients ---------------------------------------------------


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


def _sn_direct(cs, n):
    h = (n + 1) // 2
    total = RingElem.zero()
    for k in range(n + 2):
        term = cs[k] * cs[n + 1 - k]
        total = total + (term if _sign(h - k) > 0 else -term)
    return total


def compute_Sn_regrouped(cs, n: int) -> RingElem:
    """Regrouped form: pair ``k`` with ``n + 1 - k`` and keep the middle square."""
    h = (n + 1) // 2
    even = RingElem.zero()
    odd = RingElem.zero()
    for k in range(h):
        term = cs[k] * cs[n + 1 - k]
        if k % 2 == 0:
            even = even + term
        else:
            odd = odd + term
    paired = (even - odd) * (2 * _sign(h))
    return paired + cs[h] * cs[h]


def compute_Sn(n: int, scheme: str = "unit", table: LinearCoeffTable | None = None) -> RingElem:
    """Alternating sum ``S_n = sum_k (-1)^((n+1)/2 - k) c_k c_{n+1-k}``.

    Cross-checked against :func:`compute_Sn_regrouped`.

    Raises
    ------
    VanishingSn
        If ``S_n`` is zero.
    """
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be an odd positive integer")
    if table is None:
        table = linear_table(max(n + 1, 2), scheme)
    cs = table.c
    direct = _sn_direct(cs, n)
    regrouped = compute_Sn_regrouped(cs, n)
    if direct != regrouped:
        raise ClosedFormMismatch(f"regrouped S_{n} differs from the direct sum")
    if not direct:
        raise VanishingSn(f"S_{n} vanishes")
    return direct


@dataclass
class QuadTopRelation:
    """Both sides of the top-weight quadratic identity at level ``n + 2``.

    ``machine_top`` is the coefficient of ``int (w_{(n+3)/2})^2`` in
    ``Gamma[n+2]``. The integrated recursion gives

    ``s c^(2/3) machine_top + s (2/3) c^(-1/3) c_{n+2} (-1)^((n+3)/2)
    = 3 c^(1/3) S_n``

    where the second term pairs the linear part of ``p^2`` with the top
    linear term of ``rho[n+2]``. ``without_cross`` is the prediction that
    omits that pairing.
    """

    n: int
    machine_top: RingElem
    predicted_top: RingElem
    without_cross: RingElem
    Sn: RingElem
    cross_term: RingElem

    @property
    def consistent(self) -> bool:
        return self.machine_top == self.predicted_top


def quad_top_relation(n: int, scheme: str = "unit", D: int = 3) -> QuadTopRelation:
    """Compute both sides of the top quadratic identity for odd ``n``."""
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be an odd positive integer")
    s = scheme_factor(scheme)
    g = gamma(n + 2, D, scheme)
    top_order = (n + 3) // 2
    machine = g.quadratic[top_order]
    table = linear_table(n + 2, scheme)
    Sn = compute_Sn(n, scheme, table)
    rhs = RingElem({1: QuadExt(3)}) * Sn
    cross = RingElem({-1: QuadExt(Fraction(2 * s, 3))}) * table.c[n + 2]
    if _sign(top_order) < 0:
        cross = -cross
    inv_lead = RingElem({-2: QuadExt(Fraction(1, s))})
    predicted = inv_lead * (rhs - cross)
    without = inv_lead * rhs
    return QuadTopRelation(n, machine, predicted, without, Sn, cross)


def quad_consistency(n: int, scheme: str = "unit", perturb: bool = False) -> bool:
    """True iff the machine top coefficient of ``Gamma[n+2]`` matches the
    integrated recursion.

    ``perturb`` flips the sign of the cross term in the prediction, which a
    working comparison must detect.
    """
    rel = quad_top_relation(n, scheme)
    predicted = rel.predicted_top
    if perturb:
        s = scheme_factor(scheme)
        predicted = predicted + RingElem({-2: QuadExt(Fraction(2, s))}) * rel.cross_term
    return rel.machine_top == predicted


# M1 and triangularisation -------------------------------------------------


def m1_expansion(D: int) -> ConservedFunctional:
    """``M1 = int (c + w)^(1/3) dx = -int p dx`` expanded through degree ``D``."""
    if D < 2:
        raise ValueError("truncation degree must be at least 2")
    dens = -taylor_p(D)
    quad, rest = ibp_reduce(dens)
    return ConservedFunctional(
        n=0,
        quadratic=quad,
        higher=rest,
        linear_coeff_top=dens.coeff((1,)),
        constant=dens.constant_term(),
        label="M1",
    )


def triangularize(K: int, D: int, scheme: str = "unit", strict: bool = True):
    """Combine ``Gamma[1], Gamma[3], ..., Gamma[2K+1]`` and ``M1`` into
    ``F_1, F_3, ..., F_{2K+1}`` with quadratic part ``int (w_{k+1})^2``.

    ``F_{2k+1} = (Gamma[2k+1] - (d^0/m) M1 - sum_{i=1}^{k} d^i F_{2i-1}) / d^{k+1}``
    where ``d^i`` are the diagonal coefficients of ``Gamma[2k+1]`` and ``m``
    is the quadratic coefficient of ``M1``.

    Parameters
    ----------
    strict : bool
        When true a vanishing ``d^{k+1}`` raises. When false the level is
        skipped and later levels eliminate what they can; the returned map
        then only holds the levels that could be built.

    Returns
    -------
    dict
        ``k -> ConservedFunctional`` (label ``F{2k+1}``).

    Raises
    ------
    DegenerateLeadingCoefficient
    """
    if D < 3:
        raise ValueError("truncation degree must be at least 3")
    m1 = m1_expansion(D)
    m2 = m1.quadratic[0]
    inv_m2 = ring_invert(m2)
    built = {}
    for k in range(K + 1):
        n = 2 * k + 1
        g = gamma(n, D, scheme)
        d = g.quadratic
        top = d[k + 1]
        if not top:
            if strict:
                raise DegenerateLeadingCoefficient(
                    f"Gamma[{n}] has zero coefficient on int (w_{k + 1})^2"
                )
            continue
        cur = g
        if d[0]:
            cur = cur.combine(m1, -(d[0] * inv_m2))
        for i in range(1, k + 1):
            di = cur.quadratic[i]
            if di and (i - 1) in built:
                cur = cur.combine(built[i - 1], -di)
        cur = cur.scale(ring_invert(top))
        cur.n = n
        cur.label = f"F{n}"
        built[k] = cur
    return built


def k_quadratic_fourier(n: int, J: int) -> dict:
    """Fourier weights of ``K_n^(0) = sum_j |j|^(2(n-1)) (1+j^2)^2 |u_j|^2``.

    Returns a map over ``0 < |j| <= J``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    out = {}
    for j in range(-J, J + 1):
        if j:
            out[j] = Fraction(abs(j)) ** (2 * (n - 1)) * (1 + j * j) ** 2
    return out


# closed-form helpers exposed for reports ------------------------------------


def characteristic_roots():
    """``(a, b, d1, d2)`` of the unit-scheme closed form."""
    a, b = _ab()
    d1, d2 = _d1d2()
    return a, b, d1, d2


def sqrt5() -> RingElem:
    return RingElem({0: SQRT5})
