"""Fourier-side normal form machinery with exact arithmetic.

Phase-space coordinates are the Fourier modes ``u_j`` (``j != 0``) of a
real zero-mean field, ``conj(u_j) = u_{-j}``, integrals normalised to unit
volume. A multi-index ``alpha`` is stored as a sorted tuple of
``(j, alpha_j)`` pairs; a monomial is ``u^alpha = prod_j u_j^alpha_j``.

The Poisson bracket is the one induced by the DP operator
``J = (1 - d_xx)^(-1) (4 - d_xx) d_x``::

    {P, Q} = sum_j  i omega(j) dP/du_j dQ/du_{-j}

With this sign ``{G, u^alpha} = -i Omega_G(alpha) u^alpha`` for every
diagonal ``G = sum_{j>0} lam_j u_j u_{-j}``, where
``Omega_G(alpha) = sum_j omega(j) lam_|j| alpha_j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    CutoffArtifact,
    CutoffMismatch,
    DuplicateIndex,
    ResonanceViolation,
    ZeroMode,
)

__all__ = [
    "GaussianRational",
    "FourierPolynomial",
    "ResonanceReport",
    "make_index",
    "index_degree",
    "index_momentum",
    "index_mass",
    "is_trivially_resonant",
    "omega",
    "divisor",
    "enumerate_In",
    "classify_resonance",
    "vandermonde_det",
    "vandermonde_closed_form",
    "nonresonance_scan",
    "poisson",
    "homological_solve",
    "diagonal_quadratic",
    "dp_hamiltonian_fourier",
    "lie_transform",
    "birkhoff_step",
    "functional_to_fourier",
    "simultaneous_check",
]


# Gaussian rationals ----------------------------------------------------------


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def _raw(cls, re, im):
        obj = cls.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    def __add__(self, other):
        other = _gauss(other)
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_gauss(other))

    def __rsub__(self, other):
        return _gauss(other) - self

    def __mul__(self, other):
        other = _gauss(other)
        return GaussianRational._raw(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational._raw(self.re, -self.im)

    def __truediv__(self, other):
        other = _gauss(other)
        den = other.re * other.re + other.im * other.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * other.conjugate()
        return GaussianRational._raw(num.re / den, num.im / den)

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            other = _gauss(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i)"

    def to_json(self):
        return [_fstr(self.re), _fstr(self.im)]


I = GaussianRational(0, 1)


def _fstr(x: Fraction) -> str:
    return str(x)


def _gauss(value) -> GaussianRational:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, complex):
        raise TypeError("floating complex values are not exact")
    if isinstance(value, float):
        raise TypeError("floats are not exact")
    return GaussianRational._raw(Fraction(value), Fraction(0))


# multi-indices ---------------------------------------------------------------


def make_index(modes) -> tuple:
    """Build a canonical index from a list of modes (with repetition) or a
    ``{j: alpha_j}`` map.

    >>> make_index([1, 2, -3])
    ((-3, 1), (1, 1), (2, 1))
    """
    if isinstance(modes, dict):
        items = [(int(j), int(a)) for j, a in modes.items() if a]
    else:
        counts = {}
        for j in modes:
            counts[int(j)] = counts.get(int(j), 0) + 1
        items = list(counts.items())
    for j, a in items:
        if j == 0:
            raise ZeroMode("mode 0 is excluded from the phase space")
        if a < 0:
            raise ValueError("negative exponent")
    return tuple(sorted(items))


def index_degree(alpha) -> int:
    return sum(a for _, a in alpha)


def index_momentum(alpha) -> int:
    return sum(j * a for j, a in alpha)


def index_mass(alpha) -> int:
    """``sum_{j>0} j alpha_j``; equals the negative-side mass at zero momentum.

    Every mode created while contracting an index of this mass against
    another polynomial has ``|j|`` at most this value.
    """
    return sum(j * a for j, a in alpha if j > 0)


def index_support_max(alpha) -> int:
    return max((abs(j) for j, _ in alpha), default=0)


def is_trivially_resonant(alpha) -> bool:
    d = dict(alpha)
    return all(d.get(-j, 0) == a for j, a in alpha)


def _index_add(alpha, beta, drop_j=None):
    d = dict(alpha)
    for j, b in beta:
        d[j] = d.get(j, 0) + b
    if drop_j is not None:
        for j in (drop_j, -drop_j):
            d[j] -= 1
    return tuple(sorted((j, a) for j, a in d.items() if a))


def _index_conj(alpha):
    return tuple(sorted((-j, a) for j, a in alpha))


def _index_str(alpha) -> str:
    return " ".join(f"{j}^{a}" if a > 1 else str(j) for j, a in alpha)


# dispersion and divisors -----------------------------------------------------


def omega(j: int) -> Fraction:
    """Dispersion law ``j (4 + j^2) / (1 + j^2)``."""
    if j == 0:
        raise ZeroMode("omega is defined for j != 0")
    return Fraction(j * (4 + j * j), 1 + j * j)


def divisor(alpha, omega_fn=omega, weights=None) -> Fraction:
    """``Omega(alpha) = sum_j omega(j) lam_|j| alpha_j`` (``lam = 1`` by default)."""
    total = Fraction(0)
    for j, a in alpha:
        w = omega_fn(j)
        if weights is not None:
            w = w * weights(abs(j))
        total += w * a
    return total


def km_divisor(alpha, m: int) -> Fraction:
    """Divisor of ``K_m^(0)``: ``sum_j j^(2m-1) (1+j^2)(4+j^2) alpha_j``."""
    return Fraction(sum(j ** (2 * m - 1) * (1 + j * j) * (4 + j * j) * a for j, a in alpha))


def enumerate_In(n: int, J: int):
    """Zero-momentum indices of degree ``n + 2`` supported in ``0 < |j| <= J``.

    Yields each multiset exactly once, in lexicographic order of the sorted
    mode list.
    """
    if J < 1:
        raise ValueError("J must be at least 1")
    size = n + 2
    modes = [j for j in range(-J, J + 1) if j]

    def rec(start, remaining, partial_sum, chosen):
        if remaining == 0:
            if partial_sum == 0:
                yield make_index(chosen)
            return
        for pos in range(start, len(modes)):
            j = modes[pos]
            # all later picks are >= j, bounded by J
            lo = partial_sum + j * remaining
            hi = partial_sum + j + J * (remaining - 1)
            if lo > 0:
                break
            if hi < 0:
                continue
            chosen.append(j)
            yield from rec(pos, remaining - 1, partial_sum + j, chosen)
            chosen.pop()

    yield from rec(0, size, 0, [])


@dataclass
class ResonanceReport:
    alpha: tuple
    divisor: Fraction
    trivially_resonant: bool
    km_divisors: list

    def to_row(self):
        return [
            _index_str(self.alpha),
            _fstr(self.divisor),
            str(self.trivially_resonant).lower(),
        ] + [_fstr(x) for x in self.km_divisors]


def classify_resonance(alpha, M: int, omega_fn=omega) -> ResonanceReport:
    """Divisor, triviality and the ``K_m`` divisors for ``m = 1..M``."""
    return ResonanceReport(
        alpha=alpha,
        divisor=divisor(alpha, omega_fn),
        trivially_resonant=is_trivially_resonant(alpha),
        km_divisors=[km_divisor(alpha, m) for m in range(1, M + 1)],
    )


# Vandermonde -----------------------------------------------------------------


def _bareiss_det(mat) -> int:
    """Fraction-free determinant of an integer matrix."""
    a = [list(row) for row in mat]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _check_modes(js):
    if any(j == 0 for j in js):
        raise ZeroMode("modes must be nonzero")
    if len(set(js)) != len(js):
        raise DuplicateIndex("modes must be pairwise distinct")


def vandermonde_det(js) -> int:
    """Determinant of ``V[r][i] = js[i]^(2r+1)``, ``r = 0..len(js)-1``."""
    js = [int(j) for j in js]
    _check_modes(js)
    n = len(js)
    return _bareiss_det([[j ** (2 * r + 1) for j in js] for r in range(n)])


def vandermonde_closed_form(js) -> int:
    """``prod_i j_i * prod_{i<k} (j_k^2 - j_i^2)``."""
    js = [int(j) for j in js]
    _check_modes(js)
    out = math.prod(js)
    for i in range(len(js)):
        for k in range(i + 1, len(js)):
            out *= js[k] ** 2 - js[i] ** 2
    return out


@dataclass
class ScanReport:
    """Summary of :func:`nonresonance_scan`."""

    n: int
    J: int
    M: int
    n_indices: int = 0
    n_resonant: int = 0
    n_trivial: int = 0
    nontrivial_resonant: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    distinct_abs_certified: int = 0

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def nonresonance_scan(n: int, J: int, M: int | None = None, omega_fn=omega) -> ScanReport:
    """Scan ``enumerate_In(n, J)`` for resonances.

    For every resonant index the full system ``km_divisor(alpha, m) = 0``,
    ``m = 1..M`` (default ``M = n + 2``), is tested exactly; a
    non-trivially resonant index solving all of them is a counterexample.
    Indices whose ``|j|`` values are pairwise distinct are additionally
    certified by a nonzero Vandermonde determinant.
    """
    M = n + 2 if M is None else M
    rep = ScanReport(n=n, J=J, M=M)
    for alpha in enumerate_In(n, J):
        rep.n_indices += 1
        if divisor(alpha, omega_fn) != 0:
            continue
        rep.n_resonant += 1
        if is_trivially_resonant(alpha):
            rep.n_trivial += 1
            continue
        rep.nontrivial_resonant.append(alpha)
        js = [j for j, _ in alpha]
        if len({abs(j) for j in js}) == len(js) and len(js) <= M:
            if vandermonde_det(js) != 0:
                rep.distinct_abs_certified += 1
        if all(km_divisor(alpha, m) == 0 for m in range(1, M + 1)):
            rep.counterexamples.append(alpha)
    return rep


# polynomials -----------------------------------------------------------------


class FourierPolynomial:
    """Sparse zero-momentum polynomial in the modes ``u_j``, ``0 < |j| <= J``.

    Parameters
    ----------
    terms : dict
        Map index -> :class:`GaussianRational`.
    J : int
        Mode cutoff.
    """

    __slots__ = ("terms", "J")

    def __init__(self, terms, J: int):
        clean = {}
        for alpha, coeff in terms.items():
            coeff = _gauss(coeff)
            if not coeff:
                continue
            if index_momentum(alpha) != 0:
                raise ValueError(f"index {alpha} has nonzero momentum")
            if index_support_max(alpha) > J:
                raise ValueError(f"index {alpha} exceeds cutoff {J}")
            clean[alpha] = coeff
        self.terms = clean
        self.J = J

    @classmethod
    def _raw(cls, terms, J):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.J = J
        return obj

    @classmethod
    def monomial(cls, alpha, coeff, J):
        return cls({alpha: coeff}, J)

    def _check(self, other):
        if self.J != other.J:
            raise CutoffMismatch(f"cutoffs differ: {self.J} vs {other.J}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            s = out[a] + c if a in out else c
            if s:
                out[a] = s
            else:
                out.pop(a, None)
        return FourierPolynomial._raw(out, self.J)

    def __neg__(self):
        return FourierPolynomial._raw({a: -c for a, c in self.terms.items()}, self.J)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        factor = _gauss(factor)
        if not factor:
            return FourierPolynomial._raw({}, self.J)
        return FourierPolynomial._raw({a: c * factor for a, c in self.terms.items()}, self.J)

    def homogeneous(self, d: int) -> "FourierPolynomial":
        return FourierPolynomial._raw(
            {a: c for a, c in self.terms.items() if index_degree(a) == d}, self.J
        )

    def degree_range(self, lo: int, hi: int) -> "FourierPolynomial":
        return FourierPolynomial._raw(
            {a: c for a, c in self.terms.items() if lo <= index_degree(a) <= hi}, self.J
        )

    def degrees(self):
        return sorted({index_degree(a) for a in self.terms})

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def coeff(self, alpha) -> GaussianRational:
        return self.terms.get(alpha, GaussianRational())

    def is_real(self) -> bool:
        """Reality condition: coefficient of ``conj(alpha)`` is the conjugate."""
        for a, c in self.terms.items():
            if self.coeff(_index_conj(a)) != c.conjugate():
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, FourierPolynomial):
            return NotImplemented
        return self.J == other.J and self.terms == other.terms

    def evaluate(self, modes: dict) -> complex:
        """Float evaluation at ``{j: u_j}``."""
        total = 0j
        for alpha, c in self.terms.items():
            term = complex(c)
            for j, a in alpha:
                term *= modes.get(j, 0) ** a
            total += term
        return total

    def to_json(self):
        return {
            "cutoff": self.J,
            "terms": [
                {"alpha": [[j, a] for j, a in alpha], "coeff": c.to_json()}
                for alpha, c in sorted(self.terms.items(), key=lambda t: (index_degree(t[0]), t[0]))
            ],
        }

    def __repr__(self):
        return f"FourierPolynomial(J={self.J}, {len(self.terms)} terms, degrees {self.degrees()})"


def poisson(P: FourierPolynomial, Q: FourierPolynomial) -> FourierPolynomial:
    """Exact bracket ``sum_j i omega(j) dP/du_j dQ/du_{-j}``.

    Degrees add minus two; zero momentum is preserved.
    """
    P._check(Q)
    out = {}
    q_items = list(Q.terms.items())
    q_by_mode = {}
    for beta, cq in q_items:
        for j, b in beta:
            q_by_mode.setdefault(j, []).append((beta, cq, b))
    om = {}
    for alpha, cp in P.terms.items():
        for j, a in alpha:
            partners = q_by_mode.get(-j)
            if not partners:
                continue
            if j not in om:
                om[j] = omega(j)
            base = cp * GaussianRational._raw(Fraction(0), om[j] * a)
            for beta, cq, b in partners:
                key = _index_add(alpha, beta, drop_j=j)
                val = base * cq
                if b != 1:
                    val = val * b
                if key in out:
                    out[key] = out[key] + val
                else:
                    out[key] = val
    return FourierPolynomial._raw({k: v for k, v in out.items() if v}, P.J)


def diagonal_quadratic(weights, J: int) -> FourierPolynomial:
    """``sum_{0<j<=J} lam_j u_j u_{-j}`` from a map or callable ``lam``."""
    terms = {}
    for j in range(1, J + 1):
        lam = weights(j) if callable(weights) else weights.get(j, 0)
        if lam:
            terms[((-j, 1), (j, 1))] = _gauss(lam)
    return FourierPolynomial(terms, J)


def _omega_weights(H0: FourierPolynomial):
    """``lam_j`` from a diagonal quadratic polynomial."""
    lam = {}
    for alpha, c in H0.terms.items():
        if index_degree(alpha) != 2 or not is_trivially_resonant(alpha):
            raise ValueError("H0 must be diagonal quadratic")
        if c.im != 0:
            raise ValueError("H0 must have real weights")
        lam[abs(alpha[0][0])] = c.re
    return lam


def weighted_divisor(alpha, lam: dict) -> Fraction:
    return sum((omega(j) * lam.get(abs(j), 0) * a for j, a in alpha), Fraction(0))


def homological_solve(G: FourierPolynomial, H0):
    """Solve ``{H0, chi} + G = Z`` with ``Z`` the kernel part of ``G``.

    ``H0`` is a diagonal quadratic polynomial or a weight map ``j -> lam_j``.

    Returns
    -------
    (chi, kernel_part)
        ``chi_alpha = G_alpha / (i Omega(alpha))`` where ``Omega != 0``;
        ``kernel_part`` keeps the terms with ``Omega = 0``.
    """
    lam = H0 if isinstance(H0, dict) else _omega_weights(H0)
    chi = {}
    ker = {}
    for alpha, g in G.terms.items():
        om = weighted_divisor(alpha, lam)
        if om == 0:
            ker[alpha] = g
        else:
            chi[alpha] = g / GaussianRational._raw(Fraction(0), om)
    return FourierPolynomial._raw(chi, G.J), FourierPolynomial._raw(ker, G.J)


def dp_hamiltonian_fourier(J: int, c=1, cubic_sign: int = -1) -> FourierPolynomial:
    """``int c u^2/2 + cubic_sign * u^3/6`` in Fourier variables (unit volume).

    The default ``cubic_sign = -1`` gives ``c sum_{0<j<=J} u_j u_{-j}
    - (1/6) sum_{j+k+l=0} u_j u_k u_l``. The literal DP flow conserves the
    ``cubic_sign = +1`` version; the two are exchanged by ``u -> -u``.
    """
    if J < 2:
        raise ValueError("J must be at least 2")
    c = Fraction(c)
    terms = {}
    for j in range(1, J + 1):
        terms[((-j, 1), (j, 1))] = GaussianRational(c)
    coef = Fraction(cubic_sign, 6)
    for alpha in enumerate_In(1, J):
        # number of ordered triples giving this multiset
        mult = math.factorial(3)
        for _, a in alpha:
            mult //= math.factorial(a)
        terms[alpha] = GaussianRational(coef * mult)
    return FourierPolynomial(terms, J)


def lie_transform(chi: FourierPolynomial, H: FourierPolynomial, max_degree: int):
    """``exp(ad_chi) H = sum_k ad_chi^k H / k!`` truncated at ``max_degree``."""
    total = H.degree_range(0, max_degree)
    term = total
    k = 0
    while True:
        k += 1
        term = poisson(chi, term).degree_range(0, max_degree).scale(Fraction(1, k))
        if term.is_zero():
            break
        total = total + term
    return total


@dataclass
class BirkhoffStep:
    H_next: FourierPolynomial
    chi: FourierPolynomial
    normal_terms: FourierPolynomial
    certified_limit: int
    flagged: list
    violations: list


def birkhoff_step(H_cur: FourierPolynomial, k: int, max_degree: int | None = None,
                  certified_limit: int | None = None, strict: bool = False) -> BirkhoffStep:
    """Remove the non-resonant part of the degree ``k + 3`` terms.

    The generator ``chi`` solves ``{H0, chi} = G_range`` for the degree
    ``k + 3`` part ``G`` of ``H_cur``; ``H_next = exp(ad_chi) H_cur``
    truncated at ``max_degree`` (default ``k + 4``). Its degree ``k + 3``
    part equals the kernel projection of ``G``.

    Every mode contracted while building a coefficient is a signed sum of
    a subset of the output index's modes, so it is bounded by the index
    mass (:func:`index_mass`). Kernel indices with mass above
    ``certified_limit`` (default ``J``) may depend on modes beyond the
    cutoff and are flagged rather than trusted.

    Returns
    -------
    BirkhoffStep
        ``violations`` lists certified, non-trivially resonant kernel
        indices. ``ResonanceViolation`` is raised if any exist.

    Raises
    ------
    ResonanceViolation
    CutoffArtifact
        With ``strict=True`` when any kernel index is flagged.
    """
    J = H_cur.J
    deg = k + 3
    max_degree = deg + 1 if max_degree is None else max_degree
    H0 = H_cur.homogeneous(2)
    G = H_cur.homogeneous(deg)
    chi_neg, kernel = homological_solve(G, H0)
    chi = -chi_neg
    H_next = lie_transform(chi, H_cur, max_degree)
    limit = J if certified_limit is None else certified_limit
    flagged = []
    violations = []
    for alpha in kernel.terms:
        if index_mass(alpha) > limit:
            flagged.append(alpha)
        elif not is_trivially_resonant(alpha):
            violations.append(alpha)
    step = BirkhoffStep(H_next, chi, kernel, limit, flagged, violations)
    if violations:
        raise ResonanceViolation(
            f"{len(violations)} certified kernel terms are not trivially resonant"
        )
    if strict and flagged:
        raise CutoffArtifact(f"{len(flagged)} kernel terms depend on modes beyond the cutoff")
    return step


# functionals in Fourier variables ---------------------------------------------


def functional_to_fourier(F, J: int, t=1, max_degree: int = 3, flip: bool = False) -> FourierPolynomial:
    """Express a :class:`~dphierarchy.conserved.ConservedFunctional` in modes.

    Uses ``w_j = (1 + j^2) u_j`` and ``d/dx -> i j``; evaluated at
    ``c = t^3`` (``t`` rational) so the coefficients are exact. With
    ``flip`` the field is replaced by ``-u`` (odd degrees change sign).
    The constant part is dropped.
    """
    terms = {}

    def add(alpha, val):
        if alpha in terms:
            terms[alpha] = terms[alpha] + val
        else:
            terms[alpha] = val

    for i, d in F.quadratic.coeffs.items():
        dv = d.at_cube(t)
        for j in range(1, J + 1):
            w = Fraction(j) ** (2 * i) * (1 + j * j) ** 2
            add(((-j, 1), (j, 1)), GaussianRational(2 * dv * w))
    modes = [j for j in range(-J, J + 1) if j]
    ipow = [GaussianRational(1), I, GaussianRational(-1), -I]
    for alpha, coeff in F.higher.terms.items():
        d = sum(alpha)
        if d > max_degree:
            continue
        cv = coeff.at_cube(t)
        if flip and d % 2:
            cv = -cv
        derivs = [i for i, a in enumerate(alpha) for _ in range(a)]
        for tup in itertools.product(modes, repeat=d - 1):
            last = -sum(tup)
            if last == 0 or abs(last) > J:
                continue
            js = tup + (last,)
            num = Fraction(1)
            power = 0
            for jr, ir in zip(js, derivs):
                num *= Fraction(jr) ** ir * (1 + jr * jr)
                power += ir
            add(make_index(js), ipow[power % 4] * num * cv)
    return FourierPolynomial(terms, J)


@dataclass
class SimultaneousReport:
    identity_ok: list
    normalized_ok: list
    kernel_commutes: list
    max_residual_terms: int

    @property
    def ok(self):
        return all(self.identity_ok) and all(self.normalized_ok) and all(self.kernel_commutes)


def simultaneous_check(H: FourierPolynomial, Ks, chi: FourierPolynomial, degree: int = 3,
                       normal_terms: FourierPolynomial | None = None,
                       certified_limit: int | None = None) -> SimultaneousReport:
    """Check that ``chi`` normalises every ``K`` commuting with ``H``.

    For each ``K`` at the given ``degree``:

    * the lowest-order commutation identity
      ``{H0, K_d} + {H_d, K0} = 0`` holds on indices of mass at most
      ``certified_limit``;
    * the degree-``d`` part of ``exp(ad_chi) K`` vanishes on the range of
      ``H0`` within the same region;
    * every trivially resonant term of ``normal_terms`` commutes with
      ``K0``.
    """
    limit = H.J if certified_limit is None else certified_limit
    H0 = H.homogeneous(2)
    Hd = H.homogeneous(degree)
    lamH = _omega_weights(H0)
    identity_ok, normalized_ok, commutes = [], [], []
    worst = 0
    for K in Ks:
        K0 = K.homogeneous(2)
        Kd = K.homogeneous(degree)
        ident = poisson(H0, Kd) + poisson(Hd, K0)
        bad = [a for a in ident.terms if index_mass(a) <= limit]
        worst = max(worst, len(bad))
        identity_ok.append(not bad)
        Kt = lie_transform(chi, K.degree_range(0, degree), degree).homogeneous(degree)
        bad_norm = [
            a for a in Kt.terms
            if index_mass(a) <= limit and weighted_divisor(a, lamH) != 0
        ]
        normalized_ok.append(not bad_norm)
        if normal_terms is not None:
            triv = FourierPolynomial._raw(
                {a: c for a, c in normal_terms.terms.items() if is_trivially_resonant(a)},
                normal_terms.J,
            )
            commutes.append(poisson(K0, triv).is_zero())
        else:
            commutes.append(True)
    return SimultaneousReport(identity_ok, normalized_ok, commutes, worst)
