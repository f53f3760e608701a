"""Acceptance gate: one test group per criterion, tolerances pinned here.

Each test carries ``@pytest.mark.criterion(n, title)``; ``conftest.py``
prints one PASS/FAIL line per criterion at the end of the session. Wall
clock budgets are measured from cold caches.
"""

from fractions import Fraction
import itertools
import time

import numpy as np
import pytest

from dphierarchy import conserved, diffpoly
from dphierarchy.birkhoff import (
    FourierPolynomial,
    GaussianRational,
    I,
    birkhoff_step,
    divisor,
    dp_hamiltonian_fourier,
    enumerate_In,
    index_mass,
    is_trivially_resonant,
    nonresonance_scan,
    poisson,
    vandermonde_det,
)
from dphierarchy.coeff_ring import RingElem
from dphierarchy.conserved import (
    compute_Sn,
    gamma,
    linear_closed_form,
    linear_table,
    triangularize,
)
from dphierarchy.diffpoly import classify, recursion_residual, rho_seq
from dphierarchy.spectral_sim import (
    SimConfig,
    density_scale,
    initial_state,
    k_numeric,
    k_quadratic,
    mollifier_opnorm_probe,
    random_state,
    run,
)

# pinned tolerances ------------------------------------------------------------

BUDGET = {1: 1.0, 2: 5.0, 3: 60.0, 4: 120.0, 5: 120.0, 6: 300.0, 7: 60.0, 8: 120.0, 9: 120.0, 10: 120.0}
DRIFT_MAX = 1e-8
# RK4 order 4: halving dt divides the global error by 2^4 = 16
ORDER_RATIO = 16.0
ORDER_BAND = 0.25
# quadratic dominance: K_n - K_n^(0) is cubic in the amplitude, 2^3 = 8
DOMINANCE_RATIO = 8.0
DOMINANCE_BAND = 0.15
H2_GROWTH = 1.1

DESK = dict(c=1.0, grid=256, amplitude=1e-2, seed=1, dt=1e-3, t_end=10.0,
            gammas=(1, 3), sobolev=(2.0,), kquad=(1, 2), sample_every=100)


def mono(q, k=0):
    return RingElem.monomial(Fraction(q), k)


def cold():
    diffpoly._rho_seq_cached.cache_clear()
    diffpoly.taylor_p.cache_clear()
    conserved._gamma_cached.cache_clear()


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def criterion(n, title):
    return pytest.mark.criterion(n, title)


# 1 --------------------------------------------------------------------------------


@criterion(1, "exact c0, c1, rho0/rho1 coefficients, S1")
def test_c1_exact_constants():
    cold()
    with Timer() as t:
        rho0, rho1 = rho_seq(1, 2)
        table = linear_table(2)
        s1 = compute_Sn(1, table=table)
    assert table[0] == mono(Fraction(-1, 3), -3)
    assert table[1] == mono(Fraction(-2, 9), -4)
    assert rho0.terms == {
        (0, 1): mono(Fraction(-1, 3), -3),
        (1, 1): mono(Fraction(1, 3), -6),
    }
    assert rho1.terms == {
        (): mono(Fraction(-1, 3), -1),
        (1,): mono(Fraction(1, 9), -4),
        (0, 0, 1): mono(Fraction(-2, 9), -4),
        (2,): mono(Fraction(-2, 27), -7),
        (1, 0, 1): mono(Fraction(8, 27), -7),
        (0, 2): mono(Fraction(7, 27), -7),
    }
    assert s1 == mono(Fraction(-14, 81), -8)
    assert t.elapsed < BUDGET[1]


# 2 --------------------------------------------------------------------------------


@criterion(2, "closed form equals recursion for m <= 20")
def test_c2_closed_form():
    cold()
    with Timer() as t:
        table = linear_table(20)
        mismatches = [m for m in range(21) if linear_closed_form(m) != table[m]]
    assert mismatches == []
    assert t.elapsed < BUDGET[2]


# 3 --------------------------------------------------------------------------------


@criterion(3, "S_n nonzero for odd n <= 15, even quadratic parts vanish for n <= 10")
def test_c3_nonvanishing():
    cold()
    with Timer() as t:
        table = linear_table(16)
        zero_s = [n for n in range(1, 16, 2) if compute_Sn(n, table=table).is_zero()]
        nonzero_even = [n for n in range(0, 11, 2) if not gamma(n, 3).quadratic.is_zero()]
    assert zero_s == []
    assert nonzero_even == []
    assert t.elapsed < BUDGET[3]


# 4 --------------------------------------------------------------------------------


@criterion(4, "class and affine structure for n <= 8 at D = 6, zero residual")
def test_c4_structure():
    cold()
    with Timer() as t:
        rhos = rho_seq(10, 6)
        bad_class = [n for n in range(9)
                     if not (classify(rhos[n], n + 1).in_sigma and classify(rhos[n], n + 1).affine_top)]
        bad_residual = [n for n in range(9) if not recursion_residual(rhos, n).is_zero()]
    assert bad_class == []
    assert bad_residual == []
    assert t.elapsed < BUDGET[4]


# 5 --------------------------------------------------------------------------------


@criterion(5, "triangularized F_{2k+1} has diagonal quadratic part for k <= 4")
def test_c5_triangularization():
    cold()
    with Timer() as t:
        F = triangularize(4, 3)
    assert t.elapsed < BUDGET[5]
    for k in range(5):
        q = {i: v for i, v in F[k].quadratic.coeffs.items() if v}
        assert q == {k + 1: RingElem.one()}, k


# 6 --------------------------------------------------------------------------------

_C6_TIME = []


@criterion(6, "cubic nonresonance J = 200, Vandermonde, quartic normal form J = 12")
def test_c6a_cubic_nonresonance():
    with Timer() as t:
        rep = nonresonance_scan(1, 200)
    _C6_TIME.append(t.elapsed)
    assert rep.n_indices > 0
    assert rep.n_resonant == 0


@criterion(6, "cubic nonresonance J = 200, Vandermonde, quartic normal form J = 12")
def test_c6b_vandermonde():
    with Timer() as t:
        modes = [j for j in range(-10, 11) if j]
        wrong = []
        for r in range(1, 6):
            for js in itertools.combinations(modes, r):
                repeated = len({abs(j) for j in js}) < r
                if (vandermonde_det(js) == 0) != repeated:
                    wrong.append(js)
    _C6_TIME.append(t.elapsed)
    assert wrong == []


@criterion(6, "cubic nonresonance J = 200, Vandermonde, quartic normal form J = 12")
def test_c6c_quartic_normal_form():
    with Timer() as t:
        H = dp_hamiltonian_fourier(12)
        cubic = birkhoff_step(H, 0)
        quartic = birkhoff_step(cubic.H_next, 1)
    _C6_TIME.append(t.elapsed)
    assert cubic.normal_terms.is_zero()
    assert quartic.violations == []
    certified = [a for a in quartic.normal_terms.terms if index_mass(a) <= quartic.certified_limit]
    assert certified
    assert all(is_trivially_resonant(a) for a in certified)
    assert sum(_C6_TIME) < BUDGET[6]


# 7 --------------------------------------------------------------------------------

J7 = 6
J_EIGEN = 10
_INDICES = {d: list(enumerate_In(d - 2, J7)) for d in (2, 3, 4)}


def _random_poly(rng, max_terms=4):
    terms = {}
    for _ in range(rng.integers(1, max_terms + 1)):
        d = int(rng.integers(2, 5))
        pool = _INDICES[d]
        alpha = pool[rng.integers(len(pool))]
        re, im = rng.integers(-3, 4, size=2)
        terms[alpha] = GaussianRational(Fraction(int(re)), Fraction(int(im)))
    return FourierPolynomial(terms, J7)


@criterion(7, "bracket antisymmetry, Jacobi, eigen relation")
def test_c7_bracket_algebra():
    rng = np.random.default_rng(2024)
    with Timer() as t:
        for _ in range(50):
            P, Q, R = (_random_poly(rng) for _ in range(3))
            assert poisson(P, Q) == -poisson(Q, P)
            jac = poisson(P, poisson(Q, R)) + poisson(Q, poisson(R, P)) + poisson(R, poisson(P, Q))
            assert jac.is_zero()
        # alpha drawn from a wider cutoff: J = 6 has fewer than 100 indices
        H0 = dp_hamiltonian_fourier(J_EIGEN).homogeneous(2)
        pool = list(enumerate_In(1, J_EIGEN)) + list(enumerate_In(2, J_EIGEN))
        for i in rng.choice(len(pool), size=100, replace=False):
            u = FourierPolynomial({pool[i]: GaussianRational(1)}, J_EIGEN)
            assert poisson(H0, u) == u.scale(-I * divisor(pool[i]))
    assert t.elapsed < BUDGET[7]


# 8 --------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def desk_runs():
    out = {}
    t0 = time.perf_counter()
    for dt in (1e-3, 5e-4, 2.5e-4):
        cfg = SimConfig(**{**DESK, "dt": dt, "sample_every": int(round(0.1 / dt))})
        out[dt] = run(cfg)
    out["elapsed"] = time.perf_counter() - t0
    return out


@criterion(8, "desk-scale conservation and RK4 order under dt halving")
def test_c8_conservation(desk_runs):
    series = desk_runs[1e-3]
    cfg = SimConfig(**DESK)
    state0 = initial_state(cfg)
    drifts = {name: series.relative_drift(name) for name in ("H", "M0", "M1", "gamma_1")}
    # Gamma3 sits at zero: its drift is measured against the density scale
    drifts["gamma_3"] = series.relative_drift("gamma_3", floor=density_scale(state0, cfg.c, 3, cfg.scheme))
    assert max(drifts.values()) <= DRIFT_MAX, drifts


@criterion(8, "desk-scale conservation and RK4 order under dt halving")
def test_c8_rk4_order(desk_runs):
    a, b, c = (desk_runs[dt].final_state.spectrum for dt in (1e-3, 5e-4, 2.5e-4))
    error_ratio = np.linalg.norm(a - b) / np.linalg.norm(b - c)
    lo, hi = ORDER_RATIO * (1 - ORDER_BAND), ORDER_RATIO * (1 + ORDER_BAND)
    assert lo <= error_ratio <= hi
    # drifts of the quantities above rounding fall at least at RK4 order
    for name in ("H", "M0"):
        ratio = desk_runs[1e-3].relative_drift(name) / desk_runs[5e-4].relative_drift(name)
        assert ratio >= lo, (name, ratio)
    assert desk_runs["elapsed"] < BUDGET[8]


# 9 --------------------------------------------------------------------------------


@criterion(9, "small-data H2 bound and quadratic dominance of K_n")
def test_c9_small_data(desk_runs):
    t0 = time.perf_counter()
    series = desk_runs[1e-3]
    h2 = series.column("H2_norm")
    assert h2.max() <= H2_GROWTH * h2[0]

    half = SimConfig(**{**DESK, "amplitude": DESK["amplitude"] / 2})
    half_series = run(half)
    pairs = [
        (initial_state(SimConfig(**DESK)), initial_state(half)),
        (series.final_state, half_series.final_state),
    ]
    lo, hi = DOMINANCE_RATIO * (1 - DOMINANCE_BAND), DOMINANCE_RATIO * (1 + DOMINANCE_BAND)
    for n in (1, 2):
        for full, small in pairs:
            gap_full = k_numeric(full, 1.0, n) - k_quadratic(full, n)
            gap_small = k_numeric(small, 1.0, n) - k_quadratic(small, n)
            assert lo <= gap_full / gap_small <= hi, (n, gap_full / gap_small)
    assert time.perf_counter() - t0 < BUDGET[9]


# 10 -------------------------------------------------------------------------------

EPS_LADDER = [0.2, 0.1, 0.05]


@criterion(10, "mollifier decay ladder and convergence of mollified runs")
def test_c10_mollifier():
    with Timer() as t:
        probe = mollifier_opnorm_probe(EPS_LADDER, s=3, sigma=2)
        assert probe.ladder_ok(), probe.max_ratio

        u0 = random_state(256, 1e-2, 3, max_mode=60, decay=4)
        base = dict(c=1.0, grid=256, dt=1e-3, t_end=2.0)
        exact = run(SimConfig(**base), initial=u0, diagnostics=False).final_state.spectrum
        dist = []
        for eps in EPS_LADDER:
            moll = run(SimConfig(**base, mollifier_eps=eps), initial=u0, diagnostics=False)
            dist.append(np.linalg.norm(moll.final_state.spectrum - exact))
    assert all(b < a for a, b in zip(dist, dist[1:])), dist
    assert t.elapsed < BUDGET[10]
