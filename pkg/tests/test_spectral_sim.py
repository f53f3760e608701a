import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from dphierarchy.conserved import gamma, m1_expansion
from dphierarchy.errors import BlowUpDetected, ConfigError, CubeRootDomain
from dphierarchy.spectral_sim import (
    DiagnosticsSeries,
    SimConfig,
    SpectralState,
    diag_all,
    dp_rhs,
    dp_rhs_physical,
    dt_max,
    hamiltonian,
    k_numeric,
    k_quadratic,
    m1_numeric,
    mollified_rhs,
    mollifier_opnorm_probe,
    mollifier_profile,
    momentum_m0,
    numeric_densities,
    numeric_gammas,
    omega_symbol,
    parse_config,
    parse_modes,
    random_state,
    run,
    state_from_modes,
    step,
    wavenumbers,
)


def derivs_of_w(state, order, pad=2):
    N = state.n_modes
    M = pad * N
    k = wavenumbers(M)
    spec = np.zeros(M // 2 + 1, dtype=complex)
    spec[: N // 2 + 1] = state.w_spectrum()
    return [np.fft.irfft((1j * k) ** i * spec, n=M, norm="forward") for i in range(order + 1)]


# right-hand side --------------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, -1.0, 2.5]))
def test_symbol_identity(seed, c):
    state = random_state(128, 0.05, seed, max_mode=20)
    a = dp_rhs(state, c, dealias=False)
    b = dp_rhs_physical(state, c)
    assert np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(a))


def test_zero_state_is_fixed():
    cfg = SimConfig()
    z = SpectralState.zeros(64)
    assert not np.any(dp_rhs(z, 1.0))
    assert not np.any(mollified_rhs(z, 1.0, 0.1))
    assert not np.any(step(z, cfg).spectrum)


def test_single_mode_product():
    x = 2 * np.pi * np.arange(64) / 64
    state = SpectralState.from_physical(0.01 * np.cos(x))
    rhs = dp_rhs(state, 0.0, dealias=False)
    populated = set(np.nonzero(np.abs(rhs) > 1e-12 * np.max(np.abs(rhs)))[0])
    assert populated == {2}


def test_linear_rotation():
    # tiny amplitude: the quadratic term is below rounding
    cfg = SimConfig(c=1.0, dt=1e-3)
    state = random_state(64, 1e-12, 3, max_mode=6)
    out = step(state, cfg)
    k = wavenumbers(64)
    exact = state.spectrum * np.exp(-1j * cfg.c * omega_symbol(k) * cfg.dt)
    assert np.max(np.abs(out.spectrum - exact)) <= 1e-12 * np.max(np.abs(state.spectrum))


def test_time_reversal():
    cfg = SimConfig(c=1.0, dt=1e-3)
    state = random_state(128, 1e-2, 5)
    back = step(step(state, cfg), cfg, dt=-cfg.dt)
    assert np.max(np.abs(back.spectrum - state.spectrum)) < 1e-14


def test_dt_guard_and_blowup():
    cfg = SimConfig(grid=64, dt=1.0)
    with pytest.raises(ConfigError):
        step(random_state(64, 1e-3, 0), cfg)
    cfg = SimConfig(grid=64, dt=1e-3)
    big = state_from_modes(64, {1: 0.4})
    with pytest.raises(BlowUpDetected):
        step(big, cfg)
    assert dt_max(cfg) == pytest.approx(0.5 / float(omega_symbol(np.array(32.0))))


# mollifier -----------------------------------------------------------------------


def test_mollifier_profile():
    xi = np.linspace(-3, 3, 601)
    j = mollifier_profile(xi)
    assert np.all((0 <= j) & (j <= 1))
    assert np.all(j[np.abs(xi) <= 1] == 1)
    assert np.all(j[np.abs(xi) >= 2] == 0)
    assert np.allclose(j, j[::-1])


def test_mollified_rhs_small_eps_limit():
    state = random_state(128, 1e-2, 2, max_mode=10)
    eps = 2.0 / 128
    a = mollified_rhs(state, 1.0, eps, dealias=False)
    b = dp_rhs(state, 1.0, dealias=False)
    assert np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(b))


def test_opnorm_probe_low_modes():
    # fields on |j| <= 1/eps are untouched
    k = wavenumbers(256)
    assert np.all(1 - mollifier_profile(0.1 * k[k <= 10]) == 0)


def test_opnorm_single_mode_formula():
    probe = mollifier_opnorm_probe([0.1], s=3, sigma=2, samples=1, N=256)
    k = wavenumbers(256)[1:]
    expected = np.max((1 - mollifier_profile(0.1 * k)) * (1 + k * k) ** (-0.5))
    assert probe.single_mode_sup[0] == pytest.approx(expected, rel=1e-14)


# diagnostics -------------------------------------------------------------------------


def test_zero_state_diagnostics():
    z = SpectralState.zeros(64)
    assert hamiltonian(z, 8.0) == 0
    assert momentum_m0(z) == 0
    assert m1_numeric(z, 8.0) == pytest.approx(2.0)
    g = numeric_gammas(z, 8.0, [0, 1])
    assert g[0] == 0
    assert g[1] == pytest.approx(-1 / 6)


def test_m0_weight():
    state = state_from_modes(64, {1: 0.01})
    assert momentum_m0(state) == pytest.approx(2 * 0.2 * 1e-4, rel=1e-14)


def test_k1_parseval():
    state = state_from_modes(64, {2: 0.003 + 0.001j})
    u = state.physical()
    k = wavenumbers(64)
    uxx = np.fft.irfft(-(k * k) * state.spectrum, n=64, norm="forward")
    assert k_quadratic(state, 1) == pytest.approx(np.mean((u - uxx) ** 2), rel=1e-12)


def test_sobolev_norm_single_mode():
    state = state_from_modes(64, {3: 0.5})
    assert state.sobolev_norm(2) == pytest.approx(np.sqrt(2 * 100 * 0.25))


def test_cube_root_domain():
    state = state_from_modes(64, {5: 0.1})
    with pytest.raises(CubeRootDomain):
        numeric_densities(state, 1.0, 1)


def _series_gap(F, amplitude, seed=7):
    state = random_state(128, amplitude, seed)
    dens = F.density()
    sym = float(np.mean(dens.evaluate(derivs_of_w(state, dens.order), 1.0)))
    return state, sym


@pytest.mark.parametrize("n", [1, 5])
def test_numeric_gamma_matches_truncated_series(n):
    # the truncated series misses terms of degree D + 1 and above, so the
    # gap shrinks by about 2^(D + 1) = 32 when the amplitude halves
    D = 4
    gaps = []
    for amp in (2e-3, 1e-3):
        state, sym = _series_gap(gamma(n, D), amp)
        gaps.append(abs(numeric_gammas(state, 1.0, [n])[n] - sym))
    assert 20 < gaps[0] / gaps[1] < 50


def test_numeric_gamma3_vanishes():
    for amp in (1e-2, 1e-3):
        state = random_state(128, amp, 7)
        assert abs(numeric_gammas(state, 1.0, [3])[3]) < 1e-15


def test_m1_matches_series():
    gaps = []
    for amp in (2e-2, 1e-2):
        state, sym = _series_gap(m1_expansion(4), amp, seed=8)
        gaps.append(abs(m1_numeric(state, 1.0) - sym))
    assert 20 < gaps[0] / gaps[1] < 50


@pytest.mark.parametrize("n", [1, 2])
def test_k_numeric_quadratic_dominance(n):
    state = random_state(256, 1e-3, 1)
    assert k_numeric(state, 1.0, n) == pytest.approx(k_quadratic(state, n), rel=1e-2)


def test_scheme_choice_changes_higher_densities():
    state = random_state(128, 1e-2, 1)
    a = numeric_gammas(state, 1.0, [5], "unit")[5]
    b = numeric_gammas(state, 1.0, [5], "riccati")[5]
    assert a != b


# runs ---------------------------------------------------------------------------------


def test_run_t_end_zero():
    cfg = SimConfig(t_end=0.0, grid=64)
    series = run(cfg)
    assert len(series.rows) == 1
    assert series.columns[:4] == ["t", "H", "M0", "M1"]
    assert "gamma_3" in series.columns and "K_2_quad" in series.columns


def test_short_run_conserves_and_stays_real():
    cfg = SimConfig(grid=128, t_end=1.0, sample_every=250, seed=4)
    series = run(cfg)
    assert series.relative_drift("H") < 1e-9
    assert series.relative_drift("M1") < 1e-9
    u = series.final_state.physical()
    assert abs(np.mean(u)) < 1e-18
    assert series.final_state.spectrum[0] == 0


def test_relative_drift_needs_floor():
    s = DiagnosticsSeries()
    s.append({"t": 0.0, "q": 0.0})
    s.append({"t": 1.0, "q": 1e-20})
    with pytest.raises(ValueError):
        s.relative_drift("q")
    assert s.relative_drift("q", floor=1e-10) == pytest.approx(1e-10)


def test_diag_all_columns():
    cfg = SimConfig(grid=64, sobolev=(2.0, 2.5), kquad=(1,), gammas=(1,))
    d = diag_all(random_state(64, 1e-3, 0), cfg)
    assert list(d) == ["t", "H", "M0", "M1", "gamma_1", "H2_norm", "H2.5_norm", "K_1_quad"]


# config ---------------------------------------------------------------------------------


def test_parse_config():
    text = """
    # small data
    c = 2
    grid = 128
    dt = 0.0005
    gammas = 1,3,5
    sobolev = 2,3
    dealias = false
    init = 1:0.005+0.0i, 2:0.002+0.001i
    """
    cfg = parse_config(text, {"seed": 9})
    assert cfg.c == 2.0 and cfg.grid == 128 and cfg.gammas == (1, 3, 5)
    assert cfg.sobolev == (2.0, 3.0) and cfg.dealias is False and cfg.seed == 9
    assert cfg.init == {1: 0.005 + 0j, 2: 0.002 + 0.001j}


@pytest.mark.parametrize("text", ["nonsense", "colour = red", "grid = 100", "c = 0", "dt = x"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_parse_modes_error():
    with pytest.raises(ConfigError):
        parse_modes("1-0.3")


def test_digest_is_stable():
    assert SimConfig(seed=1).digest() == SimConfig(seed=1).digest()
    assert SimConfig(seed=1).digest() != SimConfig(seed=2).digest()
