"""Pseudospectral integration of the dispersive DP equation on [0, 2*pi).

The equation is

    u_t - u_xxt + c (4 u_x - u_xxx) + 4 u u_x = 3 u_x u_xx + u u_xxx

which in Fourier variables reads ``d/dt u_j = -i omega(j) FFT(c u + u^2/2)_j``
with ``omega(j) = j (4 + j^2)/(1 + j^2)``. Its Hamiltonian is
``int c u^2/2 + u^3/6 dx`` (unit volume).

Spectra are stored in ``numpy.fft.rfft`` layout with ``norm="forward"`` so
``u(x) = sum_j u_j exp(i j x)``: entry ``j`` holds ``u_j`` for
``0 <= j <= N/2``, the negative modes being conjugates.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .diffpoly import scheme_factor
from .errors import BlowUpDetected, ConfigError, CubeRootDomain

__all__ = [
    "SpectralState",
    "SimConfig",
    "DiagnosticsSeries",
    "wavenumbers",
    "omega_symbol",
    "dp_rhs",
    "dp_rhs_physical",
    "mollifier_profile",
    "mollified_rhs",
    "dt_max",
    "step",
    "diag_all",
    "numeric_densities",
    "numeric_gammas",
    "density_scale",
    "hamiltonian",
    "momentum_m0",
    "m1_numeric",
    "k_quadratic",
    "k_numeric",
    "run",
    "initial_state",
    "mollifier_opnorm_probe",
    "state_from_modes",
    "random_state",
    "parse_config",
    "parse_modes",
]


def wavenumbers(N: int) -> np.ndarray:
    """Nonnegative wavenumbers ``0..N/2`` of the rfft layout."""
    return np.arange(N // 2 + 1, dtype=float)


def omega_symbol(k: np.ndarray) -> np.ndarray:
    """``k (4 + k^2) / (1 + k^2)``."""
    return k * (4.0 + k * k) / (1.0 + k * k)


@dataclass
class SpectralState:
    """Real zero-mean field on ``N`` grid points.

    Attributes
    ----------
    n_modes : int
        Grid size ``N`` (a power of two).
    spectrum : ndarray of complex
        ``u_j`` for ``0 <= j <= N/2``.
    time : float
    """

    n_modes: int
    spectrum: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        N = self.n_modes
        if N < 4 or N & (N - 1):
            raise ConfigError(f"grid size must be a power of two >= 4, got {N}")
        spec = np.array(self.spectrum, dtype=complex)
        if spec.shape != (N // 2 + 1,):
            raise ConfigError("spectrum has the wrong length")
        spec[0] = 0.0
        spec[-1] = 0.0
        self.spectrum = spec

    @classmethod
    def zeros(cls, N: int):
        return cls(N, np.zeros(N // 2 + 1, dtype=complex))

    @classmethod
    def from_physical(cls, u: np.ndarray, time: float = 0.0):
        u = np.asarray(u, dtype=float)
        return cls(len(u), np.fft.rfft(u, norm="forward"), time)

    def physical(self) -> np.ndarray:
        return np.fft.irfft(self.spectrum, n=self.n_modes, norm="forward")

    def grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_modes) / self.n_modes

    def w_spectrum(self) -> np.ndarray:
        k = wavenumbers(self.n_modes)
        return (1.0 + k * k) * self.spectrum

    def sobolev_norm(self, s: float) -> float:
        """``(sum_{j != 0} <j>^(2s) |u_j|^2)^(1/2)`` over both signs of ``j``."""
        k = wavenumbers(self.n_modes)
        wts = (1.0 + k * k) ** s
        return math.sqrt(2.0 * float(np.sum(wts[1:] * np.abs(self.spectrum[1:]) ** 2)))

    def copy(self):
        return SpectralState(self.n_modes, self.spectrum.copy(), self.time)


def state_from_modes(N: int, modes: dict) -> SpectralState:
    """State with ``u_j`` given for positive ``j`` (negatives by conjugation)."""
    spec = np.zeros(N // 2 + 1, dtype=complex)
    for j, val in modes.items():
        j = int(j)
        if j == 0:
            continue
        if j < 0:
            j, val = -j, np.conj(val)
        if j >= N // 2:
            raise ConfigError(f"mode {j} not resolved on a grid of {N}")
        spec[j] = val
    return SpectralState(N, spec)


def random_state(N: int, amplitude: float, seed: int, max_mode: int = 6,
                 sobolev: float = 2.0, decay: float = 0.0) -> SpectralState:
    """Seeded random field on modes ``1..max_mode`` with ``H^sobolev`` norm
    equal to ``amplitude``.

    ``decay`` multiplies mode ``j`` by ``<j>^(-decay)`` before scaling.
    """
    rng = np.random.default_rng(seed)
    spec = np.zeros(N // 2 + 1, dtype=complex)
    js = np.arange(1, max_mode + 1)
    mags = rng.uniform(0.5, 1.0, size=len(js)) * (1.0 + js**2) ** (-decay / 2)
    phases = rng.uniform(0.0, 2 * np.pi, size=len(js))
    spec[1 : max_mode + 1] = mags * np.exp(1j * phases)
    state = SpectralState(N, spec)
    state.spectrum *= amplitude / state.sobolev_norm(sobolev)
    return state


@dataclass
class SimConfig:
    """Simulation parameters.

    ``gammas`` selects the integrals computed by the numeric recursion,
    ``sobolev`` the norms reported, ``kquad`` the ``K_n^(0)`` indices, and
    ``scheme`` the normalisation of the density recursion.
    """

    c: float = 1.0
    dt: float = 1e-3
    t_end: float = 1.0
    grid: int = 256
    dealias: bool = True
    mollifier_eps: float | None = None
    amplitude: float = 1e-2
    seed: int = 0
    init: dict | None = None
    init_max_mode: int = 6
    gammas: tuple = (1, 3)
    sobolev: tuple = (2.0,)
    kquad: tuple = (1, 2)
    scheme: str = "unit"
    sample_every: int = 100
    blowup_ratio: float = 0.5

    def __post_init__(self):
        if self.c == 0:
            raise ConfigError("c must be nonzero")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if self.mollifier_eps is not None and not 0 < self.mollifier_eps <= 1:
            raise ConfigError("mollifier_eps must lie in (0, 1]")
        N = self.grid
        if N < 4 or N & (N - 1):
            raise ConfigError("grid must be a power of two >= 4")
        scheme_factor(self.scheme)

    def digest(self) -> str:
        text = repr(sorted((k, repr(v)) for k, v in self.__dict__.items()))
        return hashlib.sha256(text.encode()).hexdigest()


def dt_max(config: SimConfig) -> float:
    """Step-size ceiling ``0.5 / (|c| omega(N/2))``."""
    return 0.5 / (abs(config.c) * float(omega_symbol(np.array(config.grid / 2))))


def _dealias_mask(N: int) -> np.ndarray:
    k = wavenumbers(N)
    return k <= N / 3.0


def dp_rhs(state: SpectralState, c: float, dealias: bool = True) -> np.ndarray:
    """Time derivative of the spectrum: ``-i omega(j) FFT(c u + u^2/2)_j``."""
    N = state.n_modes
    k = wavenumbers(N)
    u = state.physical()
    nl = np.fft.rfft(0.5 * u * u, norm="forward")
    if dealias:
        nl = nl * _dealias_mask(N)
    out = -1j * omega_symbol(k) * (c * state.spectrum + nl)
    out[0] = 0.0
    out[-1] = 0.0
    return out


def dp_rhs_physical(state: SpectralState, c: float) -> np.ndarray:
    """Independent right-hand side from the PDE in its differential form.

    ``u_t = (1 - d_xx)^(-1) [c u_xxx - 4 c u_x + u u_xxx + 3 u_x u_xx - 4 u u_x]``,
    with derivatives computed spectrally and products formed on the grid
    (no dealiasing). Used to cross-check :func:`dp_rhs`.
    """
    N = state.n_modes
    k = wavenumbers(N)
    ik = 1j * k

    def deriv(order):
        return np.fft.irfft(ik**order * state.spectrum, n=N, norm="forward")

    u, ux, uxx, uxxx = (deriv(m) for m in range(4))
    bracket = c * uxxx - 4 * c * ux + u * uxxx + 3 * ux * uxx - 4 * u * ux
    out = np.fft.rfft(bracket, norm="forward") / (1.0 + k * k)
    out[0] = 0.0
    out[-1] = 0.0
    return out


def mollifier_profile(xi: np.ndarray) -> np.ndarray:
    """Smooth cutoff: 1 on ``|xi| <= 1``, 0 on ``|xi| >= 2``."""
    a = np.abs(np.asarray(xi, dtype=float))
    out = np.zeros_like(a)
    out[a <= 1.0] = 1.0
    mid = (a > 1.0) & (a < 2.0)
    r = a[mid] - 1.0
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - r * r))
    return out


def mollified_rhs(state: SpectralState, c: float, eps: float, dealias: bool = True) -> np.ndarray:
    """Mollified scheme ``F_eps``.

    ``-J_e(c J_e d_x J_e u) - J_e(J_e u d_x J_e u) - (3/2) d_x D^-2 (u^2)
    - 3 c d_x D^-2 u`` with ``J_e`` the Fourier multiplier
    ``mollifier_profile(eps j)`` and ``D^-2 = (1 - d_xx)^(-1)``.
    """
    if not 0 < eps <= 1:
        raise ConfigError("eps must lie in (0, 1]")
    N = state.n_modes
    k = wavenumbers(N)
    ik = 1j * k
    jm = mollifier_profile(eps * k)
    d2 = 1.0 / (1.0 + k * k)
    v_hat = jm * state.spectrum
    v = np.fft.irfft(v_hat, n=N, norm="forward")
    vx = np.fft.irfft(ik * v_hat, n=N, norm="forward")
    u = state.physical()
    burgers = np.fft.rfft(v * vx, norm="forward")
    square = np.fft.rfft(u * u, norm="forward")
    if dealias:
        mask = _dealias_mask(N)
        burgers = burgers * mask
        square = square * mask
    out = (
        -jm * (c * jm * ik * v_hat)
        - jm * burgers
        - 1.5 * ik * d2 * square
        - 3.0 * c * ik * d2 * state.spectrum
    )
    out[0] = 0.0
    out[-1] = 0.0
    return out


def _rhs(state, config):
    if config.mollifier_eps is not None:
        return mollified_rhs(state, config.c, config.mollifier_eps, config.dealias)
    return dp_rhs(state, config.c, config.dealias)


def step(state: SpectralState, config: SimConfig, dt: float | None = None) -> SpectralState:
    """One classical RK4 step (``dt`` may be negative for time reversal).

    Raises
    ------
    ConfigError
        If ``|dt|`` exceeds :func:`dt_max`.
    BlowUpDetected
        If ``max |u|`` reaches ``blowup_ratio * |c|``.
    """
    dt = config.dt if dt is None else dt
    if abs(dt) > dt_max(config) * (1 + 1e-12):
        raise ConfigError(f"|dt| = {abs(dt)} exceeds dt_max = {dt_max(config)}")
    N = state.n_modes
    y = state.spectrum

    def f(spec):
        return _rhs(SpectralState(N, spec), config)

    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    new = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    out = SpectralState(N, new, state.time + dt)
    sup = float(np.max(np.abs(out.physical())))
    if not np.isfinite(sup) or sup >= config.blowup_ratio * abs(config.c):
        raise BlowUpDetected(f"sup|u| = {sup:.3e} at t = {out.time:.4f}")
    return out


# diagnostics -----------------------------------------------------------------


def _padded(spec: np.ndarray, N: int, factor: int = 2) -> np.ndarray:
    M = factor * N
    out = np.zeros(M // 2 + 1, dtype=complex)
    out[: len(spec)] = spec
    return out


class _SpectralCalc:
    """Spectral derivatives on a fixed grid."""

    def __init__(self, M):
        self.M = M
        self.ik = 1j * wavenumbers(M)

    def dx(self, f):
        return np.fft.irfft(self.ik * np.fft.rfft(f, norm="forward"), n=self.M, norm="forward")

    def mean(self, f):
        return float(np.mean(f))


def numeric_densities(state: SpectralState, c: float, top: int, scheme: str = "unit", pad: int = 2):
    """Sampled densities ``rho[0..top]`` by the pointwise recursion.

    ``w = (1 - d_xx) u`` is sampled on a ``pad``-times finer grid,
    ``p = -(c + w)^(1/3)`` is formed pointwise and ``rho[n]`` follows from
    ``rho[0] = -p_x/p``, ``rho[1] = -p_x^2/p^3 + 2 p_xx/(3 p^2) + 1/(3p)`` and
    the level recursion, with spectral derivatives.

    Raises
    ------
    CubeRootDomain
        If ``|w| >= |c|`` somewhere on the grid.
    """
    N = state.n_modes
    M = pad * N
    w = np.fft.irfft(_padded(state.w_spectrum(), N, pad), n=M, norm="forward")
    if np.max(np.abs(w)) >= abs(c):
        raise CubeRootDomain(f"max|w| = {np.max(np.abs(w)):.3e} >= |c| = {abs(c)}")
    calc = _SpectralCalc(M)
    s = scheme_factor(scheme)
    p = -np.cbrt(c + w)
    px = calc.dx(p)
    pxx = calc.dx(px)
    rho = [-px / p, -(px**2) / p**3 + 2 * pxx / (3 * p**2) + 1 / (3 * p)]
    while len(rho) <= top:
        n = len(rho) - 2
        rn = rho[n]
        acc = rn - calc.dx(calc.dx(rn))
        acc -= 3 * p * sum(rho[k1] * rho[n + 1 - k1] for k1 in range(n + 2))
        acc -= sum(
            rho[k1] * rho[k2] * rho[n - k1 - k2]
            for k1 in range(n + 1)
            for k2 in range(n + 1 - k1)
        )
        acc -= 3 * calc.dx(rho[n + 1] * p)
        acc -= 3 * sum(rho[k1] * calc.dx(rho[n - k1]) for k1 in range(n + 1))
        rho.append(acc / (s * p * p))
    return rho[: top + 1]


def numeric_gammas(state: SpectralState, c: float, ns, scheme: str = "unit", pad: int = 2):
    """Integrals ``Gamma[n] = mean(rho[n])`` for ``n`` in ``ns``."""
    ns = sorted(set(int(n) for n in ns))
    if not ns:
        return {}
    rho = numeric_densities(state, c, max(ns), scheme, pad)
    return {n: float(np.mean(rho[n])) for n in ns}


def density_scale(state: SpectralState, c: float, n: int, scheme: str = "unit") -> float:
    """``int |rho[n]| dx``, a natural size for ``Gamma[n]`` when it vanishes."""
    return float(np.mean(np.abs(numeric_densities(state, c, n, scheme)[n])))


def hamiltonian(state: SpectralState, c: float, pad: int = 2) -> float:
    """``int c u^2/2 + u^3/6 dx`` (unit volume), exact for the band-limited field."""
    N = state.n_modes
    M = pad * N
    u = np.fft.irfft(_padded(state.spectrum, N, pad), n=M, norm="forward")
    return float(np.mean(0.5 * c * u * u + u**3 / 6.0))


def momentum_m0(state: SpectralState) -> float:
    """``(1/2) sum_{j != 0} (1 + j^2)/(4 + j^2) |u_j|^2``."""
    k = wavenumbers(state.n_modes)
    wts = (1 + k * k) / (4 + k * k)
    return float(np.sum(wts[1:] * np.abs(state.spectrum[1:]) ** 2))


def m1_numeric(state: SpectralState, c: float, pad: int = 2) -> float:
    """``int (c + w)^(1/3) dx`` by quadrature on a padded grid."""
    N = state.n_modes
    M = pad * N
    w = np.fft.irfft(_padded(state.w_spectrum(), N, pad), n=M, norm="forward")
    if np.max(np.abs(w)) >= abs(c):
        raise CubeRootDomain(f"max|w| = {np.max(np.abs(w)):.3e} >= |c| = {abs(c)}")
    return float(np.mean(np.cbrt(c + w)))


def k_quadratic(state: SpectralState, n: int) -> float:
    """``K_n^(0) = sum_{j != 0} |j|^(2(n-1)) (1 + j^2)^2 |u_j|^2``."""
    k = wavenumbers(state.n_modes)
    wts = k ** (2 * (n - 1)) * (1 + k * k) ** 2
    return float(2.0 * np.sum(wts[1:] * np.abs(state.spectrum[1:]) ** 2))


def k_numeric(state: SpectralState, c: float, n: int, scheme: str = "unit") -> float:
    """Full ``K_1`` or ``K_2`` evaluated by quadrature.

    ``K_1 = (M1 - c^(1/3)) / m`` and ``K_2 = (Gamma[1] - g - (d^0/m)(M1 - c^(1/3))) / d^1``
    where ``m = -c^(-5/3)/9`` is the quadratic coefficient of ``M1``, ``g``
    the constant term of ``Gamma[1]`` and ``d^0, d^1`` its diagonal
    coefficients. Both have quadratic part ``k_quadratic(state, n)``.
    """
    from .conserved import gamma, m1_expansion

    if n not in (1, 2):
        raise ValueError("k_numeric supports n = 1, 2")
    m1 = m1_expansion(2)
    m = m1.quadratic[0].evaluate(c)
    k1 = (m1_numeric(state, c) - m1.constant.evaluate(c)) / m
    if n == 1:
        return float(k1)
    g1 = gamma(1, 3, scheme)
    d0 = g1.quadratic[0].evaluate(c)
    d1 = g1.quadratic[1].evaluate(c)
    num = numeric_gammas(state, c, [1], scheme)[1] - g1.constant.evaluate(c) - d0 * k1
    return float(num / d1)


def diag_all(state: SpectralState, config: SimConfig, ns=None) -> dict:
    """All diagnostics of one state as a flat dict."""
    ns = config.gammas if ns is None else ns
    out = {
        "t": state.time,
        "H": hamiltonian(state, config.c),
        "M0": momentum_m0(state),
        "M1": m1_numeric(state, config.c),
    }
    for n, val in numeric_gammas(state, config.c, ns, config.scheme).items():
        out[f"gamma_{n}"] = val
    for s in config.sobolev:
        out[f"H{_fmt_s(s)}_norm"] = state.sobolev_norm(s)
    for n in config.kquad:
        out[f"K_{n}_quad"] = k_quadratic(state, n)
    return out


def _fmt_s(s) -> str:
    s = float(s)
    return str(int(s)) if s.is_integer() else str(s)


@dataclass
class DiagnosticsSeries:
    """Sampled diagnostics; every column has the same length."""

    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    final_state: SpectralState | None = None

    def append(self, sample: dict):
        if not self.columns:
            self.columns = list(sample)
        self.rows.append([sample[c] for c in self.columns])

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    @property
    def times(self):
        return self.column("t")

    def relative_drift(self, name, floor: float = 0.0) -> float:
        """``max_t |Q(t) - Q(0)| / max(|Q(0)|, floor)``.

        ``floor`` supplies a scale for quantities whose value is zero.
        """
        q = self.column(name)
        ref = max(abs(q[0]), floor)
        if ref == 0:
            raise ValueError(f"{name} vanishes initially; pass a floor scale")
        return float(np.max(np.abs(q - q[0])) / ref)

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([repr(float(v)) for v in row])


def initial_state(config: SimConfig) -> SpectralState:
    if config.init:
        return state_from_modes(config.grid, config.init)
    return random_state(config.grid, config.amplitude, config.seed, config.init_max_mode)


def run(config: SimConfig, initial: SpectralState | None = None, sample_every: int | None = None,
        diagnostics: bool = True, progress=None) -> DiagnosticsSeries:
    """Integrate to ``t_end`` and sample diagnostics every ``sample_every`` steps.

    The last state is always sampled. ``progress`` is called with
    ``(step_index, n_steps)`` after each sample.
    """
    state = initial_state(config) if initial is None else initial.copy()
    every = config.sample_every if sample_every is None else sample_every
    n_steps = int(round(config.t_end / config.dt))
    series = DiagnosticsSeries()
    if diagnostics:
        series.append(diag_all(state, config))
    for i in range(1, n_steps + 1):
        state = step(state, config)
        if diagnostics and (i % every == 0 or i == n_steps):
            series.append(diag_all(state, config))
            if progress is not None:
                progress(i, n_steps)
    series.final_state = state
    return series


# mollifier probe -------------------------------------------------------------


@dataclass
class OpnormProbe:
    eps: list
    max_ratio: list
    single_mode_sup: list
    s: float
    sigma: float

    def ladder_ok(self) -> bool:
        """Each step down the ladder shrinks the ratio faster than ``eps^(s - sigma)``."""
        for i in range(len(self.eps) - 1):
            expected = (self.eps[i + 1] / self.eps[i]) ** (self.s - self.sigma)
            if not self.max_ratio[i + 1] < expected * self.max_ratio[i]:
                return False
        return True


def mollifier_opnorm_probe(eps_list, s: float, sigma: float, samples: int = 8,
                           N: int = 512, seed: int = 0) -> OpnormProbe:
    """Measure ``||(Id - J_eps) u||_{H^sigma} / ||u||_{H^s}``.

    Sample fields have random phases and amplitudes ``<j>^(-(s+1))`` times a
    uniform factor in ``[0.5, 1]``, so they lie in ``H^s``. Also reports the
    single-mode supremum ``sup_j (1 - jhat(eps j)) <j>^(sigma - s)``.
    """
    if not 0 < sigma <= s:
        raise ValueError("need 0 < sigma <= s")
    rng = np.random.default_rng(seed)
    k = wavenumbers(N)
    bracket = np.sqrt(1 + k * k)
    fields = []
    for _ in range(samples):
        mags = rng.uniform(0.5, 1.0, size=len(k)) * bracket ** (-(s + 1))
        spec = mags * np.exp(1j * rng.uniform(0, 2 * np.pi, size=len(k)))
        spec[0] = 0
        spec[-1] = 0
        fields.append(spec)
    ratios, sups = [], []
    for eps in eps_list:
        damp = 1.0 - mollifier_profile(eps * k)
        best = 0.0
        for spec in fields:
            num = np.sqrt(np.sum(bracket ** (2 * sigma) * np.abs(damp * spec) ** 2))
            den = np.sqrt(np.sum(bracket ** (2 * s) * np.abs(spec) ** 2))
            best = max(best, float(num / den))
        ratios.append(best)
        sups.append(float(np.max(damp[1:] * bracket[1:] ** (sigma - s))))
    return OpnormProbe(list(eps_list), ratios, sups, s, sigma)


# config parsing --------------------------------------------------------------


def parse_modes(text: str) -> dict:
    """Parse ``"1:0.005+0.0i, 2:0.002+0.001i"`` into ``{1: (0.005+0j), ...}``."""
    out = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            j, val = chunk.split(":", 1)
            out[int(j)] = complex(val.strip().replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"bad mode entry {chunk!r}") from exc
    return out


_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _tuple_of(conv):
    def parse(text):
        return tuple(conv(x) for x in text.split(",") if x.strip())

    return parse


_KEYS = {
    "c": float,
    "dt": float,
    "t_end": float,
    "grid": int,
    "dealias": lambda v: _BOOL[v.lower()],
    "mollifier_eps": lambda v: None if v.lower() in ("", "none") else float(v),
    "amplitude": float,
    "seed": int,
    "init": parse_modes,
    "init_max_mode": int,
    "gammas": _tuple_of(int),
    "sobolev": _tuple_of(float),
    "kquad": _tuple_of(int),
    "scheme": str,
    "sample_every": int,
    "blowup_ratio": float,
}


def parse_config(text: str, overrides: dict | None = None) -> SimConfig:
    """Parse flat ``key = value`` text (``#`` starts a comment)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _KEYS[key](val)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    values.update(overrides or {})
    try:
        return SimConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def with_overrides(config: SimConfig, **kw) -> SimConfig:
    return replace(config, **kw)
