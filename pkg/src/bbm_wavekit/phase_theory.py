"""Effective phase dynamics of the paired (comb) diagrams.

The resonant part of the dynamics rotates each mode at a rate set by the
datum:

    U(a, xi) = (2 / (pi L)) sum_eta Ftilde(xi, eta) |a^(eta)|^2,

and the reduced flow is psi~(t)(a)^(xi) = exp(i s t eps^2 U(a, xi)) a^(xi)
with a sign s in {+1, -1}.  ``PHASE_SIGN`` holds the value selected by
``resolve_phase_sign`` against the full equation; it is +1.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import integrate

from .spectral_core import SpectralField, TorusSpec, Wavenumber, omega, sobolev_norm
from .dyson_normal_form import QuadratureError
from . import bbm_solver

PHASE_SIGN = 1


def f_tilde(xi, eta):
    """Ftilde(xi, eta): odd in xi, even in eta, denominators >= 9."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    s = xi * xi + eta * eta
    d1 = 3.0 + 0.5 * (s + (xi - eta) ** 2)
    d2 = 3.0 + 0.5 * (s + (xi + eta) ** 2)
    out = xi * (1.0 + eta * eta) / (d1 * d2)
    return float(out) if out.ndim == 0 else out


def _signed_k(a, xi):
    if isinstance(xi, Wavenumber):
        return xi.k
    if isinstance(xi, (int, np.integer)):
        return int(xi)
    return a.spec.index_of(xi)


@lru_cache(maxsize=16)
def _rate_matrix(spec):
    """M[i, j] = (4 / (pi L)) Ftilde(xi_i, eta_j) on the positive modes."""
    xi = spec.xi
    return (4.0 / (math.pi * spec.L)) * f_tilde(xi[:, None], xi[None, :])


def rates_batch(amps, spec):
    """U(a, xi_k), k = 1..K, for each row of an amplitude array."""
    w = np.abs(np.atleast_2d(amps)) ** 2
    return w @ _rate_matrix(spec).T


def u_of(a, xi):
    """U(a, xi) at a signed mode, given as Wavenumber, integer index or real xi."""
    k = _signed_k(a, xi)
    spec = a.spec
    x = k / spec.L
    w = np.abs(a.amps) ** 2
    return (4.0 / (math.pi * spec.L)) * math.fsum(f_tilde(x, spec.xi) * w)


def u_all(a):
    return rates_batch(a.amps, a.spec)[0]


def _f_pair(eta, xi):
    return -1.0 / (omega(eta) * (3.0 + 0.5 * (xi * xi + eta * eta + (xi - eta) ** 2)))


RATE_KINDS = ("paired", "exact", "galerkin")


@lru_cache(maxsize=32)
def rate_matrix(spec, kind="paired"):
    """M with U(a, xi_k) = sum_j M[k-1, j-1] |a^(j/L)|^2 on the positive modes.

    kind="paired": U(a, xi).  kind="exact": every leaf configuration counted
    once (no eta = xi term, eta = -xi counted once).  kind="galerkin": the
    exact rate restricted to configurations whose intermediate frequency lies
    in the window, as seen by the truncated equation.
    """
    if kind == "paired":
        return _rate_matrix(spec)
    if kind not in RATE_KINDS:
        raise ValueError(f"unknown rate kind {kind!r}")
    L, K = spec.L, spec.K
    ks = np.arange(1, K + 1)
    k = ks[:, None]
    M = np.zeros((K, K))
    for sgn in (1, -1):
        mid = k - sgn * ks[None, :]
        ok = mid != 0
        if kind == "galerkin":
            ok &= np.abs(mid) <= K
        M += np.where(ok, _f_pair(sgn * ks[None, :] / L, k / L), 0.0)
    M *= -2.0 / (math.pi * L)
    xi = ks / L
    diag = _f_pair(-xi, xi) / (math.pi * L)
    if kind == "galerkin":
        diag = np.where(2 * ks <= K, diag, 0.0)
    M[ks - 1, ks - 1] += diag
    return M


def resonant_rate(a, kind="galerkin"):
    """Phase rate of the paired diagrams at every positive mode (see rate_matrix)."""
    return rate_matrix(a.spec, kind) @ (np.abs(a.amps) ** 2)


def phase_rate(spec, profile):
    """R_L(xi) = (2/(pi L)) sum_eta Ftilde(xi, eta) |phi(eta)|^2 on the positive modes."""
    return _rate_matrix(spec) @ (profile(spec.xi) ** 2)


def phi_closed(xi):
    """Closed form of Phi for the inverse-bracket profile."""
    xi = np.asarray(xi, dtype=float)
    return 1.0 / ((3.0 + xi * xi) * np.sqrt(3.0 * (1.0 + xi * xi / 4.0)))


def phi_continuum(xi, profile, quadrature_tol=1e-10):
    """Phi(xi) by adaptive quadrature after eta = tan(theta)."""
    x = float(xi)

    def g(th):
        eta = math.tan(th)
        s = x * x + eta * eta
        d1 = 3.0 + 0.5 * (s + (x - eta) ** 2)
        d2 = 3.0 + 0.5 * (s + (x + eta) ** 2)
        p2 = float(profile(eta)) ** 2
        # (1 + eta^2) d eta = (1 + eta^2)^2 d theta
        return p2 * (1.0 + eta * eta) ** 2 / (d1 * d2)

    val, err = integrate.quad(g, -math.pi / 2, math.pi / 2, epsabs=quadrature_tol,
                              epsrel=quadrature_tol, limit=400)
    if not math.isfinite(val) or err > 10 * quadrature_tol * max(1.0, abs(val)):
        raise QuadratureError(f"Phi({x}) did not converge: estimate {val}, error {err}")
    return 2.0 / math.pi * val


def riemann_gap(profile, spec, xi):
    """|R_L(xi) - xi Phi(xi)|: discrete phase rate against its continuum limit."""
    k = spec.index_of(xi)
    x = k / spec.L
    if k == 0:
        return 0.0
    r = (4.0 / (math.pi * spec.L)) * math.fsum(f_tilde(x, spec.xi) * profile(spec.xi) ** 2)
    return abs(r - x * phi_continuum(x, profile))


def psi_tilde_flow(a, t, epsilon, sign=None, rate=None):
    """psi~(t)(a): rotate mode xi by sign * t * eps^2 * U(a, xi); U frozen at a."""
    sign = PHASE_SIGN if sign is None else sign
    u = u_all(a) if rate is None else np.asarray(rate)
    return SpectralField(a.spec, np.exp(1j * sign * t * epsilon ** 2 * u) * a.amps)


def series_vs_exact_phase(a, t, epsilon, N, sign=None):
    """max_xi |sum_{n <= N} psi~_n - psi~| for the exponential series in t eps^2 U."""
    if N % 2:
        raise ValueError("N must be even")
    sign = PHASE_SIGN if sign is None else sign
    z = 1j * sign * epsilon ** 2 * t * u_all(a)
    part = np.zeros_like(z)
    term = np.ones_like(z)
    for j in range(N // 2 + 1):
        part = part + term
        term = term * z / (j + 1)
    return float(np.max(np.abs((part - np.exp(z)) * a.amps)))


def to_rotating(amps, spec, t):
    """psi = S(-t) Psi."""
    return np.exp(1j * t * spec.omega) * amps


def remainder_vs_pde(a, t_slow, epsilon, s_prime, rate="galerkin", sign=None, dt=None):
    """H^{s'} gap between the full flow (rotating frame) and psi~ at time t_slow / eps^2."""
    if t_slow == 0:
        return 0.0
    T = t_slow / epsilon ** 2
    dt = bbm_solver.default_dt(epsilon) if dt is None else dt
    psi = to_rotating(bbm_solver.advance(a.amps, a.spec, epsilon, T, dt)[0], a.spec, T)
    u = resonant_rate(a, rate)
    sign = PHASE_SIGN if sign is None else sign
    approx = np.exp(1j * sign * T * epsilon ** 2 * u) * a.amps
    return sobolev_norm(SpectralField(a.spec, psi - approx), s_prime)


def resolve_phase_sign(a, t_slow=0.5, epsilon=0.01, s_prime=0.0):
    """Pick the sign whose psi~ tracks the full flow; returns (sign, {sign: gap})."""
    T = t_slow / epsilon ** 2
    psi = to_rotating(bbm_solver.advance(a.amps, a.spec, epsilon, T,
                                         bbm_solver.default_dt(epsilon))[0], a.spec, T)
    u = resonant_rate(a, "galerkin")
    gaps = {}
    for s in (1, -1):
        approx = np.exp(1j * s * t_slow * u) * a.amps
        gaps[s] = sobolev_norm(SpectralField(a.spec, psi - approx), s_prime)
    return min(gaps, key=gaps.get), gaps


def _rate_row(spec, k, rate):
    row = rate_matrix(spec, rate)[abs(k) - 1]
    return row if k > 0 else -row


def _c_eta(profile, spec, k, rate="paired"):
    return _rate_row(spec, k, rate) * profile(spec.xi) ** 2


def correlation_exact(profile, spec, t_slow, xi, sign=None, rate="paired"):
    """E[exp(i theta U(phi_L, xi)) |phi_L^(xi)|^2], theta = sign * t_slow.

    U = sum_{eta > 0} c_eta |g_eta|^2 with independent unit exponentials
    |g_eta|^2, so the expectation is a product of characteristic functions,
    with the mode xi itself carrying the extra |g|^2 weight.
    """
    sign = PHASE_SIGN if sign is None else sign
    k = xi.k if isinstance(xi, Wavenumber) else (int(xi) if isinstance(xi, (int, np.integer)) else spec.index_of(xi))
    theta = sign * t_slow
    c = _c_eta(profile, spec, k, rate)
    logs = np.log1p(-1j * theta * c)
    j = abs(k) - 1
    total = np.sum(logs) + logs[j]
    return complex(float(profile(k / spec.L)) ** 2 * np.exp(-total))


def correlation_monte_carlo(profile, spec, t_slow, xi, realizations, seed, sign=None, rate="paired"):
    """Sample mean and standard error of exp(i theta U) |a^(xi)|^2 over the ensemble."""
    from .stochastic_data import sample_amplitudes
    sign = PHASE_SIGN if sign is None else sign
    k = xi.k if isinstance(xi, Wavenumber) else (int(xi) if isinstance(xi, (int, np.integer)) else spec.index_of(xi))
    j = abs(k) - 1
    vals = []
    c = _rate_row(spec, k, rate)
    for start in range(0, realizations, 1024):
        amps = sample_amplitudes(spec, profile, seed, range(start, min(realizations, start + 1024)))
        w = np.abs(amps) ** 2
        u = w @ c
        vals.append(np.exp(1j * sign * t_slow * u) * w[:, j])
    x = np.concatenate(vals)
    mean = np.sum(x) / len(x)
    stderr = math.sqrt(np.sum(np.abs(x - mean) ** 2) / (len(x) * (len(x) - 1)))
    return complex(mean), stderr


@dataclass
class PhaseTable:
    """Discrete phase rate R_L and the continuum value xi Phi(xi) per xi."""
    spec: TorusSpec
    profile: str
    xi: np.ndarray
    rate: np.ndarray
    continuum: np.ndarray
    sign: int = PHASE_SIGN

    @classmethod
    def build(cls, spec, profile, xi_list):
        ks = [spec.index_of(x) for x in xi_list]
        xi = np.array([k / spec.L for k in ks])
        full = phase_rate(spec, profile)
        rate = np.array([np.sign(k) * full[abs(k) - 1] for k in ks])
        cont = np.array([x * phi_continuum(x, profile) for x in xi])
        return cls(spec, profile.kind, xi, rate, cont)

    @property
    def gap(self):
        return np.abs(self.rate - self.continuum)
