"""Picard/Dyson hierarchy of the BBM flow and the normal-form operators.

The flow is expanded as Psi = sum_n Psi_n with

    Psi_0(t) = S(t) a,
    Psi_{n+1}(t) = -eps W \\int_0^t S(t - tau) [sum_{n1+n2=n} Psi_n1 Psi_n2](tau) dtau,

the sign being the one of the equation d_t u + W u + eps W(u^2) = 0.
Integrals are taken in the rotating frame psi_n = S(-t) Psi_n, where the
integrand only oscillates like e^{i Delta tau}.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from numpy.polynomial import legendre

from . import kernels
from .spectral_core import SpectralField, apply_W, omega, pointwise_product, sobolev_norm

C_S = 10.0  # stand-in for the unquantified constant C_s


class RegimeWarning(UserWarning):
    pass


class QuadratureError(RuntimeError):
    pass


def alpha_of(s):
    if s <= 0.25:
        raise ValueError("the cutoff exponent needs s > 1/4")
    return 1.0 / (1.0 - 2.0 * s) if s <= 1.0 / 3.0 else 3.0


@dataclass(frozen=True)
class CutoffPolicy:
    s: float
    epsilon: float

    @property
    def alpha(self):
        return alpha_of(self.s)

    @property
    def threshold(self):
        return self.epsilon ** (-self.alpha)

    def low(self, spec):
        """Indicator of |xi| <= eps^{-alpha} on the positive modes."""
        return np.abs(spec.xi) <= self.threshold


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


def regime_constants(L, D):
    """(T0, eps0) = (1/(C_s D L^2), 1/(C_s D^2 L^5))."""
    return 1.0 / (C_S * D * L ** 2), 1.0 / (C_S * D ** 2 * L ** 5)


def _pair_table(spec):
    """For each output k = 1..K the admissible (k1, k2 = k - k1) pairs."""
    K = spec.K
    out = []
    for k in range(1, K + 1):
        k1 = np.array([j for j in range(k - K, K + 1) if j != 0 and j != k])
        out.append((k1, k - k1))
    return out


def _signed(amps, ks):
    """Amplitudes at signed mode indices ks (none zero)."""
    pos = amps[np.abs(ks) - 1]
    return np.where(ks > 0, pos, np.conj(pos))


def n_eps(u, v, policy):
    """(2 pi L)^{-1/2} 1_{|xi| <= eps^-alpha} sum omega(xi)/Delta(xi; xi1, xi2) u(xi1) v(xi2)."""
    u._check(v)
    spec = u.spec
    L = spec.L
    low = policy.low(spec)
    out = np.zeros(spec.K, dtype=np.complex128)
    for k, (k1, k2) in zip(range(1, spec.K + 1), _pair_table(spec)):
        if not low[k - 1]:
            continue
        xi, x1, x2 = k / L, k1 / L, k2 / L
        d = omega(xi) - omega(x1) - omega(x2)
        out[k - 1] = np.sum(omega(xi) / d * _signed(u.amps, k1) * _signed(v.amps, k2))
    return SpectralField(spec, spec.norm * out)


def q_eps(u, v, policy):
    """-(1 - chi_eps) W(uv): the high-frequency part of the quadratic term."""
    u._check(v)
    spec = u.spec
    conv = kernels.conv_direct(u.amps, v.amps)[0]
    high = ~policy.low(spec)
    return SpectralField(spec, np.where(high, -1j * spec.omega * spec.norm * conv, 0.0))


def p_eps(u, v, w, policy):
    """Trilinear normal-form term, summed directly over (xi1, xi2, xi3).

    Only xi2 + xi3 inside the window (and nonzero) contributes, which is the
    truncation seen by -2 N_eps(u, W(vw)).
    """
    spec = u.spec
    K, L = spec.K, spec.L
    low = policy.low(spec)
    out = np.zeros(K, dtype=np.complex128)
    for k in range(1, K + 1):
        if not low[k - 1]:
            continue
        acc = 0j
        for k1 in range(-K, K + 1):
            m = k - k1
            if k1 == 0 or m == 0 or abs(m) > K:
                continue
            k2 = np.array([j for j in range(max(-K, m - K), min(K, m + K) + 1) if j != 0 and j != m])
            k3 = m - k2
            inner = np.sum(_signed(v.amps, k2) * _signed(w.amps, k3))
            xi, x1, xm = k / L, k1 / L, m / L
            d = omega(xi) - omega(x1) - omega(xm)
            acc += omega(xi) * omega(xm) / d * u[k1] * inner
        out[k - 1] = acc
    return SpectralField(spec, (-1j / (math.pi * L)) * out)


def p_eps_via_n(u, v, w, policy):
    return -2.0 * n_eps(u, apply_W(pointwise_product(v, w)), policy)


def _legendre_panel(m):
    """Gauss-Legendre nodes/weights on [-1, 1] and the cumulative matrix
    S[j, i] = int_{-1}^{x_j} l_i(x) dx for the Lagrange basis l_i."""
    x, w = legendre.leggauss(m)
    V = legendre.legvander(x, m - 1)
    Vint = np.empty((m, m))
    for i in range(m):
        c = np.zeros(m)
        c[i] = 1.0
        Vint[:, i] = legendre.legval(x, legendre.legint(c, lbnd=-1))
    S = Vint @ np.linalg.inv(V)
    return x, w, S


@dataclass
class DysonStack:
    terms: list          # Psi_0 .. Psi_N at time t (lab frame)
    epsilon: float
    t: float
    spec: object
    quad_error: float = float("nan")

    def partial_sum(self, N=None):
        N = len(self.terms) - 1 if N is None else N
        amps = np.sum([u.amps for u in self.terms[:N + 1]], axis=0)
        return SpectralField(self.spec, amps)

    def norms(self, s):
        return [sobolev_norm(u, s) for u in self.terms]


def _rotating_terms(a_amps, spec, N, t, epsilon, m, panel):
    """psi_n(t) for n = 0..N (rotating frame) by panelled Gauss-Legendre."""
    K = spec.K
    om = spec.omega
    if t == 0:
        out = np.zeros((N + 1, K), dtype=np.complex128)
        out[0] = a_amps
        return out
    n_panels = max(1, int(math.ceil(abs(t) / panel - 1e-12)))
    h = t / n_panels
    x, w, S = _legendre_panel(m)
    # psi[n] holds values at the current panel's nodes
    start = np.zeros((N + 1, K), dtype=np.complex128)
    start[0] = a_amps
    for p in range(n_panels):
        tau = p * h + 0.5 * h * (x + 1.0)
        rot = np.exp(-1j * np.outer(tau, om))           # S(tau) multiplier
        lab = np.empty((N + 1, m, K), dtype=np.complex128)
        lab[0] = rot * a_amps
        node_vals = np.empty((N + 1, m, K), dtype=np.complex128)
        node_vals[0] = a_amps
        for n in range(N):
            acc = np.zeros((m, K), dtype=np.complex128)
            for n1 in range(0, n // 2 + 1):
                n2 = n - n1
                c = kernels.conv(lab[n1], lab[n2])
                acc += c if n1 == n2 else 2.0 * c
            f = (-1j * epsilon * spec.norm) * om * np.conj(rot) * acc
            node_vals[n + 1] = start[n + 1] + 0.5 * h * (S @ f)
            start[n + 1] = start[n + 1] + 0.5 * h * (w @ f)
            lab[n + 1] = rot * node_vals[n + 1]
    return start


def dyson_terms(a, N, t, epsilon, nodes=16, panel=1.0, tol=1e-10, check=True):
    """DysonStack with Psi_0..Psi_N at time t.

    With ``check`` the computation is repeated with doubled nodes; a change
    larger than ``tol`` (relative to ||a||) raises QuadratureError.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if panel / nodes > 0.1:
        raise ValueError("node spacing must not exceed 0.1")
    spec = a.spec
    psi = _rotating_terms(a.amps, spec, N, t, epsilon, nodes, panel)
    err = float("nan")
    if check and t != 0:
        psi2 = _rotating_terms(a.amps, spec, N, t, epsilon, 2 * nodes, panel)
        scale = max(1.0, float(np.max(np.abs(a.amps))))
        err = float(np.max(np.abs(psi2 - psi))) / scale
        if err > tol:
            raise QuadratureError(f"Dyson quadrature changed by {err:.3e} on doubling nodes")
        psi = psi2
    lab = np.exp(-1j * t * spec.omega) * psi
    terms = [SpectralField(spec, row) for row in lab]
    return DysonStack(terms, epsilon, t, spec, err)


def dyson_term(a, n, t, epsilon, **kw):
    return dyson_terms(a, n, t, epsilon, **kw).terms[n]


def regime_check(a, t, epsilon, s=0.4):
    """True when (eps, t) sit inside the advisory (eps0, T0) regime."""
    D = sobolev_norm(a, s) / math.sqrt(a.spec.L)
    if D == 0:
        return True
    T0, eps0 = regime_constants(a.spec.L, D)
    return epsilon <= eps0 and abs(t) <= T0 / epsilon ** 2 if epsilon > 0 else True


def dyson_sum(a, N, t, epsilon, s=0.4, guard=True, **kw):
    if guard and not regime_check(a, t, epsilon, s):
        warnings.warn("(eps, t) outside the heuristic series regime", RegimeWarning)
    return dyson_terms(a, N, t, epsilon, **kw).partial_sum()
