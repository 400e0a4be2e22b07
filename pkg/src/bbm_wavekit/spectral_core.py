"""Wavenumbers, dispersion, resonance functions and Fourier-side operators.

Fourier convention on the torus of length 2*pi*L:

    u_hat(xi) = (2 pi L)^{-1/2} \\int u(x) e^{-i x xi} dx,   xi in (1/L) Z*,

so that (uv)^(xi) = (2 pi L)^{-1/2} sum_{xi1 + xi2 = xi} u_hat(xi1) v_hat(xi2).
"""
from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from . import kernels


def omega(xi):
    """Dispersion relation omega(xi) = xi / (1 + xi^2)."""
    xi = np.asarray(xi, dtype=float) if not np.isscalar(xi) else float(xi)
    return xi / (1.0 + xi * xi)


def bracket(xi):
    return np.sqrt(1.0 + np.asarray(xi, dtype=float) ** 2)


def delta3(xi, xi1, xi2, rtol=1e-12):
    """Resonance function omega(xi) - omega(xi1) - omega(xi2) for xi = xi1 + xi2."""
    xi, xi1, xi2 = float(xi), float(xi1), float(xi2)
    if xi == 0.0 or xi1 == 0.0 or xi2 == 0.0:
        raise ValueError("delta3 needs three nonzero frequencies")
    if abs(xi - xi1 - xi2) > rtol * max(abs(xi), abs(xi1), abs(xi2)):
        raise ValueError(f"delta3 needs xi = xi1 + xi2, got {xi} != {xi1} + {xi2}")
    return omega(xi) - omega(xi1) - omega(xi2)


def delta3_factored(xi, xi1, xi2):
    """Product form -omega(xi) omega(xi1) omega(xi2) (3 + (xi^2+xi1^2+xi2^2)/2)."""
    return -omega(xi) * omega(xi1) * omega(xi2) * (3.0 + 0.5 * (xi * xi + xi1 * xi1 + xi2 * xi2))


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x)  # exact value of the float


@dataclass(frozen=True)
class TorusSpec:
    """Torus of length 2 pi L with modes 0 < |k| <= K, xi = k / L.

    ``L_squared`` is kept as an exact rational; resonance decisions are made
    on it, never on the float ``L``.
    """
    L_squared: Fraction
    K: int

    def __post_init__(self):
        object.__setattr__(self, "L_squared", _as_fraction(self.L_squared))
        if self.L_squared < 1:
            raise ValueError("torus size must satisfy L >= 1")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("mode cutoff K must be a positive integer")
        object.__setattr__(self, "K", int(self.K))

    @classmethod
    def from_L(cls, L, K):
        return cls(_as_fraction(L) ** 2, K)

    @property
    def L(self):
        return math.sqrt(self.L_squared)

    @property
    def norm(self):
        """The (2 pi L)^{-1/2} convolution constant."""
        return 1.0 / math.sqrt(2.0 * math.pi * self.L)

    @property
    def k(self):
        return np.arange(1, self.K + 1)

    @property
    def xi(self):
        return self.k / self.L

    @property
    def omega(self):
        return omega(self.xi)

    def index_of(self, xi, tol=1e-9):
        """Mode index k for a wavenumber xi in (1/L) Z*, inside the window."""
        kf = float(xi) * self.L
        k = int(round(kf))
        if abs(kf - k) > tol * max(1.0, abs(kf)) or k == 0 or abs(k) > self.K:
            raise ValueError(f"xi = {xi} is not a stored mode of {self}")
        return k


@dataclass(frozen=True)
class Wavenumber:
    k: int
    L: float

    @property
    def xi(self):
        return self.k / self.L


class SpectralField:
    """Real mean-zero field: amplitudes u_hat(k/L) for k = 1..K.

    Negative modes are the conjugates, so reality holds by construction and
    mode 0 is never stored.  Instances are read-only.
    """

    __slots__ = ("spec", "amps")

    def __init__(self, spec, amps):
        a = np.array(amps, dtype=np.complex128)
        if a.shape != (spec.K,):
            raise ValueError(f"expected {spec.K} positive-mode amplitudes, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "amps", a)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    @classmethod
    def zeros(cls, spec):
        return cls(spec, np.zeros(spec.K))

    @classmethod
    def from_modes(cls, spec, modes):
        """Build from a {k: amplitude} map; a given -k must be the conjugate of k."""
        a = np.zeros(spec.K, dtype=np.complex128)
        seen = {}
        for k, val in modes.items():
            k = int(k)
            if k == 0 or abs(k) > spec.K:
                raise ValueError(f"mode {k} outside the window")
            seen[k] = complex(val)
        for k, val in seen.items():
            if k > 0:
                a[k - 1] = val
            elif -k in seen:
                if abs(seen[-k] - val.conjugate()) > 1e-15 * (1 + abs(val)):
                    raise ValueError(f"modes {k} and {-k} are not conjugate")
            else:
                a[-k - 1] = val.conjugate()
        return cls(spec, a)

    def __getitem__(self, k):
        k = int(k)
        if k == 0:
            return 0j
        if abs(k) > self.spec.K:
            raise IndexError(k)
        return self.amps[k - 1] if k > 0 else np.conj(self.amps[-k - 1])

    def full(self):
        """Two-sided coefficients for k = -K..K (index k + K)."""
        return np.concatenate([np.conj(self.amps[::-1]), [0.0], self.amps])

    def physical(self, n=None):
        """Samples u(x_j) at x_j = 2 pi L j / n."""
        K = self.spec.K
        n = n or kernels.fft_size(K)
        X = np.zeros(n // 2 + 1, dtype=np.complex128)
        X[1:K + 1] = self.amps
        # u(x) = (2 pi L)^{-1/2} sum_k u_hat(k/L) e^{i k x / L}
        return np.fft.irfft(X, n=n) * n * self.spec.norm

    def _check(self, other):
        if other.spec != self.spec:
            raise ValueError("fields live on different tori")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.spec, self.amps + other.amps)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.spec, self.amps - other.amps)

    def __mul__(self, c):
        c = complex(c)
        if c.imag != 0.0:
            raise ValueError("only real scalars keep a field real")
        return SpectralField(self.spec, self.amps * c.real)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.spec, -self.amps)

    def __repr__(self):
        return f"SpectralField(L^2={self.spec.L_squared}, K={self.spec.K})"


def apply_W(u):
    """W = (1 - d_x^2)^{-1} d_x, the Fourier multiplier i omega(xi)."""
    return SpectralField(u.spec, 1j * u.spec.omega * u.amps)


def semigroup(u, t):
    """S(t) = e^{-tW}: multiply each mode by e^{-i t omega(xi)}."""
    return SpectralField(u.spec, np.exp(-1j * t * u.spec.omega) * u.amps)


def pointwise_product(u, v, method="auto"):
    """Fourier coefficients of u*v truncated to |k| <= K (mean dropped)."""
    u._check(v)
    if method == "direct":
        c = kernels.conv_direct(u.amps, v.amps)
    elif method == "fft":
        c = kernels.conv_numpy(u.amps, v.amps)
    elif method == "auto":
        c = kernels.conv(u.amps, v.amps)
    else:
        raise ValueError(f"unknown product method {method!r}")
    return SpectralField(u.spec, u.spec.norm * c[0])


def sobolev_norm(u, s):
    """(sum over all stored modes of <xi>^{2s} |u_hat(xi)|^2)^{1/2}."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    w = (1.0 + u.spec.xi ** 2) ** s
    return math.sqrt(2.0 * float(np.sum(w * np.abs(u.amps) ** 2)))


def sobolev_norm_batch(amps, spec, s):
    w = (1.0 + spec.xi ** 2) ** s
    return np.sqrt(2.0 * np.sum(w * np.abs(amps) ** 2, axis=-1))
