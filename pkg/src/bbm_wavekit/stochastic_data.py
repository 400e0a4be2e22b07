"""Gaussian random initial data with reproducible per-realization streams.

The datum is the random Fourier series

    phi_L(x) = sum_n g_n phi(n/L) e^{inx/L} / sqrt(2 pi L),

whose Fourier coefficients in the convention of ``spectral_core`` are
u_hat(n/L) = g_n phi(n/L), with g_{-n} = conj(g_n) and E|g_n|^2 = 1.

Stream rule: realization r of seed s draws from Philox with key s and counter
(0, 0, r, 0).  Realizations are therefore independent of how they are
scheduled across workers.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral_core import SpectralField, sobolev_norm_batch


@dataclass(frozen=True)
class Profile:
    kind: str
    eval: Callable

    def __call__(self, xi):
        return self.eval(np.asarray(xi, dtype=float))

    def check(self, spec):
        xi = spec.xi
        v = self(xi)
        if not np.all(np.isfinite(v)):
            raise ValueError("profile is not finite on the window")
        if not np.allclose(self(-xi), v, rtol=1e-14, atol=0.0):
            raise ValueError("profile must be even")


def _inv_bracket(xi):
    return 1.0 / np.sqrt(1.0 + xi * xi)


def _gaussian(xi):
    return np.exp(-0.5 * xi * xi)


def inverse_bracket():
    """phi(xi) = <xi>^{-1}, the profile of the invariant Gaussian measure."""
    return Profile("inverse_bracket", _inv_bracket)


def custom(func, name="custom"):
    return Profile(name, func)


def profile_by_name(name):
    if name == "inverse_bracket":
        return inverse_bracket()
    if name == "gaussian":
        return Profile("gaussian", _gaussian)
    raise ValueError(f"unknown profile {name!r}")


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return seed


def realization_rng(seed, realization):
    seed = _check_seed(seed)
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, int(realization), 0]))


def sample_gaussians(rng, K):
    """g_1..g_K, complex with independent N(0, 1/2) real and imaginary parts."""
    z = rng.standard_normal(2 * K)
    return (z[:K] + 1j * z[K:]) * np.sqrt(0.5)


def sample_amplitudes(spec, profile, seed, realizations):
    """Array of shape (len(realizations), K) of positive-mode amplitudes."""
    phi = profile(spec.xi)
    out = np.empty((len(realizations), spec.K), dtype=np.complex128)
    for i, r in enumerate(realizations):
        out[i] = phi * sample_gaussians(realization_rng(seed, r), spec.K)
    return out


def sample_initial_datum(spec, profile, seed, realization=0):
    profile.check(spec)
    return SpectralField(spec, sample_amplitudes(spec, profile, seed, [realization])[0])


def empirical_norm_tail(spec, profile, s, D, ensemble, seed=0):
    """Fraction of an ensemble with ||a||_{H^s} > D sqrt(L)."""
    if ensemble < 100:
        raise ValueError("ensemble must have at least 100 samples")
    amps = sample_amplitudes(spec, profile, seed, range(ensemble))
    norms = sobolev_norm_batch(amps, spec, s)
    return float(np.mean(norms > D * np.sqrt(spec.L)))
