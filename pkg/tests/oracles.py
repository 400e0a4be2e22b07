"""Independent numerical oracles shared by the tests."""
import math

from scipy import integrate

from bbm_wavekit.spectral_core import omega


def simplex_integral(ws, ds, t, tol=1e-11):
    """int_{0 < s_1 < ... < s_n < t} prod_j w_j e^{i d_j s_j} ds by nested adaptive quadrature."""
    n = len(ws)

    def inner(j, upper, part):
        # integrate s_j over (0, upper) with s_{j+1..} already fixed
        if j < 0:
            return part(0)
        def f(s):
            return ws[j] * complexexp(ds[j] * s) * inner(j - 1, s, part)
        return cquad(f, 0.0, upper, tol)

    return inner(n - 1, t, lambda _: 1.0)


def complexexp(x):
    return complex(math.cos(x), math.sin(x))


def cquad(f, a, b, tol):
    re = integrate.quad(lambda s: f(s).real, a, b, epsabs=tol, epsrel=tol, limit=200)[0]
    im = integrate.quad(lambda s: f(s).imag, a, b, epsabs=tol, epsrel=tol, limit=200)[0]
    return complex(re, im)
