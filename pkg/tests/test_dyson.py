import math
import warnings

import numpy as np
import pytest

from bbm_wavekit import bbm_solver as B
from bbm_wavekit import dyson_normal_form as D
from bbm_wavekit.spectral_core import (TorusSpec, SpectralField, semigroup, sobolev_norm,
                                       apply_W, pointwise_product)
from conftest import random_field


def test_alpha():
    assert D.alpha_of(0.3) == pytest.approx(2.5)
    assert D.alpha_of(1 / 3) == pytest.approx(3.0)
    assert D.alpha_of(0.5) == 3.0
    with pytest.raises(ValueError):
        D.alpha_of(0.2)


def test_catalan():
    assert [D.catalan(n) for n in range(9)] == [1, 1, 2, 5, 14, 42, 132, 429, 1430]
    assert all(D.catalan(n) <= 4 ** n for n in range(13))


def test_n_eps_single_modes():
    spec = TorusSpec.from_L(1, 4)
    u = SpectralField.from_modes(spec, {1: 1.0})
    out = D.n_eps(u, u, D.CutoffPolicy(0.4, 1e-3))
    assert out[2] == pytest.approx(1 / math.sqrt(2 * math.pi) * 0.4 / (-0.6), abs=1e-14)


def test_n_eps_above_cutoff_is_zero(spec16):
    u = random_field(spec16, 0)
    # threshold eps^-alpha = 1 on xi = k / sqrt 2 leaves only k = 1
    out = D.n_eps(u, u, D.CutoffPolicy(0.5, 1.0))
    assert np.all(out.amps[1:] == 0)


def test_q_eps_complements(spec16):
    u, v = random_field(spec16, 1), random_field(spec16, 2)
    pol = D.CutoffPolicy(0.5, 1.0)
    q = D.q_eps(u, v, pol)
    full = -apply_W(pointwise_product(u, v)).amps
    low = pol.low(spec16)
    assert np.all(q.amps[low] == 0)
    assert np.allclose(q.amps[~low], full[~low], atol=1e-14)
    pol_all = D.CutoffPolicy(0.5, 1e-6)
    assert np.all(D.q_eps(u, v, pol_all).amps == 0)


def test_p_eps_identity(spec16):
    u, v, w = (random_field(spec16, s) for s in (3, 4, 5))
    pol = D.CutoffPolicy(0.4, 1e-2)
    a = D.p_eps(u, v, w, pol).amps
    b = D.p_eps_via_n(u, v, w, pol).amps
    assert np.max(np.abs(a - b)) <= 1e-12
    assert np.all(D.p_eps(u, v, SpectralField.zeros(spec16), pol).amps == 0)


def test_dyson_zeroth_term(datum16):
    stack = D.dyson_terms(datum16, 0, 1.3, 0.01)
    assert np.allclose(stack.terms[0].amps, semigroup(datum16, 1.3).amps, atol=1e-15)


def test_first_term_single_cosine():
    spec = TorusSpec.from_L(1, 4)
    a = SpectralField.from_modes(spec, {1: 0.5, -1: 0.5})
    t, eps = 0.7, 0.1
    psi1 = D.dyson_term(a, 1, t, eps)
    rot = np.exp(1j * t * spec.omega) * psi1.amps
    d = 0.4 - 0.5 - 0.5
    exact = -1j * eps / math.sqrt(2 * math.pi) * 0.4 * 0.25 * (np.exp(1j * d * t) - 1) / (1j * d)
    assert rot[1] == pytest.approx(exact, abs=1e-13)


def test_series_matches_pde(datum16):
    eps, t = 1e-3, 1.0
    ref = B.advance(datum16.amps, datum16.spec, eps, t, 0.005)[0]
    s = D.dyson_terms(datum16, 6, t, eps).partial_sum(6)
    assert np.max(np.abs(s.amps - ref)) <= 1e-6


def test_geometric_decay_scaled_datum(datum16):
    a = datum16 * 200.0
    eps, t = 1e-3, 1.0
    ref = SpectralField(a.spec, B.advance(a.amps, a.spec, eps, t, 0.005)[0])
    stack = D.dyson_terms(a, 6, t, eps)
    rem = [sobolev_norm(ref - stack.partial_sum(N), 0.4) for N in range(1, 7)]
    assert all(rem[i + 1] <= 0.6 * rem[i] for i in range(5))


def test_catalan_bound_in_regime(spec16, datum16):
    s = 0.4
    a = datum16
    L = spec16.L
    Dn = sobolev_norm(a, s) / math.sqrt(L)
    T0, eps0 = D.regime_constants(L, Dn)
    eps = eps0
    t = T0 / eps ** 2
    assert D.regime_check(a, t, eps, s)
    stack = D.dyson_terms(a, 6, t, eps, panel=2.0, nodes=24)
    norms = stack.norms(s)
    for n in range(7):
        assert norms[n] <= 8.0 ** (-n) * D.catalan(n) * Dn * math.sqrt(L)
    ref = SpectralField(spec16, B.advance(a.amps, spec16, eps, t, B.default_dt(eps))[0])
    for N in (2, 4, 6):
        assert sobolev_norm(ref - stack.partial_sum(N), s) <= 2.0 ** (-N) * Dn * math.sqrt(L)


def test_regime_warning(datum16):
    with pytest.warns(D.RegimeWarning):
        D.dyson_sum(datum16, 0, 10.0, 0.5)


def test_lipschitz_in_data(spec16, datum16):
    s = 0.4
    L = spec16.L
    b = datum16 + random_field(spec16, 9) * 1e-3
    Dn = max(sobolev_norm(datum16, s), sobolev_norm(b, s)) / math.sqrt(L)
    T0, eps0 = D.regime_constants(L, Dn)
    t = T0 / eps0 ** 2
    sa = D.dyson_terms(datum16, 3, t, eps0, panel=2.0, nodes=24)
    sb = D.dyson_terms(b, 3, t, eps0, panel=2.0, nodes=24)
    dab = sobolev_norm(datum16 - b, s)
    for n in range(4):
        assert sobolev_norm(sa.terms[n] - sb.terms[n], s) <= 8.0 ** (-n) * D.catalan(n) * dab * (1 + 1e-9)


def test_bad_arguments(datum16):
    with pytest.raises(ValueError):
        D.dyson_terms(datum16, -1, 1.0, 0.1)
