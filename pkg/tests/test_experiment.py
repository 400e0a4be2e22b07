import cmath
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from bbm_wavekit import experiment as E
from bbm_wavekit import phase_theory as P
from bbm_wavekit.spectral_core import TorusSpec
from bbm_wavekit.stochastic_data import inverse_bracket


def make_cfg(**kw):
    base = dict(spec=TorusSpec(Fraction(2), 16), profile=inverse_bracket(), epsilon=0.1,
                t_slow_list=(0.5, 1.0), xi_list=(1, 2, -3), realizations=2000, seed=5)
    base.update(kw)
    return E.ExperimentConfig(**base)


INI = """[torus]
L_squared = 2
K = 16
[data]
profile = inverse_bracket
realizations = 300
seed = 4
[dynamics]
engine = psi_tilde
epsilon = 0.1
t_slow_list = 0.5, 1
xi_list = 1/L, 2/L
[output]
output_path = {out}
"""


def write_ini(tmp_path, text=None):
    p = tmp_path / "exp.ini"
    p.write_text(text if text is not None else INI.format(out=tmp_path / "c.csv"))
    return p


def test_config_from_file(tmp_path):
    cfg = E.ExperimentConfig.from_file(write_ini(tmp_path))
    assert cfg.spec.L_squared == 2 and cfg.xi_list == (1, 2)
    assert cfg.t_slow_list == (0.5, 1.0)
    cfg2 = E.ExperimentConfig.from_file(write_ini(tmp_path), ["data.seed=9", "xi_list=1.4142135623730951"])
    assert cfg2.seed == 9 and cfg2.xi_list == (2,)


@pytest.mark.parametrize("edit", [
    ("seed = 4", "sede = 4"),
    ("[output]", "[outputs]"),
    ("engine = psi_tilde", "engine = pde"),
    ("engine = psi_tilde", "engine = dyson"),
    ("xi_list = 1/L, 2/L", "xi_list = 17/L"),
    ("xi_list = 1/L, 2/L", "xi_list = 0.3"),
    ("realizations = 300", "realizations = 0"),
    ("K = 16", "K = sixteen"),
])
def test_config_errors(tmp_path, edit):
    text = INI.format(out=tmp_path / "c.csv").replace(*edit)
    with pytest.raises(E.ConfigError):
        E.ExperimentConfig.from_file(write_ini(tmp_path, text))


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(E.ConfigError):
        E.ExperimentConfig.from_file(tmp_path / "nope.ini")


def test_record_invariants():
    recs = E.run_correlation(make_cfg(realizations=50))
    assert len(recs) == 6
    for r in recs:
        assert r.stderr > 0 and r.n_samples == 50
        assert r.sign_convention == P.PHASE_SIGN


def test_psi_tilde_matches_exact():
    cfg = make_cfg(realizations=4000)
    for r in E.run_correlation(cfg):
        assert abs(r.est - r.pred) <= 4 * r.stderr
    for r in E.run_correlation(make_cfg(realizations=4000, rate="galerkin", seed=6)):
        assert abs(r.est - r.pred) <= 4 * r.stderr


def test_pde_zero_epsilon():
    cfg = make_cfg(engine="pde", epsilon=0.0, dt=0.05, realizations=1500, t_slow_list=(3.0,))
    for r in E.run_correlation(cfg):
        phi2 = float(inverse_bracket()(r.xi)) ** 2
        assert abs(r.est - phi2) <= 3 * r.stderr
        assert abs(r.est.imag) <= 1e-12


def test_time_reversal():
    recs = E.run_correlation(make_cfg(t_slow_list=(1.3, -1.3), realizations=3000))
    n = len(recs) // 2
    for a, b in zip(recs[:n], recs[n:]):
        assert abs(a.est - b.est.conjugate()) <= 1e-15
        assert abs(a.pred - b.pred.conjugate()) <= 1e-15


def test_stderr_scaling():
    ns = [250, 1000, 4000, 16000]
    se = [E.run_correlation(make_cfg(realizations=n, t_slow_list=(1.0,), xi_list=(1,)))[0].stderr for n in ns]
    slope = np.polyfit(np.log(ns), np.log(se), 1)[0]
    assert abs(slope + 0.5) <= 0.1


def test_worker_count_does_not_change_results():
    cfg = make_cfg(realizations=2 * E.BLOCK + 17)
    a = E.run_correlation(cfg, workers=1)
    b = E.run_correlation(cfg, workers=2)
    assert a == b


def test_dyson_engine_tracks_psi_tilde():
    cfg = make_cfg(engine="dyson", N=2, epsilon=0.05, t_slow_list=(0.02,), xi_list=(1, 2), realizations=40)
    ref = E.run_correlation(make_cfg(engine="pde", dt=0.05, epsilon=0.05, t_slow_list=(0.02,),
                                     xi_list=(1, 2), realizations=40))
    for d, p in zip(E.run_correlation(cfg), ref):
        assert abs(d.est - p.est) <= 1e-3 * abs(p.est)


def test_pde_small_cross_check():
    # reduced version of the cross-engine check; the coincident-leg correction matters
    kw = dict(spec=TorusSpec(Fraction(2), 16), epsilon=0.05, t_slow_list=(1.0,), xi_list=(1, 2),
              realizations=400, rate="galerkin")
    pde = E.run_correlation(make_cfg(engine="pde", dt=0.1, **kw))
    for r in pde:
        se = r.stderr / abs(r.est)
        assert abs(cmath.phase(r.est / r.pred)) <= max(3 * se, 0.05)


def test_aborts_below_success_threshold(monkeypatch):
    def broken(cfg, amps):
        out = np.zeros((len(cfg.t_slow_list), len(cfg.xi_list), len(amps)), dtype=complex)
        ok = np.arange(len(amps)) % 5 != 0
        return out, ok
    monkeypatch.setitem(E._ENGINE_FN, "psi_tilde", broken)
    with pytest.raises(E.NumericalFailure):
        E.run_correlation(make_cfg(realizations=100))


def test_failed_rows_are_dropped(monkeypatch):
    def mostly(cfg, amps):
        out = np.ones((len(cfg.t_slow_list), len(cfg.xi_list), len(amps)), dtype=complex)
        ok = np.arange(len(amps)) % 20 != 0
        out[..., ~ok] = np.nan
        return out, ok
    monkeypatch.setitem(E._ENGINE_FN, "psi_tilde", mostly)
    recs = E.run_correlation(make_cfg(realizations=100))
    assert all(r.n_samples == 95 and r.est == 1 for r in recs)


def test_report_round_trip(tmp_path):
    cfg = make_cfg(realizations=64)
    recs = E.run_correlation(cfg)
    path = tmp_path / "out.csv"
    E.emit_report(recs, str(path), cfg)
    assert path.read_text().splitlines()[0] == E.HEADER
    assert E.read_report(str(path)) == recs
    meta = json.loads((tmp_path / "out.json").read_text())
    assert meta["config"]["seed"] == 5 and meta["sign_convention"] == 1
    assert meta["input_hash"] == E.content_hash(cfg.to_dict())


def test_header_only_report(tmp_path):
    path = tmp_path / "empty.csv"
    E.emit_report([], str(path))
    assert path.read_text() == E.HEADER + "\n"
    assert E.read_report(str(path)) == []


def test_identical_runs_identical_files(tmp_path):
    cfg = make_cfg(realizations=100)
    for name in ("a", "b"):
        E.emit_report(E.run_correlation(cfg), str(tmp_path / f"{name}.csv"), cfg)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_unwritable_report_path(tmp_path):
    with pytest.raises(OSError, match="nodir"):
        E.emit_report([], str(tmp_path / "nodir" / "x.csv"))


def test_content_hash_is_git_blob():
    # git hash-object of the 2-byte blob "{}"
    assert E.content_hash({}) == "9e26dfeeb6e641a33dae4961196235bdb965b21b"


def test_limit_prediction():
    cfg = make_cfg(prediction="limit", realizations=10, spec=TorusSpec(Fraction(100), 500), xi_list=(10,))
    r = E.run_correlation(cfg)[1]
    x = 1.0
    assert cmath.phase(r.pred) == pytest.approx(x * P.phi_continuum(x, inverse_bracket()), abs=1e-12)
    assert abs(r.pred) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("name", ["trees", "phase", "resonance"])
def test_suites_pass(name):
    v = E.run_suite(name)
    assert v["passed"] and v["suite"] == name


def test_unknown_suite():
    with pytest.raises(E.ConfigError):
        E.run_suite("nope")
