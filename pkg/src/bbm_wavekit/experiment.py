"""Monte Carlo correlation experiments, verification suites and reports.

The estimated quantity at (t, xi) is the rotating-frame correlation

    E[ conj(a^(xi)) psi^(t / eps^2)(xi) ],   psi = S(-s) Psi(s),

which equals E[conj(a^(xi)) u^(t/eps^2)(xi)] up to the linear phase and is
free of the large e^{-i omega s} rotation.
"""
from concurrent.futures import ProcessPoolExecutor
import configparser
from dataclasses import dataclass, field, asdict, fields as dc_fields
from fractions import Fraction
import csv
import hashlib
import json
import math
import os
import warnings

import numpy as np

from .spectral_core import TorusSpec, SpectralField, sobolev_norm
from .stochastic_data import profile_by_name, sample_amplitudes, sample_initial_datum
from . import bbm_solver, phase_theory
from .phase_theory import PHASE_SIGN, f_tilde
from .dyson_normal_form import dyson_terms, QuadratureError, RegimeWarning

ENGINES = ("pde", "psi_tilde", "dyson")
HEADER = ("t_slow,xi,est_re,est_im,stderr,pred_re,pred_im,n_samples,engine,seed,"
          "L,K,epsilon,sign_convention")
BLOCK = 1024
MIN_SUCCESS = 0.9


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


# section -> keys accepted in it
SECTIONS = {
    "torus": ("L", "L_squared", "K"),
    "data": ("profile", "realizations", "seed"),
    "dynamics": ("engine", "epsilon", "t_slow_list", "xi_list", "dt", "N", "s_prime", "rate"),
    "output": ("output_path", "prediction"),
}
KEY_SECTION = {k: s for s, keys in SECTIONS.items() for k in keys}


def _floats(text):
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def parse_xi(item, spec):
    """Signed mode index for 'k/L' or a real frequency lying on the grid."""
    item = item.strip()
    if item.endswith("/L"):
        k = int(item[:-2])
    else:
        k = spec.index_of(float(item))
    if not 0 < abs(k) <= spec.K:
        raise ConfigError(f"xi={item} is outside the window 0 < |k| <= {spec.K}")
    return k


@dataclass
class ExperimentConfig:
    spec: TorusSpec
    profile: object
    epsilon: float
    t_slow_list: tuple
    xi_list: tuple          # signed mode indices
    realizations: int
    seed: int
    engine: str = "psi_tilde"
    s_prime: float = 1.0
    output_path: str = "correlation.csv"
    dt: float = None
    N: int = None
    prediction: str = "exact"
    rate: str = "paired"

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        if not 0 <= self.epsilon <= 1:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.engine == "dyson" and (self.N is None or self.N < 0):
            raise ConfigError("engine dyson requires N >= 0")
        if self.engine == "pde" and self.dt is None:
            raise ConfigError("engine pde requires dt")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.rate not in phase_theory.RATE_KINDS:
            raise ConfigError(f"rate must be one of {phase_theory.RATE_KINDS}")
        if self.prediction not in ("exact", "limit"):
            raise ConfigError("prediction must be 'exact' or 'limit'")
        for k in self.xi_list:
            if not 0 < abs(k) <= self.spec.K:
                raise ConfigError(f"mode {k} outside the window")
        if not self.t_slow_list:
            raise ConfigError("t_slow_list is empty")

    @classmethod
    def from_mapping(cls, raw):
        raw = dict(raw)
        unknown = set(raw) - set(KEY_SECTION)
        if unknown:
            raise ConfigError(f"unknown keys: {sorted(unknown)}")
        try:
            if "L_squared" in raw and "L" in raw:
                raise ConfigError("give L or L_squared, not both")
            if "L_squared" in raw:
                L2 = Fraction(raw["L_squared"])
            elif "L" in raw:
                L2 = Fraction(raw["L"]) ** 2
            else:
                raise ConfigError("missing L or L_squared")
            spec = TorusSpec(L2, int(raw["K"]))
            xi = tuple(parse_xi(x, spec) for x in raw.get("xi_list", "1/L").split(",") if x.strip())
            return cls(
                spec=spec,
                profile=profile_by_name(raw.get("profile", "inverse_bracket")),
                epsilon=float(raw.get("epsilon", 0.0)),
                t_slow_list=_floats(raw.get("t_slow_list", "1.0")),
                xi_list=xi,
                realizations=int(raw.get("realizations", 1000)),
                seed=int(raw.get("seed", 0)),
                engine=raw.get("engine", "psi_tilde"),
                s_prime=float(raw.get("s_prime", 1.0)),
                output_path=raw.get("output_path", "correlation.csv"),
                dt=float(raw["dt"]) if raw.get("dt") not in (None, "") else None,
                N=int(raw["N"]) if raw.get("N") not in (None, "") else None,
                prediction=raw.get("prediction", "exact"),
                rate=raw.get("rate", "paired"),
            )
        except ConfigError:
            raise
        except (KeyError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad configuration: {exc}") from exc

    @classmethod
    def from_file(cls, path, overrides=()):
        raw = read_ini(path)
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not KEY=VAL")
            key, val = item.split("=", 1)
            raw[key.strip().split(".")[-1]] = val.strip()
        return cls.from_mapping(raw)

    def to_dict(self):
        return {
            "L_squared": str(self.spec.L_squared), "K": self.spec.K,
            "profile": self.profile.kind, "epsilon": self.epsilon,
            "t_slow_list": list(self.t_slow_list),
            "xi_list": [f"{k}/L" for k in self.xi_list],
            "realizations": self.realizations, "seed": self.seed,
            "engine": self.engine, "s_prime": self.s_prime,
            "output_path": self.output_path, "dt": self.dt, "N": self.N,
            "prediction": self.prediction, "rate": self.rate,
        }


def read_ini(path):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raw = {}
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"{path}: unknown section [{sec}]")
        for key, val in cp.items(sec):
            if key not in SECTIONS[sec]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{sec}]")
            raw[key] = val
    return raw


@dataclass
class CorrelationRecord:
    t_slow: float
    xi: float
    est_re: float
    est_im: float
    stderr: float
    pred_re: float
    pred_im: float
    n_samples: int
    engine: str = ""
    seed: int = 0
    L: float = 0.0
    K: int = 0
    epsilon: float = 0.0
    sign_convention: int = PHASE_SIGN

    @property
    def est(self):
        return complex(self.est_re, self.est_im)

    @property
    def pred(self):
        return complex(self.pred_re, self.pred_im)


# ---- engines -----------------------------------------------------------------

def _physical_time(t_slow, epsilon):
    # with eps = 0 the slow time is used as physical time; the flow is linear
    return t_slow if epsilon == 0 else t_slow / epsilon ** 2


def _block_psi_tilde(cfg, amps):
    ks = np.abs(cfg.xi_list)
    C = np.array([phase_theory._rate_row(cfg.spec, k, cfg.rate) for k in cfg.xi_list]).T
    w = np.abs(amps) ** 2
    U = w @ C                                    # (m, n_xi)
    out = np.empty((len(cfg.t_slow_list), len(ks), len(amps)), dtype=np.complex128)
    for i, t in enumerate(cfg.t_slow_list):
        out[i] = (np.exp(1j * PHASE_SIGN * t * U) * w[:, ks - 1]).T
    return out, np.ones(len(amps), dtype=bool)


def _evolve_rows(cfg, amps, T, state):
    """Advance each row from state time to T; failed rows become nan."""
    t0, cur = state
    try:
        return bbm_solver.advance(cur, cfg.spec, cfg.epsilon, T - t0, cfg.dt)
    except FloatingPointError:
        rows = []
        for row in cur:
            try:
                with np.errstate(all="ignore"):
                    rows.append(bbm_solver.advance(row, cfg.spec, cfg.epsilon, T - t0, cfg.dt)[0])
            except FloatingPointError:
                rows.append(np.full(cfg.spec.K, np.nan + 0j))
        return np.array(rows)


def _block_pde(cfg, amps):
    spec = cfg.spec
    ks = np.array(cfg.xi_list)
    out = np.empty((len(cfg.t_slow_list), len(ks), len(amps)), dtype=np.complex128)
    ok = np.ones(len(amps), dtype=bool)
    order = sorted(range(len(cfg.t_slow_list)), key=lambda i: (cfg.t_slow_list[i] < 0, abs(cfg.t_slow_list[i])))
    state = {1: (0.0, amps), -1: (0.0, amps)}
    for i in order:
        t = cfg.t_slow_list[i]
        side = -1 if t < 0 else 1
        T = _physical_time(t, cfg.epsilon)
        cur = _evolve_rows(cfg, amps, T, state[side])
        state[side] = (T, cur)
        psi = phase_theory.to_rotating(cur, spec, T)
        ok &= np.all(np.isfinite(psi), axis=1)
        out[i] = _signed_product(amps, psi, ks).T
    return out, ok


def _signed_product(amps, psi, ks):
    vals = np.conj(amps[:, np.abs(ks) - 1]) * psi[:, np.abs(ks) - 1]
    return np.where(ks > 0, vals, np.conj(vals))


def _block_dyson(cfg, amps):
    ks = np.array(cfg.xi_list)
    out = np.empty((len(cfg.t_slow_list), len(ks), len(amps)), dtype=np.complex128)
    ok = np.ones(len(amps), dtype=bool)
    for r, row in enumerate(amps):
        a = SpectralField(cfg.spec, row)
        for i, t in enumerate(cfg.t_slow_list):
            T = _physical_time(t, cfg.epsilon)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RegimeWarning)
                    stack = dyson_terms(a, cfg.N, T, cfg.epsilon)
                psi = phase_theory.to_rotating(stack.partial_sum(cfg.N).amps, cfg.spec, T)
            except (QuadratureError, FloatingPointError):
                ok[r] = False
                psi = np.full(cfg.spec.K, np.nan + 0j)
            out[i, :, r] = _signed_product(row[None, :], psi[None, :], ks)[0]
    return out, ok


_ENGINE_FN = {"psi_tilde": _block_psi_tilde, "pde": _block_pde, "dyson": _block_dyson}


def _run_block(args):
    cfg, start, stop = args
    amps = sample_amplitudes(cfg.spec, cfg.profile, cfg.seed, range(start, stop))
    with np.errstate(over="ignore", invalid="ignore"):
        return _ENGINE_FN[cfg.engine](cfg, amps)


def _blocks(n):
    return [(s, min(n, s + BLOCK)) for s in range(0, n, BLOCK)]


def prediction(cfg, t, k):
    x = k / cfg.spec.L
    if cfg.prediction == "exact":
        return phase_theory.correlation_exact(cfg.profile, cfg.spec, t, k, rate=cfg.rate)
    phi2 = float(cfg.profile(x)) ** 2
    return complex(np.exp(1j * PHASE_SIGN * t * x * phase_theory.phi_continuum(x, cfg.profile)) * phi2)


def run_correlation(cfg, workers=1):
    """One CorrelationRecord per (t_slow, xi); identical for any worker count."""
    jobs = [(cfg, s, e) for s, e in _blocks(cfg.realizations)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_block, jobs))
    else:
        parts = [_run_block(j) for j in jobs]
    vals = np.concatenate([p[0] for p in parts], axis=2)
    ok = np.concatenate([p[1] for p in parts])
    n_ok = int(ok.sum())
    if n_ok < MIN_SUCCESS * cfg.realizations:
        raise NumericalFailure(f"only {n_ok} of {cfg.realizations} realizations succeeded")
    vals = vals[:, :, ok]
    records = []
    L = cfg.spec.L
    for i, t in enumerate(cfg.t_slow_list):
        for j, k in enumerate(cfg.xi_list):
            x = vals[i, j]
            mean = np.sum(x) / n_ok
            se = math.sqrt(np.sum(np.abs(x - mean) ** 2) / (n_ok * (n_ok - 1))) if n_ok > 1 else float("nan")
            p = prediction(cfg, t, k)
            records.append(CorrelationRecord(
                float(t), k / L, float(mean.real), float(mean.imag), se, p.real, p.imag, n_ok,
                cfg.engine, cfg.seed, L, cfg.spec.K, cfg.epsilon, PHASE_SIGN))
    return records


# ---- reports -------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (int, np.integer)) or isinstance(v, str):
        return str(v)
    return "%.17g" % v


def content_hash(data):
    """git blob hash of the canonical JSON encoding."""
    body = json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def emit_report(records, path, config=None, certificate=None):
    names = HEADER.split(",")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(HEADER + "\n")
            for r in records:
                fh.write(",".join(_fmt(getattr(r, n)) for n in names) + "\n")
        meta = {
            "config": config.to_dict() if config is not None else None,
            "sign_convention": PHASE_SIGN,
            "certificate": certificate.summary() if certificate is not None else None,
        }
        meta["input_hash"] = content_hash(meta["config"])
        with open(os.path.splitext(path)[0] + ".json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc}") from exc


def read_report(path):
    types = {f.name: f.type for f in dc_fields(CorrelationRecord)}
    conv = {"n_samples": int, "seed": int, "K": int, "sign_convention": int, "engine": str}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if ",".join(reader.fieldnames or []) != HEADER:
            raise ValueError(f"{path}: unexpected header")
        for row in reader:
            out.append(CorrelationRecord(**{k: conv.get(k, float)(v) for k, v in row.items()}))
    return out


# ---- suites --------------------------------------------------------------------

def _check(name, value, tol, passed=None):
    passed = bool(value <= tol) if passed is None else bool(passed)
    return {"name": name, "value": float(value), "tol": float(tol), "passed": passed}


def _suite_trees():
    from .tree_calculus import trees as T, diagrams
    from .tree_calculus.resonance import certify_window
    from .dyson_normal_form import catalan
    checks = []
    for n in range(0, 9):
        checks.append(_check(f"catalan[{n}]", abs(len(T.enumerate_trees(n)) - catalan(n)), 0))
    for n in range(1, 7):
        checks.append(_check(f"orders[{n}]", abs(T.count_orders(n) - math.factorial(n)), 0))
    for n, c in ((1, 2), (2, 12)):
        checks.append(_check(f"paired[{n}]", abs(len(T.paired_trees(n)) - c), 0))
    spec = TorusSpec(Fraction(2), 8)
    rng = np.random.default_rng(0)
    a = SpectralField(spec, rng.normal(size=8) + 1j * rng.normal(size=8))
    for n in (1, 2):
        lhs, rhs = diagrams.comb_identity_check(a, n, 3)
        checks.append(_check(f"comb[{n}]", abs(lhs - rhs) / max(1.0, abs(rhs)), 1e-9))
    for n, kvec in ((1, (1, 2, -2)), (2, (1, 2, -2, 3, -3))):
        checks.append(_check(f"cancel[{n}]", abs(T.first_cancellation_check(n, kvec, spec, 0.7)), 1e-12))
    return checks


def _suite_dyson():
    from .stochastic_data import inverse_bracket
    from .dyson_normal_form import dyson_terms
    spec = TorusSpec(Fraction(2), 16)
    a = sample_initial_datum(spec, inverse_bracket(), 0) * 200.0
    eps, t = 1e-3, 1.0
    ref = SpectralField(spec, bbm_solver.advance(a.amps, spec, eps, t, 0.005)[0])
    stack = dyson_terms(a, 6, t, eps)
    rem = [sobolev_norm(ref - stack.partial_sum(N), 0.4) for N in range(1, 7)]
    ratio = max(rem[i + 1] / rem[i] for i in range(5))
    return [_check("dyson_ratio", ratio, 0.6)]


def _suite_phase():
    from .stochastic_data import inverse_bracket
    prof = inverse_bracket()
    checks = []
    err = max(abs(phase_theory.phi_continuum(x, prof) - float(phase_theory.phi_closed(x)))
              for x in (0.0, 0.5, 1.0, 2.0, 5.0))
    checks.append(_check("phi_closed", err, 1e-8))
    spec = TorusSpec(Fraction(2), 16)
    a = sample_initial_datum(spec, prof, 0)
    odd = max(abs(phase_theory.u_of(a, k) + phase_theory.u_of(a, -k)) for k in range(1, 17))
    checks.append(_check("u_odd", odd, 1e-14))
    c1 = phase_theory.correlation_exact(prof, spec, 1.3, 2)
    c2 = phase_theory.correlation_exact(prof, spec, -1.3, 2)
    checks.append(_check("time_reversal", abs(c1 - c2.conjugate()), 1e-15))
    return checks


def _suite_resonance(L_squared=Fraction(2), K=6):
    from .tree_calculus.resonance import certify_window
    cert = certify_window(TorusSpec(L_squared, K))
    return [_check("counterexamples", len(cert.counterexamples), 0, cert.certified)]


def default_conservation_run():
    """H^1 drift of the default run: L^2 = 2, K = 32, eps = 0.1, dt = 1e-3, t in [0, 10]."""
    from .stochastic_data import inverse_bracket
    spec = TorusSpec(Fraction(2), 32)
    a = sample_initial_datum(spec, inverse_bracket(), 0)
    cfg = bbm_solver.SolverConfig(epsilon=0.1, dt=1e-3, t_final=10.0)
    return bbm_solver.evolve(a, cfg, times=np.linspace(0, 10.0, 11)).h1_drift()


def _suite_conservation():
    return [_check("h1_drift", default_conservation_run(), 1e-8)]


SUITES = {"trees": _suite_trees, "dyson": _suite_dyson, "phase": _suite_phase,
          "resonance": _suite_resonance, "conservation": _suite_conservation}


def run_suite(name):
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    checks = SUITES[name]()
    return {"suite": name, "passed": all(c["passed"] for c in checks),
            "max_error": max((c["value"] for c in checks), default=0.0), "checks": checks}
