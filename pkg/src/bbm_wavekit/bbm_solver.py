"""Integrating-factor RK4 for  d_t u + W u + eps W(u^2) = 0  in Fourier space.

The linear part is integrated exactly (|omega| <= 1/2, so nothing is stiff);
RK4 only sees the quadratic term.  All routines accept a single field or a
batch of amplitude rows (one realization per row).
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import kernels
from .spectral_core import SpectralField, sobolev_norm


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    dt: float = None
    integrator: str = "if_rk4"
    t_final: float = 0.0
    T_hint: float = 1.0
    allow_long: bool = False

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, "dt", default_dt(self.epsilon))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.integrator != "if_rk4":
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            raise ValueError("t_final must be finite and nonnegative")


def default_dt(epsilon):
    return 0.05 if epsilon == 0 else min(0.05, 0.05 / epsilon)


def nonlinear_rhs(amps, spec, epsilon):
    """-eps W(u^2) on the positive half-spectrum, batched over rows."""
    return (-1j * epsilon * spec.norm) * spec.omega * kernels.conv(amps, amps)


def _step_batch(amps, spec, epsilon, dt):
    e_half = np.exp(-0.5j * dt * spec.omega)
    e_full = e_half * e_half
    k1 = nonlinear_rhs(amps, spec, epsilon)
    k2 = nonlinear_rhs(e_half * (amps + 0.5 * dt * k1), spec, epsilon)
    k3 = nonlinear_rhs(e_half * amps + 0.5 * dt * k2, spec, epsilon)
    k4 = nonlinear_rhs(e_full * amps + dt * e_half * k3, spec, epsilon)
    out = e_full * amps + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("nonfinite amplitudes in BBM step (dt too large or blow-up)")
    return out


def step(u, cfg):
    """Advance a SpectralField by one step cfg.dt."""
    amps = _step_batch(u.amps[None, :], u.spec, cfg.epsilon, cfg.dt)
    return SpectralField(u.spec, amps[0])


def advance(amps, spec, epsilon, t, dt):
    """Evolve amplitude rows by time t (t may be negative) with steps <= |dt|."""
    amps = np.array(np.atleast_2d(amps), dtype=np.complex128)
    if t == 0:
        return amps
    n = max(1, int(math.ceil(abs(t) / dt - 1e-12)))
    h = t / n
    for _ in range(n):
        amps = _step_batch(amps, spec, epsilon, h)
    return amps


def guard_horizon(cfg):
    if cfg.epsilon > 0 and not cfg.allow_long:
        limit = 10.0 * cfg.T_hint / cfg.epsilon ** 2
        if cfg.t_final > limit:
            raise ValueError(
                f"t_final={cfg.t_final} exceeds 10*T/eps^2={limit:g}; set allow_long to force")


@dataclass
class Trajectory:
    times: list
    fields: list
    h1: list = field(default_factory=list)
    l2: list = field(default_factory=list)

    def h1_drift(self):
        h = np.array(self.h1)
        return float(np.max(np.abs(h - h[0])) / h[0]) if h[0] > 0 else 0.0


def conserved_h1(u):
    """||u||_{H^1}^2, conserved by the (truncated) flow."""
    return sobolev_norm(u, 1.0) ** 2


def evolve(a, cfg, times=None):
    """Fields at the requested output times (default: t_final only)."""
    guard_horizon(cfg)
    times = [cfg.t_final] if times is None else sorted(float(t) for t in times)
    if times and (times[0] < 0 or times[-1] > cfg.t_final + 1e-12):
        raise ValueError("output times must lie in [0, t_final]")
    traj = Trajectory([], [])
    amps = a.amps[None, :].copy()
    t_now = 0.0
    for t in times:
        amps = advance(amps, a.spec, cfg.epsilon, t - t_now, cfg.dt)
        t_now = t
        u = SpectralField(a.spec, amps[0])
        traj.times.append(t)
        traj.fields.append(u)
        traj.h1.append(conserved_h1(u))
        traj.l2.append(sobolev_norm(u, 0.0) ** 2)
    return traj


def dump_trajectory(traj, path):
    with open(path, "w") as fh:
        fh.write("# t, k, re, im\n")
        for t, u in zip(traj.times, traj.fields):
            for k in range(-u.spec.K, u.spec.K + 1):
                if k == 0:
                    continue
                z = u[k]
                fh.write(f"{t!r},{k},{z.real!r},{z.imag!r}\n")
