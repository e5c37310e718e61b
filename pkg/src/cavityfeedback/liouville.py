"""
Photodetection feedback master equation and its closed-form solutions.

With detection efficiency ``eta`` and the one-photon feedback map inserted,
the generator is

    d rho/dt = eta*gamma * sqrt(n) rho sqrt(n) + (1-eta)*gamma * a rho a^dag
               - gamma/2 * {n, rho}

which acts elementwise on the Fock basis:

    d rho[n,m]/dt = (eta*gamma*sqrt(n m) - gamma*(n+m)/2) rho[n,m]
                    + (1-eta)*gamma*sqrt((n+1)(m+1)) rho[n+1,m+1]

Nothing flows upward in photon number, so restricting to the first ``dim``
levels is exact. Multi-mode states evolve under the sum of independent
single-mode generators.
"""

import enum
from dataclasses import dataclass
from math import comb

import numpy as np

from . import fock
from .errors import NumericalError, TraceDriftError


@dataclass(frozen=True)
class FeedbackParams:
    gamma: float
    eta: float

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")


class DiffusionKind(enum.Enum):
    SQUARE_ROOT = "square_root"
    STANDARD = "standard"


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    ``dt=None`` means ``1e-3 / gamma``. States are sampled at
    ``sample_points + 1`` evenly spaced times covering ``[0, t_final]``.
    """

    t_final: float
    dt: float | None = None
    trace_tolerance: float = 1e-8
    sample_points: int = 1

    def __post_init__(self):
        if self.t_final < 0:
            raise ValueError("t_final must be >= 0")
        if self.dt is not None:
            if not self.dt > 0:
                raise ValueError("dt must be > 0")
            if self.t_final > 0 and self.dt > self.t_final:
                raise ValueError("dt must not exceed t_final")
        if not self.trace_tolerance > 0:
            raise ValueError("trace_tolerance must be > 0")
        if self.sample_points < 1:
            raise ValueError("sample_points must be >= 1")


@dataclass(frozen=True)
class Evolution:
    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _mode_weights(d: int, p: FeedbackParams):
    n = np.arange(d, dtype=float)
    nn, mm = np.meshgrid(n, n, indexing="ij")
    diag = p.eta * p.gamma * np.sqrt(nn * mm) - 0.5 * p.gamma * (nn + mm)
    inflow = (1.0 - p.eta) * p.gamma * np.sqrt((nn + 1.0) * (mm + 1.0))
    return diag, inflow[:-1, :-1]


class _Generator:
    """Precomputed elementwise weights of the feedback generator on ``dims``."""

    def __init__(self, p: FeedbackParams, dims: tuple[int, ...]):
        self.dims = tuple(dims)
        self.size = int(np.prod(self.dims))
        self.weights = [_mode_weights(d, p) for d in self.dims]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        nm = len(self.dims)
        t = rho.reshape(self.dims + self.dims)
        out = np.zeros_like(t)
        for k, (diag, inflow) in enumerate(self.weights):
            tk = np.moveaxis(t, (k, nm + k), (0, 1))
            ok = np.moveaxis(out, (k, nm + k), (0, 1))
            pad = (slice(None), slice(None)) + (None,) * (tk.ndim - 2)
            ok += diag[pad] * tk
            ok[:-1, :-1] += inflow[pad] * tk[1:, 1:]
        return out.reshape(self.size, self.size)


def _resolve_dims(rho, dims):
    if dims is None:
        return (rho.shape[0],)
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValueError(f"dims {dims} do not match matrix side {rho.shape[0]}")
    return dims


def rhs(rho, p: FeedbackParams, dims=None) -> np.ndarray:
    """Time derivative of ``rho`` under the feedback master equation."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    return _Generator(p, _resolve_dims(rho, dims))(rho)


def _rk4_step(gen, rho, dt):
    k1 = gen(rho)
    k2 = gen(rho + 0.5 * dt * k1)
    k3 = gen(rho + 0.5 * dt * k2)
    k4 = gen(rho + dt * k3)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_grid(t_final: float, dt: float, sample_points: int):
    """Number of steps, effective step and sampled step indices.

    The step is shrunk so an integer number of steps lands on ``t_final``.
    """
    if t_final == 0:
        return 0, dt, np.zeros(1, dtype=int)
    n_steps = int(np.ceil(t_final / dt - 1e-9))
    sample_idx = np.unique(np.rint(np.linspace(0, n_steps, sample_points + 1)).astype(int))
    return n_steps, t_final / n_steps, sample_idx


def integrate(rho0, p: FeedbackParams, cfg: IntegratorConfig, dims=None) -> Evolution:
    """Integrate the master equation with fixed-step RK4.

    Each step is Hermitized. The trace is never renormalized; a drift beyond
    ``cfg.trace_tolerance`` raises TraceDriftError.
    """
    rho = fock.check_density(rho0)
    dims = _resolve_dims(rho, dims)
    gen = _Generator(p, dims)
    dt = cfg.dt if cfg.dt is not None else 1e-3 / p.gamma
    n_steps, h, sample_idx = step_grid(cfg.t_final, dt, cfg.sample_points)

    states = [rho.copy()]
    next_sample = 1
    for step in range(1, n_steps + 1):
        rho = _rk4_step(gen, rho, h)
        rho = 0.5 * (rho + rho.conj().T)
        if not np.all(np.isfinite(rho)):
            raise NumericalError(f"non-finite density matrix at step {step}")
        drift = abs(np.trace(rho).real - 1.0)
        if drift > cfg.trace_tolerance:
            raise TraceDriftError(f"trace drift {drift:.3e} at t={step * h:.6g}")
        if next_sample < len(sample_idx) and step == sample_idx[next_sample]:
            states.append(rho.copy())
            next_sample += 1
    return Evolution(times=sample_idx * h, states=np.array(states))


def propagate_analytic(rho0, kind: DiffusionKind, gamma_t: float) -> np.ndarray:
    """Closed-form pure dephasing of every Fock-basis element.

    ``SQUARE_ROOT`` is ideal-detection feedback, ``rho[n,m]`` decaying with
    exponent (sqrt(n)-sqrt(m))^2; ``STANDARD`` is ordinary phase diffusion
    with exponent (n-m)^2. Both scale with gamma_t / 2.
    """
    if gamma_t < 0:
        raise ValueError("gamma_t must be >= 0")
    rho0 = np.asarray(rho0, dtype=complex)
    n = np.arange(rho0.shape[0], dtype=float)
    if kind is DiffusionKind.SQUARE_ROOT:
        expo = (np.sqrt(n)[:, None] - np.sqrt(n)[None, :]) ** 2
    elif kind is DiffusionKind.STANDARD:
        expo = (n[:, None] - n[None, :]) ** 2
    else:
        raise ValueError(f"unknown diffusion kind {kind!r}")
    return rho0 * np.exp(-0.5 * gamma_t * expo)


def damped_cavity_analytic(rho0, gamma_t: float) -> np.ndarray:
    """Exact zero-temperature cavity damping (the eta = 0 limit)."""
    if gamma_t < 0:
        raise ValueError("gamma_t must be >= 0")
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[0]
    loss = -np.expm1(-gamma_t)
    out = np.zeros_like(rho0)
    for n in range(d):
        for m in range(d):
            acc = 0.0j
            for k in range(d - max(n, m)):
                acc += np.sqrt(comb(n + k, k) * comb(m + k, k)) * loss**k * rho0[n + k, m + k]
            out[n, m] = acc * np.exp(-0.5 * gamma_t * (n + m))
    return out


def offdiag_rate(n: int, m: int, p: FeedbackParams) -> float:
    """Decay rate of ``rho[n, m]`` when nothing flows in from above."""
    if n < 0 or m < 0:
        raise ValueError("photon numbers must be >= 0")
    return p.gamma * (0.5 * (n + m) - p.eta * np.sqrt(n * m))


def decay_inequality_check(n: int, m: int) -> tuple[float, int]:
    """Return the square-root and standard dephasing exponents for (n, m).

    The first never exceeds the second; a violation raises ArithmeticError.
    """
    if n < 0 or m < 0:
        raise ValueError("photon numbers must be >= 0")
    sq = (np.sqrt(n) - np.sqrt(m)) ** 2
    std = (n - m) ** 2
    if sq > std:
        raise ArithmeticError(f"ordering violated at ({n}, {m}): {sq} > {std}")
    return float(sq), std


def mean_amplitude(rho) -> complex:
    """<a> = sum_n sqrt(n+1) rho[n+1, n]."""
    rho = np.asarray(rho)
    sub = np.diagonal(rho, offset=-1)
    return complex(np.sum(np.sqrt(np.arange(1, rho.shape[0])) * sub))


def semiclassical_amplitude(nbar: float, gamma_t: float) -> tuple[float, float]:
    """Mean-field amplitude decay factor under ideal feedback.

    Returns ``(factorized, large_nbar)``: the factorized-average form with
    exponent (sqrt(nbar+1) - sqrt(nbar))^2 gamma_t / 2 and its large-nbar
    limit exp(-gamma_t / (8 nbar)).
    """
    if not nbar > 0:
        raise ValueError("nbar must be > 0")
    gap = 1.0 / (np.sqrt(nbar + 1.0) + np.sqrt(nbar))
    return float(np.exp(-0.5 * gamma_t * gap**2)), float(np.exp(-gamma_t / (8.0 * nbar)))


def ordinary_amplitude_factor(gamma_t: float) -> float:
    return float(np.exp(-0.5 * gamma_t))
