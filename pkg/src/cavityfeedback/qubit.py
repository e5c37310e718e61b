"""
Polarization-coded qubits alpha|n,m> + beta|m,n> on two cavity modes, each
protected by its own feedback loop.
"""

from dataclasses import dataclass

import numpy as np

from . import fock, liouville
from .liouville import FeedbackParams, IntegratorConfig


@dataclass(frozen=True)
class QubitSpec:
    n: int
    m: int
    alpha: complex = 1 / np.sqrt(2)
    beta: complex = 1 / np.sqrt(2)

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("photon numbers must be >= 0")
        if self.n == self.m:
            raise ValueError(f"qubit needs n != m, got n = m = {self.n}")
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")


def default_dims(n: int, m: int) -> tuple[int, int]:
    d = max(n, m) + 3
    return d, d


def _two_mode_index(i: int, j: int, dims) -> int:
    return i * dims[1] + j


def make_qubit(spec: QubitSpec, dims=None) -> np.ndarray:
    """Ket alpha|n,m> + beta|m,n> in row-major composite indexing."""
    dims = default_dims(spec.n, spec.m) if dims is None else tuple(dims)
    if max(spec.n, spec.m) + 1 >= min(dims):
        raise ValueError(f"dims {dims} too small for photon numbers ({spec.n}, {spec.m})")
    psi = np.zeros(dims[0] * dims[1], dtype=complex)
    psi[_two_mode_index(spec.n, spec.m, dims)] += spec.alpha
    psi[_two_mode_index(spec.m, spec.n, dims)] += spec.beta
    return fock.normalize(psi)


def evolve_two_mode(rho0, dims, p: FeedbackParams, gamma_t: float, dt: float | None = None,
                    sample_points: int = 1) -> liouville.Evolution:
    """Evolve a two-mode state with an independent feedback loop on each mode."""
    if gamma_t < 0:
        raise ValueError("gamma_t must be >= 0")
    cfg = IntegratorConfig(t_final=gamma_t / p.gamma, dt=dt, sample_points=sample_points)
    if cfg.t_final > 0 and cfg.dt is None and 1e-3 / p.gamma > cfg.t_final:
        cfg = IntegratorConfig(t_final=cfg.t_final, dt=cfg.t_final, sample_points=sample_points)
    return liouville.integrate(rho0, p, cfg, dims=dims)


def fidelity(rho_initial, rho_t) -> float:
    """Tr{rho(0) rho(t)}; accepts a ket for the initial state."""
    rho_t = np.asarray(rho_t)
    rho_initial = np.asarray(rho_initial)
    if rho_initial.ndim == 1:
        if rho_initial.shape[0] != rho_t.shape[0]:
            raise ValueError("dimension mismatch")
        return float(np.real(rho_initial.conj() @ rho_t @ rho_initial))
    if rho_initial.shape != rho_t.shape:
        raise ValueError(f"dimension mismatch: {rho_initial.shape} vs {rho_t.shape}")
    return float(np.real(np.sum(rho_initial.T * rho_t)))


def min_fidelity_closed(n: int, m: int, eta: float, gamma_t: float) -> float:
    if n == m:
        raise ValueError("n must differ from m")
    s = n + m
    return 0.5 * (np.exp(-(1.0 - eta) * gamma_t * s)
                  + np.exp(-gamma_t * (s - 2.0 * eta * np.sqrt(n * m))))


def _basis_evolutions(n, m, dims, p, gamma_t, dt, sample_points):
    """Evolve |a><a|, |b><b|, |+><+| and |i><i| for a=|n,m>, b=|m,n>.

    Returns the initial states and their evolved samples, from which the
    coherence |a><b| is recovered by linearity.
    """
    a = make_qubit(QubitSpec(n, m, 1.0, 0.0), dims)
    b = make_qubit(QubitSpec(n, m, 0.0, 1.0), dims)
    kets = [a, b, (a + b) / np.sqrt(2), (a + 1j * b) / np.sqrt(2)]
    runs = [evolve_two_mode(fock.projector(k), dims, p, gamma_t, dt, sample_points) for k in kets]
    pa, pb, pplus, pi = (r.states for r in runs)
    half = 0.5 * (pa + pb)
    coh = (pplus - half) + 1j * (pi - half)
    return runs[0].times, a, b, pa, pb, coh


def fidelity_landscape(n: int, m: int, p: FeedbackParams, gamma_t: float, grid: int = 128,
                       dims=None, dt: float | None = None, sample_points: int = 1):
    """Fidelity over a (|alpha|^2, relative phase) grid at every sample time.

    ``|alpha|^2`` takes ``grid + 1`` values on [0, 1] (endpoints included) and
    the phase ``grid`` values on [0, 2 pi). Returns ``(times, pop, phase, F)``
    with ``F`` of shape (times, grid + 1, grid).
    """
    if grid < 64:
        raise ValueError("grid resolution must be >= 64")
    dims = default_dims(n, m) if dims is None else tuple(dims)
    times, a, b, pa, pb, coh = _basis_evolutions(n, m, dims, p, gamma_t, dt, sample_points)
    # Tr{rho0 rho(t)} = <psi| rho(t) |psi> only needs the {a, b} block
    sup = [int(np.argmax(np.abs(a))), int(np.argmax(np.abs(b)))]
    block = lambda s: s[:, sup][:, :, sup]
    ea, eb, ex = block(pa), block(pb), block(coh)
    exh = np.conj(np.swapaxes(ex, 1, 2))

    pop = np.linspace(0.0, 1.0, grid + 1)
    phase = 2 * np.pi * np.arange(grid) / grid
    al = np.broadcast_to(np.sqrt(pop)[:, None], (pop.size, phase.size)).astype(complex)
    be = np.sqrt(1 - pop)[:, None] * np.exp(1j * phase)[None, :]
    v = np.stack([al, be], axis=-1)
    F = np.zeros((len(times), pop.size, phase.size))
    for w, e in ((np.abs(al) ** 2, ea), (np.abs(be) ** 2, eb),
                 (al * be.conj(), ex), (al.conj() * be, exh)):
        F += np.real(w[None] * np.einsum("pqi,tij,pqj->tpq", v.conj(), e, v))
    return times * p.gamma, pop, phase, F


def min_fidelity_numeric(n: int, m: int, p: FeedbackParams, gamma_t: float, grid: int = 128,
                         dims=None, dt: float | None = None):
    """Worst-case fidelity over the qubit grid after integrating the master equation.

    Returns ``(F_min, (alpha, beta))`` at the argmin.
    """
    _, pop, phase, F = fidelity_landscape(n, m, p, gamma_t, grid, dims, dt)
    i, j = np.unravel_index(np.argmin(F[-1]), F[-1].shape)
    alpha = np.sqrt(pop[i])
    beta = np.sqrt(1 - pop[i]) * np.exp(1j * phase[j])
    return float(F[-1, i, j]), (complex(alpha), complex(beta))


def optimal_qubit(eta: float, gamma_t: float, n_plus_m_max: int = 7) -> tuple[int, int]:
    """(n, m) with n > m maximizing the closed-form minimum fidelity; ties go to smaller n+m."""
    if n_plus_m_max < 1:
        raise ValueError("n_plus_m_max must be >= 1")
    best, best_f = None, -np.inf
    for total in range(1, n_plus_m_max + 1):
        for m in range((total + 1) // 2):
            n = total - m
            f = min_fidelity_closed(n, m, eta, gamma_t)
            if f > best_f:
                best, best_f = (n, m), f
    return best


def error_probability_scaling(eta: float, gamma_t: float) -> tuple[float, float]:
    """Single-photon qubit minimum fidelity: exact value and its linearization 1 - gamma_t (1 - eta/2)."""
    if gamma_t > 0.2:
        raise ValueError("linearization only addresses gamma_t <= 0.2")
    exact = 0.5 * (np.exp(-(1.0 - eta) * gamma_t) + np.exp(-gamma_t))
    return float(exact), float(1.0 - gamma_t * (1.0 - 0.5 * eta))
