"""
Adiabatic passage of a Lambda atom through overlapping cavity and laser
profiles, which deposits exactly one photon into the cavity.

Each photon number ``n`` gives a closed three-level manifold, ordered as
``(|g1,n>, |e,n>, |g2,n+1>)``. At resonance, in the frame rotating with the
cavity, the block is

    [[ 0,        -i W,   0             ],
     [ i W,       0,    -i g sqrt(n+1) ],
     [ 0,   i g sqrt(n+1),  0          ]]

with ``W = Omega(t)``. These coupling phases follow the atom-field
Hamiltonian as written; with them the dark state is
``(g sqrt(n+1) |g1,n> + W |g2,n+1>) / sqrt(W^2 + (n+1) g^2)``.
The unpaired ``|g2,0>`` is never reached from ``|g1>`` and is not tracked.
"""

from dataclasses import dataclass, field

import numpy as np

from . import fock
from .errors import NormDriftError, TruncationError

ADIABATIC_THRESHOLD = 10.0


@dataclass(frozen=True)
class PulseSchedule:
    """Gaussian cavity (g) and laser (Omega) profiles seen by the crossing atom."""

    g_max: float
    omega_max: float
    t_center_g: float
    t_center_omega: float
    width: float
    t_cross: float

    def __post_init__(self):
        if not (self.g_max > 0 and self.omega_max > 0):
            raise ValueError("peak couplings must be > 0")
        if not self.width > 0 or not self.t_cross > 0:
            raise ValueError("width and t_cross must be > 0")
        if not self.t_center_omega > self.t_center_g:
            raise ValueError("laser pulse must follow the cavity pulse (counterintuitive order)")
        for c in (self.t_center_g, self.t_center_omega):
            if c - 3 * self.width < 0 or c + 3 * self.width > self.t_cross:
                raise ValueError(f"pulse centred at {c} does not fit 3 widths inside [0, t_cross]")

    @classmethod
    def default(cls, t_cross: float = 1.0, peak_area: float = 100.0) -> "PulseSchedule":
        """Default counterintuitive schedule with ``g_max * t_cross = Omega_max * t_cross = peak_area``."""
        peak = peak_area / t_cross
        return cls(g_max=peak, omega_max=peak, t_center_g=0.43 * t_cross,
                   t_center_omega=0.57 * t_cross, width=0.125 * t_cross, t_cross=t_cross)


@dataclass(frozen=True)
class AdiabaticityReport:
    ratio_pulse: float
    ratio_decay: float
    ratio_spont: float
    threshold: float = ADIABATIC_THRESHOLD

    @property
    def passes(self) -> dict:
        return {
            "pulse": self.ratio_pulse >= self.threshold,
            "decay": self.ratio_decay >= self.threshold,
            "spont": self.ratio_spont >= self.threshold,
        }

    @property
    def ok(self) -> bool:
        return all(self.passes.values())

    def as_dict(self) -> dict:
        return {"ratio_pulse": self.ratio_pulse, "ratio_decay": self.ratio_decay,
                "ratio_spont": self.ratio_spont, "threshold": self.threshold,
                "pass": self.ok, **{f"pass_{k}": v for k, v in self.passes.items()}}


@dataclass
class CrossingDiagnostics:
    transfer_fidelity: float
    max_excited_pop: float
    final_g2_pop: float
    norm_drift: float
    times: np.ndarray = field(repr=False)
    dark_overlap: np.ndarray = field(repr=False)
    excited_pop: np.ndarray = field(repr=False)


def _pulses(s: PulseSchedule, t):
    t = np.asarray(t, dtype=float)
    g = s.g_max * np.exp(-((t - s.t_center_g) / s.width) ** 2)
    om = s.omega_max * np.exp(-((t - s.t_center_omega) / s.width) ** 2)
    return g, om


def pulse_value(schedule: PulseSchedule, t: float) -> tuple[float, float]:
    if not 0.0 <= t <= schedule.t_cross:
        raise ValueError(f"t = {t} outside crossing window [0, {schedule.t_cross}]")
    g, om = _pulses(schedule, t)
    return float(g), float(om)


def lambda_hamiltonian(schedule: PulseSchedule, t: float, n: int) -> np.ndarray:
    g, om = pulse_value(schedule, t)
    c = g * np.sqrt(n + 1)
    return np.array([[0, -1j * om, 0],
                     [1j * om, 0, -1j * c],
                     [0, 1j * c, 0]], dtype=complex)


def dark_state(schedule: PulseSchedule, t: float, n: int) -> np.ndarray:
    g, om = pulse_value(schedule, t)
    c = g * np.sqrt(n + 1)
    norm = np.hypot(c, om)
    if norm == 0:
        raise ValueError("dark state undefined when both pulses vanish")
    return np.array([c / norm, 0.0, om / norm])


def _derivative(psi, g, om, root):
    # -iH psi with H as in the module docstring; real arithmetic
    c = g * root
    d = np.empty_like(psi)
    d[:, 0] = -om * psi[:, 1]
    d[:, 1] = om * psi[:, 0] - c * psi[:, 2]
    d[:, 2] = c * psi[:, 1]
    return d


def _clean_eigs(w):
    # rounding noise in the null space would otherwise leak in through the sqrt
    cut = w.size * np.finfo(float).eps * max(float(np.max(np.abs(w))), 1.0)
    return np.where(w > cut, w, 0.0)


def _uhlmann(sigma, rho) -> float:
    w, v = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    s = (v * np.sqrt(_clean_eigs(w))) @ v.conj().T
    lam = np.linalg.eigvalsh(s @ rho @ s)
    return float(np.sum(np.sqrt(_clean_eigs(lam))) ** 2)


def simulate_crossing(field_rho, schedule: PulseSchedule, dt: float | None = None,
                      n_records: int = 201, norm_tol: float = 1e-8):
    """Send one atom in |g1> through the cavity; return the reduced field state.

    Each manifold is propagated with RK4 from ``|g1,n>``; the field density
    matrix then follows from the manifold amplitudes. ``dt`` defaults to
    ``t_cross / 2e4``.
    """
    rho = fock.check_density(field_rho)
    dim = rho.shape[0]
    if fock.top_population(rho) > fock.TRUNCATION_GUARD:
        raise TruncationError("field population in the top level would be pushed out of the space")
    s = schedule
    dt = s.t_cross / 2e4 if dt is None else dt
    n_steps = int(np.ceil(s.t_cross / dt - 1e-9))
    h = s.t_cross / n_steps
    nman = dim - 1
    root = np.sqrt(np.arange(1, nman + 1, dtype=float))
    weights = np.real(np.diag(rho))[:nman]

    psi = np.zeros((nman, 3))
    psi[:, 0] = 1.0
    tgrid = np.arange(n_steps + 1) * h
    g_all, om_all = _pulses(s, tgrid)
    g_half, om_half = _pulses(s, tgrid[:-1] + 0.5 * h)
    record_at = set(np.rint(np.linspace(0, n_steps, n_records)).astype(int))
    rec_t, rec_dark, rec_exc = [], [], []
    max_exc = 0.0

    def record(step):
        c = g_all[step] * root
        norm = np.hypot(c, om_all[step])
        dark = np.stack([c, np.zeros_like(c), np.full_like(c, om_all[step])], axis=1)
        dark = np.divide(dark, norm[:, None], out=np.zeros_like(dark), where=norm[:, None] > 0)
        rec_t.append(tgrid[step])
        rec_dark.append(float(weights @ np.sum(dark * psi, axis=1) ** 2))
        rec_exc.append(float(weights @ psi[:, 1] ** 2))

    record(0)
    for k in range(n_steps):
        gm, om_m = g_half[k], om_half[k]
        k1 = _derivative(psi, g_all[k], om_all[k], root)
        k2 = _derivative(psi + 0.5 * h * k1, gm, om_m, root)
        k3 = _derivative(psi + 0.5 * h * k2, gm, om_m, root)
        k4 = _derivative(psi + h * k3, g_all[k + 1], om_all[k + 1], root)
        psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        max_exc = max(max_exc, float(weights @ psi[:, 1] ** 2))
        if k + 1 in record_at:
            record(k + 1)
    drift = float(np.max(np.abs(np.sum(psi**2, axis=1) - 1.0)))
    if drift > norm_tol:
        raise NormDriftError(f"manifold norm drift {drift:.3e} exceeds {norm_tol:.1e}")

    out = np.zeros_like(rho)
    c1, ce, c3 = psi[:, 0], psi[:, 1], psi[:, 2]
    sub = rho[:nman, :nman]
    out[:nman, :nman] += sub * (np.outer(c1, c1) + np.outer(ce, ce))
    out[1:, 1:] += sub * np.outer(c3, c3)
    target = fock.feedback_map(rho)
    diag = CrossingDiagnostics(
        transfer_fidelity=_uhlmann(target, out),
        max_excited_pop=max_exc,
        final_g2_pop=float(weights @ c3**2),
        norm_drift=drift,
        times=np.array(rec_t),
        dark_overlap=np.array(rec_dark),
        excited_pop=np.array(rec_exc),
    )
    return out, diag


def adiabaticity_check(schedule: PulseSchedule, nbar: float, gamma: float, gamma_e: float,
                       threshold: float = ADIABATIC_THRESHOLD) -> AdiabaticityReport:
    """Compare pulse strength, cavity loss and spontaneous emission with the crossing time."""
    if min(nbar, gamma, gamma_e) <= 0:
        raise ValueError("nbar, gamma and gamma_e must be > 0")
    t = schedule.t_cross
    return AdiabaticityReport(
        ratio_pulse=min(schedule.g_max, schedule.omega_max) * t,
        ratio_decay=1.0 / (t * nbar * gamma),
        ratio_spont=1.0 / (t * gamma_e),
        threshold=threshold,
    )
