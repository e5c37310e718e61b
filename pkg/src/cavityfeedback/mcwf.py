"""
Quantum-jump unraveling of the feedback master equation.

Two jump channels reproduce the generator exactly:

* ``FEEDBACK_DETECTION``: a detected photon loss immediately followed by
  the one-photon feedback map, i.e. sqrt(eta*gamma) * sqrt(n);
* ``UNDETECTED_LOSS``: sqrt((1-eta)*gamma) * a.

Their ``C^dag C`` sum to ``gamma * n`` whatever ``eta`` is, so the no-jump
drift is always the bare cavity damping exp(-gamma t n / 2).

Every trajectory owns a Philox stream keyed by ``(master_seed, traj_index)``
and pre-draws one uniform per time step. A trajectory therefore gives the
same result regardless of batch layout or worker count. Ensemble sums are
reduced over fixed-size chunks in index order.
"""

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .errors import NormDriftError, StepSizeError
from .liouville import FeedbackParams

P_MAX = 0.1
CHUNK = 1000


class ChannelLabel(enum.Enum):
    FEEDBACK_DETECTION = "feedback_detection"
    UNDETECTED_LOSS = "undetected_loss"


@dataclass(frozen=True)
class JumpChannel:
    operator: np.ndarray
    label: ChannelLabel


@dataclass(frozen=True)
class TrajectoryConfig:
    t_final: float
    dt: float
    n_traj: int = 1
    master_seed: int = 0
    sample_times: tuple = (0.0,)

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.t_final < 0:
            raise ValueError("t_final must be >= 0")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        ts = np.asarray(self.sample_times, dtype=float)
        if ts.size == 0 or np.any(np.diff(ts) < 0):
            raise ValueError("sample_times must be a non-empty ascending sequence")
        if ts[0] < 0 or ts[-1] > self.t_final + 1e-12:
            raise ValueError("sample_times must lie within [0, t_final]")

    @property
    def n_steps(self) -> int:
        return int(np.ceil(self.t_final / self.dt - 1e-9))

    def sample_steps(self) -> np.ndarray:
        ts = np.asarray(self.sample_times, dtype=float)
        if self.n_steps == 0:
            return np.zeros(ts.size, dtype=int)
        return np.rint(ts * self.n_steps / self.t_final).astype(int).clip(0, self.n_steps)


@dataclass
class TrajectoryRecord:
    jump_times: list = field(default_factory=list)
    sampled_states: list = field(default_factory=list)


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble average over ``n_traj`` trajectories.

    ``means`` and ``stderr`` hold per-sample-time observables: ``n`` (photon
    number), ``p`` (Fock populations, shape (S, dim)), ``re_amp``/``im_amp``
    (mean amplitude). ``stderr`` is the sample standard deviation over
    trajectories divided by sqrt(n_traj).
    """

    times: np.ndarray
    rho: np.ndarray
    means: dict
    stderr: dict
    jump_counts: np.ndarray


def jump_channels(p: FeedbackParams, dim: int) -> list[JumpChannel]:
    ops = fock.mode_ops(dim)
    return [
        JumpChannel(np.sqrt(p.eta * p.gamma) * ops.sqrt_n, ChannelLabel.FEEDBACK_DETECTION),
        JumpChannel(np.sqrt((1.0 - p.eta) * p.gamma) * ops.a, ChannelLabel.UNDETECTED_LOSS),
    ]


def lindblad_rhs(rho, channels: list[JumpChannel]) -> np.ndarray:
    """sum_k C rho C^dag - {C^dag C, rho}/2 for the given channel set."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for ch in channels:
        c = ch.operator
        cdc = c.conj().T @ c
        out += c @ rho @ c.conj().T - 0.5 * (cdc @ rho + rho @ cdc)
    return out


def trajectory_uniforms(master_seed: int, traj_index: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(traj_index,))
    return np.random.Generator(np.random.Philox(ss)).random(n)


def _run_batch(psi0, channels, cfg: TrajectoryConfig, indices, record_jumps=False):
    """Step a batch of trajectories; returns sampled states (B, S, d), jump counts, jump logs."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("initial ket must be normalized")
    n_steps = cfg.n_steps
    dt = cfg.t_final / n_steps if n_steps else cfg.dt
    sample_steps = cfg.sample_steps()
    n_batch = len(indices)
    dim = psi0.shape[0]

    uniforms = np.stack([trajectory_uniforms(cfg.master_seed, i, n_steps) for i in indices]) \
        if n_steps else np.zeros((n_batch, 0))
    ops_t = [ch.operator.T for ch in channels]
    labels = [ch.label for ch in channels]
    cdcs = [ch.operator.conj().T @ ch.operator for ch in channels]
    # both physical channels have diagonal C^dag C; keep a general fallback
    diagonal = all(np.allclose(c, np.diag(np.diag(c))) for c in cdcs)
    rates = np.stack([np.diag(c).real for c in cdcs], axis=1)
    drift = np.eye(dim) - 0.5 * dt * sum(cdcs)
    drift_diag = np.diag(drift).copy() if diagonal else None

    psi = np.tile(psi0, (n_batch, 1))
    samples = np.empty((n_batch, len(sample_steps), dim), dtype=complex)
    counts = np.zeros(n_batch, dtype=np.int64)
    logs = [[] for _ in range(n_batch)]

    def take_samples(step):
        for s in np.nonzero(sample_steps == step)[0]:
            samples[:, s] = psi

    take_samples(0)
    for step in range(n_steps):
        if diagonal:
            probs = dt * (np.abs(psi) ** 2 @ rates)
            new = psi * drift_diag
        else:
            probs = dt * np.stack(
                [np.einsum("bi,bi->b", psi.conj(), psi @ c.T).real for c in cdcs], axis=1)
            new = psi @ drift.T
        cum = np.cumsum(probs, axis=1)
        if cum[:, -1].max() > P_MAX:
            raise StepSizeError(
                f"jump probability {cum[:, -1].max():.3f} per step exceeds {P_MAX}; reduce dt"
            )
        r = uniforms[:, step]
        jump_any = r < cum[:, -1]
        if np.any(jump_any):
            rows = np.nonzero(jump_any)[0]
            which = np.argmax(r[rows, None] < cum[rows], axis=1)
            for k in range(len(channels)):
                sel = rows[which == k]
                if sel.size == 0:
                    continue
                new[sel] = psi[sel] @ ops_t[k]
                counts[sel] += 1
                if record_jumps:
                    t_jump = (step + 1) * dt
                    for b in sel:
                        logs[b].append((t_jump, labels[k]))
        norms = np.linalg.norm(new, axis=1)
        if np.any(norms == 0) or not np.all(np.isfinite(norms)):
            raise NormDriftError(f"trajectory state collapsed at step {step + 1}")
        psi = new / norms[:, None]
        take_samples(step + 1)
    return samples, counts, logs


def evolve_trajectory(psi0, channels: list[JumpChannel], cfg: TrajectoryConfig,
                      traj_index: int) -> TrajectoryRecord:
    """One first-order quantum-jump trajectory, reproducible from (master_seed, traj_index)."""
    samples, _, logs = _run_batch(psi0, channels, cfg, [traj_index], record_jumps=True)
    return TrajectoryRecord(jump_times=logs[0], sampled_states=list(samples[0]))


def _chunk_sums(args):
    psi0, channels, cfg, start, stop = args
    samples, counts, _ = _run_batch(psi0, channels, cfg, range(start, stop))
    dim = samples.shape[-1]
    pops = np.abs(samples) ** 2
    nvals = pops @ np.arange(dim)
    amp = np.einsum("bsi,i,bsi->bs", samples[:, :, :-1].conj(),
                    np.sqrt(np.arange(1, dim)), samples[:, :, 1:])
    obs = {"n": nvals, "p": pops, "re_amp": amp.real, "im_amp": amp.imag}
    sums = {k: v.sum(axis=0) for k, v in obs.items()}
    sq = {k: (v**2).sum(axis=0) for k, v in obs.items()}
    rho = np.einsum("bsi,bsj->sij", samples, samples.conj())
    return rho, sums, sq, counts


def ensemble_density(psi0, p: FeedbackParams, cfg: TrajectoryConfig,
                     workers: int = 1) -> EnsembleResult:
    """Average |psi><psi| over ``cfg.n_traj`` trajectories.

    Output is bit-identical for any ``workers``: chunks have a fixed size and
    are reduced in index order.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    channels = jump_channels(p, psi0.shape[0])
    tasks = [(psi0, channels, cfg, s, min(s + CHUNK, cfg.n_traj))
             for s in range(0, cfg.n_traj, CHUNK)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_sums, tasks))
    else:
        parts = [_chunk_sums(t) for t in tasks]

    rho, sums, sq, counts = parts[0]
    rho, sums, sq = rho.copy(), dict(sums), dict(sq)
    for r, s, q, _ in parts[1:]:
        rho += r
        for k in sums:
            sums[k] = sums[k] + s[k]
            sq[k] = sq[k] + q[k]
    n = cfg.n_traj
    means = {k: v / n for k, v in sums.items()}
    stderr = {}
    for k in sums:
        var = np.maximum(sq[k] / n - means[k] ** 2, 0.0) * (n / (n - 1) if n > 1 else 0.0)
        stderr[k] = np.sqrt(var / n)
    times = cfg.sample_steps() * (cfg.t_final / cfg.n_steps if cfg.n_steps else 0.0)
    return EnsembleResult(times=times, rho=rho / n, means=means, stderr=stderr,
                          jump_counts=np.concatenate([c for *_, c in parts]))


def trace_distance(rho, sigma) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma)))))
