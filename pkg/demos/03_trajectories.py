"""
Quantum-jump trajectories
=========================

Averaging stochastic wavefunctions with two jump channels (detected loss
followed by feedback, and undetected loss) reproduces the master equation.
Each trajectory has its own random stream, so results do not depend on how
the work is split.
"""

import numpy as np

from cavityfeedback import fock, liouville as L, mcwf
from cavityfeedback.liouville import FeedbackParams, IntegratorConfig

p = FeedbackParams(gamma=1.0, eta=0.5)
psi0 = fock.normalize(fock.fock_ket(0, 8) + fock.fock_ket(1, 8))
exact = L.integrate(fock.projector(psi0), p, IntegratorConfig(t_final=1.0)).final

for n_traj in (500, 2000, 8000):
    cfg = mcwf.TrajectoryConfig(t_final=1.0, dt=1e-3, n_traj=n_traj, master_seed=7,
                                sample_times=(1.0,))
    res = mcwf.ensemble_density(psi0, p, cfg)
    print(f"{n_traj:5d} trajectories: trace distance {mcwf.trace_distance(res.rho[-1], exact):.4f}, "
          f"<n> = {res.means['n'][-1]:.4f} +/- {res.stderr['n'][-1]:.4f}")

print("master equation <n> =", np.real(np.trace(fock.mode_ops(8).n_hat @ exact)))

# A single trajectory with its jump record.
ch = mcwf.jump_channels(p, 8)
rec = mcwf.evolve_trajectory(fock.fock_ket(4, 8), ch,
                             mcwf.TrajectoryConfig(t_final=2.0, dt=1e-3, sample_times=(2.0,)), 3)
for t, label in rec.jump_times:
    print(f"  jump at t={t:.3f}: {label.value}")
