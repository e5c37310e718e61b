"""
Feedback by adiabatic passage
=============================

An atom crossing the cavity with counterintuitively ordered cavity and
laser profiles follows a dark state and leaves exactly one extra photon
behind, whatever the photon number. A fast crossing fails to do so.
"""

import numpy as np

from cavityfeedback import fock, stirap as S

for area in (1, 10, 30, 100):
    sched = S.PulseSchedule.default(peak_area=area)
    fids = [S.simulate_crossing(fock.fock_dm(n, 6), sched)[1].transfer_fidelity for n in range(4)]
    print(f"peak area {area:4d}: transfer fidelity for n=0..3 ->", np.round(fids, 4))

sched = S.PulseSchedule.default()
psi = fock.normalize(np.array([1, 1j, -0.5, 0.3, 0, 0], complex))
out, diag = S.simulate_crossing(fock.projector(psi), sched)
print("superposition: fidelity", round(diag.transfer_fidelity, 5),
      "max excited population", round(diag.max_excited_pop, 5),
      "min dark-state overlap", round(float(diag.dark_overlap.min()), 5))
print("field populations after:", np.round(np.real(np.diag(out)), 4))

# The crossing must also be quick compared with cavity and atomic decay.
report = S.adiabaticity_check(sched, nbar=1.0, gamma=0.01, gamma_e=0.005)
print(report.as_dict())
