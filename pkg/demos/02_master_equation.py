"""
Square-root phase diffusion
===========================

With ideal detection the photon number is conserved and coherences decay at
a rate set by (sqrt(n) - sqrt(m))^2 rather than (n - m)^2. The integrator is
checked against the closed forms, then used on a coherent state to show the
slowed amplitude decay.
"""

import math

import numpy as np

from cavityfeedback import fock, liouville as L
from cavityfeedback.liouville import DiffusionKind, FeedbackParams, IntegratorConfig

rng = np.random.default_rng(1)
rho0 = fock.projector(fock.random_ket(10, rng))

ideal = L.integrate(rho0, FeedbackParams(1.0, 1.0), IntegratorConfig(t_final=1.0)).final
closed = L.propagate_analytic(rho0, DiffusionKind.SQUARE_ROOT, 1.0)
print("eta=1 vs closed form, max error:", np.abs(ideal - closed).max())

lossy = L.integrate(rho0, FeedbackParams(1.0, 0.0), IntegratorConfig(t_final=1.0)).final
print("eta=0 vs damped cavity, max error:", np.abs(lossy - L.damped_cavity_analytic(rho0, 1.0)).max())

# Decay rate of a few coherences for several detection efficiencies.
for eta in (0.0, 0.5, 1.0):
    rates = [L.offdiag_rate(n, n + 1, FeedbackParams(1.0, eta)) for n in (0, 4, 16)]
    print(f"eta={eta}: rate of rho[n,n+1] for n=0,4,16 ->", np.round(rates, 4))

# Coherent state with mean photon number 25.
nbar, dim = 25.0, 64
coh = fock.projector(fock.coherent_state(math.sqrt(nbar), dim))
a0 = L.mean_amplitude(coh).real
print("\n gamma t   feedback   1/(8 nbar) law   ordinary")
for gt in (0.5, 1.0, 2.0):
    fb = L.mean_amplitude(L.propagate_analytic(coh, DiffusionKind.SQUARE_ROOT, gt)).real / a0
    _, law = L.semiclassical_amplitude(nbar, gt)
    print(f"{gt:7.2f}   {fb:.6f}   {law:.6f}         {L.ordinary_amplitude_factor(gt):.6f}")
