"""
Protecting a two-mode qubit
===========================

The qubit alpha|n,m> + beta|m,n> lives on two cavity modes, each with its
own feedback loop. The worst-case fidelity over all qubit states is found by
integrating the master equation and compared with its closed form.
"""

from cavityfeedback import qubit as Q
from cavityfeedback.liouville import FeedbackParams

print(" n m  eta  gamma_t  numeric    closed")
for (n, m) in ((1, 0), (2, 1), (3, 2)):
    for eta in (0.0, 0.8, 1.0):
        F, (alpha, _) = Q.min_fidelity_numeric(n, m, FeedbackParams(1.0, eta), 0.2, grid=64)
        print(f" {n} {m}  {eta:.1f}  0.2      {F:.6f}   {Q.min_fidelity_closed(n, m, eta, 0.2):.6f}"
              f"   (worst |alpha|^2 = {abs(alpha) ** 2:.2f})")

# Which photon numbers to use depends on how good detection is.
for eta in (0.0, 0.8, 0.95, 1.0):
    print(f"eta={eta}: best (n, m) with n+m <= 7 at gamma t = 0.05 ->", Q.optimal_qubit(eta, 0.05, 7))

# Small-loss error probability for the single-photon qubit.
for eta in (0.0, 0.5, 1.0):
    exact, linear = Q.error_probability_scaling(eta, 0.05)
    print(f"eta={eta}: 1-F exact {1 - exact:.5f}, linear {1 - linear:.5f}")
