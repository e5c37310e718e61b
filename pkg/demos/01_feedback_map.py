"""
The one-photon feedback map
===========================

Feedback after each detected photon loss re-injects one photon. On a
truncated Fock space this acts as a shift of every matrix element one step
up the diagonal.
"""

import numpy as np

from cavityfeedback import fock

rng = np.random.default_rng(0)
dim = 8
ops = fock.mode_ops(dim)

# A random state with the top level left empty so nothing is pushed out.
psi = np.zeros(dim, complex)
psi[:5] = rng.normal(size=5) + 1j * rng.normal(size=5)
rho = fock.projector(fock.normalize(psi))

shifted = fock.feedback_map(rho)
print("populations before:", np.round(np.real(np.diag(rho)), 4))
print("populations after: ", np.round(np.real(np.diag(shifted)), 4))

# Detection followed by the map equals a sandwich with sqrt(n).
lhs = fock.feedback_map(ops.a @ rho @ ops.a_dag)
rhs = ops.sqrt_n @ rho @ ops.sqrt_n
print("max |Phi(a rho a+) - sqrt(n) rho sqrt(n)| =", np.abs(lhs - rhs).max())

# A populated top level cannot be shifted and is refused.
try:
    fock.feedback_map(fock.fock_dm(dim - 1, dim))
except Exception as exc:
    print("top level populated:", type(exc).__name__)
