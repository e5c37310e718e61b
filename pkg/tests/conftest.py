import numpy as np
import pytest
from scipy.linalg import expm

from cavityfeedback import fock


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)


def superop_propagator(p, dim, t):
    """exp(L t) from the operator form of the generator, column-stacking vec."""
    o = fock.mode_ops(dim)
    eye = np.eye(dim)

    def sandwich(left, right):  # rho -> left rho right
        return np.kron(right.T, left)

    def dissipator(c):
        cdc = c.conj().T @ c
        return sandwich(c, c.conj().T) - 0.5 * (sandwich(cdc, eye) + sandwich(eye, cdc))

    gen = p.eta * p.gamma * sandwich(o.sqrt_n, o.sqrt_n) \
        + (1 - p.eta) * p.gamma * sandwich(o.a, o.a_dag) \
        - 0.5 * p.gamma * (sandwich(o.n_hat, eye) + sandwich(eye, o.n_hat))
    return expm(gen * t)


def propagate_superop(rho, p, t):
    d = rho.shape[0]
    vec = superop_propagator(p, d, t) @ rho.reshape(-1, order="F")
    return vec.reshape(d, d, order="F")


def pure_with_clear_top(dim, rng, headroom=1):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi[dim - headroom:] = 0
    return fock.normalize(psi)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
