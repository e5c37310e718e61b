"""
Truncated single-mode Fock space: ladder operators, state constructors and
the one-photon feedback map.

States are plain numpy arrays. A ket is a complex vector of length ``dim``;
a density matrix is a ``dim x dim`` complex array with elements
``rho[n, m] = <n|rho|m>``. Two-mode states use row-major composite indexing
``(n1, n2) -> n1 * dim2 + n2`` (mode 1 is the slow index).
"""

from dataclasses import dataclass

import numpy as np

from .errors import TruncationError

TRUNCATION_GUARD = 1e-10
COHERENT_TAIL_GUARD = 1e-10


@dataclass(frozen=True)
class ModeOps:
    """Dense ladder operators of one truncated mode."""

    a: np.ndarray
    a_dag: np.ndarray
    n_hat: np.ndarray
    sqrt_n: np.ndarray

    @property
    def dim(self) -> int:
        return self.a.shape[0]


def _check_dim(dim) -> int:
    if int(dim) != dim or dim < 2:
        raise ValueError(f"Fock dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


def mode_ops(dim: int) -> ModeOps:
    dim = _check_dim(dim)
    n = np.arange(dim)
    a = np.diag(np.sqrt(n[1:]).astype(complex), k=1)
    a_dag = a.conj().T.copy()
    n_hat = np.diag(n.astype(complex))
    sqrt_n = np.diag(np.sqrt(n).astype(complex))
    for arr in (a, a_dag, n_hat, sqrt_n):
        arr.flags.writeable = False
    return ModeOps(a=a, a_dag=a_dag, n_hat=n_hat, sqrt_n=sqrt_n)


def fock_ket(n: int, dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise ValueError(f"Fock level {n} outside truncated space of dim {dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[n] = 1.0
    return psi


def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return psi / norm


def projector(psi) -> np.ndarray:
    """|psi><psi| for a (not necessarily normalized) ket."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def fock_dm(n: int, dim: int) -> np.ndarray:
    return projector(fock_ket(n, dim))


def check_density(rho, herm_tol=1e-12, trace_tol=1e-10, eig_tol=1e-9) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises ValueError if ``rho`` is not square, Hermitian, unit-trace and
    positive semidefinite within the given tolerances.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre ensemble of the given rank."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def top_population(rho) -> float:
    return float(np.real(rho[-1, -1]))


def feedback_map(rho, guard: float = TRUNCATION_GUARD) -> np.ndarray:
    """Add exactly one photon: a^dag (a a^dag)^(-1/2) rho (a a^dag)^(-1/2) a.

    On the Fock basis this moves ``rho[n, m]`` to position ``(n+1, m+1)``.
    Raises TruncationError if the top retained level carries more than
    ``guard`` population, since that weight would be pushed out of the space.
    """
    rho = np.asarray(rho, dtype=complex)
    if top_population(rho) > guard:
        raise TruncationError(
            f"top Fock level population {top_population(rho):.3e} exceeds guard {guard:.1e}"
        )
    ops = mode_ops(rho.shape[0])
    # a a^dag is diagonal with entries n+1 on the untruncated space
    inv_root = np.diag(1.0 / np.sqrt(np.arange(1, rho.shape[0] + 1)))
    left = ops.a_dag @ inv_root
    return left @ rho @ left.conj().T


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Coherent state truncated to ``dim`` levels and renormalized.

    Accepted when ``|alpha|^2 <= dim / 4``; larger amplitudes are accepted only
    if the discarded Poisson tail is below ``COHERENT_TAIL_GUARD``.
    """
    dim = _check_dim(dim)
    nbar = abs(alpha) ** 2
    amps = np.empty(dim, dtype=complex)
    amps[0] = 1.0
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    if nbar > dim / 4:
        kept = np.exp(-nbar) * np.sum(np.abs(amps) ** 2)
        if 1.0 - kept > COHERENT_TAIL_GUARD:
            raise ValueError(
                f"|alpha|^2 = {nbar:g} too large for dim {dim} (tail mass {1 - kept:.2e})"
            )
    return normalize(amps)


def tensor_embed(op, mode_index: int, dims: tuple[int, int]) -> np.ndarray:
    """Lift a single-mode operator to the two-mode space (mode 1 is the slow index)."""
    op = np.asarray(op)
    if mode_index not in (1, 2):
        raise ValueError(f"mode_index must be 1 or 2, got {mode_index!r}")
    d = dims[mode_index - 1]
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match mode dim {d}")
    if mode_index == 1:
        return np.kron(op, np.eye(dims[1]))
    return np.kron(np.eye(dims[0]), op)
