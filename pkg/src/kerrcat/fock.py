"""Truncated Fock space, ladder operators, and coherent states.

All operators are dense or CSR matrices on the number basis {|0>, ..., |n_max>}.
Energies are measured in units of the Kerr rate K and times in 1/K throughout
the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.stats import poisson

from .errors import TailMassExceeded

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class TruncatedFockSpace:
    """Oscillator Hilbert space truncated at photon number ``n_max``."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class ComplexOperator:
    """Square complex matrix with an optional Hermiticity promise."""

    entries: np.ndarray
    hermitian_hint: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be a square matrix")
        object.__setattr__(self, "entries", m)
        if self.hermitian_hint:
            dev = np.max(np.abs(m - m.conj().T))
            if dev >= HERMITIAN_TOL:
                raise ValueError(f"hermitian_hint set but ||M - M^dag||_max = {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class QuantumState:
    """State container: pure vector, density matrix, or Hermitian operator.

    The ``operator`` kind holds trace-free Hermitian inputs used for
    operator-basis process tomography; it is exempt from the unit-trace check.
    """

    kind: str  # "pure" | "density" | "operator"
    data: np.ndarray

    _NORM_TOL = 1e-10
    _TRACE_TOL = 1e-8

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", arr)
        if self.kind == "pure":
            if arr.ndim != 1:
                raise ValueError("pure state must be a vector")
            norm = np.linalg.norm(arr)
            if abs(norm - 1.0) > self._NORM_TOL:
                raise ValueError(f"pure state norm {norm} deviates from 1")
        elif self.kind == "density":
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError("density matrix must be square")
            tr = np.trace(arr)
            if abs(tr - 1.0) > self._TRACE_TOL:
                raise ValueError(f"density matrix trace {tr} deviates from 1")
        elif self.kind == "operator":
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError("operator input must be square")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def as_matrix(self) -> np.ndarray:
        """Return the state as a matrix (outer product for pure vectors)."""
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return self.data


def as_matrix(op) -> np.ndarray:
    """Accept a ComplexOperator, sparse matrix, or ndarray; return dense ndarray."""
    if isinstance(op, ComplexOperator):
        return op.entries
    if sparse.issparse(op):
        return op.toarray()
    return np.asarray(op, dtype=complex)


def destroy_sparse(dim: int) -> sparse.csr_matrix:
    """Annihilation operator a|n> = sqrt(n)|n-1> as CSR."""
    n = np.arange(1, dim)
    return sparse.csr_matrix((np.sqrt(n), (n - 1, n)), shape=(dim, dim), dtype=complex)


def number_sparse(dim: int) -> sparse.csr_matrix:
    return sparse.diags(np.arange(dim, dtype=float), format="csr", dtype=complex)


@dataclass(frozen=True)
class LadderOperators:
    a: ComplexOperator
    a_dag: ComplexOperator
    n_op: ComplexOperator


def build_ladder_operators(space: TruncatedFockSpace) -> LadderOperators:
    """Annihilation/creation/number operators on the truncated basis."""
    a = destroy_sparse(space.dim).toarray()
    return LadderOperators(
        a=ComplexOperator(a),
        a_dag=ComplexOperator(a.conj().T),
        n_op=ComplexOperator(a.conj().T @ a, hermitian_hint=True),
    )


def coherent_tail_mass(alpha: complex, n_max: int) -> float:
    """Probability mass of |alpha> beyond Fock level n_max (Poisson tail)."""
    nbar = abs(alpha) ** 2
    if nbar == 0.0:
        return 0.0
    return float(poisson.sf(n_max, nbar))


def suggest_cutoff(alpha: complex, tail_tol: float = 1e-12) -> int:
    """Smallest n_max whose coherent tail mass is below ``tail_tol``.

    Scales roughly like |alpha|^2 + 5|alpha| + 11 at the default tolerance.
    """
    nbar = abs(alpha) ** 2
    n = max(1, int(nbar))
    while coherent_tail_mass(alpha, n) >= tail_tol:
        n += 1
    return n


def check_tail(alpha: complex, space: TruncatedFockSpace, tail_tol: float = 1e-12):
    mass = coherent_tail_mass(alpha, space.n_max)
    if mass >= tail_tol:
        raise TailMassExceeded(
            f"tail mass {mass:.3e} at n_max={space.n_max} exceeds {tail_tol:.1e} "
            f"for |alpha|={abs(alpha):.3f}"
        )


def coherent_state(
    alpha: complex, space: TruncatedFockSpace, tail_tol: float = 1e-12
) -> QuantumState:
    """Coherent state |alpha> on the truncated basis, renormalized."""
    check_tail(alpha, space, tail_tol)
    n = np.arange(space.dim)
    # log-space amplitudes avoid overflow in alpha^n / sqrt(n!)
    from scipy.special import gammaln

    if alpha == 0:
        vec = np.zeros(space.dim, dtype=complex)
        vec[0] = 1.0
        return QuantumState("pure", vec)
    log_mag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) - abs(alpha) ** 2 / 2
    phase = np.exp(1j * n * np.angle(complex(alpha)))
    vec = np.exp(log_mag) * phase
    vec = vec / np.linalg.norm(vec)
    return QuantumState("pure", vec)
