"""Cat-qubit basis: cat states, computational states, and embedded Paulis.

Convention: the even/odd cat states |C+>, |C-> are the +1/-1 eigenstates of
the embedded X operator, and the computational states are
|0> = (|C+> + |C->)/sqrt(2), |1> = (|C+> - |C->)/sqrt(2).  All embedded
Paulis derive from this single convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import ComplexOperator, QuantumState, TruncatedFockSpace, check_tail, coherent_state, destroy_sparse


@dataclass(frozen=True)
class CatQubitBasis:
    """Single-oscillator cat qubit at coherent amplitude ``alpha``.

    ``ratio_r`` is the normalization ratio N+/N-; it enters every projected
    operator.  ``pauli`` maps "I","X","Y","Z" to operators embedded in the
    full oscillator space ("I" is the subspace projector).
    """

    alpha: complex
    space: TruncatedFockSpace
    cat_plus: QuantumState
    cat_minus: QuantumState
    comp_zero: QuantumState
    comp_one: QuantumState
    ratio_r: float
    projector: ComplexOperator
    pauli: dict

    @property
    def dim(self) -> int:
        return self.space.dim

    def mean_photon(self, parity: int) -> float:
        """<n> of the even (+1) or odd (-1) cat: |alpha|^2 r^(+-2)."""
        if self.ratio_r == 0.0:
            return 0.0 if parity > 0 else 1.0
        return abs(self.alpha) ** 2 * self.ratio_r ** (2 * parity)


def normalization_ratio(alpha: complex) -> float:
    """r = N+/N- = sqrt((1 - e^{-2|a|^2}) / (1 + e^{-2|a|^2}))."""
    e = math.exp(-2 * abs(alpha) ** 2)
    return math.sqrt((1 - e) / (1 + e))


def _pauli_dict(plus: np.ndarray, minus: np.ndarray) -> dict:
    proj = np.outer(plus, plus.conj()) + np.outer(minus, minus.conj())
    x = np.outer(plus, plus.conj()) - np.outer(minus, minus.conj())
    z = np.outer(plus, minus.conj()) + np.outer(minus, plus.conj())
    y = 1j * np.outer(plus, minus.conj()) - 1j * np.outer(minus, plus.conj())
    return {
        "I": ComplexOperator(proj, hermitian_hint=True),
        "X": ComplexOperator(x, hermitian_hint=True),
        "Y": ComplexOperator(y, hermitian_hint=True),
        "Z": ComplexOperator(z, hermitian_hint=True),
    }


def build_cat_basis(
    alpha: complex,
    space: TruncatedFockSpace,
    tail_tol: float = 1e-12,
    allow_degenerate: bool = False,
) -> CatQubitBasis:
    """Construct the cat-qubit basis at amplitude ``alpha``.

    At alpha=0 (requires ``allow_degenerate``) the cats continuously reduce to
    the Fock states |0>, |1> and ratio_r is set to its limit 0; operations
    that need 1/r must reject such a basis.
    """
    if alpha == 0:
        if not allow_degenerate:
            raise ValueError("alpha=0 requires allow_degenerate=True")
        plus = np.zeros(space.dim, dtype=complex)
        minus = np.zeros(space.dim, dtype=complex)
        plus[0] = 1.0
        minus[1] = 1.0
        r = 0.0
    else:
        check_tail(alpha, space, tail_tol)
        up = coherent_state(alpha, space, tail_tol).data
        dn = coherent_state(-alpha, space, tail_tol).data
        plus = up + dn
        minus = up - dn
        plus = plus / np.linalg.norm(plus)
        minus = minus / np.linalg.norm(minus)
        r = normalization_ratio(alpha)

    zero = (plus + minus) / math.sqrt(2)
    one = (plus - minus) / math.sqrt(2)
    paulis = _pauli_dict(plus, minus)
    return CatQubitBasis(
        alpha=complex(alpha),
        space=space,
        cat_plus=QuantumState("pure", plus),
        cat_minus=QuantumState("pure", minus),
        comp_zero=QuantumState("pure", zero),
        comp_one=QuantumState("pure", one),
        ratio_r=r,
        projector=paulis["I"],
        pauli=paulis,
    )


def two_level_cat_basis(alpha: complex) -> CatQubitBasis:
    """Two-level stand-in: the cat qubit reduced to its own 2-dim subspace.

    Basis vectors are |C+> = (1,0), |C-> = (0,1); ratio_r keeps the value of
    the full oscillator so projected operators stay faithful.  Used for ideal
    gate references and for qubit-approximated spectator modes.
    """
    plus = np.array([1.0, 0.0], dtype=complex)
    minus = np.array([0.0, 1.0], dtype=complex)
    zero = (plus + minus) / math.sqrt(2)
    one = (plus - minus) / math.sqrt(2)
    paulis = _pauli_dict(plus, minus)
    return CatQubitBasis(
        alpha=complex(alpha),
        space=TruncatedFockSpace(1),
        cat_plus=QuantumState("pure", plus),
        cat_minus=QuantumState("pure", minus),
        comp_zero=QuantumState("pure", zero),
        comp_one=QuantumState("pure", one),
        ratio_r=normalization_ratio(alpha) if alpha != 0 else 0.0,
        projector=paulis["I"],
        pauli=paulis,
    )


def projected_ladder(basis: CatQubitBasis) -> dict:
    """Annihilation/creation operators projected onto the cat manifold.

    Returns 2x2 matrices in the (|C+>, |C->) ordering:
    a_C = alpha[(r + 1/r)/2 Z + i (r - 1/r)/2 Y], and a_dag_C its adjoint.
    """
    r = basis.ratio_r
    if r == 0.0:
        raise ValueError("projected ladder needs 1/r; undefined at alpha=0")
    alpha = basis.alpha
    z2 = np.array([[0, 1], [1, 0]], dtype=complex)
    y2 = np.array([[0, 1j], [-1j, 0]], dtype=complex)
    a_c = alpha * ((r + 1 / r) / 2) * z2 + 1j * alpha * ((r - 1 / r) / 2) * y2
    return {"a_C": a_c, "a_dag_C": a_c.conj().T}


def projected_ladder_numeric(basis: CatQubitBasis) -> np.ndarray:
    """P_C a P_C written in cat coordinates; oracle for projected_ladder."""
    a = destroy_sparse(basis.dim)
    plus = basis.cat_plus.data
    minus = basis.cat_minus.data
    vecs = [plus, minus]
    out = np.empty((2, 2), dtype=complex)
    for i, vi in enumerate(vecs):
        for j, vj in enumerate(vecs):
            out[i, j] = vi.conj() @ (a @ vj)
    return out
