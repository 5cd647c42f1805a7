import numpy as np
import pytest

from kerrcat.errors import TailMassExceeded
from kerrcat.fock import (
    ComplexOperator,
    QuantumState,
    TruncatedFockSpace,
    build_ladder_operators,
    coherent_state,
    coherent_tail_mass,
    suggest_cutoff,
)


def test_ladder_matrix_entries():
    space = TruncatedFockSpace(2)
    ops = build_ladder_operators(space)
    a = ops.a.entries
    expected = np.zeros((3, 3), dtype=complex)
    expected[0, 1] = 1.0
    expected[1, 2] = np.sqrt(2.0)
    assert np.array_equal(a, expected)
    assert np.array_equal(ops.a_dag.entries, expected.conj().T)


def test_commutator_truncation_artifact():
    space = TruncatedFockSpace(12)
    ops = build_ladder_operators(space)
    comm = ops.a.entries @ ops.a_dag.entries - ops.a_dag.entries @ ops.a.entries
    eye = np.eye(space.dim)
    # canonical on all but the last diagonal entry
    assert np.allclose(comm[:-1, :-1], eye[:-1, :-1], atol=1e-14)
    assert comm[-1, -1] == pytest.approx(-space.n_max)


def test_number_operator_spectrum():
    space = TruncatedFockSpace(7)
    ops = build_ladder_operators(space)
    evals = np.sort(np.linalg.eigvalsh(ops.n_op.entries))
    assert np.allclose(evals, np.arange(8), atol=1e-12)


def test_coherent_vacuum():
    space = TruncatedFockSpace(4)
    psi = coherent_state(0.0, space)
    assert psi.data[0] == 1.0
    assert np.all(psi.data[1:] == 0)


def test_coherent_eigenvalue_property():
    space = TruncatedFockSpace(25)
    psi = coherent_state(2.0, space)
    a = build_ladder_operators(space).a.entries
    mean = np.vdot(psi.data, a @ psi.data)
    assert abs(mean - 2.0) < 1e-10


def test_coherent_overlap_gaussian():
    # |<-a|a>|^2 = exp(-4 |a|^2), evaluated directly from the closed form
    space = TruncatedFockSpace(32)
    up = coherent_state(2.0, space).data
    dn = coherent_state(-2.0, space).data
    overlap = abs(np.vdot(dn, up)) ** 2
    assert overlap == pytest.approx(np.exp(-16.0), rel=1e-9)


def test_tail_mass_guard():
    space = TruncatedFockSpace(6)
    with pytest.raises(TailMassExceeded):
        coherent_state(3.0, space)


def test_suggest_cutoff_monotone_and_sufficient():
    for alpha in (0.5, 1.0, 2.0, 2.5):
        n = suggest_cutoff(alpha)
        assert coherent_tail_mass(alpha, n) < 1e-12
        assert coherent_tail_mass(alpha, n - 1) >= 1e-12


def test_state_validation():
    with pytest.raises(ValueError):
        QuantumState("pure", np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        QuantumState("density", np.eye(2))  # trace 2
    # operator kind permits zero trace
    QuantumState("operator", np.diag([1.0, -1.0]))


def test_hermitian_hint_enforced():
    with pytest.raises(ValueError):
        ComplexOperator(np.array([[0, 1], [0, 0]], dtype=complex), hermitian_hint=True)
