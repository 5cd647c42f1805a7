"""Channel extraction and analysis on the cat-qubit subspace.

Transfer matrices use the normalization R_ij = Tr[P_i E(P_j)] / 2^k with
embedded Pauli strings ordered I, X, Y, Z lexicographically per qubit
(leftmost qubit is the slowest index).  Chi matrices are expressed in the
same Pauli-string basis, E(rho) = sum_mn chi_mn P_m rho P_n.

Leakage is reported against the cat subspace: 1 - Tr[P_C E(I_C)] / 2^k.
The full-space trace is exactly preserved by the dynamics, so only the
subspace-restricted trace carries information about out-of-manifold
population.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .catbasis import CatQubitBasis
from .errors import LinearityViolation, SingularIdeal, UnphysicalChannel, ValidityDomain
from .fock import QuantumState

PAULI_LETTERS = "IXYZ"

_P2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_labels(k: int) -> list:
    return ["".join(p) for p in itertools.product(PAULI_LETTERS, repeat=k)]


def pauli_strings_two_level(k: int) -> list:
    """Abstract 2^k-dimensional Pauli-string matrices in label order."""
    out = []
    for label in pauli_labels(k):
        m = np.array([[1.0]], dtype=complex)
        for ch in label:
            m = np.kron(m, _P2[ch])
        out.append(m)
    return out


def embedded_pauli_strings(bases: Sequence[CatQubitBasis]) -> list:
    """Pauli strings embedded in the full oscillator product space."""
    out = []
    for label in pauli_labels(len(bases)):
        m = np.array([[1.0]], dtype=complex)
        for ch, basis in zip(label, bases):
            m = np.kron(m, basis.pauli[ch].entries)
        out.append(m)
    return out


@dataclass(frozen=True)
class PauliTransferMatrix:
    """Real 4^k x 4^k transfer matrix on k cat qubits."""

    k: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4**self.k, 4**self.k):
            raise ValueError("transfer matrix has wrong shape")
        object.__setattr__(self, "matrix", m)

    @property
    def labels(self) -> list:
        return pauli_labels(self.k)


@dataclass(frozen=True)
class ChiMatrix:
    """Hermitian process matrix in the Pauli-string basis."""

    k: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4**self.k, 4**self.k):
            raise ValueError("chi matrix has wrong shape")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > 1e-10:
            raise ValueError(f"chi matrix not Hermitian (deviation {dev:.2e})")
        object.__setattr__(self, "matrix", m)

    @property
    def labels(self) -> list:
        return pauli_labels(self.k)

    def diagonal(self) -> np.ndarray:
        return np.real(self.matrix.diagonal())


@dataclass(frozen=True)
class ChannelReport:
    """Diagonal accounting of an error channel.

    fidelity + dephasing_prob + nondephasing_prob + leakage ~ 1; bias_eta is
    dephasing/nondephasing, infinite for an exactly dephasing channel.
    """

    fidelity: float
    leakage: float
    bias_eta: float
    dephasing_prob: float
    nondephasing_prob: float
    dominant_terms: list

    def to_json(self) -> str:
        payload = {
            "fidelity": self.fidelity,
            "leakage": self.leakage,
            "bias_eta": self.bias_eta,
            "dephasing_prob": self.dephasing_prob,
            "nondephasing_prob": self.nondephasing_prob,
            "dominant_terms": [
                {"pauli_in": a, "pauli_out": b, "coefficient_re": c.real, "coefficient_im": c.imag}
                for (a, b), c in self.dominant_terms
            ],
        }
        return json.dumps(payload, indent=2)


def extract_ptm(
    channel_executor: Callable[[QuantumState], QuantumState],
    bases: Sequence[CatQubitBasis],
    check_linearity: bool = True,
    linearity_tol: float = 1e-6,
) -> PauliTransferMatrix:
    """Process tomography: R_ij = Tr[P_i E(P_j)] / 2^k over embedded Paulis.

    The executor maps Hermitian operator inputs (QuantumState kind
    "operator") to evolved operators; a linearity spot check runs first.
    """
    k = len(bases)
    paulis = embedded_pauli_strings(bases)
    if check_linearity:
        _linearity_spot_check(channel_executor, paulis, linearity_tol)
    outputs = [channel_executor(QuantumState("operator", p)).data for p in paulis]
    d = 2**k
    r = np.empty((4**k, 4**k))
    for i, pi in enumerate(paulis):
        for j in range(4**k):
            r[i, j] = np.vdot(pi, outputs[j]).real / d  # Tr[P_i out_j] / d
    return PauliTransferMatrix(k=k, matrix=r)


def _linearity_spot_check(executor, paulis, tol):
    a, b = paulis[0], paulis[-1]
    lhs = executor(QuantumState("operator", 0.6 * a + 0.4 * b)).data
    rhs = 0.6 * executor(QuantumState("operator", a)).data
    rhs = rhs + 0.4 * executor(QuantumState("operator", b)).data
    dev = np.max(np.abs(lhs - rhs))
    if dev > tol:
        raise LinearityViolation(f"executor deviates from linearity by {dev:.3e}")


def extract_ptm_from_outputs(outputs: Sequence[np.ndarray], bases) -> PauliTransferMatrix:
    """PTM from precomputed evolved Paulis (one output per label order entry)."""
    k = len(bases)
    paulis = embedded_pauli_strings(bases)
    d = 2**k
    r = np.empty((4**k, 4**k))
    for i, pi in enumerate(paulis):
        for j, out in enumerate(outputs):
            r[i, j] = np.vdot(pi, out).real / d
    return PauliTransferMatrix(k=k, matrix=r)


def ptm_of_unitary_on_subspace(evolved_basis: np.ndarray, bases) -> PauliTransferMatrix:
    """PTM of a unitary gate from the evolved embedded computational basis.

    ``evolved_basis`` has shape (dim, 2^k): column x is U |x>_embedded.  The
    channel on subspace-supported operators is exactly
    E(P) = (UB) P_abs (UB)^dag with B the embedded basis frame.
    """
    k = len(bases)
    paulis_emb = embedded_pauli_strings(bases)
    paulis_abs = pauli_strings_two_level(k)
    # computational basis order: |0...0>, ..., |1...1> built from comp states
    d = 2**k
    ub = evolved_basis
    r = np.empty((4**k, 4**k))
    for j, pj in enumerate(paulis_abs):
        out = ub @ pj @ ub.conj().T
        for i, pi in enumerate(paulis_emb):
            r[i, j] = np.vdot(pi, out).real / d
    return PauliTransferMatrix(k=k, matrix=r)


def embedded_computational_frame(bases: Sequence[CatQubitBasis]) -> np.ndarray:
    """Columns are the embedded computational basis states |x1...xk>."""
    cols = []
    for bits in itertools.product((0, 1), repeat=len(bases)):
        v = np.array([1.0], dtype=complex)
        for bit, basis in zip(bits, bases):
            v = np.kron(v, (basis.comp_zero if bit == 0 else basis.comp_one).data)
        cols.append(v)
    return np.stack(cols, axis=1)


def ideal_ptm(unitary_2level: np.ndarray, k: int) -> PauliTransferMatrix:
    """Transfer matrix of an abstract 2^k-dimensional unitary."""
    paulis = pauli_strings_two_level(k)
    d = 2**k
    u = np.asarray(unitary_2level, dtype=complex)
    r = np.empty((4**k, 4**k))
    for j, pj in enumerate(paulis):
        out = u @ pj @ u.conj().T
        for i, pi in enumerate(paulis):
            r[i, j] = np.trace(pi @ out).real / d
    return PauliTransferMatrix(k=k, matrix=r)


CX_2LEVEL = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def error_ptm(r_noisy: PauliTransferMatrix, r_ideal: PauliTransferMatrix) -> PauliTransferMatrix:
    """R_noise = R_noisy . R_ideal^{-1}."""
    if r_noisy.k != r_ideal.k:
        raise ValueError("transfer matrices act on different qubit counts")
    try:
        inv = np.linalg.inv(r_ideal.matrix)
    except np.linalg.LinAlgError as exc:
        raise SingularIdeal("ideal transfer matrix is singular") from exc
    cond = np.linalg.cond(r_ideal.matrix)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularIdeal(f"ideal transfer matrix is numerically singular (cond={cond:.2e})")
    return PauliTransferMatrix(k=r_noisy.k, matrix=r_noisy.matrix @ inv)


# ---------------------------------------------------------------------------
# representation conversions


def _vec(m):
    return m.reshape(-1, order="F")  # column stacking


def ptm_to_superoperator(r: PauliTransferMatrix) -> np.ndarray:
    d = 2**r.k
    paulis = pauli_strings_two_level(r.k)
    s = np.zeros((d * d, d * d), dtype=complex)
    for i, pi in enumerate(paulis):
        vi = _vec(pi)
        for j, pj in enumerate(paulis):
            s += r.matrix[i, j] * np.outer(vi, _vec(pj).conj())
    return s / d


def ptm_to_chi(r: PauliTransferMatrix) -> ChiMatrix:
    """Chi matrix with E(rho) = sum_mn chi_mn P_m rho P_n, from the PTM."""
    d = 2**r.k
    paulis = pauli_strings_two_level(r.k)
    s = ptm_to_superoperator(r)
    n = 4**r.k
    chi = np.empty((n, n), dtype=complex)
    # basis expansion: S = sum_mn chi_mn (conj(P_n) kron P_m)
    for m, pm in enumerate(paulis):
        for nn, pn in enumerate(paulis):
            basis_el = np.kron(pn.conj(), pm)
            chi[m, nn] = np.vdot(basis_el, s) / (d * d)
    chi = (chi + chi.conj().T) / 2
    return ChiMatrix(k=r.k, matrix=chi)


def chi_to_ptm(chi: ChiMatrix) -> PauliTransferMatrix:
    d = 2**chi.k
    paulis = pauli_strings_two_level(chi.k)
    n = 4**chi.k
    r = np.empty((n, n))
    for j, pj in enumerate(paulis):
        out = np.zeros((d, d), dtype=complex)
        for m in range(n):
            for nn in range(n):
                if chi.matrix[m, nn] != 0:
                    out += chi.matrix[m, nn] * (paulis[m] @ pj @ paulis[nn])
        for i, pi in enumerate(paulis):
            r[i, j] = np.trace(pi @ out).real / d
    return PauliTransferMatrix(k=chi.k, matrix=r)


def chi_to_operator_sum(chi: ChiMatrix, clip_tol: float = 1e-10) -> list:
    """Weighted Kraus operators from the chi eigendecomposition.

    Eigenvalues in [-clip_tol, 0) are clipped to zero; anything more negative
    raises UnphysicalChannel with the offending magnitude.
    """
    vals, vecs = np.linalg.eigh(chi.matrix)
    if vals.min() < -clip_tol:
        raise UnphysicalChannel(
            f"chi eigenvalue {vals.min():.3e} below -{clip_tol:.1e}"
        )
    paulis = pauli_strings_two_level(chi.k)
    kraus = []
    for w, v in zip(vals, vecs.T):
        if w <= 0.0:
            continue
        op = sum(c * p for c, p in zip(v, paulis))
        kraus.append(math.sqrt(w) * op)
    return kraus


def pauli_twirl(chi: ChiMatrix) -> ChiMatrix:
    """Drop off-diagonal chi entries (randomized-Pauli-frame approximation)."""
    return ChiMatrix(k=chi.k, matrix=np.diag(chi.matrix.diagonal()))


# ---------------------------------------------------------------------------
# metrics


def leakage_from_outputs(identity_output: np.ndarray, bases) -> float:
    """1 - Tr[P_C E(I_C)] / 2^k from the evolved subspace identity."""
    proj = embedded_pauli_strings(bases)[0]  # the all-I string is P_C
    k = len(bases)
    return float(1.0 - np.vdot(proj, identity_output).real / 2**k)


def leakage(channel_executor, bases) -> float:
    proj = embedded_pauli_strings(bases)[0]
    out = channel_executor(QuantumState("operator", proj)).data
    k = len(bases)
    return float(1.0 - np.vdot(proj, out).real / 2**k)


_BIAS_FLOOR = 1e-15


def dephasing_indices(k: int) -> np.ndarray:
    """Indices of Pauli strings over {I, Z} only, excluding the identity."""
    idx = []
    for i, label in enumerate(pauli_labels(k)):
        if i == 0:
            continue
        if all(ch in "IZ" for ch in label):
            idx.append(i)
    return np.array(idx, dtype=int)


def bias(chi: ChiMatrix, dominant_count: int = 8) -> ChannelReport:
    """Diagonal accounting of an error channel's chi matrix.

    dephasing = diagonal mass on {I, Z}-only strings (identity excluded),
    nondephasing = remaining diagonal mass, bias = their ratio (infinite when
    nondephasing is below an absolute floor).
    """
    diag = chi.diagonal()
    k = chi.k
    deph_idx = dephasing_indices(k)
    all_idx = np.arange(4**k)
    nondeph_idx = np.array(
        [i for i in all_idx if i != 0 and i not in set(deph_idx.tolist())], dtype=int
    )
    fidelity = float(diag[0])
    deph = float(diag[deph_idx].sum())
    nondeph = float(diag[nondeph_idx].sum())
    eta = math.inf if nondeph < _BIAS_FLOOR else deph / nondeph
    leak = float(1.0 - diag.sum())

    labels = pauli_labels(k)
    mags = np.abs(chi.matrix)
    order = np.argsort(mags, axis=None)[::-1]
    dominant = []
    for flat in order[: dominant_count * 2]:
        i, j = divmod(int(flat), 4**k)
        if j < i:  # report each Hermitian pair once
            continue
        dominant.append(((labels[i], labels[j]), complex(chi.matrix[i, j])))
        if len(dominant) >= dominant_count:
            break
    return ChannelReport(
        fidelity=fidelity,
        leakage=leak,
        bias_eta=eta,
        dephasing_prob=deph,
        nondephasing_prob=nondeph,
        dominant_terms=dominant,
    )


# ---------------------------------------------------------------------------
# analytic idle channels (small-noise closed forms)


def _single_qubit_chi_from_ops(ops: Sequence[np.ndarray]) -> ChiMatrix:
    """Chi matrix of E(rho) = sum_i A_i rho A_i^dag given 2x2 operators A_i
    expanded in the Pauli basis."""
    paulis = pauli_strings_two_level(1)
    chi = np.zeros((4, 4), dtype=complex)
    for a in ops:
        coeff = np.array([np.trace(p @ a) / 2 for p in paulis])
        chi += np.outer(coeff, coeff.conj())
    return ChiMatrix(k=1, matrix=(chi + chi.conj().T) / 2)


def analytic_idle_channel(kind: str, params: dict) -> ChiMatrix:
    """Closed-form idle-qubit error channel for narrow-band noise.

    kinds: "single-photon-loss" (zero-temperature bath), "thermal-narrow"
    (loss plus gain), "dephasing-narrow" (frequency noise).  Valid for small
    accumulated noise, p = kappa t alpha^2 < 1 (dephasing: kappa_phi t
    alpha^4 < 1).
    """
    alpha = params["alpha"]
    t = params["t"]
    e = math.exp(-2 * abs(alpha) ** 2)
    r = math.sqrt((1 - e) / (1 + e))
    i2, x2, y2, z2 = pauli_strings_two_level(1)

    if kind == "single-photon-loss":
        p = params["kappa"] * t * abs(alpha) ** 2
        if not 0 <= p < 1:
            raise ValidityDomain(f"p = kappa t alpha^2 = {p:.3f} outside [0, 1)")
        lam_i = (math.sqrt(1 - p / r**2) + math.sqrt(1 - p * r**2)) / 2
        lam_x = (math.sqrt(1 - p / r**2) - math.sqrt(1 - p * r**2)) / 2
        lam_z = math.sqrt(p) * (r + 1 / r) / 2
        lam_y = math.sqrt(p) * (r - 1 / r) / 2
        ops = [lam_i * i2 + lam_x * x2, lam_z * z2 + 1j * lam_y * y2]
        return _single_qubit_chi_from_ops(ops)

    if kind == "thermal-narrow":
        kappa, n_th = params["kappa"], params["n_th"]
        p1 = kappa * t * abs(alpha) ** 2 * (1 + n_th)
        p2 = kappa * t * abs(alpha) ** 2 * n_th
        if not 0 <= p1 + p2 < 1:
            raise ValidityDomain(f"p1 + p2 = {p1 + p2:.3f} outside [0, 1)")
        lam_i = (math.sqrt(1 - p1 / r**2 - p2 * r**2) + math.sqrt(1 - p1 * r**2 - p2 / r**2)) / 2
        lam_x = (math.sqrt(1 - p1 / r**2 - p2 * r**2) - math.sqrt(1 - p1 * r**2 - p2 / r**2)) / 2
        lam_z = math.sqrt(p1) * (r + 1 / r) / 2
        lam_y = math.sqrt(p1) * (r - 1 / r) / 2
        lam_zp = math.sqrt(p2) * (r + 1 / r) / 2
        lam_yp = math.sqrt(p2) * (r - 1 / r) / 2
        ops = [
            lam_i * i2 + lam_x * x2,
            lam_z * z2 + 1j * lam_y * y2,
            lam_zp * z2 - 1j * lam_yp * y2,
        ]
        return _single_qubit_chi_from_ops(ops)

    if kind == "dephasing-narrow":
        p = params["kappa_phi"] * t * abs(alpha) ** 4
        if not 0 <= p < 1:
            raise ValidityDomain(f"p = kappa_phi t alpha^4 = {p:.3f} outside [0, 1)")
        lam_i = (math.sqrt(1 - p / r**4) + math.sqrt(1 - p * r**4)) / 2
        lam_x = (math.sqrt(1 - p / r**4) - math.sqrt(1 - p * r**4)) / 2
        lam_ip = math.sqrt(p) * (r**2 + 1 / r**2) / 2
        lam_xp = math.sqrt(p) * (r**2 - 1 / r**2) / 2
        ops = [lam_i * i2 + lam_x * x2, lam_ip * i2 + lam_xp * x2]
        return _single_qubit_chi_from_ops(ops)

    raise ValueError(f"unknown idle channel kind {kind!r}")


# ---------------------------------------------------------------------------
# isometry-aware analysis (domain smaller than codomain)


@dataclass(frozen=True)
class IsometryReport:
    fidelity: float
    leakage: float
    bias_eta: float
    dephasing_prob: float
    nondephasing_prob: float
    in_subspace: float


def isometry_channel_analysis(
    outputs: Sequence[np.ndarray],
    domain_bases: Sequence[CatQubitBasis],
    codomain_bases: Sequence[CatQubitBasis],
    isometry_map: Sequence[tuple],
) -> IsometryReport:
    """Error accounting for a gate whose range is smaller than its codomain.

    ``outputs[j]`` is the evolved embedded domain Pauli P_j (full codomain
    space).  ``isometry_map`` lists (input_bits, output_bits) pairs defining
    the ideal truth table.  Leakage is measured against the full codomain
    computational projector; dephasing is the probability of an {I,Z}-only
    error referred to the input; the bias divides that by the remaining
    in-subspace, non-identity mass.
    """
    kd = len(domain_bases)
    dd = 2**kd

    frame_in = embedded_computational_frame(domain_bases)
    frame_out = embedded_computational_frame(codomain_bases)
    # isometry U: domain space -> codomain space, defined by the truth table
    # on the embedded computational frames
    u = np.zeros((frame_out.shape[0], frame_in.shape[0]), dtype=complex)
    for in_bits, out_bits in isometry_map:
        i_in = int("".join(map(str, in_bits)), 2)
        i_out = int("".join(map(str, out_bits)), 2)
        u += np.outer(frame_out[:, i_out], frame_in[:, i_in].conj())

    # pull the channel back to the domain: D(P_j) = U^dag E(P_j) U
    paulis_dom = embedded_pauli_strings(domain_bases)
    r = np.empty((4**kd, 4**kd))
    for j, out in enumerate(outputs):
        pulled = u.conj().T @ out @ u
        for i, pi in enumerate(paulis_dom):
            r[i, j] = np.vdot(pi, pulled).real / dd
    chi = ptm_to_chi(PauliTransferMatrix(k=kd, matrix=r))
    diag = chi.diagonal()

    proj_cod = embedded_pauli_strings(codomain_bases)[0]
    identity_out = outputs[0]  # all-I domain string evolved
    in_subspace = float(np.vdot(proj_cod, identity_out).real / dd)
    leak = 1.0 - in_subspace

    deph_idx = dephasing_indices(kd)
    fidelity = float(diag[0])
    deph = float(diag[deph_idx].sum())
    nondeph = in_subspace - fidelity - deph
    # nondephasing comes from a subtraction here, so its noise floor is set
    # by rounding of order-one quantities rather than the tomography floor
    eta = math.inf if nondeph < 1e-12 else deph / nondeph
    return IsometryReport(
        fidelity=fidelity,
        leakage=leak,
        bias_eta=eta,
        dephasing_prob=deph,
        nondephasing_prob=nondeph,
        in_subspace=in_subspace,
    )


def process_fidelity(r_noisy: PauliTransferMatrix, r_ideal: PauliTransferMatrix) -> float:
    """All-identity chi entry of the error channel R_noisy R_ideal^{-1}."""
    chi = ptm_to_chi(error_ptm(r_noisy, r_ideal))
    return float(chi.diagonal()[0])


def average_gate_fidelity_from_process(f_pro: float, d: int) -> float:
    """F_avg = (d F_pro + 1) / (d + 1)."""
    return (d * f_pro + 1.0) / (d + 1.0)


def ptm_to_csv(r, path: str):
    labels = pauli_labels(r.k)
    mat = r.matrix if isinstance(r, PauliTransferMatrix) else np.real(r.matrix)
    with open(path, "w") as fh:
        fh.write("," + ",".join(labels) + "\n")
        for lab, row in zip(labels, np.atleast_2d(mat)):
            fh.write(lab + "," + ",".join(f"{v:.12g}" for v in row) + "\n")


def chi_to_csv(chi: ChiMatrix, path: str):
    labels = pauli_labels(chi.k)
    with open(path, "w") as fh:
        fh.write("," + ",".join(labels) + "\n")
        for lab, row in zip(labels, chi.matrix):
            fh.write(lab + "," + ",".join(f"{v.real:.12g}{v.imag:+.12g}j" for v in row) + "\n")
