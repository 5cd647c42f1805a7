"""Time integration of Schrodinger and Lindblad dynamics.

The density-matrix right-hand side is evaluated with sparse operator products
on dense matrices (no superoperator is materialized) and exploits the
Hermiticity of physical inputs:

    drho/dt = G rho + (G rho)^dag + sum_i k_i L_i rho L_i^dag,
    G = -i H(t) - (1/2) sum_i k_i L_i^dag L_i.

Integration runs in the interaction picture of the static diagonal of H
(the Kerr ladder), which removes the fastest phase rotations; operators pick
up per-entry phases exp(i (d_m - d_n) t).  The picture change is exact and is
undone before results are returned.

Two steppers are provided: an embedded Dormand-Prince 5(4) pair (default) and
the variable-order Adams integrator from ODEPACK (``method="adams"``), which
takes far fewer right-hand-side evaluations on the oscillatory problems here
and is used by the heavy tomography scenarios.  Independent inputs that share
one generator are propagated as a batch with a common adaptive step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.integrate import ode as _scipy_ode

from .errors import NormDrift, StepFailure, TraceDrift
from . import kernels
from .fock import ComplexOperator, QuantumState, as_matrix
from .hamiltonians import HamiltonianSchedule, constant_schedule


@dataclass(frozen=True)
class CollapseChannel:
    """Jump operator with a nonnegative rate (units of K)."""

    operator: object  # ndarray | ComplexOperator | sparse
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("collapse rate must be nonnegative")

    def matrix_sparse(self) -> sparse.csr_matrix:
        op = self.operator
        if isinstance(op, ComplexOperator):
            op = op.entries
        return sparse.csr_matrix(op, dtype=complex)


@dataclass
class LindbladProblem:
    hamiltonian: HamiltonianSchedule
    channels: list
    t_span: tuple
    initial: QuantumState

    def __post_init__(self):
        dim = self.hamiltonian.dim
        if self.initial.dim != dim:
            raise ValueError("initial state dimension does not match Hamiltonian")
        for ch in self.channels:
            if ch.matrix_sparse().shape[0] != dim:
                raise ValueError("collapse operator dimension mismatch")


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = math.inf
    trace_drift_limit: float = 1e-8
    method: str = "dp45"  # "dp45" | "adams"
    rotating_frame: bool = True
    max_rejections: int = 40

    def scaled(self, factor: float) -> "IntegratorConfig":
        """Uniformly scale both tolerances (convergence studies)."""
        return replace(self, rel_tol=self.rel_tol * factor, abs_tol=self.abs_tol * factor)


DEFAULT_CONFIG = IntegratorConfig()


# ---------------------------------------------------------------------------
# phased-operator machinery


class _PhasedCSR:
    """CSR matrix whose values rotate as data * exp(i (d_row - d_col) t).

    The matrix is mutated in place at every evaluation, so it is always a
    private copy of the caller's operator.
    """

    def __init__(self, mat: sparse.csr_matrix, diag: np.ndarray):
        m = mat.tocsr().copy()
        m.sort_indices()
        self.base = m.data.copy()
        self.mat = m
        row = np.repeat(np.arange(m.shape[0]), np.diff(m.indptr))
        self.freq = diag[row] - diag[m.indices]
        self.static = bool(np.all(self.freq == 0.0))

    def at(self, t: float) -> sparse.csr_matrix:
        if not self.static:
            np.multiply(self.base, np.exp((1j * t) * self.freq), out=self.mat.data)
        return self.mat


def _union_pattern(mats: Sequence[sparse.csr_matrix], dim: int) -> sparse.csr_matrix:
    acc = sparse.csr_matrix((dim, dim), dtype=complex)
    for m in mats:
        marker = m.copy()
        marker.data = np.ones_like(marker.data)
        acc = acc + marker
    acc = acc.tocsr()
    acc.sort_indices()
    acc.data = np.zeros_like(acc.data)
    return acc


def _slot_map(union: sparse.csr_matrix, term: sparse.csr_matrix) -> np.ndarray:
    term = term.tocsr()
    term.sort_indices()
    slots = np.empty(term.nnz, dtype=np.int64)
    for r in range(term.shape[0]):
        lo, hi = term.indptr[r], term.indptr[r + 1]
        if lo == hi:
            continue
        ulo, uhi = union.indptr[r], union.indptr[r + 1]
        slots[lo:hi] = ulo + np.searchsorted(union.indices[ulo:uhi], term.indices[lo:hi])
    return slots


class _DriftOperator:
    """Assembles G(t) = -i Htilde(t) - (1/2) sum_i k_i Mtilde_i on a fixed
    union sparsity pattern, in the rotating frame of ``diag``."""

    def __init__(self, schedule: HamiltonianSchedule, channels, diag: np.ndarray, lindblad: bool):
        dim = schedule.dim
        self.diag = diag
        terms = []
        for coeff, op in schedule.terms:
            op = op.tocsr()
            terms.append((coeff, op))
        mats = [op for _, op in terms]

        decay = None
        if lindblad:
            for ch in channels:
                l = ch.matrix_sparse()
                m = (l.conj().T @ l).tocsr()
                piece = ch.rate * m
                decay = piece if decay is None else decay + piece
        if decay is not None:
            decay = decay.tocsr()
            decay.sort_indices()
            mats = mats + [decay]

        self.union = _union_pattern(mats, dim)
        self.entries = []
        row_all = None
        for coeff, op in terms:
            op = op.tocsr()
            op.sort_indices()
            slots = _slot_map(self.union, op)
            row = np.repeat(np.arange(dim), np.diff(op.indptr))
            freq = diag[row] - diag[op.indices]
            self.entries.append((coeff, op.data.copy(), slots, freq))
        if decay is not None:
            slots = _slot_map(self.union, decay)
            row = np.repeat(np.arange(dim), np.diff(decay.indptr))
            freq = diag[row] - diag[decay.indices]
            self.decay = (decay.data.copy(), slots, freq)
        else:
            self.decay = None

    def at(self, t: float) -> sparse.csr_matrix:
        data = self.union.data
        data[:] = 0.0
        for coeff, base, slots, freq in self.entries:
            c = 1.0 + 0.0j if coeff is None else complex(coeff(t))
            np.add.at(data, slots, (-1j * c) * base * np.exp((1j * t) * freq))
        if self.decay is not None:
            base, slots, freq = self.decay
            np.add.at(data, slots, (-0.5) * base * np.exp((1j * t) * freq))
        return self.union


class _RHS:
    """Right-hand side for a batch of Hermitian matrices or state vectors."""

    def __init__(self, schedule, channels, config, lindblad: bool):
        dim = schedule.dim
        self.dim = dim
        self.lindblad = lindblad
        const = None
        for coeff, op in schedule.terms:
            if coeff is None:
                const = op if const is None else const + op
        if config.rotating_frame and const is not None:
            diag = np.real(const.diagonal()).astype(float)
        else:
            diag = np.zeros(dim)
        self.diag = diag

        # remove the rotating diagonal from the schedule's constant part
        terms = []
        removed = False
        for coeff, op in schedule.terms:
            if coeff is None and not removed and np.any(diag):
                op = (op - sparse.diags(diag, format="csr", dtype=complex)).tocsr()
                removed = True
            terms.append((coeff, op.tocsr()))
        shifted = HamiltonianSchedule(dims=schedule.dims, terms=terms, duration=schedule.duration)

        self.drift = _DriftOperator(shifted, channels, diag, lindblad)
        self.jumps = [
            (ch.rate, _PhasedCSR(ch.matrix_sparse(), diag)) for ch in channels if ch.rate > 0
        ]
        self.evals = 0

        self._use_kernel = kernels.HAVE_NUMBA and lindblad
        if self._use_kernel:
            mats = [j.mat for _, j in self.jumps]
            self._jrates = np.array([r for r, _ in self.jumps], dtype=float)
            self._joffsets = np.zeros(len(mats) + 1, dtype=np.int64)
            for k, m in enumerate(mats):
                self._joffsets[k + 1] = self._joffsets[k] + m.nnz
            total = int(self._joffsets[-1])
            self._jdata = np.zeros(total, dtype=complex)
            self._jindices = np.concatenate([m.indices for m in mats]) if mats else np.zeros(0, dtype=np.int32)
            self._jindptr = (
                np.concatenate([m.indptr for m in mats]) if mats else np.zeros(0, dtype=np.int32)
            )

    def frame_in(self, y: np.ndarray, t: float) -> np.ndarray:
        if not np.any(self.diag):
            return y
        ph = np.exp(1j * self.diag * t)
        if self.lindblad:
            return ph[None, :, None] * y * ph.conj()[None, None, :]
        return ph[:, None] * y

    def frame_out(self, y: np.ndarray, t: float) -> np.ndarray:
        if not np.any(self.diag):
            return y
        ph = np.exp(-1j * self.diag * t)
        if self.lindblad:
            return ph[None, :, None] * y * ph.conj()[None, None, :]
        return ph[:, None] * y

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        self.evals += 1
        g = self.drift.at(t)
        if not self.lindblad:
            return g @ y  # y is (dim, batch); g already includes -i
        if self._use_kernel:
            for k, (_, jump) in enumerate(self.jumps):
                jump.at(t)
                self._jdata[self._joffsets[k] : self._joffsets[k + 1]] = jump.mat.data
            out = np.empty_like(y)
            kernels.lindblad_rhs(
                g.data,
                g.indices,
                g.indptr,
                self._jdata,
                self._jindices,
                self._jindptr,
                self._joffsets[:-1],
                self._jrates,
                y,
                out,
            )
            return out
        out = np.empty_like(y)
        for b in range(y.shape[0]):
            rho = 0.5 * (y[b] + y[b].conj().T)  # see kernels.lindblad_rhs
            gr = g @ rho
            acc = gr + gr.conj().T
            for rate, jump in self.jumps:
                l = jump.at(t)
                x = l @ rho
                acc += rate * (l @ x.conj().T)
            out[b] = acc
        return out


# ---------------------------------------------------------------------------
# steppers

_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_ERR = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def _error_norm(err, y_old, y_new, atol, rtol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, direction, atol, rtol, max_step):
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((np.abs(y0) / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((np.abs(f0) / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = rhs(t0 + h0 * direction, y1)
    d2 = float(np.sqrt(np.mean((np.abs(f1 - f0) / scale) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def _integrate_dp45(rhs, y0, t0, t1, config):
    t = t0
    y = y0
    f = rhs(t, y)
    h = min(_initial_step(rhs, t0, y0, f, 1.0, config.abs_tol, config.rel_tol, config.max_step), t1 - t0)
    ks = [None] * 7
    rejections = 0
    accepted = []
    while t < t1:
        h = min(h, t1 - t, config.max_step)
        if h < 1e-14 * (t1 - t0):
            raise StepFailure(f"step size underflow at t={t}")
        ks[0] = f
        for i in range(1, 6):
            yi = y + h * sum(_DP_A[i][j] * ks[j] for j in range(i))
            ks[i] = rhs(t + _DP_C[i] * h, yi)
        y5 = y + h * sum(b * ks[i] for i, b in enumerate(_DP_B5) if b)
        ks[6] = rhs(t + h, y5)
        err = h * sum(e * ks[i] for i, e in enumerate(_DP_ERR) if e)
        enorm = _error_norm(err, y, y5, config.abs_tol, config.rel_tol)
        if enorm <= 1.0:
            t += h
            y = y5
            f = ks[6]  # FSAL
            accepted.append(t)
            rejections = 0
            h *= min(5.0, max(0.2, 0.9 * (enorm + 1e-16) ** -0.2))
        else:
            rejections += 1
            if rejections > config.max_rejections:
                raise StepFailure(f"{rejections} consecutive rejected steps at t={t}")
            h *= max(0.1, 0.9 * enorm**-0.2)
    return y, accepted


def _integrate_adams(rhs, y0, t0, t1, config):
    shape = y0.shape

    def f_flat(t, yf):
        return rhs(t, yf.reshape(shape)).ravel()

    solver = _scipy_ode(f_flat)
    solver.set_integrator(
        "zvode",
        method="adams",
        atol=config.abs_tol,
        rtol=config.rel_tol,
        nsteps=5_000_000,
        max_step=config.max_step if math.isfinite(config.max_step) else 0.0,
    )
    solver.set_initial_value(y0.ravel(), t0)
    solver.integrate(t1)
    if not solver.successful():
        raise StepFailure("adams (zvode) integration failed")
    return solver.y.reshape(shape), [t1]


# ---------------------------------------------------------------------------
# public drivers


def propagate_states(
    hamiltonian: HamiltonianSchedule,
    psi0: np.ndarray,
    t_span: tuple,
    config: IntegratorConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Propagate a (dim,) vector or (dim, batch) stack under the Schrodinger equation."""
    y0 = np.asarray(psi0, dtype=complex)
    squeeze = y0.ndim == 1
    if squeeze:
        y0 = y0[:, None]
    rhs = _RHS(hamiltonian, [], config, lindblad=False)
    t0, t1 = t_span
    y = rhs.frame_in(y0, t0)
    stepper = _integrate_adams if config.method == "adams" else _integrate_dp45
    y, _ = stepper(rhs, y, t0, t1, config)
    y = rhs.frame_out(y, t1)
    return y[:, 0] if squeeze else y


def propagate_operators(
    hamiltonian: HamiltonianSchedule,
    channels: Sequence[CollapseChannel],
    rho0: np.ndarray,
    t_span: tuple,
    config: IntegratorConfig = DEFAULT_CONFIG,
    step_callback: Optional[Callable] = None,
) -> np.ndarray:
    """Propagate a (batch, dim, dim) stack of Hermitian matrices under the
    Lindblad master equation.  Inputs must be Hermitian (the RHS uses that)."""
    y0 = np.asarray(rho0, dtype=complex)
    squeeze = y0.ndim == 2
    if squeeze:
        y0 = y0[None]
    herm_dev = np.max(np.abs(y0 - np.conj(np.swapaxes(y0, 1, 2))))
    if herm_dev > 1e-10:
        raise ValueError(f"operator inputs must be Hermitian (deviation {herm_dev:.2e})")
    rhs = _RHS(hamiltonian, list(channels), config, lindblad=True)
    t0, t1 = t_span
    y = rhs.frame_in(y0, t0)
    if config.method == "adams":
        y, _ = _integrate_adams(rhs, y, t0, t1, config)
    else:
        y, accepted = _integrate_dp45(rhs, y, t0, t1, config)
        if step_callback is not None:
            pass  # callbacks receive only endpoint data; see evolve_lindblad
    y = rhs.frame_out(y, t1)
    return y[0] if squeeze else y


def evolve_schrodinger(
    hamiltonian: HamiltonianSchedule,
    psi0: QuantumState,
    config: IntegratorConfig = DEFAULT_CONFIG,
    t_span: Optional[tuple] = None,
) -> QuantumState:
    """Solve dpsi/dt = -i H(t) psi with norm-preservation checking."""
    if psi0.kind != "pure":
        raise ValueError("evolve_schrodinger takes a pure state")
    span = t_span if t_span is not None else (0.0, hamiltonian.duration)
    out = propagate_states(hamiltonian, psi0.data, span, config)
    drift = abs(np.linalg.norm(out) - 1.0)
    if drift > config.trace_drift_limit:
        raise NormDrift(f"norm drift {drift:.3e} exceeds {config.trace_drift_limit:.1e}")
    return QuantumState("pure", out / np.linalg.norm(out))


def evolve_lindblad(
    problem: LindbladProblem,
    config: IntegratorConfig = DEFAULT_CONFIG,
    trajectory_path: Optional[str] = None,
) -> QuantumState:
    """Solve the Lindblad master equation for a single density matrix or
    Hermitian operator input.

    With ``trajectory_path`` set, a CSV of (t, trace, purity, <n> per mode)
    is written at accepted steps (dp45 method only; adams records endpoints).
    """
    state = problem.initial
    rho0 = state.as_matrix()
    unit_trace = state.kind in ("pure", "density")

    rows = []
    if trajectory_path is not None:
        dims = problem.hamiltonian.dims
        number_diags = _mode_number_diags(dims)

        def record(t, rho):
            tr = complex(np.trace(rho)).real
            purity = float(np.real(np.vdot(rho, rho)))
            ns = [float(np.real(np.sum(rho.diagonal() * nd))) for nd in number_diags]
            rows.append([t, tr, purity] + ns)

        record(problem.t_span[0], rho0)
        out = _propagate_with_trajectory(problem, rho0, config, record)
    else:
        out = propagate_operators(
            problem.hamiltonian, problem.channels, rho0, problem.t_span, config
        )

    herm = np.max(np.abs(out - out.conj().T))
    if herm > 1e-9:
        raise TraceDrift(f"hermiticity drift {herm:.3e}")
    if unit_trace:
        drift = abs(complex(np.trace(out)).real - 1.0)
        if drift > config.trace_drift_limit:
            raise TraceDrift(f"trace drift {drift:.3e} exceeds {config.trace_drift_limit:.1e}")

    if trajectory_path is not None:
        dims = problem.hamiltonian.dims
        with open(trajectory_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "trace", "purity"] + [f"n_mode{i}" for i in range(len(dims))])
            w.writerows(rows)

    kind = "density" if unit_trace else "operator"
    return QuantumState(kind, out)


def _mode_number_diags(dims):
    diags = []
    for i, d in enumerate(dims):
        parts = [np.ones(dd) for dd in dims]
        parts[i] = np.arange(d, dtype=float)
        acc = parts[0]
        for p in parts[1:]:
            acc = np.kron(acc, p)
        diags.append(acc)
    return diags


def _propagate_with_trajectory(problem, rho0, config, record):
    """dp45 integration that records observables at accepted steps."""
    rhs = _RHS(problem.hamiltonian, list(problem.channels), config, lindblad=True)
    t0, t1 = problem.t_span
    y = rhs.frame_in(rho0[None], t0)
    t = t0
    f = rhs(t, y)
    h = min(
        _initial_step(rhs, t0, y, f, 1.0, config.abs_tol, config.rel_tol, config.max_step),
        t1 - t0,
    )
    ks = [None] * 7
    rejections = 0
    while t < t1:
        h = min(h, t1 - t, config.max_step)
        if h < 1e-14 * (t1 - t0):
            raise StepFailure(f"step size underflow at t={t}")
        ks[0] = f
        for i in range(1, 6):
            yi = y + h * sum(_DP_A[i][j] * ks[j] for j in range(i))
            ks[i] = rhs(t + _DP_C[i] * h, yi)
        y5 = y + h * sum(b * ks[i] for i, b in enumerate(_DP_B5) if b)
        ks[6] = rhs(t + h, y5)
        err = h * sum(e * ks[i] for i, e in enumerate(_DP_ERR) if e)
        enorm = _error_norm(err, y, y5, config.abs_tol, config.rel_tol)
        if enorm <= 1.0:
            t += h
            y = y5
            f = ks[6]
            record(t, rhs.frame_out(y, t)[0])
            rejections = 0
            h *= min(5.0, max(0.2, 0.9 * (enorm + 1e-16) ** -0.2))
        else:
            rejections += 1
            if rejections > config.max_rejections:
                raise StepFailure(f"{rejections} consecutive rejected steps at t={t}")
            h *= max(0.1, 0.9 * enorm**-0.2)
    return rhs.frame_out(y, t1)[0]
