"""Compiled inner kernels for the Lindblad right-hand side.

The adaptive steppers spend essentially all their time in
    out_b = G rho_b + (G rho_b)^dag + sum_i k_i L_i rho_b L_i^dag
over a batch of Hermitian matrices.  The numba build fuses the sparse
products, the per-slice Hermitian transposes (tiled for cache), and the
channel sandwiches into one pass, parallelised over batch slices.  When numba
is unavailable the scipy implementation in evolve.py is used instead; the
selection happens once at import.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_TILE = 48


if HAVE_NUMBA:

    @njit(cache=True, fastmath=True)
    def _csr_matmat(data, indices, indptr, rho, out):
        d = rho.shape[0]
        for i in range(d):
            row = out[i]
            for c in range(d):
                row[c] = 0.0
            for jj in range(indptr[i], indptr[i + 1]):
                a = data[jj]
                src = rho[indices[jj]]
                for c in range(d):
                    row[c] += a * src[c]

    @njit(cache=True, fastmath=True)
    def _add_herm_transpose(w, out):
        d = w.shape[0]
        for i0 in range(0, d, _TILE):
            i1 = min(i0 + _TILE, d)
            for j0 in range(0, d, _TILE):
                j1 = min(j0 + _TILE, d)
                for i in range(i0, i1):
                    for j in range(j0, j1):
                        out[i, j] = w[i, j] + np.conj(w[j, i])

    @njit(cache=True, fastmath=True)
    def _conj_transpose(w, out):
        d = w.shape[0]
        for i0 in range(0, d, _TILE):
            i1 = min(i0 + _TILE, d)
            for j0 in range(0, d, _TILE):
                j1 = min(j0 + _TILE, d)
                for i in range(i0, i1):
                    for j in range(j0, j1):
                        out[i, j] = np.conj(w[j, i])

    @njit(cache=True, fastmath=True, parallel=True)
    def lindblad_rhs(
        g_data,
        g_indices,
        g_indptr,
        j_data,
        j_indices,
        j_indptr,
        j_offsets,
        j_rates,
        rho,
        out,
    ):
        """out_b = G rho_b + h.c. + sum_i k_i L_i rho_b L_i^dag.

        Jump operators are passed as concatenated CSR blocks; ``j_offsets``
        holds the start of each block in ``j_indptr`` (length n_jumps + 1
        segments of d + 1 entries each).
        """
        nb = rho.shape[0]
        d = rho.shape[1]
        njump = j_rates.shape[0]
        for b in prange(nb):
            w = np.empty((d, d), dtype=np.complex128)
            x = np.empty((d, d), dtype=np.complex128)
            xh = np.empty((d, d), dtype=np.complex128)
            rho_h = np.empty((d, d), dtype=np.complex128)
            # symmetrize the slice: the shortcut below is exact only on the
            # Hermitian sector, and leaving the anti-Hermitian rounding
            # residue with sign-flipped sandwich dynamics makes it grow
            for i0 in range(0, d, _TILE):
                i1 = min(i0 + _TILE, d)
                for j0 in range(0, d, _TILE):
                    j1 = min(j0 + _TILE, d)
                    for i in range(i0, i1):
                        for j in range(j0, j1):
                            rho_h[i, j] = 0.5 * (rho[b, i, j] + np.conj(rho[b, j, i]))
            _csr_matmat(g_data, g_indices, g_indptr, rho_h, w)
            _add_herm_transpose(w, out[b])
            for k in range(njump):
                base = k * (d + 1)
                _csr_matmat(
                    j_data[j_offsets[k] :],
                    j_indices[j_offsets[k] :],
                    j_indptr[base : base + d + 1],
                    rho_h,
                    x,
                )
                _conj_transpose(x, xh)
                _csr_matmat(
                    j_data[j_offsets[k] :],
                    j_indices[j_offsets[k] :],
                    j_indptr[base : base + d + 1],
                    xh,
                    w,
                )
                rate = j_rates[k]
                for i in range(d):
                    for c in range(d):
                        out[b, i, c] += rate * w[i, c]
