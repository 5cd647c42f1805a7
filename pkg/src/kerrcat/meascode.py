"""Measurement codes: joint decoding of data and syndrome-bit errors.

A measurement code extends the s parity checks H_Z of an n-qubit phase-flip
repetition code with one ancilla bit per check, H_M = (H_Z | I_s), giving a
classical [n+s, n, d] code whose maximum-likelihood decoder infers data and
measurement faults in a single step.  Everything here is exact: distances by
exhaustive kernel search and failure probabilities by full enumeration.

Bit conventions: data bits come first (index 0 = first data qubit), then
ancilla bits.  Packed integers use bit i for position i; lexicographic order
is on the bit string read from position 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DependentRows, OddRowWeight, TooLarge
from .ftcalc import _clamp_probability

MAX_ENUM_BITS = 24


@dataclass(frozen=True)
class BinaryMatrix:
    """Dense GF(2) matrix; ``bits`` is a uint8 array of shape (rows, cols)."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise ValueError("bits must be 2-D")
        object.__setattr__(self, "bits", arr)

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    def row_weights(self) -> np.ndarray:
        return self.bits.sum(axis=1)

    def column_weights(self) -> np.ndarray:
        return self.bits.sum(axis=0)

    def to_text(self) -> str:
        return "\n".join("".join(str(b) for b in row) for row in self.bits)

    @classmethod
    def from_text(cls, text: str) -> "BinaryMatrix":
        rows = [line.strip() for line in text.splitlines() if line.strip()]
        return cls(np.array([[int(c) for c in row] for row in rows], dtype=np.uint8))


def gf2_rank(bits: np.ndarray) -> int:
    m = (np.asarray(bits, dtype=np.uint8) & 1).copy()
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivots = np.nonzero(m[rank:, c])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        m[[rank, p]] = m[[p, rank]]
        hit = np.nonzero(m[:, c])[0]
        hit = hit[hit != rank]
        m[hit] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True)
class DecoderNoise:
    """Independent flip probabilities for data bits and syndrome (ancilla) bits."""

    eps_data: float
    eps_meas: float

    def __post_init__(self):
        for label, v in (("eps_data", self.eps_data), ("eps_meas", self.eps_meas)):
            if not 0.0 <= v < 0.5:
                raise ValueError(f"{label} must lie in [0, 0.5), got {v}")


class MeasurementCode:
    """[n+s, n, d] measurement code built from even-weight checks H_Z."""

    def __init__(self, h_z: BinaryMatrix):
        weights = h_z.row_weights()
        if np.any(weights % 2 == 1):
            bad = int(np.nonzero(weights % 2 == 1)[0][0])
            raise OddRowWeight(f"check row {bad} has odd data weight {int(weights[bad])}")
        self.h_z = h_z
        self.s = h_z.rows
        self.n = h_z.cols
        self.h_m = BinaryMatrix(
            np.concatenate([h_z.bits, np.eye(self.s, dtype=np.uint8)], axis=1)
        )
        # the identity block guarantees this; kept as a structural check
        if gf2_rank(self.h_m.bits) != self.s:
            raise DependentRows("measurement-code rows are linearly dependent over GF(2)")
        # syndrome of every pure data error, packed to ints
        self._data_syndromes = self._all_data_syndromes()
        self.d = self._distance()
        self._tables: dict = {}

    @property
    def parameters(self) -> tuple:
        return (self.n + self.s, self.n, self.d)

    def _all_data_syndromes(self) -> np.ndarray:
        if self.n > 20:
            raise TooLarge(f"exhaustive construction limited to n <= 20, got {self.n}")
        xs = np.arange(2**self.n, dtype=np.uint32)
        bits = (xs[:, None] >> np.arange(self.n, dtype=np.uint32)[None, :]) & 1
        synd_bits = (bits.astype(np.uint8) @ self.h_z.bits.T) & 1
        packer = (1 << np.arange(self.s, dtype=np.uint64))[None, :]
        return (synd_bits.astype(np.uint64) * packer).sum(axis=1)

    def _distance(self) -> int:
        xs = np.arange(1, 2**self.n, dtype=np.uint64)
        w = np.bitwise_count(xs) + np.bitwise_count(self._data_syndromes[1:])
        return int(w.min())

    def syndrome_of(self, error_bits: np.ndarray) -> np.ndarray:
        e = np.asarray(error_bits, dtype=np.uint8) & 1
        return (self.h_m.bits @ e) & 1


def build_measurement_code(h_z: BinaryMatrix) -> MeasurementCode:
    return MeasurementCode(h_z)


def naive_code(n: int, r_rounds: int) -> MeasurementCode:
    """Adjacent-pair generators of the length-n repetition code, each
    measured ``r_rounds`` times: an [n + (n-1)r, n, d(n, r)] code."""
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and >= 3")
    if r_rounds < 1:
        raise ValueError("r_rounds must be >= 1")
    rows = []
    for j in range(n - 1):
        gen = np.zeros(n, dtype=np.uint8)
        gen[j] = gen[j + 1] = 1
        rows.extend([gen] * r_rounds)
    return MeasurementCode(BinaryMatrix(np.array(rows)))


def repeat_code(h_z: BinaryMatrix, r_rounds: int) -> MeasurementCode:
    """Repeat every check of an existing generating set ``r_rounds`` times;
    repeating the three cyclic pairs of the n=3 code gives [3+3r, 3, 3]."""
    rows = np.repeat(h_z.bits, r_rounds, axis=0)
    return MeasurementCode(BinaryMatrix(rows))


# standard small examples: the two hand-picked codes and their H_Z matrices
HZ_633 = BinaryMatrix(np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=np.uint8))

HZ_1455 = BinaryMatrix(
    np.array(
        [
            [1, 0, 0, 0, 1, 1, 0, 0, 1],
            [1, 1, 0, 0, 0, 0, 1, 1, 0],
            [0, 1, 1, 0, 0, 1, 0, 1, 0],
            [0, 0, 1, 1, 0, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 0, 1, 1, 0],
        ],
        dtype=np.uint8,
    ).T
)


def _lex_keys(ints: np.ndarray, width: int) -> np.ndarray:
    """Key whose integer order equals lexicographic order of the bit string
    read from position 0."""
    keys = np.zeros_like(ints, dtype=np.uint64)
    for i in range(width):
        bit = (ints >> np.uint64(i)) & np.uint64(1)
        keys |= bit << np.uint64(width - 1 - i)
    return keys


class _DecodeTable:
    """Most-likely error for every syndrome, by exact coset enumeration."""

    def __init__(self, code: MeasurementCode, noise: DecoderNoise):
        n, s = code.n, code.s
        if n + s > MAX_ENUM_BITS:
            raise TooLarge(f"n + s = {n + s} exceeds enumeration limit {MAX_ENUM_BITS}")
        self.code = code
        self.noise = noise
        xs = np.arange(2**n, dtype=np.uint64)
        wx = np.bitwise_count(xs).astype(np.float64)
        syndromes = np.arange(2**s, dtype=np.uint64)
        # ancilla error for data guess x at syndrome sigma: sigma xor H_Z x
        anc = syndromes[:, None] ^ code._data_syndromes[None, :]
        wa = np.bitwise_count(anc).astype(np.float64)

        # log-likelihood ratio per flipped bit; a zero rate forbids any flip
        # of that kind (0 * llr stays 0, so zero-weight patterns are fine)
        def llr(eps):
            return -1e30 if eps == 0.0 else math.log(eps / (1 - eps))

        ll = wx[None, :] * llr(noise.eps_data) + wa * llr(noise.eps_meas)

        # argmax with deterministic ties: highest likelihood, then lowest
        # total weight, then lexicographically smallest bit string
        total_w = wx[None, :] + wa
        lex = (
            _lex_keys(xs, n).astype(np.float64)[None, :] * 2.0**s
            + _lex_keys(anc.ravel(), s).astype(np.float64).reshape(anc.shape)
        )
        order = np.lexsort((lex.ravel(), total_w.ravel(), -ll.ravel()))
        rows_sorted = (order // 2**n).astype(np.int64)
        _, first_pos = np.unique(rows_sorted, return_index=True)
        winners = order[first_pos]  # one per syndrome, already in row order
        self.data_guess = (winners % 2**n).astype(np.uint64)
        self.anc_guess = anc[np.arange(2**s), self.data_guess]


def _error_to_int(error_bits: np.ndarray) -> tuple:
    e = np.asarray(error_bits, dtype=np.uint64) & 1
    return int((e * (1 << np.arange(e.size, dtype=np.uint64))).sum())


def ml_decode(code: MeasurementCode, syndrome, noise: DecoderNoise) -> np.ndarray:
    """Exact maximum-likelihood error estimate for one syndrome.

    Enumerates the 2^n coset representatives; ties break toward lower total
    weight and then the lexicographically smallest error string.
    """
    syndrome = np.asarray(syndrome, dtype=np.uint8) & 1
    if syndrome.size != code.s:
        raise ValueError("syndrome length mismatch")
    sig = _error_to_int(syndrome)
    table = _decode_table_cached(code, noise)
    x = int(table.data_guess[sig])
    a = int(table.anc_guess[sig])
    bits = [(x >> i) & 1 for i in range(code.n)] + [(a >> i) & 1 for i in range(code.s)]
    return np.array(bits, dtype=np.uint8)


def _decode_table_cached(code: MeasurementCode, noise: DecoderNoise) -> _DecodeTable:
    key = (noise.eps_data, noise.eps_meas)
    tab = code._tables.get(key)
    if tab is None:
        tab = _DecodeTable(code, noise)
        code._tables[key] = tab
    return tab


def failure_probability(code: MeasurementCode, noise: DecoderNoise) -> float:
    """Exact decoding-failure probability under the strict criterion: the
    decoder fails whenever its data estimate differs from the true data error.

    Sums over all 2^(n+s) error patterns.
    """
    n, s = code.n, code.s
    if n + s > MAX_ENUM_BITS:
        raise TooLarge(f"n + s = {n + s} exceeds enumeration limit {MAX_ENUM_BITS}")
    table = _decode_table_cached(code, noise)
    xs = np.arange(2**n, dtype=np.uint64)
    wx = np.bitwise_count(xs).astype(np.float64)
    msyn = np.arange(2**s, dtype=np.uint64)
    wa_all = np.bitwise_count(msyn).astype(np.float64)

    ed, em = noise.eps_data, noise.eps_meas
    # probability of data pattern x and ancilla pattern a, log-safe for eps=0
    with np.errstate(divide="ignore"):
        lpx = wx * (np.log(ed) if ed > 0 else -np.inf) + (n - wx) * math.log1p(-ed)
        lpa = wa_all * (np.log(em) if em > 0 else -np.inf) + (s - wa_all) * math.log1p(-em)
    px = np.exp(lpx)
    pa = np.exp(lpa)
    if ed == 0.0:
        px = np.where(wx == 0, (1 - ed) ** n, 0.0)
    if em == 0.0:
        pa = np.where(wa_all == 0, (1 - em) ** s, 0.0)

    # for each (true data x, ancilla a): syndrome = H x ^ a; failure when the
    # table's guess differs from x
    total_fail = 0.0
    hx = code._data_syndromes
    for a in range(2**s):
        sig = hx ^ np.uint64(a)
        wrong = table.data_guess[sig] != xs
        total_fail += pa[a] * float(px[wrong].sum())
    return total_fail


def two_stage_decode(n: int, r_rounds: int, error_bits: np.ndarray) -> np.ndarray:
    """Naive decoder oracle: majority-vote each repeated generator, then
    minimum-weight-decode the resulting (n-1)-bit repetition-code syndrome.

    A tied vote (possible for even r) carries no information; it is resolved
    toward a fired syndrome bit, which matches the standard counting that an
    [r,1,r] repetition of the measurement protects against floor((r-1)/2)
    faults."""
    e = np.asarray(error_bits, dtype=np.uint8) & 1
    data, anc = e[:n], e[n:]
    syn = np.zeros(n - 1, dtype=np.uint8)
    for j in range(n - 1):
        votes = []
        for k in range(r_rounds):
            meas = (data[j] ^ data[j + 1] ^ anc[j * r_rounds + k]) & 1
            votes.append(meas)
        syn[j] = 1 if sum(votes) * 2 >= r_rounds else 0
    # minimum-weight data error consistent with the voted generator syndrome
    best = None
    for x in range(2**n):
        bits = np.array([(x >> i) & 1 for i in range(n)], dtype=np.uint8)
        if np.array_equal((bits[:-1] ^ bits[1:]), syn):
            w = int(bits.sum())
            if best is None or w < best[0]:
                best = (w, bits)
    return best[1]


# ---------------------------------------------------------------------------
# gadget-level accounting with a measurement code


@dataclass(frozen=True)
class MeascodeGadgetNoise:
    """Location counting that maps the physical dephasing rate eps onto the
    decoder's bit-flip probabilities.

    Each data qubit touches w checks (w = max column weight of H_Z), giving
    (2w+1) eps of accumulated dephasing per EC round pair plus the transversal
    CX; each ancilla sees preparation, two CX gates, and measurement (4 eps).
    ``scale`` supports the +-50% sensitivity sweep around this counting.
    """

    scale: float = 1.0

    def derive(self, code: MeasurementCode, epsilon: float) -> DecoderNoise:
        w = int(code.h_z.column_weights().max())
        eps_data = min(self.scale * (2 * w + 1) * epsilon, 0.499)
        eps_meas = min(self.scale * 4 * epsilon, 0.499)
        return DecoderNoise(eps_data=eps_data, eps_meas=eps_meas)


def gadget_error_with_meascode(
    code: MeasurementCode,
    epsilon: float,
    eta: float,
    noise_map: MeascodeGadgetNoise = MeascodeGadgetNoise(),
) -> float:
    """Logical error of the transversal-CX gadget when syndrome extraction is
    decoded through the measurement code.

    The target/control accumulation terms keep their majority form with the
    per-qubit CX count w in place of 2r; the syndrome-failure term is replaced
    by the code's exact failure probability (twice, once per block).
    """
    if epsilon == 0.0:
        return 0.0
    n = code.n
    w = int(code.h_z.column_weights().max())
    maj_n = math.comb(n, (n + 1) // 2)
    e_t = maj_n * ((w + 1) * epsilon) ** ((n + 1) // 2)
    e_c = maj_n * ((2 * w + 1) * epsilon) ** ((n + 1) // 2)
    p_fail = failure_probability(code, noise_map.derive(code, epsilon))
    cx_per_ec = int(code.h_z.row_weights().sum())
    e_nd = (4 * cx_per_ec + n) * epsilon / eta
    return _clamp_probability(e_t + e_c + 2 * p_fail + e_nd, "meascode gadget error")


def meascode_threshold(
    code: MeasurementCode,
    eta: float,
    noise_map: MeascodeGadgetNoise = MeascodeGadgetNoise(),
    rel_tol: float = 1e-3,
) -> float:
    """Fixed point of gadget_error_with_meascode(eps) = eps by bisection."""

    def wins(eps: float) -> bool:
        return gadget_error_with_meascode(code, eps, eta, noise_map) <= eps

    lo, hi = 1e-6, 0.4
    if not wins(lo):
        return 0.0
    while (hi - lo) > rel_tol * hi:
        mid = math.sqrt(lo * hi)
        if wins(mid):
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
