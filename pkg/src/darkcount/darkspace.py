"""Rank, nullity, dark bases and projectors of the sector lowering operators.

Two independent routes to the same integers:

* a floating-point route (SVD with an explicit, auditable tolerance policy)
  that also yields an orthonormal dark basis and the dark projector;
* an exact route (Gaussian elimination over a fixed 61-bit Mersenne prime
  field with seeded random integer couplings), which certifies the generic
  rank of large sectors where dense decompositions are out of reach.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .couplings import CouplingProfile
from .operators import PureState, SectorOperator, TotalSz, build_lowering_block
from .sector import SectorBasis, enumerate_sector

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOLERANCE",
    "DarkSubspace",
    "Projector",
    "DarkCheck",
    "nullity_numeric",
    "rank_numeric",
    "null_basis",
    "dark_subspace",
    "projector",
    "verify_dark",
    "MERSENNE_61",
    "CROSSCHECK_PRIME",
    "EliminationBudgetExceeded",
    "rank_exact_modp",
]


# --------------------------------------------------------------------------
# floating-point route
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TolerancePolicy:
    """Singular-value cutoff: sigma_max * max(dim) * eps * safety_factor.

    ``absolute`` overrides the scaled formula with a fixed cutoff.  Every
    result that used the policy records the value it resolved to.
    """

    safety_factor: float = 100.0
    absolute: float | None = None

    def relative(self, shape: tuple[int, int]) -> float:
        return max(shape) * np.finfo(np.float64).eps * self.safety_factor

    def cutoff(self, sigma_max: float, shape: tuple[int, int]) -> float:
        if self.absolute is not None:
            return self.absolute
        return sigma_max * self.relative(shape)


DEFAULT_TOLERANCE = TolerancePolicy()


@dataclass(frozen=True, eq=False)
class DarkSubspace:
    """Orthonormal basis of the null space of a lowering block (cavity empty)."""

    sector: SectorBasis
    basis: list[PureState]
    nullity: int
    tolerance_used: float  # relative to the largest singular value

    def __post_init__(self):
        if self.nullity != len(self.basis):
            raise ValueError("nullity must equal the number of basis vectors")


@dataclass(frozen=True, eq=False)
class Projector:
    """Hermitian idempotent P = sum_j |d_j><d_j| over the sector basis."""

    sector: SectorBasis
    matrix: np.ndarray
    rank: int

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))


def _svd_or_diagnose(op: SectorOperator) -> tuple[np.ndarray, np.ndarray]:
    dense = op.to_dense()
    try:
        _, s, vh = scipy.linalg.svd(dense, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise np.linalg.LinAlgError(
            f"SVD failed on lowering block {op.shape} "
            f"(nnz={op.matrix.nnz}, fro={scipy.linalg.norm(dense):.3e}): {exc}"
        ) from exc
    return s, vh


def nullity_numeric(op: SectorOperator, tol_policy: TolerancePolicy = DEFAULT_TOLERANCE) -> int:
    """Count singular values of the lowering block below the policy cutoff."""
    s, _ = _svd_or_diagnose(op)
    sigma_max = float(s[0]) if s.size else 0.0
    cut = tol_policy.cutoff(sigma_max, op.shape)
    rank = int(np.count_nonzero(s > cut))
    return op.shape[1] - rank


def rank_numeric(op: SectorOperator, tol_policy: TolerancePolicy = DEFAULT_TOLERANCE) -> int:
    """Numerical rank under the same cutoff as :func:`nullity_numeric`."""
    return op.shape[1] - nullity_numeric(op, tol_policy)


def null_basis(
    op: SectorOperator, tol_policy: TolerancePolicy = DEFAULT_TOLERANCE
) -> DarkSubspace:
    """Orthonormal null-space basis from the right-singular vectors.

    The vectors are rows of V^H past the numerical rank, already orthonormal;
    no re-orthogonalization step is applied.
    """
    s, vh = _svd_or_diagnose(op)
    sigma_max = float(s[0]) if s.size else 0.0
    cut = tol_policy.cutoff(sigma_max, op.shape)
    rank = int(np.count_nonzero(s > cut))
    vecs = vh[rank:].conj()
    states = [PureState(op.source, v.copy(), n_photons=0) for v in vecs]
    rel = tol_policy.relative(op.shape) if tol_policy.absolute is None else (
        tol_policy.absolute / sigma_max if sigma_max > 0 else tol_policy.absolute
    )
    return DarkSubspace(
        sector=op.source, basis=states, nullity=len(states), tolerance_used=rel
    )


def dark_subspace(
    n_qubits: int,
    n_excited: int,
    profile: CouplingProfile,
    tol_policy: TolerancePolicy = DEFAULT_TOLERANCE,
) -> DarkSubspace:
    """Dark subspace of the (N, s) sector for a given coupling profile.

    s = 0 has no lowering block; the all-ground state is trivially dark and
    the subspace is defined as that single state.
    """
    if n_excited == 0:
        sector = enumerate_sector(n_qubits, 0)
        state = PureState(sector, np.ones(1, dtype=np.complex128), n_photons=0)
        return DarkSubspace(sector=sector, basis=[state], nullity=1, tolerance_used=0.0)
    op = build_lowering_block(n_qubits, n_excited, profile)
    return null_basis(op, tol_policy)


def projector(sub: DarkSubspace) -> Projector:
    """P = sum_j |d_j><d_j| over the orthonormal dark basis; zero if the sector is bright."""
    dim = sub.sector.size
    p = np.zeros((dim, dim), dtype=np.complex128)
    for state in sub.basis:
        v = state.amplitudes
        p += np.outer(v, v.conj())
    return Projector(sector=sub.sector, matrix=p, rank=sub.nullity)


@dataclass(frozen=True)
class DarkCheck:
    """Outcome of certifying one state against the dark-state requirements."""

    passed: bool
    residual_norm: float
    residual_tolerance: float
    sz_mean: float
    sz_variance: float
    sz_tolerance: float


def verify_dark(
    state: PureState,
    op: SectorOperator,
    sz: TotalSz,
    tol_policy: TolerancePolicy = DEFAULT_TOLERANCE,
) -> DarkCheck:
    """Certify that a zero-photon sector state is dark.

    Checks the two nontrivial requirements: annihilation by the lowering
    block (no emission) and a sharp collective S^z (stationarity under the
    Hamiltonian; the photon part is empty by construction, so the absorption
    term acts as zero).  Tolerances scale with the Frobenius norm of the
    block unless the policy fixes an absolute cutoff.
    """
    if state.basis.states != op.source.states:
        raise ValueError("state does not live in the operator's source sector")
    if state.n_photons != 0:
        raise ValueError("dark-state certification requires an empty photon sector")
    if sz.n_qubits != state.basis.n_qubits:
        raise ValueError("S^z operator belongs to a different register size")

    scale = float(scipy.linalg.norm(op.matrix.data)) if op.matrix.nnz else 0.0
    tol = tol_policy.cutoff(scale, op.shape)
    residual = float(np.linalg.norm(op.apply(state.amplitudes))) / max(state.norm, 1e-300)

    weights = np.abs(state.amplitudes) ** 2
    weights = weights / weights.sum()
    diag = sz.diagonal(state.basis)
    mean = float(weights @ diag)
    var = float(weights @ (diag - mean) ** 2)
    sz_tol = tol_policy.cutoff(1.0, op.shape)

    return DarkCheck(
        passed=(residual <= tol) and (var <= sz_tol),
        residual_norm=residual,
        residual_tolerance=tol,
        sz_mean=mean,
        sz_variance=var,
        sz_tolerance=sz_tol,
    )


# --------------------------------------------------------------------------
# exact route: Gaussian elimination over F_p
# --------------------------------------------------------------------------

MERSENNE_61 = (1 << 61) - 1  # 2305843009213693951, the Mersenne prime 2^61 - 1
CROSSCHECK_PRIME = (1 << 61) - 31  # largest prime below 2^61 - 1; scalar path only

_M61 = np.uint64(MERSENNE_61)
_LOW31 = np.uint64((1 << 31) - 1)
_LOW30 = np.uint64((1 << 30) - 1)

RANK_MODP_MAX_QUBITS = 22


class EliminationBudgetExceeded(RuntimeError):
    """Raised when exact elimination exceeds its wall-clock budget."""


def _m61_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized multiply mod 2^61 - 1 on uint64 inputs below the prime.

    Splits each factor into 31/30-bit limbs so every intermediate fits in
    uint64; 2^61 = 1 (mod p) collapses the high limbs.
    """
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a1, a0 = a >> np.uint64(31), a & _LOW31
    b1, b0 = b >> np.uint64(31), b & _LOW31
    cross = a1 * b0 + a0 * b1
    t = ((a1 * b1) << np.uint64(1)) + (cross >> np.uint64(30)) + (
        (cross & _LOW30) << np.uint64(31)
    ) + a0 * b0
    t = (t & _M61) + (t >> np.uint64(61))
    t = (t & _M61) + (t >> np.uint64(61))
    return np.where(t >= _M61, t - _M61, t)


def _merge_subtract_m61(
    row: tuple[np.ndarray, np.ndarray],
    piv: tuple[np.ndarray, np.ndarray],
    factor: int,
) -> tuple[np.ndarray, np.ndarray]:
    """row - factor * piv over F_{2^61-1}, rows as (sorted col idx, values)."""
    sub = _m61_mul(np.uint64(factor), piv[1])
    neg = np.where(sub == 0, np.uint64(0), _M61 - sub)
    idx = np.concatenate([row[0], piv[0]])
    val = np.concatenate([row[1], neg])
    order = np.argsort(idx, kind="stable")
    idx = idx[order]
    val = val[order]
    starts = np.flatnonzero(np.concatenate([[True], idx[1:] != idx[:-1]]))
    sums = np.add.reduceat(val, starts)  # at most two addends, < 2^62
    sums = np.where(sums >= _M61, sums - _M61, sums)
    keep = sums != 0
    return idx[starts][keep], sums[keep]


def _modp_couplings(n_qubits: int, seed: int, prime: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=seed))
    return rng.integers(1, prime, size=n_qubits, dtype=np.uint64)


def _modp_triplets(
    n_qubits: int, n_excited: int, seed: int, prime: int
) -> tuple[int, int, np.ndarray, np.ndarray, np.ndarray]:
    """Lowering-block entries with seeded integer couplings, vectorized.

    Returns (n_rows, n_cols, rows, cols, vals); rows index the (s-1)-sector.
    """
    g = _modp_couplings(n_qubits, seed, prime)
    src = np.array(enumerate_sector(n_qubits, n_excited).states, dtype=np.int64)
    tgt = np.array(enumerate_sector(n_qubits, n_excited - 1).states, dtype=np.int64)
    rows_parts, cols_parts, vals_parts = [], [], []
    col_ids = np.arange(src.size, dtype=np.int64)
    for i in range(n_qubits):
        bit = 1 << i
        has = (src & bit) != 0
        lowered = src[has] ^ bit
        rows_parts.append(np.searchsorted(tgt, lowered))
        cols_parts.append(col_ids[has])
        vals_parts.append(np.full(lowered.size, g[i], dtype=np.uint64))
    return (
        tgt.size,
        src.size,
        np.concatenate(rows_parts),
        np.concatenate(cols_parts),
        np.concatenate(vals_parts),
    )


def _echelon_rank_m61(
    n_rows: int,
    rows_idx: np.ndarray,
    cols_idx: np.ndarray,
    vals: np.ndarray,
    deadline: float | None,
) -> int:
    """Incremental sparse row echelon over F_{2^61-1}.

    Each unprocessed row is reduced against the registered pivot rows until
    it either empties (dependent) or contributes a new pivot at its leading
    column.  Pivot rows are normalized once so updates need no inversions.
    """
    order = np.argsort(cols_idx, kind="stable")
    rows_idx, cols_idx, vals = rows_idx[order], cols_idx[order], vals[order]
    order = np.argsort(rows_idx, kind="stable")
    rows_idx, cols_idx, vals = rows_idx[order], cols_idx[order], vals[order]
    bounds = np.searchsorted(rows_idx, np.arange(n_rows + 1))

    pivots: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    rank = 0
    merges = 0
    for r in range(n_rows):
        lo, hi = bounds[r], bounds[r + 1]
        if lo == hi:
            continue
        row = (cols_idx[lo:hi].astype(np.uint64), vals[lo:hi].copy())
        while row[0].size:
            lead = int(row[0][0])
            piv = pivots.get(lead)
            if piv is None:
                inv = pow(int(row[1][0]), -1, MERSENNE_61)
                pivots[lead] = (row[0], _m61_mul(np.uint64(inv), row[1]))
                rank += 1
                break
            row = _merge_subtract_m61(row, piv, int(row[1][0]))
            merges += 1
            if deadline is not None and merges % 512 == 0 and time.monotonic() > deadline:
                raise EliminationBudgetExceeded(
                    f"elimination passed its wall-clock budget at rank {rank} "
                    f"of {n_rows} rows"
                )
    return rank


def _echelon_rank_scalar(
    n_rows: int,
    rows_idx: np.ndarray,
    cols_idx: np.ndarray,
    vals: np.ndarray,
    prime: int,
    deadline: float | None,
) -> int:
    """Same echelon scheme with Python-int arithmetic, for arbitrary primes."""
    from collections import defaultdict

    by_row: dict[int, dict[int, int]] = defaultdict(dict)
    for r, c, v in zip(rows_idx.tolist(), cols_idx.tolist(), vals.tolist()):
        by_row[r][c] = (by_row[r].get(c, 0) + int(v)) % prime
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    merges = 0
    for r in range(n_rows):
        row = {c: v for c, v in by_row.get(r, {}).items() if v}
        while row:
            lead = min(row)
            piv = pivots.get(lead)
            if piv is None:
                inv = pow(row[lead], -1, prime)
                pivots[lead] = {c: (v * inv) % prime for c, v in row.items()}
                rank += 1
                break
            f = row[lead]
            for c, v in piv.items():
                nv = (row.get(c, 0) - f * v) % prime
                if nv:
                    row[c] = nv
                elif c in row:
                    del row[c]
            merges += 1
            if deadline is not None and merges % 64 == 0 and time.monotonic() > deadline:
                raise EliminationBudgetExceeded(
                    f"elimination passed its wall-clock budget at rank {rank} "
                    f"of {n_rows} rows"
                )
    return rank


def rank_exact_modp(
    n_qubits: int,
    n_excited: int,
    seed: int,
    prime: int = MERSENNE_61,
    time_budget_s: float | None = None,
    max_qubits: int = RANK_MODP_MAX_QUBITS,
) -> int:
    """Exact rank of the lowering block over F_prime with seeded random couplings.

    Couplings are drawn independently and uniformly from [1, prime-1] with the
    Philox stream of ``seed``, so the result is deterministic per seed.  With
    random couplings the F_p rank equals the generic rank with overwhelming
    probability; ``CROSSCHECK_PRIME`` gives an independent check on demand.

    The elimination works on whichever orientation has fewer rows and raises
    :class:`EliminationBudgetExceeded` if ``time_budget_s`` runs out.  Fill-in
    grows steeply with sector size; sectors up to around C(14, 7) are cheap,
    C(16, 8) takes minutes, and larger sectors exceed desk-scale budgets.
    """
    if n_qubits > max_qubits:
        raise ValueError(f"n_qubits={n_qubits} exceeds the cap of {max_qubits}")
    if n_excited < 1 or n_excited > n_qubits:
        raise ValueError("n_excited must lie in [1, n_qubits] for a lowering block")
    if prime != MERSENNE_61 and prime != CROSSCHECK_PRIME:
        # Any odd prime below 2^61 works on the scalar path; these two are the
        # documented defaults.
        if prime.bit_length() > 61 or prime < 3:
            raise ValueError("prime must be an odd prime with at most 61 bits")

    n_rows, n_cols, rows, cols, vals = _modp_triplets(n_qubits, n_excited, seed, prime)
    if n_cols < n_rows:
        rows, cols = cols, rows
        n_rows, n_cols = n_cols, n_rows
    deadline = None if time_budget_s is None else time.monotonic() + time_budget_s
    if prime == MERSENNE_61:
        return _echelon_rank_m61(n_rows, rows, cols, vals, deadline)
    return _echelon_rank_scalar(n_rows, rows, cols, vals, prime, deadline)
