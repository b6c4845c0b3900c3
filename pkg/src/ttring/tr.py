"""Tensor rings: closed chains whose entries are traces of slice products,

    A(i_1, ..., i_d) = Trace(A1(:, i_1, :) A2(:, i_2, :) ... Ad(:, i_d, :)).

Edges are numbered by the core on their right, 0-based: edge ``k`` is the
left rank of core ``k``, and edge 0 (rank ``R_1``) closes the ring.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .cores import (
    CoreNetwork,
    RankVector,
    block_diag_core,
    dense_from_flat,
    flatten_phys,
    hadamard_core,
    matmul_core,
    restore_phys,
    ring_contract_flat,
)
from .dense import MAX_DENSE_ENTRIES, DenseTensor, check_dense_size, unfold
from .linalg import qr_thin, svd, truncation_rank
from .tt import TensorTrain, TrainMatrix, tt_add

# transfer-operator state above this many entries switches tr_norm to dense contraction
TRANSFER_STATE_LIMIT = 1 << 22


class TensorRing(CoreNetwork):
    """Cores of shape ``(R_k, I_k, R_{k+1})`` with ``R_{d+1} = R_1``."""

    core_ndim = 3
    closed = True


class RingMatrix(CoreNetwork):
    """Cores of shape ``(R_k, I_k, J_k, R_{k+1})``, closed into a ring."""

    core_ndim = 4
    closed = True

    @property
    def row_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def col_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores)


Ring = TensorRing | RingMatrix


def _as_rank_list(ranks, d: int) -> list[int]:
    if isinstance(ranks, (int, np.integer)):
        return [int(ranks)] * (d + 1)
    ranks = list(RankVector(ranks))
    if len(ranks) != d + 1:
        raise ValueError(f"need {d + 1} ranks for {d} cores, got {len(ranks)}")
    return ranks


def tr_random(dims: Sequence[int], ranks, seed) -> TensorRing:
    """Ring with i.i.d. standard normal core entries.

    ``seed`` is an integer or a ``numpy.random.Generator``; integer seeds go
    through numpy's PCG64, so equal seeds give identical rings.
    """
    rng = np.random.default_rng(seed)
    r = _as_rank_list(ranks, len(dims))
    return TensorRing(
        [rng.standard_normal((r[k], dims[k], r[k + 1])) for k in range(len(dims))],
        copy=False,
    )


def ring_matrix_random(row_dims: Sequence[int], col_dims: Sequence[int], ranks, seed) -> RingMatrix:
    if len(row_dims) != len(col_dims):
        raise ValueError("row and column dims need the same length")
    rng = np.random.default_rng(seed)
    r = _as_rank_list(ranks, len(row_dims))
    return RingMatrix(
        [
            rng.standard_normal((r[k], row_dims[k], col_dims[k], r[k + 1]))
            for k in range(len(row_dims))
        ],
        copy=False,
    )


def tr_contract(x: Ring) -> DenseTensor:
    """Dense tensor of a ring; matrix rings give shape ``(I_1..I_d, J_1..J_d)``."""
    phys = x.phys_shapes
    check_dense_size([n for p in phys for n in p])
    flat = ring_contract_flat([flatten_phys(c) for c in x.cores])
    return DenseTensor(dense_from_flat(flat, phys))


def ring_matrix_contract(x: RingMatrix) -> DenseTensor:
    return tr_contract(x)


def as_matrix(t: DenseTensor) -> np.ndarray:
    """``(I_1..I_d, J_1..J_d)`` tensor as its matrix, rows and columns column-major."""
    if t.ndim % 2:
        raise ValueError("matrix contraction must have an even number of modes")
    return unfold(t, t.ndim // 2)


def cyclic_shift(x: Ring, s: int) -> Ring:
    """Rotate cores so that new core ``j`` is old core ``(j + s) mod d``."""
    s %= x.d
    return x._replace(x.cores[s:] + x.cores[:s])


def tr_add_naive(a: Ring, b: Ring) -> Ring:
    """Block-diagonal sum; every rank, including ``R_1``, becomes a sum."""
    _check_same(a, b)
    return a._replace([block_diag_core(x, y) for x, y in zip(a.cores, b.cores)])


def tr_add_modified(a: Ring, b: Ring, cut: tuple[int, int] | None = None) -> Ring:
    """Sum that keeps the rank of one edge instead of adding it.

    ``cut`` names two consecutive cores ``(k, k+1 mod d)`` (default: the last
    and first). Those two are joined like the end cores of a train sum: the
    first concatenated along its right rank, the other along its left rank.
    The edge between them keeps ``max`` of the two input ranks, padding the
    smaller operand with zeros; all other edges add.
    """
    _check_same(a, b)
    d = a.d
    if cut is None:
        cut = (d - 1, 0)
    k, k1 = (int(c) for c in cut)
    if not (0 <= k < d and k1 == (k + 1) % d):
        raise ValueError(f"cut {cut} does not name two consecutive cores of a {d}-core ring")
    edge = k1
    ac = cyclic_shift(a, edge).cores
    bc = cyclic_shift(b, edge).cores
    ra, rb = ac[0].shape[0], bc[0].shape[0]
    r = max(ra, rb)
    if d == 1:
        core = _pad_rank(ac[0], r, left=True, right=True) + _pad_rank(bc[0], r, left=True, right=True)
        return a._replace([core])
    first = np.concatenate([_pad_rank(ac[0], r, left=True), _pad_rank(bc[0], r, left=True)], axis=-1)
    last = np.concatenate([_pad_rank(ac[-1], r, right=True), _pad_rank(bc[-1], r, right=True)], axis=0)
    mid = [block_diag_core(x, y) for x, y in zip(ac[1:-1], bc[1:-1])]
    return cyclic_shift(a._replace([first, *mid, last]), -edge)


def _pad_rank(core: np.ndarray, r: int, left: bool = False, right: bool = False) -> np.ndarray:
    pads = [(0, 0)] * core.ndim
    if left:
        pads[0] = (0, r - core.shape[0])
    if right:
        pads[-1] = (0, r - core.shape[-1])
    return np.pad(core, pads)


def tr_hadamard(a: Ring, b: Ring) -> Ring:
    _check_same(a, b)
    return a._replace([hadamard_core(x, y) for x, y in zip(a.cores, b.cores)])


def tr_matmul(a: RingMatrix, b: RingMatrix) -> RingMatrix:
    if not isinstance(a, RingMatrix) or not isinstance(b, RingMatrix):
        raise TypeError("tr_matmul needs two RingMatrix operands")
    if a.d != b.d:
        raise ValueError(f"different number of cores: {a.d} vs {b.d}")
    if a.col_dims != b.row_dims:
        raise ValueError(f"column dims {a.col_dims} do not match row dims {b.row_dims}")
    return RingMatrix([matmul_core(x, y) for x, y in zip(a.cores, b.cores)], copy=False)


def tr_transpose(a: RingMatrix) -> RingMatrix:
    return RingMatrix([c.transpose(0, 2, 1, 3) for c in a.cores])


def tr_param_count(x: Ring) -> int:
    return x.param_count()


def tr_norm(x: Ring) -> float:
    """Frobenius norm of the represented tensor.

    ``||A||^2 = Trace(E_1 ... E_d)`` with ``E_k = sum_i A_k(i) kron A_k(i)``.
    The product is accumulated as a state ``X[p, s, a, b]`` updated by
    ``A_k(i)^T X A_k(i)`` per slice, never forming ``E_k``. When that state
    would hold more than ``TRANSFER_STATE_LIMIT`` entries and the dense
    tensor fits, the tensor is contracted instead.
    """
    cores = [flatten_phys(c) for c in x.cores]
    r1 = cores[0].shape[0]
    state = r1 * r1 * max(c.shape[-1] for c in cores) ** 2
    dense_size = math.prod(c.shape[1] for c in cores)
    if state > TRANSFER_STATE_LIMIT and dense_size <= MAX_DENSE_ENTRIES:
        return float(np.linalg.norm(ring_contract_flat(cores)))
    return math.sqrt(max(_transfer_norm_sq(cores), 0.0))


def _transfer_norm_sq(cores: list[np.ndarray]) -> float:
    c0 = cores[0]
    r1 = c0.shape[0]
    x = np.einsum("pia,sib->psab", c0, c0).reshape(r1 * r1, c0.shape[-1], c0.shape[-1])
    for c in cores[1:]:
        out = np.zeros((r1 * r1, c.shape[-1], c.shape[-1]))
        for i in range(c.shape[1]):
            ci = c[:, i, :]
            out += ci.T @ x @ ci
        x = out
    x = x.reshape(r1, r1, r1, r1)
    return float(np.einsum("psps->", x))


def tr_round(x: Ring, epsilon: float) -> Ring:
    """Reduce ranks while keeping the relative error at most ``epsilon``.

    Each SVD truncation uses ``delta = epsilon * ||x|| / sqrt(d * R_1)``:

    1. left-orthogonalize cores 0..d-2 by thin QR, with the ring index ``R_1``
       kept as an extra row index of core 0 (and column index of core d-1);
    2. truncate edges d-1 .. 1 right to left;
    3. treat the chain as starting at core 1, left-orthogonalize cores 1..d-1
       and truncate edge 0 on core 0.

    Steps 1-2 bound the error by ``sqrt(R_1)`` times the discarded tail, step 3
    by ``sqrt(R_2)`` times its tail. Step 3's threshold is lowered when needed
    so the two together stay within ``epsilon``.
    """
    out, _ = _tr_round_impl(x, epsilon)
    return out


def _tr_round_impl(x: Ring, epsilon: float) -> tuple[Ring, dict[int, np.ndarray]]:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    phys = x.phys_shapes
    cores = [flatten_phys(c) for c in x.cores]
    d = len(cores)
    spectra: dict[int, np.ndarray] = {}
    if d == 1:
        return x._replace(list(x.cores)), spectra
    norm = tr_norm(x)
    r1 = cores[0].shape[0]
    delta = epsilon * norm / math.sqrt(d * r1)

    _left_orthogonalize(cores, range(d - 1))

    tail_sq = 0.0
    for k in range(d - 1, 0, -1):
        s, tail = _truncate_left_edge(cores, k, k - 1, delta)
        spectra[k] = s
        tail_sq += tail**2

    _left_orthogonalize(cores, range(1, d))
    open_rank = cores[0].shape[-1]
    spent = math.sqrt(r1 * tail_sq)
    delta0 = min(delta, max(epsilon * norm - spent, 0.0) / math.sqrt(open_rank))
    s, _ = _truncate_left_edge(cores, 0, d - 1, delta0)
    spectra[0] = s

    return x._replace([restore_phys(c, p) for c, p in zip(cores, phys)]), spectra


def _left_orthogonalize(cores: list[np.ndarray], ks) -> None:
    d = len(cores)
    for k in ks:
        r, n, s = cores[k].shape
        q, rr = qr_thin(cores[k].reshape(r * n, s))
        cores[k] = q.reshape(r, n, -1)
        nxt = (k + 1) % d
        cores[nxt] = np.tensordot(rr, cores[nxt], axes=(1, 0))


def _truncate_left_edge(cores: list[np.ndarray], k: int, prev: int, delta: float) -> tuple[np.ndarray, float]:
    """SVD-truncate core ``k`` unfolded as ``R_k x (n R_{k+1})``, pushing ``U S`` into core ``prev``."""
    r, n, s = cores[k].shape
    full = svd(cores[k].reshape(r, n * s))
    sv = full.singular_values
    rank = truncation_rank(sv, delta)
    tail = float(np.sqrt(np.sum(sv[rank:] ** 2)))
    if rank == 0:
        vt = np.zeros((1, n * s))
        us = np.zeros((r, 1))
    else:
        vt = full.right_vectors[:, :rank].T
        us = full.left_vectors[:, :rank] * sv[:rank]
    cores[k] = vt.reshape(-1, n, s)
    cores[prev] = cores[prev] @ us
    return sv, tail


def singular_profile(x: Ring, core_index: int, epsilon: float = 1e-10) -> np.ndarray:
    """Scaled singular values that ``tr_round`` sees at core ``core_index``.

    These are the singular values of the core's left-edge unfolding at the
    moment the rounding sweep truncates it, times ``sqrt(d * R_1) / ||x||``.
    A value ``v`` at position ``j`` means truncating to rank ``j`` costs a
    relative error of at least about ``v``.
    """
    d = x.d
    if not 0 <= core_index < d:
        raise ValueError(f"core index must lie in [0, {d - 1}], got {core_index}")
    if d == 1:
        raise ValueError("a single-core ring has no edge to truncate")
    _, spectra = _tr_round_impl(x, epsilon)
    norm = tr_norm(x)
    scale = math.sqrt(d * x.ranks[0]) / norm
    return np.sort(spectra[core_index])[::-1] * scale


def tr_to_tt(x: Ring, cut_edge: int = 0) -> TensorTrain | TrainMatrix:
    """Open the ring at ``cut_edge`` as a sum of ``R`` trains, one per value
    of the removed index.

    For ``cut_edge != 0`` the cores are taken in rotated order starting at
    core ``cut_edge``, so the train represents the cyclically permuted tensor.
    """
    d = x.d
    if not 0 <= cut_edge < d:
        raise ValueError(f"cut edge must lie in [0, {d - 1}], got {cut_edge}")
    cores = cyclic_shift(x, cut_edge).cores
    kind = TrainMatrix if isinstance(x, RingMatrix) else TensorTrain
    total = None
    for rho in range(cores[0].shape[0]):
        if d == 1:
            term = kind([cores[0][rho : rho + 1, ..., rho : rho + 1]])
        else:
            term = kind(
                [cores[0][rho : rho + 1], *cores[1:-1], cores[-1][..., rho : rho + 1]]
            )
        total = term if total is None else tt_add(total, term)
    return total


def tt_to_tr(x: TensorTrain | TrainMatrix, target_R1: int = 1) -> Ring:
    """Ring representing the same tensor, with ring rank up to ``target_R1``.

    ``target_R1 = 1`` reuses the train cores as they are. Larger values
    right-orthogonalize the train, take the SVD ``U S V^T`` of the first core
    (modes by rank), and split its ``r`` columns as ``(rho, beta)`` with
    ``rho`` fastest: ``rho`` becomes the ring index ``R_1 = min(target_R1, r)``
    and ``beta`` the second rank. The ``rho`` index emitted by core 1 is
    carried through the remaining cores to close the ring. The result is exact
    but not rank-reduced; follow with ``tr_round``.
    """
    if target_R1 < 1:
        raise ValueError(f"target_R1 must be >= 1, got {target_R1}")
    ring_kind = RingMatrix if isinstance(x, TrainMatrix) else TensorRing
    if target_R1 == 1:
        return ring_kind(list(x.cores))
    d = x.d
    if d == 1:
        raise ValueError("a single-core train cannot be given a ring rank above 1")
    phys = x.phys_shapes
    cores = [flatten_phys(c) for c in x.cores]
    for k in range(d - 1, 0, -1):
        r, n, s = cores[k].shape
        q, rr = qr_thin(cores[k].reshape(r, n * s).T)
        cores[k] = q.T.reshape(-1, n, s)
        cores[k - 1] = cores[k - 1] @ rr.T
    g0 = cores[0][0]  # (n0, r1)
    full = svd(g0)
    r = full.singular_values.size
    big_r = min(int(target_R1), r)
    beta = -(-r // big_r)
    width = big_r * beta
    u = np.zeros((g0.shape[0], width))
    u[:, :r] = full.left_vectors
    w = np.zeros((width, g0.shape[1]))
    w[:r] = full.singular_values[:, None] * full.right_vectors.T
    n0 = g0.shape[0]
    new0 = u.reshape(n0, beta, big_r).transpose(2, 0, 1)  # (rho, i, beta)
    r1, n1, r2 = cores[1].shape
    h = np.tensordot(w, cores[1], axes=(1, 0)).reshape(beta, big_r, n1, r2)
    new1 = h.transpose(0, 2, 3, 1).reshape(beta, n1, r2 * big_r)  # right index (a', rho)
    new = [new0, new1]
    eye = np.eye(big_r)
    for c in cores[2:]:
        r, n, s = c.shape
        carried = np.einsum("aib,pq->apibq", c, eye).reshape(r * big_r, n, s * big_r)
        new.append(carried)
    return ring_kind([restore_phys(c, p) for c, p in zip(new, phys)], copy=False)


def _check_same(a, b) -> None:
    if type(a) is not type(b):
        raise TypeError(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    if a.d != b.d:
        raise ValueError(f"different number of cores: {a.d} vs {b.d}")
    if a.phys_shapes != b.phys_shapes:
        raise ValueError(f"mode mismatch: {a.phys_shapes} vs {b.phys_shapes}")
