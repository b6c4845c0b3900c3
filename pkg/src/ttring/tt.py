"""Tensor trains: open chains of cores with boundary ranks 1.

Rounding follows the usual two sweeps: right-to-left QR to make cores
2..d right-orthogonal, then left-to-right truncated SVDs with a per-edge
threshold ``eps * ||x|| / sqrt(d - 1)``, which bounds the relative error of
the result by ``eps``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .cores import (
    CoreNetwork,
    PairCore,
    block_diag_core,
    dense_from_flat,
    flatten_phys,
    hadamard_core,
    matmul_core,
    restore_phys,
    ring_contract_flat,
)
from .dense import DenseTensor, check_dense_size, fro_norm
from .linalg import qr_thin, truncated_svd


class TensorTrain(CoreNetwork):
    """Cores of shape ``(r_k, I_k, r_{k+1})`` with ``r_1 = r_{d+1} = 1``."""

    core_ndim = 3
    closed = False


class TrainMatrix(CoreNetwork):
    """Cores of shape ``(r_k, I_k, J_k, r_{k+1})``; represents an
    ``(I_1...I_d) x (J_1...J_d)`` matrix."""

    core_ndim = 4
    closed = False

    @property
    def row_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def col_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores)


Train = TensorTrain | TrainMatrix


def tt_random(dims: Sequence[int], ranks: Sequence[int] | int, seed=None) -> TensorTrain:
    """Train with i.i.d. standard normal cores; ``ranks`` are the d-1 interior ranks
    or a single uniform value."""
    d = len(dims)
    if isinstance(ranks, int):
        ranks = [ranks] * (d - 1)
    full = [1, *ranks, 1]
    if len(full) != d + 1:
        raise ValueError(f"need {d - 1} interior ranks, got {len(full) - 2}")
    rng = np.random.default_rng(seed)
    return TensorTrain([rng.standard_normal((full[k], dims[k], full[k + 1])) for k in range(d)])


def tt_ones(phys_shapes: Sequence[int | tuple[int, ...]]) -> TensorTrain | TrainMatrix:
    """Rank-1 train of the all-ones tensor."""
    shapes = [(p,) if isinstance(p, int) else tuple(p) for p in phys_shapes]
    cores = [np.ones((1, *s, 1)) for s in shapes]
    return TrainMatrix(cores) if len(shapes[0]) == 2 else TensorTrain(cores)


def tt_scale(x: Train, c: float) -> Train:
    cores = list(x.cores)
    cores[0] = cores[0] * float(c)
    return x._replace(cores)


def tt_svd(t: DenseTensor, epsilon: float) -> TensorTrain:
    """Sequential truncated SVDs of a dense tensor."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    dims = t.shape
    d = len(dims)
    if d == 1:
        return TensorTrain([t.array.reshape(1, dims[0], 1)])
    delta = epsilon * fro_norm(t) / math.sqrt(d - 1)
    cores = []
    c = np.array(t.array)
    r_prev = 1
    for k in range(d - 1):
        c = c.reshape(r_prev * dims[k], -1)
        u, carry = _split_left(c, delta)
        cores.append(u.reshape(r_prev, dims[k], -1))
        c = carry
        r_prev = u.shape[1]
    cores.append(c.reshape(r_prev, dims[-1], 1))
    return TensorTrain(cores, copy=False)


def tt_contract(x: Train) -> DenseTensor:
    """Dense tensor of a train. Matrix trains give shape ``(I_1..I_d, J_1..J_d)``."""
    phys = x.phys_shapes
    check_dense_size([n for p in phys for n in p])
    flat = ring_contract_flat([flatten_phys(c) for c in x.cores])
    return DenseTensor(dense_from_flat(flat, phys))


def tt_add(a: Train, b: Train) -> Train:
    _check_same_kind(a, b)
    if a.phys_shapes != b.phys_shapes:
        raise ValueError(f"mode mismatch: {a.phys_shapes} vs {b.phys_shapes}")
    if a.d == 1:
        return a._replace([a.cores[0] + b.cores[0]])
    cores = [np.concatenate([a.cores[0], b.cores[0]], axis=-1)]
    cores += [block_diag_core(ca, cb) for ca, cb in zip(a.cores[1:-1], b.cores[1:-1])]
    cores.append(np.concatenate([a.cores[-1], b.cores[-1]], axis=0))
    return a._replace(cores)


def tt_hadamard(a: Train, b: Train) -> Train:
    _check_same_kind(a, b)
    if a.phys_shapes != b.phys_shapes:
        raise ValueError(f"mode mismatch: {a.phys_shapes} vs {b.phys_shapes}")
    return a._replace([hadamard_core(x, y) for x, y in zip(a.cores, b.cores)])


def tt_matmul(a: TrainMatrix, b: TrainMatrix) -> TrainMatrix:
    _check_matmul(a, b)
    return TrainMatrix([matmul_core(x, y) for x, y in zip(a.cores, b.cores)], copy=False)


def tt_transpose(a: TrainMatrix) -> TrainMatrix:
    return TrainMatrix([c.transpose(0, 2, 1, 3) for c in a.cores])


def tt_norm(x: Train) -> float:
    cores = _right_orthogonalize([flatten_phys(c) for c in x.cores])
    return float(np.linalg.norm(cores[0]))


def tt_param_count(x: Train) -> int:
    return x.param_count()


def tt_round(x: Train, epsilon: float) -> Train:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    phys = x.phys_shapes
    cores = _round_chain([flatten_phys(c) for c in x.cores], epsilon)
    return x._replace([restore_phys(c, p) for c, p in zip(cores, phys)])


def tt_hadamard_round(a: Train, b: Train, epsilon: float) -> Train:
    """``tt_round(tt_hadamard(a, b), epsilon)`` without forming the product cores."""
    _check_same_kind(a, b)
    if a.phys_shapes != b.phys_shapes:
        raise ValueError(f"mode mismatch: {a.phys_shapes} vs {b.phys_shapes}")
    pairs = [PairCore("hadamard", x, y) for x, y in zip(a.cores, b.cores)]
    return _round_pairs(pairs, epsilon, a._replace)


def tt_matmul_round(a: TrainMatrix, b: TrainMatrix, epsilon: float) -> TrainMatrix:
    """``tt_round(tt_matmul(a, b), epsilon)`` without forming the product cores."""
    _check_matmul(a, b)
    pairs = [PairCore("matmul", x, y) for x, y in zip(a.cores, b.cores)]
    return _round_pairs(pairs, epsilon, lambda cs: TrainMatrix(cs, copy=False))


def series_apply(x: Train, coeffs: Sequence[float], epsilon: float) -> Train:
    """Entrywise polynomial ``sum_p coeffs[p] * x**p`` by Horner's rule.

    Every Hadamard product and every addition is followed by ``tt_round`` at
    ``epsilon``, so the overall error grows roughly like ``len(coeffs) * epsilon``.
    """
    if len(coeffs) == 0:
        raise ValueError("need at least one coefficient")
    ones = tt_ones(x.phys_shapes)
    y = tt_scale(ones, coeffs[-1])
    for c in reversed(coeffs[:-1]):
        y = tt_round(tt_hadamard(y, x), epsilon)
        y = tt_round(tt_add(y, tt_scale(ones, c)), epsilon)
    return y


# sweeps on lists of 3-way cores


def _split_left(m: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Truncated ``m ~ u @ carry`` with orthonormal ``u``; rank 0 becomes a zero rank-1 pair."""
    res, r = truncated_svd(m, delta)
    if r == 0:
        return np.zeros((m.shape[0], 1)), np.zeros((1, m.shape[1]))
    return res.left_vectors, res.singular_values[:, None] * res.right_vectors.T


def _right_orthogonalize(cores: list[np.ndarray]) -> list[np.ndarray]:
    cores = list(cores)
    for k in range(len(cores) - 1, 0, -1):
        r, n, s = cores[k].shape
        q, rr = qr_thin(cores[k].reshape(r, n * s).T)
        cores[k] = q.T.reshape(-1, n, s)
        cores[k - 1] = cores[k - 1] @ rr.T
    return cores


def _round_chain(cores: list[np.ndarray], epsilon: float) -> list[np.ndarray]:
    d = len(cores)
    cores = _right_orthogonalize(cores)
    if d == 1:
        return cores
    delta = epsilon * float(np.linalg.norm(cores[0])) / math.sqrt(d - 1)
    for k in range(d - 1):
        r, n, s = cores[k].shape
        u, carry = _split_left(cores[k].reshape(r * n, s), delta)
        cores[k] = u.reshape(r, n, -1)
        cores[k + 1] = np.tensordot(carry, cores[k + 1], axes=(1, 0))
    return cores


def _round_pairs(pairs: list[PairCore], epsilon: float, build) -> Train:
    cores = _compact_pairs(pairs)
    cores = _round_chain(cores, epsilon)
    return build([restore_phys(c, p.phys) for c, p in zip(cores, pairs)])


def _compact_pairs(pairs: list[PairCore]) -> list[np.ndarray]:
    """Exact explicit train for a product of trains, in mixed canonical form.

    Cores left of a center are left-orthogonalized and cores right of it are
    right-orthogonalized through ``PairCore.contract``, so no intermediate rank
    exceeds the product of the physical sizes on its side of the center.
    """
    d = len(pairs)
    sizes = [p.n for p in pairs]
    center = min(
        range(d),
        key=lambda c: max(math.prod(sizes[:c]), math.prod(sizes[c + 1 :])),
    )
    out: list[np.ndarray] = [None] * d  # type: ignore[list-item]
    left = np.ones((1, 1))
    for k in range(center):
        w = pairs[k].contract(left=left)
        q, n, big = w.shape
        qq, left = qr_thin(w.reshape(q * n, big))
        out[k] = qq.reshape(q, n, -1)
    right = np.ones((1, 1))
    for k in range(d - 1, center, -1):
        w = pairs[k].contract(right=right)
        big, n, q = w.shape
        qq, right = qr_thin(w.reshape(big, n * q).T)
        out[k] = qq.T.reshape(-1, n, q)
    out[center] = pairs[center].contract(left=left, right=right)
    return out


def _check_same_kind(a, b) -> None:
    if type(a) is not type(b):
        raise TypeError(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    if a.d != b.d:
        raise ValueError(f"different number of cores: {a.d} vs {b.d}")


def _check_matmul(a, b) -> None:
    if not isinstance(a, TrainMatrix) or not isinstance(b, TrainMatrix):
        raise TypeError("tt_matmul needs two TrainMatrix operands")
    if a.d != b.d:
        raise ValueError(f"different number of cores: {a.d} vs {b.d}")
    if a.col_dims != b.row_dims:
        raise ValueError(f"column dims {a.col_dims} do not match row dims {b.row_dims}")
