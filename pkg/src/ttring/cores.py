"""Pieces shared by trains and rings: rank vectors, the core container and
core-wise product kernels.

Cores are float64 ndarrays of shape ``(r_left, n, r_right)`` for vectors and
``(r_left, n_row, n_col, r_right)`` for matrices. Sweeps flatten the physical
axes into one and restore them afterwards.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np


class RankVector(tuple):
    """Ranks ``(R_1, ..., R_d, R_1)`` with the elementwise partial order.

    ``a <= b`` holds when every rank of ``a`` is at most the matching rank of
    ``b``; two vectors can be incomparable.
    """

    def __new__(cls, ranks: Iterable[int]):
        t = tuple(int(r) for r in ranks)
        if len(t) < 2:
            raise ValueError("a rank vector needs at least two entries")
        if t[0] != t[-1]:
            raise ValueError(f"last rank must equal the first, got {t}")
        if any(r < 1 for r in t):
            raise ValueError(f"ranks must be >= 1, got {t}")
        return super().__new__(cls, t)

    def _check(self, other) -> tuple:
        other = tuple(other)
        if len(other) != len(self):
            raise ValueError(f"cannot compare rank vectors of length {len(self)} and {len(other)}")
        return other

    def __le__(self, other) -> bool:
        return all(a <= b for a, b in zip(self, self._check(other)))

    def __ge__(self, other) -> bool:
        return all(a >= b for a, b in zip(self, self._check(other)))

    def __lt__(self, other) -> bool:
        return self <= other and tuple(self) != tuple(other)

    def __gt__(self, other) -> bool:
        return self >= other and tuple(self) != tuple(other)

    __hash__ = tuple.__hash__

    def __eq__(self, other) -> bool:
        return tuple.__eq__(self, other)

    def __ne__(self, other) -> bool:
        return tuple.__ne__(self, other)

    @property
    def max(self) -> int:
        return max(self)

    @property
    def d(self) -> int:
        return len(self) - 1

    def __mul__(self, other) -> RankVector:
        other = self._check(other)
        return RankVector(a * b for a, b in zip(self, other))

    def __add__(self, other) -> RankVector:
        other = self._check(other)
        return RankVector(a + b for a, b in zip(self, other))

    def __repr__(self) -> str:
        return f"RankVector{tuple(self)}"


def uniform_ranks(d: int, r: int) -> RankVector:
    return RankVector([r] * (d + 1))


class CoreNetwork:
    """Validated, read-only list of cores. Subclasses fix the core order
    (3 for vectors, 4 for matrices) and whether the chain closes into a ring."""

    core_ndim = 3
    closed = True

    def __init__(self, cores: Sequence[np.ndarray], *, copy: bool = True) -> None:
        if len(cores) == 0:
            raise ValueError("a network needs at least one core")
        arrs = []
        for k, c in enumerate(cores):
            a = np.array(c, dtype=np.float64, copy=copy)
            if a.ndim != self.core_ndim:
                raise ValueError(
                    f"core {k} has ndim {a.ndim}, expected {self.core_ndim}"
                )
            if any(s < 1 for s in a.shape):
                raise ValueError(f"core {k} has an empty dimension: {a.shape}")
            a.setflags(write=False)
            arrs.append(a)
        d = len(arrs)
        for k in range(d - 1):
            if arrs[k].shape[-1] != arrs[k + 1].shape[0]:
                raise ValueError(
                    f"rank mismatch between core {k} ({arrs[k].shape}) "
                    f"and core {k + 1} ({arrs[k + 1].shape})"
                )
        if self.closed:
            if arrs[-1].shape[-1] != arrs[0].shape[0]:
                raise ValueError(
                    f"ring does not close: last core ends with rank {arrs[-1].shape[-1]}, "
                    f"first core starts with {arrs[0].shape[0]}"
                )
        elif arrs[0].shape[0] != 1 or arrs[-1].shape[-1] != 1:
            raise ValueError(
                f"train boundary ranks must be 1, got {arrs[0].shape[0]} and {arrs[-1].shape[-1]}"
            )
        self._cores = tuple(arrs)

    @property
    def cores(self) -> tuple[np.ndarray, ...]:
        return self._cores

    @property
    def d(self) -> int:
        return len(self._cores)

    @property
    def ranks(self) -> RankVector:
        return RankVector([c.shape[0] for c in self._cores] + [self._cores[-1].shape[-1]])

    @property
    def phys_shapes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c.shape[1:-1] for c in self._cores)

    @property
    def dims(self) -> tuple[int, ...]:
        """Row (or only) mode sizes."""
        return tuple(c.shape[1] for c in self._cores)

    def param_count(self) -> int:
        return sum(c.size for c in self._cores)

    def __len__(self) -> int:
        return self.d

    def __repr__(self) -> str:
        return f"{type(self).__name__}(d={self.d}, phys={self.phys_shapes}, ranks={tuple(self.ranks)})"

    def _replace(self, cores):
        return type(self)(cores, copy=False)


def flatten_phys(core: np.ndarray) -> np.ndarray:
    return core.reshape(core.shape[0], -1, core.shape[-1])


def restore_phys(core: np.ndarray, phys: tuple[int, ...]) -> np.ndarray:
    return core.reshape((core.shape[0],) + tuple(phys) + (core.shape[-1],))


def block_diag_core(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Core whose every slice is ``diag(a_slice, b_slice)``."""
    ra, rb = a.shape[0], b.shape[0]
    sa, sb = a.shape[-1], b.shape[-1]
    out = np.zeros((ra + rb,) + a.shape[1:-1] + (sa + sb,))
    out[:ra, ..., :sa] = a
    out[ra:, ..., sa:] = b
    return out


# Core-wise products.
#
# Hadamard:  C(:, i, :) = A(:, i, :) kron B(:, i, :)            (B index fastest)
# Matmul:    C([r s], i, l, [r' s']) = sum_j A(r, i, j, r') B(s, j, l, s'),
#            [r s] = r + s * R_A                                 (A index fastest)
#
# Both are sums of Kronecker products of slice pairs, which is what PairCore
# exploits to contract a product core against small matrices without forming it.


def hadamard_core(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1:-1] != b.shape[1:-1]:
        raise ValueError(f"mode mismatch: {a.shape[1:-1]} vs {b.shape[1:-1]}")
    a3, b3 = flatten_phys(a), flatten_phys(b)
    c = np.einsum("xiy,uiv->xuiyv", a3, b3)
    c = c.reshape(a3.shape[0] * b3.shape[0], a3.shape[1], a3.shape[2] * b3.shape[2])
    return restore_phys(c, a.shape[1:-1])


def matmul_core(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 4 or b.ndim != 4:
        raise ValueError("matrix cores must be 4-way")
    if a.shape[2] != b.shape[1]:
        raise ValueError(f"inner dimension mismatch: {a.shape[2]} vs {b.shape[1]}")
    c = np.einsum("rijR,sjlS->srilSR", a, b, optimize=True)
    ra, ni, _, sa = a.shape
    rb, _, nl, sb = b.shape
    return c.reshape(rb * ra, ni, nl, sb * sa)


class PairCore:
    """A product core held as its two factors.

    ``contract(left, right)`` returns ``left @ C @ right.T`` along the rank
    axes, flattened physical axis in the middle, without building ``C``.
    """

    def __init__(self, kind: str, a: np.ndarray, b: np.ndarray) -> None:
        if kind == "hadamard":
            if a.shape[1:-1] != b.shape[1:-1]:
                raise ValueError(f"mode mismatch: {a.shape[1:-1]} vs {b.shape[1:-1]}")
            self.phys = a.shape[1:-1]
            a3, b3 = flatten_phys(a), flatten_phys(b)
            self._slices = [[(a3[:, p, :], b3[:, p, :])] for p in range(a3.shape[1])]
            self.outer = (a.shape[0], a.shape[-1])
            self.inner = (b.shape[0], b.shape[-1])
        elif kind == "matmul":
            if a.shape[2] != b.shape[1]:
                raise ValueError(f"inner dimension mismatch: {a.shape[2]} vs {b.shape[1]}")
            self.phys = (a.shape[1], b.shape[2])
            self._slices = [
                [(b[:, j, l, :], a[:, i, j, :]) for j in range(a.shape[2])]
                for i in range(a.shape[1])
                for l in range(b.shape[2])
            ]
            self.outer = (b.shape[0], b.shape[-1])
            self.inner = (a.shape[0], a.shape[-1])
        else:
            raise ValueError(f"unknown product kind {kind!r}")
        self.kind = kind
        self.left_rank = self.outer[0] * self.inner[0]
        self.right_rank = self.outer[1] * self.inner[1]
        self.n = math.prod(self.phys)

    def explicit(self) -> np.ndarray:
        c = np.empty((self.left_rank, self.n, self.right_rank))
        for p, pairs in enumerate(self._slices):
            c[:, p, :] = sum(np.kron(x, y) for x, y in pairs)
        return c

    def contract(self, left: np.ndarray | None = None, right: np.ndarray | None = None) -> np.ndarray:
        if left is None and right is None:
            return self.explicit()
        qo, qi = self.outer, self.inner
        if right is not None:
            qr = right.shape[0]
            r3 = right.reshape(qr, qo[1], qi[1])
            ql = left.shape[0] if left is not None else self.left_rank
            out = np.empty((ql, self.n, qr))
            for p, pairs in enumerate(self._slices):
                z = sum(x @ r3 @ y.T for x, y in pairs)  # (qr, outer_l, inner_l)
                z = z.reshape(qr, -1)
                out[:, p, :] = (left @ z.T) if left is not None else z.T
            return out
        ql = left.shape[0]
        l3 = left.reshape(ql, qo[0], qi[0])
        out = np.empty((ql, self.n, self.right_rank))
        for p, pairs in enumerate(self._slices):
            z = sum(x.T @ l3 @ y for x, y in pairs)  # (ql, outer_r, inner_r)
            out[:, p, :] = z.reshape(ql, -1)
        return out


def chain_contract(cores3: Sequence[np.ndarray]) -> np.ndarray:
    """Contract a chain of 3-way cores, keeping both boundary indices.

    Returns shape ``(r_first, N, r_last)`` with the physical multi-index
    flattened in C order (last core's index fastest).
    """
    m = cores3[0]
    r0 = m.shape[0]
    for c in cores3[1:]:
        r, n, s = c.shape
        n_prev = m.shape[1]
        m = (m.reshape(r0 * n_prev, r) @ c.reshape(r, n * s)).reshape(r0, n_prev * n, s)
    return m


def ring_contract_flat(cores3: Sequence[np.ndarray]) -> np.ndarray:
    """Trace contraction of a ring of 3-way cores into a flat C-order vector."""
    d = len(cores3)
    if d == 1:
        return np.einsum("aia->i", cores3[0])
    m = d // 2
    left = chain_contract(cores3[:m])  # (R1, Nl, a)
    right = chain_contract(cores3[m:])  # (a, Nr, R1)
    r1, nl, a = left.shape
    l2 = left.transpose(1, 0, 2).reshape(nl, r1 * a)
    r2 = right.transpose(2, 0, 1).reshape(r1 * a, -1)
    return (l2 @ r2).ravel()


def dense_from_flat(flat: np.ndarray, phys_shapes: Sequence[tuple[int, ...]]) -> np.ndarray:
    """Reshape a C-order flat contraction into (rows..., cols...) natural order."""
    interleaved = [n for shp in phys_shapes for n in shp]
    arr = flat.reshape(interleaved)
    width = len(phys_shapes[0])
    if width == 1:
        return arr
    d = len(phys_shapes)
    perm = [k * width + w for w in range(width) for k in range(d)]
    return arr.transpose(perm)
