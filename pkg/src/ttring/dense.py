"""Dense d-way tensors.

A :class:`DenseTensor` wraps a float64 ndarray indexed in natural order
``t[i1, ..., id]``. Wherever a flat layout or a matrix unfolding is needed the
linearization is column-major (first index fastest), so ``data`` and
:func:`unfold` follow the same convention as core ranks and Kronecker indices.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

MAX_DENSE_ENTRIES = 10**8


class DenseSizeError(ValueError):
    """Raised when a dense tensor would exceed :data:`MAX_DENSE_ENTRIES`."""


def check_dense_size(shape: Sequence[int]) -> None:
    n = math.prod(int(s) for s in shape)
    if n > MAX_DENSE_ENTRIES:
        raise DenseSizeError(
            f"dense tensor of shape {tuple(shape)} has {n} entries "
            f"(limit {MAX_DENSE_ENTRIES})"
        )


class DenseTensor:
    """Immutable d-way array of float64 values."""

    __slots__ = ("_array",)

    def __init__(self, array) -> None:
        a = np.array(array, dtype=np.float64)
        if a.ndim == 0:
            a = a.reshape(1)
        if any(s < 1 for s in a.shape):
            raise ValueError(f"all dimensions must be >= 1, got {a.shape}")
        check_dense_size(a.shape)
        a.setflags(write=False)
        self._array = a

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def shape(self) -> tuple[int, ...]:
        return self._array.shape

    @property
    def ndim(self) -> int:
        return self._array.ndim

    @property
    def size(self) -> int:
        return self._array.size

    @property
    def data(self) -> np.ndarray:
        """Entries as a flat column-major vector."""
        return self._array.ravel(order="F")

    def __repr__(self) -> str:
        return f"DenseTensor(shape={self.shape})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._array, other._array))

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: DenseTensor) -> DenseTensor:
        _same_shape(self, other)
        return DenseTensor(self._array + other._array)

    def __sub__(self, other: DenseTensor) -> DenseTensor:
        _same_shape(self, other)
        return DenseTensor(self._array - other._array)

    def __mul__(self, c: float) -> DenseTensor:
        return DenseTensor(self._array * float(c))

    __rmul__ = __mul__


def make_dense(shape: Sequence[int], data) -> DenseTensor:
    """Build a tensor from a column-major flat ``data`` vector."""
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0:
        raise ValueError("shape must have at least one dimension")
    if any(s < 1 for s in shape):
        raise ValueError(f"all dimensions must be >= 1, got {shape}")
    flat = np.asarray(data, dtype=np.float64).ravel()
    if flat.size != math.prod(shape):
        raise ValueError(
            f"data has {flat.size} entries but shape {shape} needs {math.prod(shape)}"
        )
    return DenseTensor(flat.reshape(shape, order="F"))


def unfold(t: DenseTensor, split: int) -> np.ndarray:
    """Matrix with the first ``split`` modes as rows and the rest as columns."""
    d = t.ndim
    if not 0 <= split <= d:
        raise ValueError(f"split must lie in [0, {d}], got {split}")
    rows = math.prod(t.shape[:split])
    return t.array.reshape(rows, -1, order="F")


def fold(m, shape: Sequence[int], split: int) -> DenseTensor:
    """Inverse of :func:`unfold`."""
    m = np.asarray(m, dtype=np.float64)
    shape = tuple(int(s) for s in shape)
    if not 0 <= split <= len(shape):
        raise ValueError(f"split must lie in [0, {len(shape)}], got {split}")
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {m.ndim}")
    expected = (math.prod(shape[:split]), math.prod(shape[split:]))
    if m.shape != expected:
        raise ValueError(f"matrix shape {m.shape} does not match {expected} for split {split}")
    return DenseTensor(m.reshape(shape, order="F"))


def permute(t: DenseTensor, perm: Sequence[int]) -> DenseTensor:
    """Reorder modes; output mode ``k`` is input mode ``perm[k]`` (0-based)."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(t.ndim)):
        raise ValueError(f"{perm} is not a permutation of 0..{t.ndim - 1}")
    return DenseTensor(np.transpose(t.array, perm))


def hadamard_dense(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    _same_shape(a, b)
    return DenseTensor(a.array * b.array)


def fro_norm(t: DenseTensor) -> float:
    return float(np.linalg.norm(t.array.ravel()))


def rel_error(a: DenseTensor, b: DenseTensor) -> float:
    """``||a - b||_F / ||b||_F``; ``b`` is the reference."""
    _same_shape(a, b)
    ref = fro_norm(b)
    if ref == 0.0:
        raise ZeroDivisionError("reference tensor has zero norm")
    return float(np.linalg.norm((a.array - b.array).ravel())) / ref


def _same_shape(a: DenseTensor, b: DenseTensor) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
