"""Matrix kernels backing rounding and core products.

QR and SVD are LAPACK calls through scipy. ``kron`` keeps the second factor's
index fastest, the same convention as numpy and as the column-major
multi-index ``[r s] = r + s * R`` used for core products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class SvdConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SvdResult:
    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return self.singular_values.size

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def qr_thin(m) -> tuple[np.ndarray, np.ndarray]:
    """Economic QR: ``Q`` is p x min(p, q) with orthonormal columns."""
    m = np.asarray(m, dtype=np.float64)
    if m.size == 0:
        p, q = m.shape
        k = min(p, q)
        return np.zeros((p, k)), np.zeros((k, q))
    q_, r_ = scipy.linalg.qr(m, mode="economic", check_finite=False)
    return q_, r_


def svd(m) -> SvdResult:
    """Full thin SVD with ``right_vectors`` returned as V (not V^T)."""
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise SvdConvergenceError("matrix contains non-finite entries")
    try:
        u, s, vt = scipy.linalg.svd(
            m, full_matrices=False, check_finite=False, lapack_driver="gesdd"
        )
    except np.linalg.LinAlgError:
        # gesdd occasionally fails where the QR-iteration driver converges.
        try:
            u, s, vt = scipy.linalg.svd(
                m, full_matrices=False, check_finite=False, lapack_driver="gesvd"
            )
        except np.linalg.LinAlgError as exc:
            raise SvdConvergenceError(f"SVD of {m.shape} matrix did not converge") from exc
    return SvdResult(u, s, vt.T)


def truncation_rank(singular_values, delta: float) -> int:
    """Smallest r with sqrt(sum_{j>r} s_j^2) <= delta."""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    s = np.asarray(singular_values, dtype=np.float64)
    # tails[r] = sqrt(sum_{j>=r} s_j^2), with tails[n] = 0
    tails = np.sqrt(np.cumsum((s**2)[::-1])[::-1])
    tails = np.append(tails, 0.0)
    return int(np.argmax(tails <= delta))


def truncated_svd(m, delta: float) -> tuple[SvdResult, int]:
    """Leading triplets of ``m`` whose discarded tail has 2-norm <= delta.

    The returned rank may be 0 when ``||m||_F <= delta``.
    """
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    full = svd(m)
    r = truncation_rank(full.singular_values, delta)
    return (
        SvdResult(
            full.left_vectors[:, :r],
            full.singular_values[:r],
            full.right_vectors[:, :r],
        ),
        r,
    )


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))
