"""Tensor trains and tensor rings with a complete operation algebra.

Cores are float64 numpy arrays; trains have boundary ranks 1, rings close
their last rank onto the first. All core and edge indices in the Python API
are 0-based.
"""

from .cores import RankVector, uniform_ranks
from .dense import (
    MAX_DENSE_ENTRIES,
    DenseSizeError,
    DenseTensor,
    fold,
    fro_norm,
    hadamard_dense,
    make_dense,
    permute,
    rel_error,
    unfold,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    ExperimentRow,
    run_hadamard_experiment,
    run_matmul_experiment,
    run_tt_to_tr_roundtrip,
)
from .linalg import SvdConvergenceError, SvdResult, kron, qr_thin, svd, truncated_svd
from .tr import (
    RingMatrix,
    TensorRing,
    as_matrix,
    cyclic_shift,
    ring_matrix_contract,
    ring_matrix_random,
    singular_profile,
    tr_add_modified,
    tr_add_naive,
    tr_contract,
    tr_hadamard,
    tr_matmul,
    tr_norm,
    tr_param_count,
    tr_random,
    tr_round,
    tr_to_tt,
    tr_transpose,
    tt_to_tr,
)
from .tt import (
    TensorTrain,
    TrainMatrix,
    series_apply,
    tt_add,
    tt_contract,
    tt_hadamard,
    tt_hadamard_round,
    tt_matmul,
    tt_matmul_round,
    tt_norm,
    tt_ones,
    tt_param_count,
    tt_random,
    tt_round,
    tt_scale,
    tt_svd,
    tt_transpose,
)

__version__ = "0.1.0"
