"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line in the pytest summary ("acceptance
criteria" section). Run directly with ``python3 tests/test_acceptance.py``
for the same lines without pytest's other output.
"""

from __future__ import annotations

import numpy as np
import pytest

from ttring.cores import RankVector
from ttring.dense import DenseTensor, rel_error
from ttring.experiments import (
    ExperimentConfig,
    experiment_ring,
    run_hadamard_experiment,
    run_matmul_experiment,
    run_tt_to_tr_roundtrip,
    scaled_profile,
)
from ttring.tr import (
    RingMatrix,
    TensorRing,
    _tr_round_impl,
    tr_add_modified,
    tr_add_naive,
    tr_contract,
    tr_hadamard,
    tr_matmul,
    tr_norm,
    tr_round,
    tr_to_tt,
    tr_transpose,
    tt_to_tr,
)
from ttring.tt import (
    TensorTrain,
    TrainMatrix,
    tt_add,
    tt_contract,
    tt_hadamard,
    tt_matmul,
    tt_norm,
    tt_round,
    tt_svd,
    tt_transpose,
)

from conftest import criterion
from oracles import einsum_dense, matrix_of, nested_sum_ring, rel

R_VALUES = (3, 6, 9, 12)
SEEDS = (0, 1, 2)
EPS = 1e-10


def test_matmul_table_reproduced():
    with criterion(1, "A A^T ranks, R in 3,6,9,12, seeds 0,1,2") as out:
        for seed in SEEDS:
            rep = run_matmul_experiment(ExperimentConfig(kind="matmul", R_values=R_VALUES, seed=seed, epsilon=EPS))
            for row in rep.rows:
                R = row.R
                assert row.tr_rounded_ranks == RankVector([R * R] * 5), f"seed {seed} R {R}: {row.tr_rounded_ranks}"
                assert row.tt_rounded_max == 1, f"seed {seed} R {R}: train rank {row.tt_rounded_max}"
                assert row.ratio == R**4, f"seed {seed} R {R}: ratio {row.ratio}"
        out["text"] = "ring ranks 9,36,81,144; train rank 1; ratios 81,1296,6561,20736"


def test_hadamard_table_reproduced():
    expected_tt = {3: 45, 6: 216, 9: 216, 12: 216}
    expected_ratio = {3: 0.13, 6: 0.48, 9: 2.46, 12: 7.78}
    with criterion(2, "x*x ranks, R in 3,6,9,12, seeds 0,1,2") as out:
        ratios = {}
        for seed in SEEDS:
            rep = run_hadamard_experiment(ExperimentConfig(kind="hadamard", R_values=R_VALUES, seed=seed, epsilon=EPS))
            for row in rep.rows:
                R = row.R
                assert row.tr_rounded_ranks == RankVector([R * R] * 7), f"seed {seed} R {R}: {row.tr_rounded_ranks}"
                assert row.tt_rounded_max == expected_tt[R], f"seed {seed} R {R}: train max {row.tt_rounded_max}"
                ratio = float(row.ratio)
                assert abs(ratio - expected_ratio[R]) <= 0.01, f"seed {seed} R {R}: ratio {ratio:.4f}"
                ratios[R] = ratio
        out["text"] = "train max 45,216,216,216; ratios " + ",".join(f"{ratios[R]:.3f}" for R in R_VALUES)


def _fig3_profile(seed: int) -> np.ndarray:
    ring = experiment_ring("matmul", 6, seed)
    _, spectra = _tr_round_impl(ring, EPS)
    # 0-based core 3 is the fourth core, the first one the sweep truncates
    return scaled_profile(spectra, 3, tr_norm(ring), ring.d, ring.ranks[0])


def test_matmul_profile():
    with criterion(3, "R=6 A A^T profile, fourth core") as out:
        prof = _fig3_profile(seed=1)
        assert prof.size == 36, f"profile has {prof.size} values"
        assert 1e-5 <= prof.min() <= 1e-3, f"smallest value {prof.min():.3e}"
        assert prof[1] >= 0.1, f"second value {prof[1]:.3e}"
        mins = np.array([_fig3_profile(s).min() for s in range(20)])
        median = float(np.median(mins))
        inside = int(np.sum((mins >= 1e-5) & (mins <= 1e-3)))
        assert 1e-5 <= median <= 1e-3, f"median smallest value over 20 seeds {median:.3e}"
        out["text"] = (
            f"seed 1 smallest {prof.min():.2e}, second {prof[1]:.2f}; "
            f"seeds 0-19 median smallest {median:.2e}, {inside}/20 in [1e-5, 1e-3]"
        )


def test_hadamard_profile():
    with criterion(4, "R=12 x*x profile, fifth core") as out:
        lows = []
        for seed in SEEDS:
            rep = run_hadamard_experiment(
                ExperimentConfig(kind="hadamard", R_values=(12,), seed=seed, epsilon=EPS, profile_core=4)
            )
            assert rep.profile.size == 144
            assert rep.profile.min() >= 0.1, f"seed {seed}: smallest value {rep.profile.min():.3e}"
            lows.append(rep.profile.min())
        out["text"] = f"smallest value over seeds 0,1,2: {min(lows):.2f}"


def test_roundtrip():
    with criterion(5, "train product back to ring, R = 4..12") as out:
        Rs = tuple(range(4, 13))
        rep = run_tt_to_tr_roundtrip(ExperimentConfig(kind="tt_to_tr_roundtrip", R_values=Rs, seed=0, epsilon=EPS))
        smaller = []
        for row in rep.rows:
            assert row.tr_rounded_max == 108, f"R {row.R}: max rank {row.tr_rounded_max}"
            if row.tr_params < row.kron_tr_params:
                smaller.append(row.R)
        assert smaller == [R for R in Rs if R >= 7], f"smaller than Kronecker route for R in {smaller}"
        out["text"] = f"max rank 108 for all; {rep.rows[0].tr_params} params, below Kronecker route for R >= 7"


def _random_dims(rng, max_d, max_entries):
    while True:
        d = int(rng.integers(1, max_d + 1))
        dims = tuple(int(n) for n in rng.integers(1, 7, size=d))
        if np.prod(dims) <= max_entries:
            return dims


def _ring_ranks(rng, d, closed=True):
    r = [int(v) for v in rng.integers(1, 5, size=d)]
    if not closed:
        r[0] = 1
    return r + [r[0]]


def _random_cores(rng, shapes, ranks):
    return [rng.standard_normal((ranks[k], *shapes[k], ranks[k + 1])) for k in range(len(shapes))]


def test_dense_oracle_suite():
    tol = 1e-10
    with criterion(6, "50 random instances per operation vs dense oracle") as out:
        worst = {}

        def note(name, err):
            assert err <= tol, f"{name}: relative error {err:.2e}"
            worst[name] = max(worst.get(name, 0.0), err)

        rng = np.random.default_rng(2024)
        for _ in range(50):
            dims = _random_dims(rng, 6, 6**6)
            d = len(dims)
            phys = [(n,) for n in dims]
            a = TensorRing(_random_cores(rng, phys, _ring_ranks(rng, d)))
            b = TensorRing(_random_cores(rng, phys, _ring_ranks(rng, d)))
            ta, tb = einsum_dense(a.cores, True), einsum_dense(b.cores, True)
            note("ring contract", rel(tr_contract(a).array, ta))
            note("ring add naive", rel(tr_contract(tr_add_naive(a, b)).array, ta + tb))
            note("ring add modified", rel(tr_contract(tr_add_modified(a, b)).array, ta + tb))
            note("ring hadamard", rel(tr_contract(tr_hadamard(a, b)).array, ta * tb))
            note("ring norm", abs(tr_norm(a) - np.linalg.norm(ta)) / np.linalg.norm(ta))
            note("ring to train", rel(tt_contract(tr_to_tt(a)).array, ta))

            x = TensorTrain(_random_cores(rng, phys, _ring_ranks(rng, d, closed=False)))
            y = TensorTrain(_random_cores(rng, phys, _ring_ranks(rng, d, closed=False)))
            tx, ty = einsum_dense(x.cores, False), einsum_dense(y.cores, False)
            note("train contract", rel(tt_contract(x).array, tx))
            note("train add", rel(tt_contract(tt_add(x, y)).array, tx + ty))
            note("train hadamard", rel(tt_contract(tt_hadamard(x, y)).array, tx * ty))
            note("train norm", abs(tt_norm(x) - np.linalg.norm(tx)) / np.linalg.norm(tx))
            note("train svd", rel(tt_contract(tt_svd(DenseTensor(tx), 0.0)).array, tx))
            for target in (1, 2):
                if d > 1 or target == 1:
                    note("train to ring", rel(tr_contract(tt_to_tr(x, target)).array, tx))

            # matrices: keep rows * cols within a modest dense size
            md = int(rng.integers(1, 4))
            rows = [int(n) for n in rng.integers(1, 7, size=md)]
            inner = [int(n) for n in rng.integers(1, 7, size=md)]
            cols = [int(n) for n in rng.integers(1, 7, size=md)]
            am = RingMatrix(_random_cores(rng, list(zip(rows, inner)), _ring_ranks(rng, md)))
            bm = RingMatrix(_random_cores(rng, list(zip(inner, cols)), _ring_ranks(rng, md)))
            ma, mb = matrix_of(einsum_dense(am.cores, True)), matrix_of(einsum_dense(bm.cores, True))
            note("ring matmul", rel(matrix_of(tr_contract(tr_matmul(am, bm)).array), ma @ mb))
            note("ring transpose", rel(matrix_of(tr_contract(tr_transpose(am)).array), ma.T))
            note("ring matrix to train", rel(tt_contract(tr_to_tt(am)).array, einsum_dense(am.cores, True)))
            xm = TrainMatrix(_random_cores(rng, list(zip(rows, inner)), _ring_ranks(rng, md, closed=False)))
            ym = TrainMatrix(_random_cores(rng, list(zip(inner, cols)), _ring_ranks(rng, md, closed=False)))
            mx, my = matrix_of(einsum_dense(xm.cores, False)), matrix_of(einsum_dense(ym.cores, False))
            note("train matmul", rel(matrix_of(tt_contract(tt_matmul(xm, ym)).array), mx @ my))
            note("train transpose", rel(matrix_of(tt_contract(tt_transpose(xm)).array), mx.T))

        ints = np.random.default_rng(7)
        cores = [ints.integers(-4, 5, size=(2, 2, 2)).astype(float) for _ in range(3)]
        exact = np.array_equal(tr_contract(TensorRing(cores)).array, nested_sum_ring(cores))
        assert exact, "nested-sum check differs"
        out["text"] = f"{len(worst)} operations, worst error {max(worst.values()):.1e}; nested-sum check exact"


def _inflated_ring(seed: int, noise: float) -> TensorRing:
    rng = np.random.default_rng(seed)
    dims = (4, 3, 5, 3, 4)
    base = TensorRing(_random_cores(rng, [(n,) for n in dims], [2, 3, 2, 3, 2, 2]))
    extra = TensorRing(_random_cores(rng, [(n,) for n in dims], [2] * 6))
    scale = noise * tr_norm(base) / tr_norm(extra)
    extra = TensorRing([extra.cores[0] * scale, *extra.cores[1:]])
    return tr_add_naive(base, extra)


def _inflated_train(seed: int, noise: float) -> TensorTrain:
    rng = np.random.default_rng(seed)
    dims = (4, 3, 5, 3, 4)
    base = TensorTrain(_random_cores(rng, [(n,) for n in dims], [1, 3, 4, 3, 2, 1]))
    extra = TensorTrain(_random_cores(rng, [(n,) for n in dims], [1, 2, 2, 2, 2, 1]))
    scale = noise * tt_norm(base) / tt_norm(extra)
    extra = TensorTrain([extra.cores[0] * scale, *extra.cores[1:]])
    return tt_add(base, extra)


def test_rounding_contracts():
    with criterion(7, "rounding error bound and addition ranks") as out:
        checked = 0
        for eps in (1e-4, 1e-8, 1e-10):
            for seed in range(4):
                for noise in (1e-2, 1e-5, 1e-9, 1e-12):
                    x = _inflated_ring(seed, noise)
                    y = tr_round(x, eps)
                    err = rel_error(tr_contract(y), tr_contract(x))
                    assert err <= eps, f"ring eps {eps} noise {noise}: error {err:.3e}"
                    assert y.ranks <= x.ranks, f"ring ranks grew: {x.ranks} -> {y.ranks}"
                    t = _inflated_train(seed, noise)
                    u = tt_round(t, eps)
                    err = rel_error(tt_contract(u), tt_contract(t))
                    assert err <= eps, f"train eps {eps} noise {noise}: error {err:.3e}"
                    assert u.ranks <= t.ranks, f"train ranks grew: {t.ranks} -> {u.ranks}"
                    checked += 2
        rng = np.random.default_rng(11)
        for R in (2, 3, 4):
            x = TensorRing(_random_cores(rng, [(5,)] * 5, [R] * 6))
            back = tr_round(tr_add_modified(x, x), 1e-10)
            assert back.ranks == x.ranks, f"modified sum rounds to {back.ranks}, expected {x.ranks}"
            naive = tr_round(tr_add_naive(x, x), 1e-10)
            assert min(naive.ranks) >= 2 * R, f"naive sum rounded to {naive.ranks} below {2 * R}"
        out["text"] = f"{checked} roundings within eps; modified sum recovers ranks, naive sum stays at 2R"


if __name__ == "__main__":
    from conftest import format_results

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_") and callable(v)]
    for t in tests:
        try:
            t()
        except AssertionError:
            pass
    for line in format_results():
        print(line)
