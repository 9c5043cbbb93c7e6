import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullproj.errors import InvalidParameterError, NumericalError
from nullproj.inpmat import (InpmatConfig, alternating_projection, inpmat, inpmat_known_sparsity,
                             objective, support_mask)
from nullproj.numerics import pseudo_inverse
from nullproj.results import Termination
from nullproj.rng import make_rng
from nullproj.signals import gen_sensing, gen_sparse_signal, measure, snr_db


def instance(n, m, s, seed, kind="gaussian"):
    x = gen_sparse_signal(n, s, seed).values
    op = gen_sensing(kind, m, n, seed + 10_000)
    return op, x, measure(op, x).y


def pinv_path_limit(Phi, t, y):
    """Closest point of the solution set to the support subspace.

    Rows are orthonormalized first (same solution set), so plain least
    squares on the support measures distance to that set correctly.
    """
    U, sv, Vt = np.linalg.svd(Phi, full_matrices=False)
    W = Vt  # rows span the row space, orthonormal
    yw = (U.T @ y) / sv
    idx = np.flatnonzero(t)
    s = np.zeros(Phi.shape[1])
    s[idx] = np.linalg.lstsq(W[:, idx], yw, rcond=None)[0]
    return s - pseudo_inverse(Phi) @ (Phi @ s - y)


class TestSupportMask:
    def test_zero_threshold(self):
        assert support_mask(np.array([0.0, -1.0, 2.0]), 0.0).all()

    def test_above_max(self):
        assert not support_mask(np.array([1.0, -2.0]), 2.5).any()

    def test_inclusive(self):
        assert support_mask(np.array([3.0, -5.0, 1.0]), 3.0).tolist() == [True, True, False]

    def test_negative(self):
        with pytest.raises(InvalidParameterError):
            support_mask(np.ones(2), -1.0)


class TestObjective:
    def test_full_support(self):
        assert objective(np.arange(4.0), np.ones(4), 0.3) == pytest.approx(1.2)

    def test_empty_support(self):
        x = np.array([1.0, -2.0, 3.0])
        assert objective(x, np.zeros(3), 7.0) == pytest.approx(14.0)

    def test_hand_value(self):
        assert objective(np.array([1.0, 2.0]), np.array([1.0, 0.0]), 0.5) == pytest.approx(4.5)

    def test_negative_lambda(self):
        with pytest.raises(InvalidParameterError):
            objective(np.ones(2), np.ones(2), -1.0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0, 10))
    def test_midpoint_convex_in_relaxed_mask(self, seed, lam):
        rng = make_rng(seed)
        x = rng.standard_normal(8)
        t1, t2 = rng.random(8), rng.random(8)
        mid = objective(x, (t1 + t2) / 2, lam)
        assert mid <= (objective(x, t1, lam) + objective(x, t2, lam)) / 2 + 1e-12


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(eps=0.0), dict(max_iter=0), dict(threshold_source="x"),
                                    dict(tikhonov_mu=-1.0), dict(rank_tol=-1.0),
                                    dict(noise_var=-1.0), dict(objective_lambda=-1.0)])
    def test_rejects(self, kw):
        with pytest.raises(InvalidParameterError):
            InpmatConfig(**kw)

    def test_eps_resolution(self):
        y = np.array([3.0, 4.0])
        assert InpmatConfig(eps=0.5).resolve_eps(y) == 0.5
        assert InpmatConfig(noise_var=0.1).resolve_eps(y) == pytest.approx(0.2)
        assert InpmatConfig().resolve_eps(y) == pytest.approx(25e-10)


class TestInpmat:
    def test_determined_system(self):
        rng = make_rng(1)
        Phi = rng.standard_normal((6, 6))
        y = rng.standard_normal(6)
        r = inpmat(Phi, y)
        assert r.iterations <= 1
        assert np.allclose(r.estimate, np.linalg.solve(Phi, y))

    def test_zero_measurements(self):
        r = inpmat(gen_sensing("gaussian", 5, 10, 0), np.zeros(5))
        assert np.array_equal(r.estimate, np.zeros(10)) and r.iterations == 0

    def test_small_exact_recovery(self):
        op, x, y = instance(100, 40, 5, 2)
        r = inpmat(op, y)
        assert r.termination is Termination.RESIDUAL_MET
        assert snr_db(x, r.estimate) >= 100

    @pytest.mark.parametrize("source", ["fresh", "previous"])
    def test_threshold_monotone_and_support_growth(self, source):
        for seed in range(10):
            op, _, y = instance(80, 30, 6, seed)
            tr = inpmat(op, y, InpmatConfig(threshold_source=source)).trace
            assert all(b <= a for a, b in zip(tr.thresholds, tr.thresholds[1:]))
            if source == "fresh":
                assert all(size <= k + 1 for k, size in enumerate(tr.support_sizes))

    def test_every_iterate_is_feasible(self):
        for seed in range(10):
            op, _, y = instance(60, 25, 5, seed)
            tr = inpmat(op, y).trace
            assert max(tr.residuals) <= (1e-8 * np.linalg.norm(y)) ** 2

    def test_max_iter_termination(self):
        op, _, y = instance(200, 60, 20, 3)
        r = inpmat(op, y, InpmatConfig(max_iter=2))
        assert r.iterations == 2 and r.termination is Termination.MAX_ITER

    def test_deterministic(self):
        op, _, y = instance(120, 50, 8, 4)
        a, b = inpmat(op, y), inpmat(op, y)
        assert list(a.trace.rows()) == list(b.trace.rows())
        assert np.array_equal(a.estimate, b.estimate)

    def test_objective_trace_uses_lambda(self):
        op, _, y = instance(60, 30, 4, 5)
        tr = inpmat(op, y, InpmatConfig(objective_lambda=0.25)).trace
        for obj, c, size in zip(tr.objectives, tr.contractions, tr.support_sizes):
            assert obj == pytest.approx(c + 0.25 * size)

    def test_noisy_with_tikhonov_start(self):
        from nullproj.signals import add_noise_at_snr
        op, x, y = instance(200, 100, 8, 6)
        yn = add_noise_at_snr(y, 40.0, 6).y
        energy = float(np.sum((yn - y) ** 2))
        r = inpmat(op, yn, InpmatConfig(eps=energy, tikhonov_mu=1e-3))
        assert snr_db(x, r.estimate) > 25

    def test_noise_variance_sets_eps(self):
        from nullproj.signals import add_noise_at_snr
        op, x, y = instance(200, 100, 8, 7)
        yn = add_noise_at_snr(y, 40.0, 7).y
        var = float(np.mean((yn - y) ** 2))
        assert snr_db(x, inpmat(op, yn, InpmatConfig(noise_var=var)).estimate) > 30

    def test_input_errors(self):
        with pytest.raises(InvalidParameterError):
            inpmat(np.eye(3)[:2], np.ones(3))
        with pytest.raises(NumericalError):
            inpmat(np.eye(3)[:2], np.array([1.0, np.inf]))

    def test_trace_csv(self, tmp_path):
        op, _, y = instance(50, 20, 3, 8)
        r = inpmat(op, y)
        r.trace.to_csv(tmp_path / "t.csv")
        lines = (tmp_path / "t.csv").read_text().splitlines()
        assert lines[0] == "iter,thr,support_size,residual,contraction"
        assert len(lines) == r.iterations + 1


class TestKnownSparsity:
    def test_full_sparsity_is_least_norm(self):
        op, _, y = instance(12, 6, 2, 9)
        r = inpmat_known_sparsity(op, y, 12)
        assert np.allclose(r.estimate, pseudo_inverse(op.matrix) @ y)

    def test_bad_sparsity(self):
        op, _, y = instance(12, 6, 2, 9)
        with pytest.raises(InvalidParameterError):
            inpmat_known_sparsity(op, y, 0)

    def test_estimate_is_s_sparse(self):
        op, _, y = instance(100, 40, 6, 10)
        r = inpmat_known_sparsity(op, y, 6)
        assert np.count_nonzero(r.estimate) <= 6
        assert r.iterations <= 7

    def test_large_regime(self):
        ok = 0
        for seed in range(20):
            op, x, y = instance(700, 140, 40, seed)
            est = inpmat_known_sparsity(op, y, 40).estimate
            ok += np.linalg.norm(est - x) <= 1e-6 * np.linalg.norm(x)
        assert ok >= 16


class TestAlternatingProjection:
    def test_full_support_fixed_point(self):
        rng = make_rng(11)
        Phi, y = rng.standard_normal((4, 9)), rng.standard_normal(4)
        x0 = rng.standard_normal(9)
        once = alternating_projection(x0, np.ones(9, bool), Phi, y, 1)
        assert np.allclose(once, x0 - pseudo_inverse(Phi) @ (Phi @ x0 - y))
        again = alternating_projection(once, np.ones(9, bool), Phi, y, 1)
        assert np.allclose(again, once)

    def test_orthonormal_rows_match_plain_pinv_path(self):
        op = gen_sensing("random-sampling", 5, 10, 12)
        rng = make_rng(12)
        y = rng.standard_normal(5)
        t = np.zeros(10, bool)
        t[rng.choice(10, 3, replace=False)] = True
        x = alternating_projection(np.zeros(10), t, op, y, 500)
        s = np.zeros(10)
        s[t] = np.linalg.lstsq(op.matrix[:, t], y, rcond=None)[0]
        limit = s - op.matrix.T @ (op.matrix @ s - y)
        assert np.linalg.norm(x - limit) <= 1e-6 * np.linalg.norm(limit)

    def test_contraction_and_limit(self):
        for seed in range(10):
            rng = make_rng(100 + seed)
            Phi, y = rng.standard_normal((5, 10)), rng.standard_normal(5)
            t = np.zeros(10, bool)
            t[rng.choice(10, 3, replace=False)] = True
            hist = []
            x = alternating_projection(pseudo_inverse(Phi) @ y, t, Phi, y, 500, hist)
            assert len(hist) == 501
            assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))
            ref = pinv_path_limit(Phi, t, y)
            assert np.linalg.norm(x - ref) <= 1e-6 * np.linalg.norm(ref)

    def test_errors(self):
        with pytest.raises(InvalidParameterError):
            alternating_projection(np.zeros(3), np.ones(3, bool), np.eye(3), np.ones(3), 0)
        with pytest.raises(InvalidParameterError):
            alternating_projection(np.zeros(3), np.ones(2, bool), np.eye(3), np.ones(3), 1)


def test_result_iterations_within_cap():
    for seed in range(5):
        op, _, y = instance(90, 30, 5, 200 + seed)
        r = inpmat(op, y, InpmatConfig(max_iter=4))
        assert r.iterations <= 4
        assert not math.isnan(r.trace.thresholds[0])
