import itertools

import numpy as np
import pytest

from levysplit import (
    GridPath,
    LevySpec,
    RngStream,
    argmin_last,
    discrete_conditioned_pair,
    sample_path,
    split_at_directional_infimum,
    split_at_max_norm,
)


def walk(increments, step=1.0, kill=None):
    inc = np.atleast_2d(np.asarray(increments, dtype=float))
    if inc.shape[0] == 1 and inc.shape[1] > 1 and np.ndim(increments) == 1:
        inc = inc.T
    values = np.vstack([np.zeros((1, inc.shape[1])), np.cumsum(inc, axis=0)])
    return GridPath(step=step, values=values, kill_index=kill)


class TestArgminLast:
    def test_examples(self):
        assert argmin_last([0.0, 1.0, 2.0]) == 0
        assert argmin_last([0.0, -1.0, -2.0]) == 2
        assert argmin_last([0.0, 1.0, 0.0]) == 2  # last tie wins

    def test_exhaustive_against_python_oracle(self):
        for n in range(1, 6):
            for seq in itertools.product([-1.0, 0.0, 1.0], repeat=n):
                expected = max(i for i, v in enumerate(seq) if v == min(seq))
                assert argmin_last(list(seq)) == expected

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            argmin_last([])


class TestSplitAtInfimum:
    def test_increasing(self):
        pair = split_at_directional_infimum(walk([1.0, 1.0]), [1.0])
        assert pair.tau_index == 0
        assert np.array_equal(pair.pre.values, [[0.0]])
        assert np.array_equal(pair.post.values, [[0.0], [1.0], [2.0]])

    def test_v_shape(self):
        pair = split_at_directional_infimum(walk([-1.0, 1.0]), [1.0])
        assert pair.tau_index == 1
        assert np.array_equal(pair.pre.values, [[0.0], [1.0]])
        assert np.array_equal(pair.post.values, [[0.0], [1.0]])

    def test_tent_last_tie(self):
        pair = split_at_directional_infimum(walk([1.0, -1.0]), [1.0])
        assert pair.tau_index == 2
        assert np.array_equal(pair.pre.values, [[0.0], [1.0], [0.0]])
        assert np.array_equal(pair.post.values, [[0.0]])

    def test_lifetimes_add_up(self):
        gen = np.random.default_rng(2)
        for _ in range(20):
            n = int(gen.integers(1, 30))
            path = walk(gen.standard_normal((n, 2)))
            pair = split_at_directional_infimum(path, [1.0, -0.5])
            assert pair.pre.n_steps + pair.post.n_steps == n
            assert np.all(pair.pre.values[0] == 0) and np.all(pair.post.values[0] == 0)

    def test_killed_path_scans_stop_at_kill(self):
        path = walk([[1.0], [-5.0], [2.0]], kill=1)  # the -5 step at index 2 is dead
        pair = split_at_directional_infimum(path, [1.0])
        assert pair.tau_index == 0
        assert pair.post.n_steps == 1
        assert pair.pre.kill_index == 0 and pair.post.kill_index == 1


class TestConditionedPair:
    def test_up_then_down(self):
        trace = discrete_conditioned_pair(walk([1.0, -1.0]), [1.0])
        assert np.array_equal(trace.up.values, [[0.0], [1.0]])
        assert np.array_equal(trace.down.values, [[0.0], [-1.0]])

    def test_down_then_flat(self):
        trace = discrete_conditioned_pair(walk([-1.0, 1.0]), [1.0])
        assert np.array_equal(trace.up.values, [[0.0]])
        assert np.array_equal(trace.down.values, [[0.0], [-1.0], [0.0]])

    def test_all_positive_goes_up(self):
        path = walk([2.0, 1.0, 3.0])
        trace = discrete_conditioned_pair(path, [1.0])
        assert np.array_equal(trace.up.values, path.values)
        assert np.array_equal(trace.down.values, [[0.0]])

    def test_occupation_counts_partition(self):
        gen = np.random.default_rng(3)
        path = walk(gen.standard_normal((40, 3)))
        trace = discrete_conditioned_pair(path, [1.0, 0.0, -1.0])
        idx = np.arange(41)
        assert np.array_equal(trace.a_plus + trace.a_minus, idx)
        assert trace.up.n_steps == trace.a_plus[-1]
        assert trace.down.n_steps == trace.a_minus[-1]

    def test_inverse_indices(self):
        gen = np.random.default_rng(4)
        path = walk(gen.standard_normal((25, 1)))
        trace = discrete_conditioned_pair(path, [1.0])
        for i, j in enumerate(trace.alpha_plus):
            assert trace.a_plus[j] == i
            if i > 0:
                assert trace.a_plus[j - 1] == i - 1


def _random_paths(n_paths, n_steps, d, seed):
    gen = np.random.default_rng(seed)
    for _ in range(n_paths):
        yield walk(gen.standard_normal((n_steps, d))), gen


class TestConstructionInvariants:
    def test_conservation(self):
        for path, _ in _random_paths(50, 200, 3, 11):
            eta = np.array([0.3, -1.0, 0.7])
            trace = discrete_conditioned_pair(path, eta)
            total = trace.up.values[-1] + trace.down.values[-1]
            assert np.max(np.abs(total - (path.values[-1] - path.values[0]))) <= 1e-12

    def test_sign_property_strict_for_atomless(self):
        for path, _ in _random_paths(30, 300, 2, 12):
            eta = np.array([1.0, 2.0])
            trace = discrete_conditioned_pair(path, eta)
            up_proj = trace.up.values[1:] @ eta
            down_proj = trace.down.values[1:] @ eta
            assert np.all(up_proj > 0)
            assert np.all(down_proj < 0)

    def test_sign_property_weak_with_ties(self):
        # exhaustive +-1 walks, where projections hit 0 exactly
        for n in range(1, 9):
            for seq in itertools.product([1.0, -1.0], repeat=n):
                trace = discrete_conditioned_pair(walk(list(seq)), [1.0])
                assert np.all(trace.up.values[:, 0] >= 0)
                assert np.all(trace.down.values[:, 0] <= 0)

    def test_horizon_growth_prefix_consistency(self):
        gen = np.random.default_rng(13)
        for _ in range(25):
            inc = gen.standard_normal((100, 2))
            eta = np.array([1.0, -1.5])
            full = discrete_conditioned_pair(walk(inc), eta)
            cut = int(gen.integers(1, 100))
            prefix = discrete_conditioned_pair(walk(inc[:cut]), eta)
            k = prefix.a_plus[-1]
            assert np.array_equal(prefix.up.values, full.up.values[: k + 1])

    def test_time_reversal_exact(self):
        gen = np.random.default_rng(14)
        for _ in range(25):
            inc = gen.standard_normal((80, 2))
            eta = np.array([0.5, 1.0])
            path = walk(inc)
            neg = GridPath(step=1.0, values=-path.values)
            down = discrete_conditioned_pair(path, eta).down.values
            up_of_neg = discrete_conditioned_pair(neg, eta).up.values
            assert np.array_equal(down, -up_of_neg)

    def test_linear_commutation(self):
        gen = np.random.default_rng(15)
        for _ in range(25):
            d, dp = 3, 2
            m = gen.standard_normal((dp, d))
            eta_p = gen.standard_normal(dp)
            if np.linalg.norm(m.T @ eta_p) < 1e-6:
                continue
            inc = gen.standard_normal((60, d))
            path = walk(inc)
            mapped = GridPath(step=1.0, values=path.values @ m.T)
            lhs = discrete_conditioned_pair(mapped, eta_p).up.values
            rhs = discrete_conditioned_pair(path, m.T @ eta_p).up.values @ m.T
            assert lhs.shape == rhs.shape
            assert np.max(np.abs(lhs - rhs)) <= 1e-9


class TestMaxNormSplit:
    def test_monotone_outward_line(self):
        values = np.linspace([0.0, 0.0], [1.0, 2.0], 5)
        direction, pair = split_at_max_norm(GridPath(step=0.25, values=values))
        assert pair.tau_index == 4
        assert np.array_equal(pair.post.values, [[0.0, 0.0]])
        assert np.allclose(direction.eta, [-1.0, -2.0])

    def test_last_argmax_tie(self):
        values = np.array([[0.0], [2.0], [1.0], [-2.0]])
        _, pair = split_at_max_norm(GridPath(step=1.0, values=values))
        assert pair.tau_index == 3

    def test_all_zero_errors(self):
        with pytest.raises(ValueError):
            split_at_max_norm(GridPath(step=1.0, values=np.zeros((4, 2))))

    def test_post_projects_nonnegative_on_inward_direction(self):
        spec = LevySpec(drift=[0.0, 0.0], sigma=np.eye(2))
        path = sample_path(spec, 1.0, 1e-4, RngStream(50))
        direction, pair = split_at_max_norm(path)
        proj = pair.post.values @ direction.eta
        assert np.min(proj) >= 0.0
