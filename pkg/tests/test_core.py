import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysplit import (
    Direction,
    FiniteSupportJumps,
    GridPath,
    LevySpec,
    in_open_halfspace,
    project,
    read_path_csv,
    write_path_csv,
)
from levysplit.core import path_to_csv_string


def test_direction_rejects_zero():
    with pytest.raises(ValueError):
        Direction(np.zeros(3))


def test_in_open_halfspace_examples():
    eta = Direction(np.array([1.0, 2.0]))
    assert in_open_halfspace([1.0, 0.0], eta)
    assert not in_open_halfspace([0.0, 0.0], eta)  # boundary excluded
    assert not in_open_halfspace([2.0, -1.0], eta)


def test_project_examples():
    eta = Direction(np.array([1.0, 2.0]))
    p = GridPath(step=1.0, values=[[0.0, 0.0], [1.0, 1.0]])
    assert np.array_equal(project(p, eta), [0.0, 3.0])
    p2 = GridPath(step=1.0, values=[[0.0, 0.0], [2.0, -1.0]])
    assert np.array_equal(project(p2, eta), [0.0, 0.0])
    e1 = Direction(np.array([1.0, 0.0]))
    p3 = GridPath(step=0.5, values=[[0.0, 0.0], [3.0, 9.0], [5.0, -2.0]])
    assert np.array_equal(project(p3, e1), p3.values[:, 0])


@given(
    a=st.floats(-5, 5),
    b=st.floats(-5, 5),
    n=st.integers(1, 12),
    seed=st.integers(0, 2**32 - 1),
)
@settings(max_examples=50, deadline=None)
def test_project_is_linear(a, b, n, seed):
    gen = np.random.default_rng(seed)
    vp = gen.standard_normal((n + 1, 3))
    vq = gen.standard_normal((n + 1, 3))
    eta = gen.standard_normal(3)
    if np.linalg.norm(eta) == 0:
        eta = np.ones(3)
    combo = GridPath(step=1.0, values=a * vp + b * vq)
    zp = project(GridPath(step=1.0, values=vp), eta)
    zq = project(GridPath(step=1.0, values=vq), eta)
    assert np.allclose(project(combo, eta), a * zp + b * zq, rtol=0, atol=1e-9)


def test_project_adjoint_identity():
    gen = np.random.default_rng(5)
    for _ in range(25):
        m = gen.standard_normal((2, 3))
        values = gen.standard_normal((8, 3))
        eta2 = gen.standard_normal(2)
        path = GridPath(step=1.0, values=values)
        mapped = GridPath(step=1.0, values=values @ m.T)
        lhs = project(path, m.T @ eta2)
        rhs = project(mapped, eta2)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_gridpath_validation_and_kill_semantics():
    with pytest.raises(ValueError):
        GridPath(step=0.0, values=[[0.0]])
    with pytest.raises(ValueError):
        GridPath(step=1.0, values=[[0.0], [1.0]], kill_index=5)
    p = GridPath(step=0.5, values=[[0.0], [1.0], [2.0], [3.0]], kill_index=2)
    assert p.live_steps == 2
    assert p.lifetime == 1.0
    assert np.array_equal(p.live_values(), [[0.0], [1.0], [2.0]])
    assert np.array_equal(p.increments(), [[1.0], [1.0]])


def test_gridpath_is_immutable():
    p = GridPath(step=1.0, values=[[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(ValueError):
        p.values[0, 0] = 7.0


def test_levyspec_symmetrizes_and_validates():
    spec = LevySpec(drift=[0.0, 0.0], sigma=[[1.0, 0.3], [0.1, 1.0]])
    assert np.allclose(spec.sigma, spec.sigma.T)
    assert spec.sigma[0, 1] == pytest.approx(0.2)
    with pytest.raises(ValueError):
        LevySpec(drift=[0.0], sigma=[[-1.0]])
    with pytest.raises(ValueError):
        FiniteSupportJumps([[1.0]], [0.9])  # probabilities must sum to 1


def test_path_csv_roundtrip():
    p = GridPath(step=0.25, values=[[0.0, 1.0], [1.5, -2.0], [3.0, 4.0]], kill_index=1)
    buf = io.StringIO(path_to_csv_string(p))
    q = read_path_csv(buf)
    assert q.step == pytest.approx(p.step)
    assert np.array_equal(q.values, p.values)
    assert q.kill_index == 1

    alive = GridPath(step=2.0, values=[[1.0], [2.0]])
    buf = io.StringIO()
    write_path_csv(buf, alive)
    text = buf.getvalue()
    assert text.splitlines()[0] == "t,x1,alive"
    q2 = read_path_csv(io.StringIO(text))
    assert q2.kill_index is None
    assert np.array_equal(q2.values, alive.values)
