import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_model
from omegaopt import sras
from omegaopt.errors import DimensionTooLarge, InfeasibleProjection, NoPositiveExcess, ValidationError
from omegaopt.market import ExcessModel
from omegaopt.qpref import QpInstance, default_z, grid_oracle, project, simplex_grid, solve_model, solve_qp

SIG2 = np.array([[0.04, 0.03], [0.03, 0.09]])


class TestDefaultZ:
    def test_sum(self):
        assert default_z([0.03, 0.02]) == pytest.approx(0.05)

    def test_mixed_sign(self):
        assert default_z([0.05, -0.01]) == pytest.approx(0.04)

    def test_fallback(self):
        assert default_z([0.05, -0.07]) == 0.05

    def test_no_positive(self):
        with pytest.raises(NoPositiveExcess):
            default_z([-0.01, 0.0])


class TestProject:
    def test_fixed_point(self):
        v = np.array([0.2, 0.0, 0.5])
        e = np.array([1.0, 2.0, 1.0])
        np.testing.assert_allclose(project(v, e, 0.7), v, atol=1e-15)

    def test_symmetric(self):
        np.testing.assert_allclose(project([0.0, 0.0], [1.0, 1.0], 1.0), [0.5, 0.5], atol=1e-15)

    def test_infeasible(self):
        with pytest.raises(InfeasibleProjection):
            project([1.0], [-1.0], 1.0)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 30))
    def test_constraints_and_optimality(self, seed, n):
        rng = np.random.default_rng(seed)
        e = rng.normal(0.02, 0.05, n)
        e[rng.integers(n)] = abs(e[0]) + 0.01
        z = float(rng.uniform(0.01, 2))
        v = rng.normal(0, 3, n)
        p = project(v, e, z)
        assert abs(e @ p - z) <= 1e-10 * max(1, z)
        assert np.all(p >= 0)
        # idempotence
        np.testing.assert_allclose(project(p, e, z), p, atol=1e-12, rtol=0)
        # any other feasible point is at least as far from v
        for _ in range(30):
            w = rng.exponential(1.0, n) * (e > 0)
            w *= z / (e @ w)
            assert np.linalg.norm(p - v) <= np.linalg.norm(w - v) + 1e-9

    def test_optimality_probe_1000(self):
        rng = np.random.default_rng(11)
        e = np.array([0.05, -0.02, 0.03, 0.01])
        v = rng.normal(0, 1, 4)
        p = project(v, e, 0.1)
        pos = e > 0
        for _ in range(1000):
            w = np.zeros(4)
            w[pos] = rng.exponential(1.0, pos.sum())
            w[~pos] = rng.exponential(0.2, (~pos).sum())
            scale = (e @ w)
            if scale <= 0:
                continue
            w *= 0.1 / scale
            assert np.linalg.norm(p - v) <= np.linalg.norm(w - v) + 1e-12


class TestSolveQp:
    def test_interior(self):
        m = ExcessModel.from_arrays([0.05, 0.04], SIG2)
        w, _ = solve_model(m)
        np.testing.assert_allclose(w.w, [33 / 34, 1 / 34], atol=1e-8)
        np.testing.assert_allclose(w.w, sras.solve(m)[0].w, atol=1e-8)

    def test_corner(self):
        m = ExcessModel.from_arrays([0.05, -0.01], np.diag([0.04, 0.09]))
        w, _ = solve_model(m)
        np.testing.assert_allclose(w.w, [1.0, 0.0], atol=1e-10)
        np.testing.assert_allclose(grid_oracle(m, 1e-3).w, [1.0, 0.0])

    def test_z_scaling(self):
        m = random_model(8, 2)
        inst = QpInstance.from_model(m)
        a, _ = solve_qp(inst)
        b, _ = solve_qp(QpInstance(inst.sigma, inst.e, 10 * inst.z))
        assert np.max(np.abs(a.w - b.w)) <= 1e-8

    def test_descent_and_feasibility(self):
        for seed in range(10):
            m = random_model(15, seed)
            _, info = solve_qp(QpInstance.from_model(m), record=True)
            assert np.all(np.diff(info.objective) <= 1e-12)
            assert info.max_constraint_residual <= 1e-10
            assert info.min_weight >= 0.0

    def test_instance_validation(self):
        with pytest.raises(ValidationError):
            QpInstance(np.eye(2), np.array([1.0, 1.0]), 0.0)
        with pytest.raises(NoPositiveExcess):
            QpInstance(np.eye(2), np.array([-1.0, 0.0]), 1.0)

    def test_agrees_with_active_set(self):
        for seed in range(20):
            m = random_model(2 + seed, seed, stream=4)
            assert np.max(np.abs(solve_model(m)[0].w - sras.solve(m)[0].w)) <= 1e-6


class TestGrid:
    def test_simplex_grid(self):
        g = simplex_grid(3, 0.25)
        assert len(g) == 15
        np.testing.assert_allclose(g.sum(axis=1), 1.0)
        assert np.all(g >= 0)
        assert len({tuple(r) for r in g}) == 15

    def test_single(self):
        np.testing.assert_array_equal(grid_oracle(ExcessModel.from_arrays([0.1], [[0.2]]), 0.01).w, [1.0])

    def test_symmetric(self):
        np.testing.assert_allclose(grid_oracle(ExcessModel.from_arrays([1.0, 1.0], np.eye(2)), 0.01).w, [0.5, 0.5])

    def test_matches_active_set(self):
        for seed in range(20):
            m = random_model(2, seed)
            assert np.max(np.abs(grid_oracle(m, 1e-3).w - sras.solve(m)[0].w)) <= 1e-3

    def test_too_large(self):
        with pytest.raises(DimensionTooLarge):
            grid_oracle(random_model(5, 0), 0.1)
