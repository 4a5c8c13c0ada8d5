import numpy as np
import pytest

from controllers.LqrController import LqrController
from numerics.NumericsError import ConfigError, ParseError, ShapeError
from numerics.LinearAlgebra import spectral_radius
from systems.LtiSystem import LtiSystem
from systems.SystemFamilies import family_mask, first_row_family, full_family, random_lti
from systems.Trajectory import NoiseSpec, Trajectory


class TestLtiSystem:
    def test_simulate_scalar(self):
        sys = LtiSystem([[0.5]], [[1.0]], [[2.0]], LtiSystem.full_mask(1, 1, 1))
        traj = sys.simulate(np.ones((4, 1)))
        np.testing.assert_allclose(traj.x[:, 0], [0.0, 1.0, 1.5, 1.75])
        np.testing.assert_allclose(traj.y[:, 0], [0.0, 2.0, 3.0, 3.5])

    def test_zero_input_zero_state(self, s1_system):
        traj = s1_system.simulate(np.zeros((10, 4)))
        assert not np.any(traj.y)

    def test_initial_state(self):
        sys = LtiSystem([[0.5]], [[1.0]], [[1.0]], LtiSystem.full_mask(1, 1, 1), x0=[2.0])
        np.testing.assert_allclose(sys.simulate(np.zeros((3, 1))).y[:, 0], [2.0, 1.0, 0.5])
        assert not sys.has_zero_initial_state

    def test_superposition(self, s1_system, rng):
        u1, u2 = rng.standard_normal((30, 4)), rng.standard_normal((30, 4))
        y = s1_system.simulate(2.0 * u1 - u2).y
        np.testing.assert_allclose(y, 2.0 * s1_system.simulate(u1).y - s1_system.simulate(u2).y, atol=1e-12)

    def test_markov_convolution(self, rng):
        sys = random_lti(3, 3, 3, rng)
        u = rng.standard_normal((40, 3))
        M = sys.markov_params(40)
        y = np.zeros((40, 3))
        for k in range(40):
            for j in range(k):
                y[k] += M[k - j - 1] @ u[j]
        np.testing.assert_allclose(y, sys.simulate(u).y, atol=1e-10)

    def test_step_by_step_recursion(self, s1_system, full_rank_input):
        x = np.zeros(4)
        y = []
        for u in full_rank_input:
            y.append(s1_system.C @ x)
            x = s1_system.A @ x + s1_system.B @ u
        np.testing.assert_allclose(np.array(y), s1_system.simulate(full_rank_input).y, rtol=1e-12, atol=1e-14)

    def test_first_row_mask(self, s2_system):
        updated = s2_system.apply_params([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(updated.A[0], [1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(updated.A[1:], s2_system.A[1:])
        np.testing.assert_array_equal(updated.B, s2_system.B)
        np.testing.assert_array_equal(updated.C, s2_system.C)

    def test_params_round_trip(self, s1_system):
        assert s1_system.n_params == 48
        assert s1_system.apply_params(s1_system.parameters()) == s1_system
        np.testing.assert_array_equal(s1_system.extract_params(), s1_system.parameters())

    @pytest.mark.parametrize("mask", [(('A', 0, 0), ('A', 0, 0)), (('D', 0, 0),), (('B', 5, 0),), ()])
    def test_invalid_mask(self, mask):
        with pytest.raises(ConfigError):
            LtiSystem(np.eye(2), np.ones((2, 1)), np.ones((1, 2)), mask)

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            LtiSystem(np.ones((2, 3)), np.ones((2, 1)), np.ones((1, 2)), (('A', 0, 0),))
        with pytest.raises(ShapeError):
            LtiSystem(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), (('A', 0, 0),))

    def test_wrong_theta_length(self, s2_system):
        with pytest.raises(ShapeError):
            s2_system.apply_params(np.zeros(3))

    def test_json_round_trip(self, tmp_path, s2_system):
        path = tmp_path / 'sys.json'
        s2_system.to_json(path)
        assert LtiSystem.from_json(path) == s2_system

    def test_json_defaults_to_full_mask(self):
        sys = LtiSystem.from_dict({'A': [[0.1]], 'B': [[1.0, 2.0]], 'C': [[1.0]]})
        assert sys.mask == LtiSystem.full_mask(1, 2, 1)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text('{"A": [[1.0]]')
        with pytest.raises(ParseError):
            LtiSystem.from_json(path)
        with pytest.raises(ParseError):
            LtiSystem.from_dict({'A': [[1.0]], 'B': [[1.0]]})

    def test_closed_loop_matches_gain(self, s1_system, rng):
        controller = LqrController(0.1 * rng.standard_normal((4, 4)))
        x0 = rng.standard_normal(4)
        traj = s1_system.simulate_closed_loop(controller, 20, x0=x0)
        A_cl = s1_system.A - s1_system.B @ controller.L
        np.testing.assert_allclose(traj.x[5], np.linalg.matrix_power(A_cl, 5) @ x0, atol=1e-12)
        np.testing.assert_allclose(traj.u, -traj.x @ controller.L.T, atol=1e-12)

    def test_closed_loop_dither_stays_in_range(self, s1_system, rng):
        K = np.linalg.qr(rng.standard_normal((4, 2)))[0]
        controller = LqrController(K @ (0.1 * rng.standard_normal((2, 4))), K=K)
        traj = s1_system.simulate_closed_loop(controller, 50, dither=1.0, seed=3)
        assert np.linalg.matrix_rank(traj.u) == 2
        assert np.any(traj.y)


class TestNoise:
    def test_silent(self):
        w, v = NoiseSpec().draw(5, 2, 3)
        assert not np.any(w) and not np.any(v)

    def test_bounded_and_seeded(self):
        noise = NoiseSpec(0.1, 0.2, seed=4)
        w, v = noise.draw(100, 2, 3)
        assert np.max(np.abs(w)) <= 0.1 and np.max(np.abs(v)) <= 0.2
        np.testing.assert_array_equal(w, noise.draw(100, 2, 3)[0])

    def test_negative_amplitude(self):
        with pytest.raises(ConfigError):
            NoiseSpec(-1.0)


class TestTrajectory:
    def test_csv_round_trip(self, tmp_path, s1_system, full_rank_input):
        traj = s1_system.simulate(full_rank_input)
        path = tmp_path / 'traj.csv'
        traj.to_csv(path)
        loaded = Trajectory.from_csv(path)
        np.testing.assert_array_equal(loaded.u, traj.u)
        np.testing.assert_array_equal(loaded.y, traj.y)
        np.testing.assert_array_equal(loaded.x, traj.x)

    def test_csv_without_outputs(self, tmp_path):
        path = tmp_path / 'u.csv'
        path.write_text('t,u_1\n0,1.0\n')
        with pytest.raises(ParseError):
            Trajectory.from_csv(path)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            Trajectory(u=np.zeros((3, 1)), y=np.zeros((4, 1)))

    @pytest.mark.parametrize("rank", [1, 2, 3, 4])
    def test_random_input_rank(self, rng, rank):
        u = Trajectory.random_input(100, 4, rank, rng)
        assert u.shape == (100, 4)
        assert np.linalg.matrix_rank(u) == rank

    def test_random_input_bad_rank(self, rng):
        with pytest.raises(ConfigError):
            Trajectory.random_input(10, 4, 5, rng)


class TestFamilies:
    def test_family_masks(self):
        assert len(family_mask('full', 4, 4, 4)) == 48
        assert family_mask('first_row', 4, 4, 4) == tuple(('A', 0, j) for j in range(4))
        with pytest.raises(ConfigError):
            family_mask('diagonal', 2, 2, 2)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_draws_are_minimal_and_stable(self, seed):
        rng = np.random.default_rng(seed)
        for sys in (full_family(rng), first_row_family(rng, radius=0.5)):
            assert sys.is_controllable() and sys.is_observable()
            assert spectral_radius(sys.A) < 1.0

    def test_deterministic(self):
        a = random_lti(3, 2, 2, np.random.default_rng(11))
        b = random_lti(3, 2, 2, np.random.default_rng(11))
        assert a == b
