import math

import numpy as np
import pytest

from src.dynamics.simulate import open_loop, simulate
from src.dynamics.unmodeled import HighPassNonlinearity
from src.errors import NonPositiveDefinite, RankDeficient
from src.estimation.bounds import (
    cross_term_tau,
    deterministic_gram_upper_bound,
    input_cross_power,
    martingale_bound,
    self_normalized_statistic,
    theorem_bound,
)
from src.estimation.least_squares import (
    estimation_error,
    estimation_errors,
    least_squares,
    normal_equation_residual,
)
from src.estimation.recursive import final_estimate, recursive_estimate, trajectory_stream
from src.excitation.signals import MultiSine, normalize_energy
from src.excitation.spectral_lines import InformationMatrix, multisine_information_matrix
from src.numerics.rng import NOISE_STREAM, RngSpec


def white_input_run(system, T, seed, unmodeled=None):
    inputs = RngSpec.for_replication(seed, 0, 1).generator().standard_normal(T)
    return simulate(system, unmodeled, open_loop(inputs), T, RngSpec.for_replication(seed, 0, NOISE_STREAM))


class TestLeastSquares:
    def test_noiseless_recovery(self, stable_plant):
        result = least_squares(white_input_run(stable_plant, 100, 0))
        assert np.allclose(result.A_hat, stable_plant.A, atol=1e-8)
        assert np.allclose(result.B_hat, stable_plant.B, atol=1e-8)
        assert estimation_error(result, stable_plant) < 1e-8

    def test_theta_layout(self, stable_plant):
        result = least_squares(white_input_run(stable_plant, 50, 1))
        assert result.theta.shape == (4, 3)
        assert np.allclose(result.theta[:3], result.A_hat.T)

    def test_too_few_samples(self, stable_plant):
        with pytest.raises(RankDeficient):
            least_squares(white_input_run(stable_plant, 3, 0))

    def test_zero_excitation(self, stable_plant):
        traj = simulate(stable_plant, None, open_loop(np.zeros(20)), 20, RngSpec(0))
        with pytest.raises(RankDeficient):
            least_squares(traj)

    def test_normal_equations_hold(self, stable_plant):
        traj = white_input_run(stable_plant.with_sigma(0.5), 300, 2)
        result = least_squares(traj)
        assert normal_equation_residual(result, traj) <= 1e-8 * np.linalg.norm(result.gram, 2)

    def test_separate_errors(self, stable_plant):
        result = least_squares(white_input_run(stable_plant.with_sigma(0.1), 500, 3))
        err_A, err_B = estimation_errors(result, stable_plant)
        assert max(err_A, err_B) == pytest.approx(estimation_error(result, stable_plant))

    def test_error_rate_is_inverse_square_root(self, stable_plant):
        noisy = stable_plant.with_sigma(0.1)
        horizons = [250, 1000, 4000]
        medians = []
        for T in horizons:
            errors = [estimation_error(least_squares(white_input_run(noisy, T, seed)), stable_plant) for seed in range(50)]
            medians.append(np.median(errors))
        slope = np.polyfit(np.log(horizons), np.log(medians), 1)[0]
        assert -0.65 <= slope <= -0.35

    def test_multisine_error_rate_is_inverse_square_root(self, stable_plant):
        noisy = stable_plant.with_sigma(0.1)
        horizons = [250, 1000, 4000]
        medians = []
        for T in horizons:
            inputs = normalize_energy(MultiSine.uniform((0.1, 0.3)), 1.0, T).samples(T)
            errors = [
                estimation_error(
                    least_squares(
                        simulate(noisy, None, open_loop(inputs), T, RngSpec.for_replication(seed, 0, NOISE_STREAM))
                    ),
                    stable_plant,
                )
                for seed in range(50)
            ]
            medians.append(np.median(errors))
        slope = np.polyfit(np.log(horizons), np.log(medians), 1)[0]
        assert -0.65 <= slope <= -0.35

    def test_three_step_scalar_record(self, scalar_plant):
        traj = simulate(scalar_plant, None, open_loop([1.0, 0.0, 1.0]), 3, RngSpec(0))
        assert traj.states.ravel() == pytest.approx([0.0, 1.0, 0.5, 1.25])
        result = least_squares(traj)
        assert result.A_hat[0, 0] == pytest.approx(0.5, abs=1e-12)
        assert result.B_hat[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_better_conditioned_design_estimates_better(self, stable_plant):
        T = 1000
        noisy = stable_plant.with_sigma(0.1)
        clustered = normalize_energy(MultiSine.uniform((0.01, 0.02)), 1.0, T)
        spread = normalize_energy(MultiSine.uniform((0.1, 0.3)), 1.0, T)
        weak = multisine_information_matrix(stable_plant, clustered).sigma_min
        strong = multisine_information_matrix(stable_plant, spread).sigma_min
        assert strong > 2 * weak

        def median_error(ms):
            inputs = ms.samples(T)
            errors = [
                estimation_error(
                    least_squares(
                        simulate(noisy, None, open_loop(inputs), T, RngSpec.for_replication(seed, 0, NOISE_STREAM))
                    ),
                    stable_plant,
                )
                for seed in range(50)
            ]
            return np.median(errors)

        assert median_error(spread) < median_error(clustered)


class TestRecursiveEstimator:
    def test_converges_on_noiseless_regression(self):
        rng = np.random.default_rng(0)
        truth = np.array([2.0, -1.0])
        stream = ((phi, phi @ truth) for phi in rng.standard_normal((2000, 2)))
        state = final_estimate(recursive_estimate(stream, gamma=0.5))
        assert np.allclose(state.theta, truth, atol=1e-8)

    def test_trajectory_stream_reduces_error(self, stable_plant):
        traj = white_input_run(stable_plant, 1000, 4)
        target = np.vstack([stable_plant.A.T, stable_plant.B.T])
        state = final_estimate(recursive_estimate(trajectory_stream(traj, passes=3), gamma=1.0))
        assert state.theta.shape == target.shape
        assert np.linalg.norm(state.theta - target) < 0.1 * np.linalg.norm(target)

    def test_first_two_updates(self):
        stream = [(np.ones(1), 2.0)] * 2
        thetas = [state.theta[0] for state in recursive_estimate(stream, gamma=1.0, theta0=np.zeros(1))]
        assert thetas == pytest.approx([1.0, 1.5])

    def test_consistent_data_leaves_estimate_unchanged(self):
        theta0 = np.array([0.25, -1.5, 2.0])
        rng = np.random.default_rng(2)
        stream = ((phi, phi @ theta0) for phi in rng.integers(-3, 4, size=(50, 3)).astype(float))
        for state in recursive_estimate(stream, gamma=1.0, theta0=theta0):
            assert np.array_equal(state.theta, theta0)

    def test_alternating_unit_regressors(self):
        truth = np.array([2.0, -1.0])
        basis = np.eye(2)
        stream = ((basis[k % 2], truth[k % 2]) for k in range(100))
        state = final_estimate(recursive_estimate(stream, gamma=1.0))
        assert np.linalg.norm(state.theta - truth) < 1e-6

    def test_agrees_with_batch_solution(self):
        rng = np.random.default_rng(6)
        truth = np.array([[0.5, -0.2], [1.0, 0.0], [-0.7, 0.4], [0.1, 2.0]])
        phis = rng.standard_normal((3000, 4))
        targets = phis @ truth
        batch = np.linalg.lstsq(phis, targets, rcond=None)[0]
        state = final_estimate(recursive_estimate(zip(phis, targets), gamma=1.0))
        assert np.allclose(state.theta, batch, atol=1e-5)

    def test_gamma_range(self):
        with pytest.raises(ValueError):
            list(recursive_estimate([(np.ones(2), 1.0)], gamma=2.0))

    def test_empty_stream(self):
        with pytest.raises(ValueError):
            final_estimate(recursive_estimate([], gamma=0.5))


class TestMartingaleBound:
    def test_exceedance_rate(self, scalar_plant):
        noisy = scalar_plant.with_sigma(1.0)
        delta = 0.1
        V = np.eye(2)
        exceed = 0
        for seed in range(500):
            traj = white_input_run(noisy, 200, seed)
            phis = traj.regressors()
            statistic = self_normalized_statistic(phis, traj.noises, V)
            bound = martingale_bound(phis.T @ phis + V, V, noisy.sigma, delta, d=2)
            exceed += statistic > bound
        assert exceed / 500 <= delta + 0.03

    def test_bound_at_prior_gram(self):
        V = np.eye(1)
        assert martingale_bound(V, V, 1.0, 0.05, d=1) == pytest.approx(math.sqrt(8 * math.log(100)))
        assert martingale_bound(V, V, 1.0, 1.0 - 1e-12, d=1) == pytest.approx(math.sqrt(8 * math.log(5)), rel=1e-9)

    def test_delta_range(self):
        with pytest.raises(ValueError):
            martingale_bound(np.eye(2), np.eye(2), 1.0, 1.5, 2)

    def test_singular_gram(self):
        with pytest.raises(NonPositiveDefinite):
            self_normalized_statistic(np.zeros((5, 2)), np.ones((5, 1)), np.zeros((2, 2)))


def test_gram_upper_bound_single_step(scalar_plant):
    sigma, u_M, delta = 0.5, 2.0, 0.1
    bound = deterministic_gram_upper_bound(scalar_plant.with_sigma(sigma), 1, u_M, delta)
    assert bound == pytest.approx((sigma**2 + 2 * u_M**2) / delta)


class TestTheoremBound:
    def test_without_unmodeled_dynamics(self, stable_plant):
        ms = MultiSine.uniform((0.05, 0.1), 1.0)
        traj = simulate(stable_plant.with_sigma(0.1), None, open_loop(ms.samples(200)), 200, RngSpec(0))
        info = multisine_information_matrix(stable_plant, ms)
        report = theorem_bound(info, traj)
        assert report.unmodeled_term == 0.0
        assert report.ideal_term == pytest.approx(math.sqrt(1.0 / (200 * info.sigma_min**2)))
        assert report.total == report.ideal_term

    def test_unexcited_is_infinite(self, stable_plant):
        traj = simulate(stable_plant, None, open_loop(np.ones(10)), 10, RngSpec(0))
        info = InformationMatrix((0.1,), np.zeros((4, 1)), 0.0)
        assert math.isinf(theorem_bound(info, traj).total)

    def test_unmodeled_term_positive(self, stable_plant):
        ms = MultiSine.uniform((0.05, 0.1), 1.0)
        hp = HighPassNonlinearity(alpha=0.1, beta=0.9, c=4.0, n=3)
        traj = simulate(stable_plant, hp, open_loop(ms.samples(100)), 100, RngSpec(0))
        report = theorem_bound(multisine_information_matrix(stable_plant, ms), traj)
        assert report.unmodeled_term > 0.0


class TestCrossTerm:
    def test_equals_time_domain_average(self, stable_plant):
        hp = HighPassNonlinearity(alpha=0.1, beta=0.9, c=4.0, n=3)
        traj = white_input_run(stable_plant, 256, 5, unmodeled=hp)
        expected = np.linalg.norm(traj.inputs.T @ traj.unmodeled / traj.length, 2)
        assert cross_term_tau(traj) == pytest.approx(expected, rel=1e-9)

    def test_zero_without_unmodeled(self, stable_plant):
        assert cross_term_tau(white_input_run(stable_plant, 64, 6)) == 0.0

    def test_raw_records(self):
        u = np.array([1.0, -1.0, 1.0, -1.0])
        w = np.array([[0.5], [-0.5], [0.5], [-0.5]])
        assert input_cross_power(u, w) == pytest.approx(0.5)
