import math

import numpy as np
import pytest
import scipy.linalg

from src.control.exploration import EpochConfig, calibrate_sigma, run_epoch_doubling
from src.control.regret import regret, stage_costs
from src.control.riccati import (
    CostMatrices,
    ln_stability,
    optimal_average_cost,
    perturbed_initial_controller,
    solve_dare,
    solve_lqr,
)
from src.dynamics.simulate import linear_feedback, open_loop, simulate
from src.dynamics.unmodeled import HighPassNonlinearity
from src.errors import DimensionMismatch, NotStabilizable, StateBlowup
from src.excitation.signals import MultiSine
from src.numerics.rng import EXPLORATION_STREAM, NOISE_STREAM, PERTURBATION_STREAM, RngSpec
from src.reporting import ProgressReporter

GOLDEN_RATIO = 1.618033988749895


class TestSolveDare:
    def test_scalar_golden_ratio(self):
        solution = solve_dare([[1.0]], [[1.0]], [[1.0]], [[1.0]])
        assert solution.P[0, 0] == pytest.approx(GOLDEN_RATIO, abs=1e-9)
        assert solution.K[0, 0] == pytest.approx(-0.618034, abs=1e-6)
        assert solution.closed_loop_radius < 1.0

    def test_zero_dynamics(self):
        solution = solve_dare([[0.0]], [[1.0]], [[3.0]], [[1.0]])
        assert solution.P[0, 0] == pytest.approx(3.0)
        assert solution.K[0, 0] == pytest.approx(0.0)

    def test_uncontrollable_unstable(self):
        with pytest.raises(NotStabilizable):
            solve_dare([[1.5]], [[0.0]], [[1.0]], [[1.0]])

    def test_random_instances(self):
        generator = np.random.default_rng(7)
        solved = 0
        for _ in range(100):
            A = 1.2 * generator.standard_normal((3, 3)) / np.sqrt(3)
            B = generator.standard_normal((3, 1))
            Q, R = np.eye(3), np.eye(1)
            try:
                reference = scipy.linalg.solve_discrete_are(A, B, Q, R)
            except (np.linalg.LinAlgError, ValueError):
                continue
            if np.linalg.norm(reference, 2) > 1e6:
                continue
            try:
                solution = solve_dare(A, B, Q, R)
            except NotStabilizable:
                continue
            scale = max(1.0, np.linalg.norm(solution.P, 2))
            assert solution.riccati_residual <= 1e-9 * scale
            assert np.allclose(solution.P, reference, rtol=1e-6, atol=1e-8 * scale)
            solved += 1
        assert solved >= 90

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_dare(np.eye(2), np.ones((3, 1)), np.eye(2), np.eye(1))


def test_optimal_average_cost(regret_plant, regret_costs):
    solution = solve_lqr(regret_plant.with_sigma(0.5), regret_costs)
    assert solution.J_star == pytest.approx(0.25 * np.trace(solution.P))
    assert optimal_average_cost(solution.P, 0.0) == 0.0


class TestLnStability:
    def test_companion_is_controllable(self, regret_plant):
        assert ln_stability(regret_plant.A, regret_plant.B, 3) > 0.0

    def test_too_short_horizon(self):
        assert ln_stability(np.eye(2), np.array([1.0, 0.0]), 2) == pytest.approx(0.0, abs=1e-12)

    def test_invalid_horizon(self, regret_plant):
        with pytest.raises(ValueError):
            ln_stability(regret_plant.A, regret_plant.B, 0)


class TestCostMatrices:
    def test_scaled_identity(self, regret_costs):
        assert np.array_equal(regret_costs.Q, 10.0 * np.eye(3))
        assert regret_costs.stage_cost(np.ones(3), np.array([2.0])) == pytest.approx(34.0)

    def test_asymmetric_q(self):
        with pytest.raises(ValueError):
            CostMatrices(np.array([[1.0, 1.0], [0.0, 1.0]]), np.eye(1))

    def test_singular_r(self):
        with pytest.raises(ValueError):
            CostMatrices(np.eye(2), np.zeros((1, 1)))


class TestRegret:
    def test_zero_trajectory(self, scalar_plant):
        traj = simulate(scalar_plant, None, open_loop(np.zeros(10)), 10, RngSpec(0))
        record = regret(traj, CostMatrices.scaled_identity(1, 1), 0.0)
        assert np.all(record.regret == 0.0)
        assert record.at(0) == 0.0

    def test_constant_baseline(self, scalar_plant):
        traj = simulate(scalar_plant, None, open_loop(np.zeros(10)), 10, RngSpec(0))
        record = regret(traj, CostMatrices.scaled_identity(1, 1), 1.0)
        assert record.at(10) == pytest.approx(-10.0)
        assert record.J_star == pytest.approx(1.0)

    def test_additive_over_windows(self, regret_plant, regret_costs):
        traj = simulate(regret_plant.with_sigma(1.0), None, open_loop(np.zeros(60)), 60, RngSpec(1))
        record = regret(traj, regret_costs, 2.0)
        assert record.at(60) - record.at(25) == pytest.approx(record.between(25, 60))

    def test_optimal_controller_at_rest_has_no_regret(self, regret_plant, regret_costs):
        K_star = optimal_gain(regret_plant, regret_costs)
        traj = simulate(regret_plant, None, linear_feedback(K_star), 200, RngSpec(0), x0=np.zeros(3))
        record = regret(traj, regret_costs, 0.0)
        assert np.all(record.regret == 0.0)

    def test_per_step_baseline(self, scalar_plant):
        traj = simulate(scalar_plant.with_sigma(1.0), None, open_loop(np.ones(5)), 5, RngSpec(2))
        costs = CostMatrices.scaled_identity(1, 1)
        record = regret(traj, costs, stage_costs(traj, costs))
        assert np.allclose(record.regret, 0.0)


class TestPerturbedInitialController:
    def test_zero_scale_is_optimal(self, regret_plant, regret_costs):
        K0, A_hat = perturbed_initial_controller(regret_plant, regret_costs, 0.0, RngSpec(0))
        assert np.allclose(K0, solve_lqr(regret_plant, regret_costs).K)
        assert np.array_equal(A_hat, regret_plant.A)

    def test_deterministic_and_stabilizing(self, regret_plant, regret_costs):
        first, _ = perturbed_initial_controller(regret_plant, regret_costs, 0.05, RngSpec(3, PERTURBATION_STREAM))
        second, _ = perturbed_initial_controller(regret_plant, regret_costs, 0.05, RngSpec(3, PERTURBATION_STREAM))
        assert np.array_equal(first, second)
        assert regret_plant.spectral_radius > 1.0
        assert np.max(np.abs(np.linalg.eigvals(regret_plant.closed_loop(first)))) < 1.0


class TestEpochConfig:
    def test_schedule(self):
        config = EpochConfig(base_length=50, amplitude_scale=2.0, amplitude_exponent=-0.25)
        assert [config.epoch_length(i) for i in range(4)] == [50, 100, 200, 400]
        assert config.amplitude_cap(1) == pytest.approx(2.0 * 100**-0.25)
        assert config.line_count(4) == 2
        assert config.line_count(6) == 3

    @pytest.mark.parametrize(
        "kwargs",
        [{"base_length": 0}, {"amplitude_fraction": 0.2}, {"exploration": "chirp"}, {"baseline": "oracle"}],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            EpochConfig(**kwargs)


def optimal_gain(plant, costs):
    return solve_lqr(plant, costs).K


def run(truth, costs, K0, seed=0, num_epochs=3, unmodeled=None, reporter=None, **overrides):
    return run_epoch_doubling(
        EpochConfig(**overrides),
        truth,
        unmodeled,
        costs,
        K0,
        noise_rng=RngSpec.for_replication(seed, 0, NOISE_STREAM),
        exploration_rng=RngSpec.for_replication(seed, 0, EXPLORATION_STREAM),
        num_epochs=num_epochs,
        reporter=reporter,
        label="test",
    )


class TestEpochDoubling:
    def test_noiseless_estimates_are_exact(self, regret_plant, regret_costs):
        K_star = optimal_gain(regret_plant, regret_costs)
        result = run(regret_plant, regret_costs, K_star, num_epochs=4)
        assert [state.status for state in result.epochs] == ["updated"] * 4
        for state in result.epochs:
            assert state.err_A < 1e-6 and state.err_B < 1e-6
            assert np.allclose(state.next_controller, K_star, atol=1e-5)
            assert state.riccati_residual < 1e-3

    def test_no_epochs(self, regret_plant, regret_costs):
        result = run(regret_plant, regret_costs, optimal_gain(regret_plant, regret_costs), num_epochs=0)
        assert result.epochs == []
        assert result.trajectory.length == 0
        assert result.regret.length == 0
        assert result.injected_energy == 0.0

    def test_epoch_bookkeeping_with_horizon(self, regret_plant, regret_costs):
        result = run_epoch_doubling(
            EpochConfig(),
            regret_plant.with_sigma(0.01),
            None,
            regret_costs,
            optimal_gain(regret_plant, regret_costs),
            noise_rng=RngSpec(0, NOISE_STREAM),
            exploration_rng=RngSpec(0, EXPLORATION_STREAM),
            num_epochs=3,
            horizon=200,
        )
        assert [state.length for state in result.epochs] == [50, 100, 50]
        assert [state.start for state in result.epochs] == [0, 50, 150]
        assert result.trajectory.length == 200
        assert result.regret.length == 200

    def test_offsets_respect_amplitude_cap(self, regret_plant, regret_costs):
        K_star = optimal_gain(regret_plant, regret_costs)
        result = run(regret_plant, regret_costs, K_star, num_epochs=3, amplitude_fraction=0.5)
        traj = result.trajectory
        first = result.epochs[0]
        assert first.amplitude_cap == pytest.approx(50**-0.25)
        assert first.amplitudes == pytest.approx((0.5 * first.amplitude_cap,) * 2)
        for state in result.epochs:
            window = slice(state.start, state.start + state.length)
            offsets = traj.inputs[window, 0] - traj.states[:-1][window] @ state.controller[0]
            assert np.max(np.abs(offsets)) <= len(state.amplitudes) * state.amplitudes[0] + 1e-9
            expected = MultiSine(state.frequencies, state.amplitudes).samples(state.length, start=state.start)
            assert np.allclose(offsets, expected, atol=1e-9)
        assert np.array_equal(first.controller, K_star)

    def test_retains_controller_when_design_fails(self, regret_plant, regret_costs, monkeypatch):
        def refuse(*args, **kwargs):
            raise NotStabilizable("refused")

        monkeypatch.setattr("src.control.exploration.solve_dare", refuse)
        K0 = optimal_gain(regret_plant, regret_costs)
        reporter = ProgressReporter()
        result = run(regret_plant.with_sigma(0.01), regret_costs, K0, num_epochs=3, reporter=reporter)
        assert all(state.status == "not_stabilizable" for state in result.epochs)
        assert all(np.array_equal(state.next_controller, K0) for state in result.epochs)
        assert reporter.epochs_completed == 3
        assert reporter.controllers_retained == 3

    def test_unstabilizing_initial_controller(self, regret_plant, regret_costs):
        with pytest.raises(NotStabilizable):
            run(regret_plant, regret_costs, np.zeros((1, 3)))

    def test_explorations_share_noise(self, regret_plant, regret_costs):
        K_star = optimal_gain(regret_plant, regret_costs)
        noisy = regret_plant.with_sigma(0.05)
        multisine = run(noisy, regret_costs, K_star, seed=4, exploration="multisine")
        gaussian = run(noisy, regret_costs, K_star, seed=4, exploration="gaussian")
        assert np.array_equal(multisine.trajectory.noises, gaussian.trajectory.noises)
        assert not np.array_equal(multisine.trajectory.inputs, gaussian.trajectory.inputs)

    def test_prbs_exploration_runs(self, regret_plant, regret_costs):
        K_star = optimal_gain(regret_plant, regret_costs)
        result = run(regret_plant.with_sigma(0.01), regret_costs, K_star, exploration="prbs")
        assert len(result.epochs) == 3

    def test_empirical_baseline_without_noise(self, regret_plant, regret_costs):
        result = run(regret_plant, regret_costs, optimal_gain(regret_plant, regret_costs), baseline="empirical")
        assert np.all(result.regret.baseline == 0.0)
        assert result.regret.at(result.trajectory.length) == pytest.approx(result.regret.costs.sum())

    def test_gaussian_injects_more_unmodeled_energy(self, regret_plant, regret_costs):
        K_star = optimal_gain(regret_plant, regret_costs)
        noisy = regret_plant.with_sigma(0.001)
        energies = {"multisine": [], "gaussian": []}
        for seed in range(10):
            for exploration in energies:
                hp = HighPassNonlinearity(alpha=0.1, beta=0.9, c=4.0, n=3)
                try:
                    result = run(
                        noisy, regret_costs, K_star, seed=seed, num_epochs=4, unmodeled=hp, exploration=exploration
                    )
                except StateBlowup:
                    energies[exploration].append(math.inf)
                    continue
                energies[exploration].append(result.injected_energy)
        assert np.isfinite(energies["multisine"]).all()
        assert np.mean(energies["gaussian"]) > np.mean(energies["multisine"])


class TestCalibrateSigma:
    def test_linear_in_ratio(self, regret_plant, regret_costs):
        K = optimal_gain(regret_plant, regret_costs)
        ms = MultiSine.uniform((0.03, 0.05), 0.3)
        low = calibrate_sigma(regret_plant, K, ms, 0.01)
        high = calibrate_sigma(regret_plant, K, ms, 0.1)
        assert low > 0.0
        assert high == pytest.approx(10.0 * low)

    def test_negative_ratio(self, regret_plant, regret_costs):
        with pytest.raises(ValueError):
            calibrate_sigma(regret_plant, optimal_gain(regret_plant, regret_costs), MultiSine.uniform((0.1,)), -1.0)
