import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .scenario import ScenarioConfig, UnmodeledSpec, summarize
from .service import ExperimentService
from ..control.exploration import EpochConfig, ExplorationResult, calibrate_sigma, run_epoch_doubling
from ..control.riccati import CostMatrices, perturbed_initial_controller
from ..dynamics.simulate import open_loop, simulate
from ..dynamics.system import LinearSystem, companion_system
from ..dynamics.unmodeled import HighPassNonlinearity, LinearFilterMap, UnmodeledMap, hp_frequency_response
from ..errors import (
    ConfigError,
    DegenerateSignal,
    DimensionMismatch,
    EmptyInput,
    NoStabilizingController,
    RankDeficient,
    ResonantFrequency,
    StateBlowup,
)
from ..estimation.bounds import cross_term_tau, input_cross_power
from ..estimation.least_squares import estimation_errors, least_squares
from ..excitation.signals import ActuatorFilter, MultiSine, WhiteNoiseInput, normalize_energy
from ..excitation.spectral_lines import (
    estimate_spectral_line,
    multisine_information_matrix,
    on_grid,
    transfer_amplitude,
)
from ..numerics.csvio import sibling_path, write_csv
from ..numerics.rng import EXPLORATION_STREAM, NOISE_STREAM, PERTURBATION_STREAM, RngSpec
from ..numerics.spectral import lag_autocorrelation
from ..utils.logger import get_logger

logger = get_logger(__name__)

SUMMARY_COLUMNS = ["count", "median", "p90", "mean", "std"]
BODE_POINTS = 200
ACTUATOR_BURN_IN_FRACTION = 0.1
PRIME_STEPS = 200


def build_unmodeled(spec: UnmodeledSpec, n: int) -> Optional[UnmodeledMap]:
    if not spec.active:
        return None
    if spec.kind == "high_pass":
        return HighPassNonlinearity(spec.alpha, spec.beta, spec.c, n=n)
    return LinearFilterMap.high_pass(spec.alpha, spec.beta, spec.c, n=n)


def excitation_input(kind: str, E0: float, shape: MultiSine, T: int, rng: RngSpec, lead: int = 0) -> np.ndarray:
    """White noise with std E0, or the multi-sine ``shape`` rescaled to the same energy T·E0².

    With ``lead`` > 0 the signal starts ``lead`` steps before k = 0; the
    multi-sine keeps its phase so the last T samples are unchanged.
    """
    if kind == "white_noise":
        return WhiteNoiseInput(E0, rng).samples(lead + T)
    return normalize_energy(shape, E0, T).samples(lead + T, start=-lead)


def multisine_sigma_min(system: LinearSystem, shape: MultiSine, E0: float, T: int) -> float:
    """σ_min(Φ̄) of the energy-matched multi-sine; NaN when its lines cannot fill d columns."""
    try:
        return multisine_information_matrix(system, normalize_energy(shape, E0, T)).sigma_min
    except (DimensionMismatch, ResonantFrequency, DegenerateSignal) as e:
        logger.warning(f"No information matrix for E0={E0}: {e}")
        return math.nan


def epochs_for_horizon(horizon: int, base_length: int) -> int:
    """Smallest epoch count whose doubling schedule covers ``horizon`` steps."""
    count = 0
    covered = 0
    while covered < horizon:
        covered += base_length * 2**count
        count += 1
    return count


def _summary_row(values: Sequence[float], condition: tuple) -> list:
    try:
        return summarize(values, condition).row()
    except EmptyInput:
        return [*condition, 0, math.nan, math.nan, math.nan, math.nan]


def _status(error) -> str:
    return "ok" if error is None else type(error).__name__


async def run_estimation_sweep(scenario: ScenarioConfig, service: Optional[ExperimentService] = None) -> list[Path]:
    """Least-squares error per energy level and input kind over seeded replications."""
    service = service or ExperimentService(scenario.workers)
    sigma = scenario.plant.sigma if scenario.plant.sigma is not None else 1.0
    truth = companion_system(scenario.plant.coeffs, sigma)
    T = scenario.horizon
    shape = MultiSine.uniform(scenario.input.frequencies)

    jobs = [
        (E0, kind, replication)
        for E0 in scenario.input.energies
        for kind in scenario.input.kinds
        for replication in range(scenario.replications)
    ]

    sigma_mins = {
        (E0, kind): multisine_sigma_min(truth, shape, E0, T) if kind == "multisine" else 0.0
        for E0 in scenario.input.energies
        for kind in scenario.input.kinds
    }

    def job(item):
        E0, kind, replication = item
        signal = excitation_input(
            kind, E0, shape, T, RngSpec.for_replication(scenario.seed, replication, EXPLORATION_STREAM), PRIME_STEPS
        )
        past, inputs = signal[:PRIME_STEPS], signal[PRIME_STEPS:]
        unmodeled = build_unmodeled(scenario.unmodeled, truth.n)
        if unmodeled is not None:
            unmodeled.prime(past)
        traj = simulate(
            truth,
            unmodeled,
            open_loop(inputs),
            T,
            RngSpec.for_replication(scenario.seed, replication, NOISE_STREAM),
        )
        err_A, err_B = estimation_errors(least_squares(traj), truth)
        return max(err_A, err_B), err_A, err_B, float(np.sum(inputs**2)), cross_term_tau(traj)

    logger.info(
        f"Estimation sweep: {len(scenario.input.energies)} energies x {len(scenario.input.kinds)} inputs "
        f"x {scenario.replications} replications, T={T}"
    )
    outcomes = await service.run(job, jobs, tolerate=(RankDeficient, StateBlowup), label="estimate")

    rows = []
    by_condition: dict[tuple, list[float]] = {}
    for (E0, kind, replication), outcome in zip(jobs, outcomes):
        values = outcome.value if outcome.ok else (math.nan,) * 5
        error, err_A, err_B, energy, tau = values
        rows.append(
            [E0, kind, replication, error, err_A, err_B, energy, sigma_mins[(E0, kind)], tau, _status(outcome.error)]
        )
        by_condition.setdefault((E0, kind), []).append(values[0])

    output = write_csv(
        scenario.output,
        ["energy", "input", "replication", "error", "err_A", "err_B", "input_energy", "sigma_min", "tau", "status"],
        rows,
    )
    summary = write_csv(
        sibling_path(output, "summary"),
        ["energy", "input", *SUMMARY_COLUMNS],
        [_summary_row(values, condition) for condition, values in by_condition.items()],
    )
    failures = sum(not o.ok for o in outcomes)
    service.finish("estimate", len(jobs), failures, [output, summary])
    return [output, summary]


def _regret_epoch_config(scenario: ScenarioConfig, exploration: str) -> EpochConfig:
    control = scenario.control
    return EpochConfig(
        base_length=control.base_length,
        amplitude_scale=control.amplitude_scale,
        amplitude_exponent=control.amplitude_exponent,
        amplitude_fraction=control.amplitude_fraction,
        frequencies=scenario.input.frequencies,
        exploration=exploration,
        optimize_frequencies=control.optimize_frequencies,
        baseline=control.baseline,
    )


def regret_replication(
    scenario: ScenarioConfig,
    ratio: Optional[float],
    exploration: str,
    replication: int,
    reporter=None,
    label: str = "",
) -> tuple[ExplorationResult, float]:
    """One epoch-doubling run; both exploration kinds of a replication share K⁰, σ and the noise stream."""
    control = scenario.control
    truth = companion_system(scenario.plant.coeffs)
    costs = CostMatrices.scaled_identity(truth.n, truth.m, control.q_scale, control.r_scale)
    config = _regret_epoch_config(scenario, exploration)

    K0, A_hat0 = perturbed_initial_controller(
        truth, costs, control.perturb_scale, RngSpec.for_replication(scenario.seed, replication, PERTURBATION_STREAM)
    )
    if ratio is None:
        sigma = scenario.plant.sigma or 0.0
    else:
        pilot = MultiSine.uniform(
            config.frequencies[: config.line_count(truth.d)], config.amplitude_fraction * config.amplitude_cap(0)
        )
        sigma = calibrate_sigma(truth, K0, pilot, ratio)

    result = run_epoch_doubling(
        config,
        truth.with_sigma(sigma),
        build_unmodeled(scenario.unmodeled, truth.n),
        costs,
        K0,
        noise_rng=RngSpec.for_replication(scenario.seed, replication, NOISE_STREAM),
        exploration_rng=RngSpec.for_replication(scenario.seed, replication, EXPLORATION_STREAM),
        num_epochs=epochs_for_horizon(scenario.horizon, control.base_length),
        horizon=scenario.horizon,
        initial_model=LinearSystem(A_hat0, truth.B, sigma),
        reporter=reporter,
        label=label,
    )
    return result, sigma


async def run_regret_experiment(scenario: ScenarioConfig, service: Optional[ExperimentService] = None) -> list[Path]:
    """Cumulative regret of the epoch-doubling controller for every noise level and exploration kind."""
    service = service or ExperimentService(scenario.workers)
    reporter = service.reporter
    horizon = scenario.horizon
    count = math.ceil((scenario.plant.n + 1) / 2)
    if len(scenario.input.frequencies) < count:
        raise ConfigError(
            f"input.frequencies needs at least {count} entries for n={scenario.plant.n}", field="input.frequencies"
        )

    jobs = [
        (label, ratio, exploration, replication)
        for label, ratio in scenario.noise_conditions()
        for exploration in scenario.control.explorations
        for replication in range(scenario.replications)
    ]

    def job(item):
        label, ratio, exploration, replication = item
        return regret_replication(
            scenario, ratio, exploration, replication, reporter, label=f"{label}/{exploration}/{replication}"
        )

    logger.info(
        f"Regret experiment: {len(scenario.noise_conditions())} noise levels x "
        f"{len(scenario.control.explorations)} explorations x {scenario.replications} replications, {horizon} steps"
    )
    outcomes = await service.run(job, jobs, tolerate=(StateBlowup, NoStabilizingController), label="regret")

    rows = []
    epoch_rows = []
    curves: dict[tuple, list[np.ndarray]] = {}
    for (label, ratio, exploration, replication), outcome in zip(jobs, outcomes):
        condition = (label, exploration)
        if not outcome.ok:
            rows.append([label, exploration, replication, math.nan, math.nan, math.nan, math.nan, math.nan, _status(outcome.error)])
            curves.setdefault(condition, []).append(np.full(horizon, math.inf))
            continue

        result, sigma = outcome.value
        epoch_index = np.empty(result.trajectory.length, dtype=int)
        for state in result.epochs:
            epoch_index[state.start : state.start + state.length] = state.index
            epoch_rows.append(
                [
                    label,
                    exploration,
                    replication,
                    state.index,
                    state.length,
                    state.amplitude_cap,
                    *state.frequencies,
                    state.err_A,
                    state.err_B,
                    state.riccati_residual,
                    state.closed_loop_radius,
                    state.status,
                ]
            )
        record = result.regret
        for k in range(record.length):
            rows.append(
                [label, exploration, replication, sigma, k + 1, record.costs[k], record.regret[k], int(epoch_index[k]), "ok"]
            )
        curves.setdefault(condition, []).append(record.regret)

    output = write_csv(
        scenario.output,
        ["noise", "exploration", "seed", "sigma", "k", "cost", "regret", "epoch_index", "status"],
        rows,
    )

    summary_rows = []
    for (label, exploration), runs in curves.items():
        stacked = np.vstack(runs)
        for k in range(horizon):
            summary_rows.append(_summary_row(stacked[:, k], (label, exploration, k + 1)))
    summary = write_csv(
        sibling_path(output, "summary"), ["noise", "exploration", "k", *SUMMARY_COLUMNS], summary_rows
    )

    line_columns = [f"f_{j + 1}" for j in range(count)]
    epochs = write_csv(
        sibling_path(output, "epochs"),
        [
            "noise",
            "exploration",
            "seed",
            "epoch",
            "T_i",
            "amp_cap",
            *line_columns,
            "err_A",
            "err_B",
            "riccati_residual",
            "closed_loop_radius",
            "status",
        ],
        epoch_rows,
    )
    failures = sum(not o.ok for o in outcomes)
    service.finish("regret", len(jobs), failures, [output, summary, epochs])
    return [output, summary, epochs]


def unmodeled_response(unmodeled: Optional[UnmodeledMap], inputs: np.ndarray, n: int) -> np.ndarray:
    if unmodeled is None:
        return np.zeros((inputs.shape[0], n))
    return np.array([unmodeled.step(u) for u in inputs])


async def run_lower_bound(scenario: ScenarioConfig, service: Optional[ExperimentService] = None) -> list[Path]:
    """Input/unmodeled cross power τ over a doubling horizon schedule, white noise vs multi-sine."""
    service = service or ExperimentService(scenario.workers)
    n = scenario.plant.n
    E0 = scenario.input.energies[0] if scenario.input.energies else 1.0
    shape = MultiSine.uniform(scenario.input.frequencies)

    jobs = [
        (T, kind, replication)
        for T in scenario.input.horizons
        for kind in scenario.input.kinds
        for replication in range(scenario.replications)
    ]

    def job(item):
        T, kind, replication = item
        inputs = excitation_input(
            kind, E0, shape, T, RngSpec.for_replication(scenario.seed, replication, EXPLORATION_STREAM)
        )
        w = unmodeled_response(build_unmodeled(scenario.unmodeled, n), inputs, n)
        return input_cross_power(inputs, w)

    logger.info(f"Lower-bound cross power: horizons {list(scenario.input.horizons)}, E0={E0:g}")
    outcomes = await service.run(job, jobs, label="lower-bound")

    rows = []
    by_condition: dict[tuple, list[float]] = {}
    for (T, kind, replication), outcome in zip(jobs, outcomes):
        rows.append([T, kind, replication, outcome.value])
        by_condition.setdefault((T, kind), []).append(outcome.value)

    output = write_csv(scenario.output, ["horizon", "input", "replication", "tau"], rows)
    summary = write_csv(
        sibling_path(output, "summary"),
        ["horizon", "input", *SUMMARY_COLUMNS],
        [_summary_row(values, condition) for condition, values in by_condition.items()],
    )
    service.finish("lower-bound", len(jobs), 0, [output, summary])
    return [output, summary]


def line_window(frequencies: Sequence[float], T: int, burn_in: int) -> Optional[int]:
    """Longest trailing window after ``burn_in`` on whose grid every frequency lies."""
    longest = T - burn_in
    for length in range(longest, max(longest // 2, 1) - 1, -1):
        if all(on_grid(f, length) for f in frequencies):
            return length
    return None


async def run_actuator_demo(scenario: ScenarioConfig, service: Optional[ExperimentService] = None) -> list[Path]:
    """Both input kinds through the first-order actuator smoother: signals, line amplitudes, lag-1 autocorrelation."""
    service = service or ExperimentService(scenario.workers)
    T = scenario.horizon
    smoothing = scenario.input.smoothing
    E0 = scenario.input.energies[0] if scenario.input.energies else 1.0
    shape = MultiSine.uniform(scenario.input.frequencies)
    frequencies = shape.frequencies

    def job(kind):
        pre = excitation_input(kind, E0, shape, T, RngSpec.for_replication(scenario.seed, 0, EXPLORATION_STREAM))
        return pre, ActuatorFilter(smoothing).apply(pre)

    kinds = list(scenario.input.kinds)
    outcomes = await service.run(job, kinds, label="actuator")
    signals = {kind: outcome.value for kind, outcome in zip(kinds, outcomes)}

    header = ["k"]
    for kind in kinds:
        header += [f"{kind}_pre", f"{kind}_post"]
    signal_rows = (
        [k, *(value for kind in kinds for value in (signals[kind][0][k], signals[kind][1][k]))] for k in range(T)
    )
    output = write_csv(scenario.output, header, signal_rows)

    burn_in = int(ACTUATOR_BURN_IN_FRACTION * T)
    length = line_window(frequencies, T, burn_in)
    if length is None:
        logger.warning("No trailing window puts every frequency on grid; line amplitudes include leakage")
        length = T - burn_in
    start = T - length

    smoother = ActuatorFilter(smoothing)
    line_rows = []
    for kind in kinds:
        pre, post = signals[kind]
        for f in frequencies:
            before = estimate_spectral_line(pre, f, start, length - 1, allow_leakage=True)
            after = estimate_spectral_line(post, f, start, length - 1, allow_leakage=True)
            pre_amp = float(np.abs(before.amplitude[0]))
            post_amp = float(np.abs(after.amplitude[0]))
            gain = abs(smoother.frequency_response(f))
            line_rows.append([kind, f, pre_amp, post_amp, gain, post_amp - gain * pre_amp])
    lines = write_csv(
        sibling_path(output, "lines"),
        ["input", "frequency", "pre_amplitude", "post_amplitude", "filter_gain", "deviation"],
        line_rows,
    )

    autocorr_rows = []
    for kind in kinds:
        pre, post = signals[kind]
        autocorr_rows.append([kind, "pre", 1, lag_autocorrelation(pre, 1)])
        autocorr_rows.append([kind, "post", 1, lag_autocorrelation(post, 1)])
    autocorr = write_csv(sibling_path(output, "autocorr"), ["input", "stage", "lag", "autocorrelation"], autocorr_rows)

    service.finish("actuator", len(kinds), 0, [output, lines, autocorr])
    return [output, lines, autocorr]


async def run_bode_sweep(scenario: ScenarioConfig, service: Optional[ExperimentService] = None) -> list[Path]:
    """Magnitude and phase of the unmodeled high-pass filter, the actuator smoother and the plant input gain."""
    service = service or ExperimentService(scenario.workers)
    spec = scenario.unmodeled
    truth = companion_system(scenario.plant.coeffs)
    high_pass = HighPassNonlinearity(spec.alpha, spec.beta, 1.0, n=truth.n)
    smoother = ActuatorFilter(scenario.input.smoothing)

    rows = []
    for f in np.arange(1, BODE_POINTS + 1) * (0.5 / BODE_POINTS):
        f = float(f)
        hp = hp_frequency_response(high_pass, f)
        lp = smoother.frequency_response(f)
        try:
            plant_gain = float(np.linalg.norm(transfer_amplitude(truth, f, [1.0])[: truth.n]))
        except ResonantFrequency:
            plant_gain = math.inf
        rows.append(
            [f, abs(hp), math.degrees(np.angle(hp)), abs(lp), math.degrees(np.angle(lp)), plant_gain]
        )

    output = write_csv(
        scenario.output,
        ["frequency", "high_pass_magnitude", "high_pass_phase_deg", "actuator_magnitude", "actuator_phase_deg", "plant_gain"],
        rows,
    )
    service.finish("bode", 0, 0, [output])
    return [output]


RUNNERS = {
    "estimation_sweep": run_estimation_sweep,
    "regret": run_regret_experiment,
    "lower_bound": run_lower_bound,
    "actuator_demo": run_actuator_demo,
    "bode": run_bode_sweep,
}


async def run_scenario(scenario: ScenarioConfig, service: Optional[ExperimentService] = None) -> list[Path]:
    return await RUNNERS[scenario.scenario](scenario, service)
