import copy
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .regret import RegretRecord, regret, stage_costs
from .riccati import CostMatrices, LqrSolution, solve_dare, solve_lqr
from ..dynamics.simulate import Plant, Trajectory, linear_feedback
from ..dynamics.system import LinearSystem
from ..dynamics.unmodeled import UnmodeledMap
from ..errors import NotStabilizable, RankDeficient, ResonantFrequency
from ..estimation.least_squares import estimation_errors, least_squares
from ..excitation.signals import MultiSine, PrbsInput
from ..excitation.spectral_lines import select_frequencies
from ..numerics.linalg import spectral_radius
from ..numerics.rng import RngSpec
from ..utils.logger import get_logger

logger = get_logger(__name__)

EXPLORATIONS = ("multisine", "gaussian", "prbs")
BASELINES = ("analytic", "empirical")
CALIBRATION_STEPS = 500


@dataclass(frozen=True)
class EpochConfig:
    """Knobs of the epoch-doubling certainty-equivalence loop.

    Epoch ``i`` lasts ``base_length·2^i`` steps and excites with amplitudes
    ``amplitude_fraction · amplitude_scale · T_i^amplitude_exponent``.
    """

    base_length: int = 50
    amplitude_scale: float = 1.0
    amplitude_exponent: float = -0.25
    amplitude_fraction: float = 1.0
    frequencies: tuple[float, ...] = (0.03, 0.05)
    exploration: str = "multisine"
    optimize_frequencies: bool = False
    snap_to_grid: bool = True
    baseline: str = "analytic"
    prbs_bits: int = 7

    def __post_init__(self):
        if self.base_length < 1:
            raise ValueError(f"base_length must be positive, got {self.base_length}")
        if self.amplitude_scale < 0:
            raise ValueError(f"amplitude_scale must be non-negative, got {self.amplitude_scale}")
        if not 0.5 <= self.amplitude_fraction <= 1.0:
            raise ValueError(f"amplitude_fraction must lie in [0.5, 1], got {self.amplitude_fraction}")
        if self.exploration not in EXPLORATIONS:
            raise ValueError(f"exploration must be one of {EXPLORATIONS}, got {self.exploration!r}")
        if self.baseline not in BASELINES:
            raise ValueError(f"baseline must be one of {BASELINES}, got {self.baseline!r}")
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))

    def epoch_length(self, index: int) -> int:
        return self.base_length * 2**index

    def amplitude_cap(self, index: int) -> float:
        return self.amplitude_scale * self.epoch_length(index) ** self.amplitude_exponent

    def line_count(self, d: int) -> int:
        return math.ceil(d / 2)


@dataclass(frozen=True)
class EpochState:
    index: int
    start: int
    length: int
    amplitude_cap: float
    frequencies: tuple[float, ...]
    amplitudes: tuple[float, ...]
    controller: np.ndarray  # gain applied during the epoch
    next_controller: np.ndarray
    err_A: float = math.nan
    err_B: float = math.nan
    riccati_residual: float = math.nan
    closed_loop_radius: float = math.nan  # true plant under next_controller
    status: str = "updated"

    @property
    def retained(self) -> bool:
        return self.status != "updated"


@dataclass(frozen=True)
class ExplorationResult:
    trajectory: Trajectory
    epochs: list[EpochState]
    regret: RegretRecord
    optimal: LqrSolution
    injected_energy: float = 0.0  # Σ‖w_k‖² over the run


def _epoch_multisine(
    config: EpochConfig,
    index: int,
    count: int,
    model: Optional[LinearSystem],
) -> MultiSine:
    length = config.epoch_length(index)
    amplitude = config.amplitude_fraction * config.amplitude_cap(index)

    if config.optimize_frequencies and model is not None:
        try:
            ms, _ = select_frequencies(model, config.frequencies, count, amplitude, length)
            return ms
        except (ResonantFrequency, ValueError) as e:
            logger.warning(f"Frequency selection failed in epoch {index}, using configured order: {e}")

    ms = MultiSine.uniform(config.frequencies[:count], amplitude)
    return ms.snapped(length) if config.snap_to_grid else ms


def _exploration_offsets(
    config: EpochConfig,
    ms: MultiSine,
    start: int,
    length: int,
    generator: np.random.Generator,
    index: int,
) -> np.ndarray:
    if config.exploration == "multisine":
        return ms.samples(length, start=start)
    if config.exploration == "gaussian":
        # same mean power as the multi-sine it replaces
        return math.sqrt(ms.mean_square) * generator.standard_normal(length)
    amplitude = math.sqrt(ms.mean_square)
    return PrbsInput(amplitude, nbits=config.prbs_bits, seed=index + 1).samples(length)


def run_epoch_doubling(
    config: EpochConfig,
    truth: LinearSystem,
    unmodeled: Optional[UnmodeledMap],
    costs: CostMatrices,
    initial_controller,
    noise_rng: RngSpec,
    exploration_rng: RngSpec,
    num_epochs: int,
    horizon: Optional[int] = None,
    initial_model: Optional[LinearSystem] = None,
    reporter=None,
    label: str = "",
) -> ExplorationResult:
    """Certainty-equivalence LQR with multi-sine exploration over doubling epochs.

    Each epoch applies u_k = K x_k + u_spec_k on the true plant, re-estimates
    (Â, B̂) by least squares on that epoch's data only and redesigns K from the
    estimate. When the estimate is rank deficient or not stabilizable the
    previous controller is kept. ``horizon`` truncates the run to that many
    steps in total.
    """
    if num_epochs < 0:
        raise ValueError(f"num_epochs must be non-negative, got {num_epochs}")
    if horizon is not None and horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    K0 = np.atleast_2d(np.asarray(initial_controller, dtype=float))
    if spectral_radius(truth.closed_loop(K0)) >= 1.0:
        raise NotStabilizable("Initial controller does not stabilize the true plant")

    count = config.line_count(truth.d)
    if len(config.frequencies) < count:
        raise ValueError(f"Need at least {count} candidate frequencies for d={truth.d}, got {len(config.frequencies)}")

    optimal = solve_lqr(truth, costs)
    plant = Plant(truth, copy.deepcopy(unmodeled), noise_rng)
    explore = exploration_rng.generator()

    K = K0
    model = initial_model
    parts: list[Trajectory] = []
    epochs: list[EpochState] = []
    start = 0

    for index in range(num_epochs):
        length = config.epoch_length(index)
        if horizon is not None:
            length = min(length, horizon - start)
        if length <= 0:
            break

        ms = _epoch_multisine(config, index, count, model)
        offsets = _exploration_offsets(config, ms, start, length, explore, index)
        part = plant.run(linear_feedback(K, offsets), length)
        parts.append(part)

        state, estimate = _update_controller(truth, costs, part, K, index, start, config.amplitude_cap(index), ms)
        epochs.append(state)
        if estimate is not None:
            model = estimate
        K = state.next_controller
        start += length

        if reporter is not None:
            reporter.notify_epoch_completed(label, state)
            if state.retained:
                reporter.notify_controller_retained(label, state)

    trajectory = Trajectory.concatenate(parts) if parts else _empty_trajectory(truth)

    if config.baseline == "empirical":
        baseline = _paired_optimal_costs(truth, unmodeled, costs, optimal, noise_rng, trajectory.length)
    else:
        baseline = optimal.J_star

    record = regret(trajectory, costs, baseline)
    injected = float(np.sum(trajectory.unmodeled**2))
    logger.debug(
        f"{label or 'run'}: {len(epochs)} epochs, {trajectory.length} steps, "
        f"regret={record.at(trajectory.length):.4g}, J*={optimal.J_star:.4g}"
    )
    return ExplorationResult(
        trajectory=trajectory,
        epochs=epochs,
        regret=record,
        optimal=optimal,
        injected_energy=injected,
    )


def _update_controller(
    truth: LinearSystem,
    costs: CostMatrices,
    part: Trajectory,
    K: np.ndarray,
    index: int,
    start: int,
    amplitude_cap: float,
    ms: MultiSine,
) -> tuple[EpochState, Optional[LinearSystem]]:
    common = dict(
        index=index,
        start=start,
        length=part.length,
        amplitude_cap=amplitude_cap,
        frequencies=ms.frequencies,
        amplitudes=ms.amplitudes,
        controller=K,
    )
    try:
        estimate = least_squares(part)
    except RankDeficient as e:
        logger.warning(f"Epoch {index}: {e}; keeping previous controller")
        return EpochState(next_controller=K, status="rank_deficient", **common), None

    err_A, err_B = estimation_errors(estimate, truth)
    try:
        design = solve_dare(estimate.A_hat, estimate.B_hat, costs.Q, costs.R)
    except NotStabilizable as e:
        logger.warning(f"Epoch {index}: estimate not stabilizable ({e}); keeping previous controller")
        state = EpochState(
            next_controller=K,
            err_A=err_A,
            err_B=err_B,
            closed_loop_radius=spectral_radius(truth.closed_loop(K)),
            status="not_stabilizable",
            **common,
        )
        return state, estimate.as_system(truth.sigma)

    state = EpochState(
        next_controller=design.K,
        err_A=err_A,
        err_B=err_B,
        riccati_residual=design.riccati_residual,
        closed_loop_radius=spectral_radius(truth.closed_loop(design.K)),
        **common,
    )
    return state, estimate.as_system(truth.sigma)


def _paired_optimal_costs(
    truth: LinearSystem,
    unmodeled: Optional[UnmodeledMap],
    costs: CostMatrices,
    optimal: LqrSolution,
    noise_rng: RngSpec,
    length: int,
) -> np.ndarray:
    """Per-step cost of the optimal controller on the same noise realisation."""
    plant = Plant(truth, copy.deepcopy(unmodeled), noise_rng)
    return stage_costs(plant.run(linear_feedback(optimal.K), length), costs)


def calibrate_sigma(
    truth: LinearSystem,
    initial_controller,
    ms: MultiSine,
    ratio: float,
    steps: int = CALIBRATION_STEPS,
) -> float:
    """σ = ratio · RMS state of a noiseless pilot run under K⁰ plus the exploration multi-sine.

    The pilot run ignores any unmodeled map.
    """
    if ratio < 0:
        raise ValueError(f"ratio must be non-negative, got {ratio}")
    pilot = Plant(truth.with_sigma(0.0), None, RngSpec(0))
    states = pilot.run(linear_feedback(initial_controller, ms.samples(steps)), steps).states[1:]
    rms = float(np.sqrt(np.mean(states**2)))
    return ratio * rms


def _empty_trajectory(system: LinearSystem) -> Trajectory:
    return Trajectory(
        states=np.zeros((1, system.n)),
        inputs=np.zeros((0, system.m)),
        unmodeled=np.zeros((0, system.n)),
        noises=np.zeros((0, system.n)),
    )
