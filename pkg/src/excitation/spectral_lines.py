import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .signals import MultiSine
from ..dynamics.system import LinearSystem
from ..errors import DimensionMismatch, DuplicateFrequency, FrequencyOffGrid, ResonantFrequency, SingularMatrix
from ..numerics.linalg import complex_solve, sigma_min
from ..numerics.rng import RngSpec
from ..numerics.spectral import as_sequence
from ..utils.logger import get_logger

logger = get_logger(__name__)

GRID_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SpectralLineEstimate:
    frequency: float
    amplitude: np.ndarray
    start: int
    span: int  # S; the window holds S+1 samples
    empirical_deviation: float = 0.0

    @property
    def window(self) -> tuple[int, int]:
        return self.start, self.span


@dataclass(frozen=True)
class InformationMatrix:
    frequencies: tuple[float, ...]
    matrix: np.ndarray
    sigma_min: float

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def on_grid(frequency: float, length: int) -> bool:
    scaled = frequency * length
    return abs(scaled - round(scaled)) <= GRID_TOLERANCE * max(1.0, abs(scaled))


def estimate_spectral_line(
    sequence,
    frequency: float,
    start: int,
    span: int,
    allow_leakage: bool = False,
    reference: Optional[np.ndarray] = None,
) -> SpectralLineEstimate:
    """Finite-window line amplitude (1/(S+1)) Σ_{k=i}^{i+S} y_k e^{-j2πω₀k}.

    The phase uses the absolute step ``k`` so that windows cut from one long
    record agree with each other. With ``reference`` given, the deviation
    √(S+1)·‖amplitude − reference‖ is recorded.
    """
    values = as_sequence(sequence)
    if span < 0 or start < 0 or start + span >= values.shape[0]:
        raise DimensionMismatch(f"Window [{start}, {start + span}] outside a sequence of length {values.shape[0]}")
    if not allow_leakage and not on_grid(frequency, span + 1):
        raise FrequencyOffGrid(f"Frequency {frequency} is not on the grid of {span + 1} samples")

    k = np.arange(start, start + span + 1)
    phases = np.exp(-2j * np.pi * frequency * k)
    amplitude = phases @ values[start : start + span + 1] / (span + 1)

    deviation = 0.0
    if reference is not None:
        deviation = float(np.sqrt(span + 1) * np.linalg.norm(amplitude - np.asarray(reference)))
    return SpectralLineEstimate(frequency, amplitude, start, span, deviation)


def transfer_amplitude(system: LinearSystem, frequency: float, u_amp) -> np.ndarray:
    """φ̄(ω₀) = [(e^{j2πω₀}I − A)^{-1} B; I_m] ū(ω₀)."""
    u_amp = np.atleast_1d(np.asarray(u_amp, dtype=complex))
    if u_amp.shape != (system.m,):
        raise DimensionMismatch(f"Input amplitude has shape {u_amp.shape}, expected ({system.m},)")

    z = np.exp(2j * np.pi * frequency)
    try:
        x_amp = complex_solve(z * np.eye(system.n) - system.A, system.B @ u_amp)
    except SingularMatrix as e:
        raise ResonantFrequency(f"e^(j2π·{frequency}) is an eigenvalue of A") from e
    return np.concatenate([x_amp, u_amp])


def information_matrix(system: LinearSystem, frequencies: Sequence[float], u_amps) -> InformationMatrix:
    freqs = tuple(float(f) for f in frequencies)
    if len(set(np.round(freqs, 12))) != len(freqs):
        raise DuplicateFrequency(f"Frequencies must be distinct: {freqs}")

    amps = np.asarray(u_amps, dtype=complex).reshape(len(freqs), -1)
    columns = [transfer_amplitude(system, f, a) for f, a in zip(freqs, amps)]
    matrix = np.column_stack(columns) if columns else np.zeros((system.d, 0), dtype=complex)
    if matrix.shape[1] != system.d:
        raise DimensionMismatch(f"Information matrix has {matrix.shape[1]} spectral lines, expected d={system.d}")
    return InformationMatrix(freqs, matrix, sigma_min(matrix))


def multisine_information_matrix(system: LinearSystem, ms: MultiSine) -> InformationMatrix:
    """Φ̄ for a real multi-sine: each cosine contributes lines at ±f_j with amplitude M_j/2.

    A cosine at f = 1/2 aliases onto itself and contributes one line
    with amplitude M_j. With odd d the last conjugate line is dropped.
    """
    if system.m != 1:
        raise DimensionMismatch(f"A scalar multi-sine drives m=1 systems, got m={system.m}")
    frequencies: list[float] = []
    amplitudes: list[float] = []
    for f, M in zip(ms.frequencies, ms.amplitudes):
        if np.isclose(f, 0.5):
            frequencies.append(0.5)
            amplitudes.append(M)
            continue
        frequencies.extend([f, -f])
        amplitudes.extend([M / 2.0, M / 2.0])
    if len(frequencies) == system.d + 1 and system.d % 2 == 1:
        frequencies, amplitudes = frequencies[:-1], amplitudes[:-1]
    return information_matrix(system, frequencies, np.asarray(amplitudes).reshape(-1, 1))


def pe_lower_bound(info: InformationMatrix, n: int) -> float:
    """(1/(2n))·σ_min(Φ̄)², the excitation floor as printed (no window-length factor)."""
    return info.sigma_min**2 / (2.0 * n)


def empirical_radius(
    generator: Callable[[np.random.Generator], np.ndarray],
    frequency: float,
    span: int,
    reps: int,
    rng: RngSpec,
    true_amplitude: Optional[np.ndarray] = None,
) -> float:
    """Monte-Carlo scale of √(S+1)·(line estimate − amplitude) with Re/Im parts pooled.

    ``generator`` draws one realization (at least S+1 samples) from the
    generator it is handed; rep ``r`` uses ``rng.child_generator(r)``. Without
    ``true_amplitude`` the across-rep mean stands in for it.
    """
    if reps < 30:
        raise ValueError(f"empirical_radius needs at least 30 reps, got {reps}")

    estimates = []
    for rep in range(reps):
        realization = generator(rng.child_generator(rep))
        line = estimate_spectral_line(realization, frequency, 0, span, allow_leakage=True)
        estimates.append(np.atleast_1d(line.amplitude))
    estimates = np.array(estimates)

    if true_amplitude is None:
        center = estimates.mean(axis=0)
        ddof = 1
    else:
        center = np.atleast_1d(np.asarray(true_amplitude, dtype=complex))
        ddof = 0

    deviations = np.sqrt(span + 1) * (estimates - center)
    pooled = np.concatenate([deviations.real.ravel(), deviations.imag.ravel()])
    dof = max(pooled.size - ddof, 1)
    return float(np.sqrt(np.sum(pooled**2) / dof))


def select_frequencies(
    system: LinearSystem,
    candidates: Sequence[float],
    count: int,
    amplitude: float,
    epoch_length: int,
) -> tuple[MultiSine, float]:
    """Pick ``count`` distinct grid-snapped candidates maximising σ_min(Φ̄) of the resulting multi-sine."""
    grid = sorted({min(max(round(f * epoch_length), 1), epoch_length // 2) / epoch_length for f in candidates})
    if len(grid) < count:
        raise ValueError(f"Only {len(grid)} distinct grid frequencies available, need {count}")

    best: Optional[tuple[MultiSine, float]] = None
    for subset in itertools.combinations(grid, count):
        ms = MultiSine.uniform(subset, amplitude)
        try:
            score = multisine_information_matrix(system, ms).sigma_min
        except (ResonantFrequency, DimensionMismatch):
            continue
        if best is None or score > best[1]:
            best = (ms, score)

    if best is None:
        raise ResonantFrequency("Every candidate subset hits an eigenvalue of A")
    logger.debug(f"Selected frequencies {best[0].frequencies} with sigma_min={best[1]:.4g}")
    return best
