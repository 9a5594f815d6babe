from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal

from ..errors import DegenerateSignal, DuplicateFrequency
from ..numerics.rng import RngSpec


@dataclass(frozen=True)
class MultiSine:
    """u_k = Σ_j M_j cos(2π f_j k), frequencies in cycles/step."""

    frequencies: tuple[float, ...]
    amplitudes: tuple[float, ...]

    def __post_init__(self):
        freqs = tuple(float(f) for f in np.atleast_1d(self.frequencies))
        amps = tuple(float(a) for a in np.atleast_1d(self.amplitudes))
        if len(freqs) != len(amps):
            raise ValueError(f"{len(freqs)} frequencies but {len(amps)} amplitudes")
        for f in freqs:
            if not 0.0 < f <= 0.5:
                raise ValueError(f"Frequency {f} outside (0, 0.5]")
        if len(set(freqs)) != len(freqs):
            raise DuplicateFrequency(f"Frequencies must be distinct: {freqs}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("Amplitudes must be finite")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def uniform(cls, frequencies: Sequence[float], amplitude: float = 1.0) -> "MultiSine":
        return cls(tuple(frequencies), tuple(amplitude for _ in frequencies))

    def sample(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        total = np.zeros_like(k)
        for f, M in zip(self.frequencies, self.amplitudes):
            total = total + M * np.cos(2.0 * np.pi * f * k)
        return total

    def samples(self, T: int, start: int = 0) -> np.ndarray:
        return self.sample(np.arange(start, start + T))

    def scaled(self, factor: float) -> "MultiSine":
        return MultiSine(self.frequencies, tuple(factor * M for M in self.amplitudes))

    def snapped(self, T: int) -> "MultiSine":
        """Move every frequency to the nearest free point of the grid Ω_T (never onto 0).

        Frequencies that would collide on a coarse grid take the next closest
        unused grid index, in the order they are listed.
        """
        top = T // 2
        if top < len(self.frequencies):
            raise DuplicateFrequency(f"Grid of length {T} holds fewer than {len(self.frequencies)} nonzero lines")
        used: set[int] = set()
        snapped = []
        for f in self.frequencies:
            index = min(range(1, top + 1), key=lambda i: (abs(i - f * T), i) if i not in used else (np.inf, i))
            used.add(index)
            snapped.append(index / T)
        return MultiSine(tuple(snapped), self.amplitudes)

    @property
    def mean_square(self) -> float:
        return float(sum(M * M for M in self.amplitudes) / 2.0)


def multisine_sample(ms: MultiSine, k: int) -> float:
    return float(ms.sample(k))


def normalize_energy(ms: MultiSine, E0: float, T: int) -> MultiSine:
    """Scale amplitudes so that Σ_{k<T} u_k² = T·E0², the energy of white noise with std E0."""
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    if E0 == 0:
        return ms.scaled(0.0)

    energy = float(np.sum(ms.samples(T) ** 2))
    if energy <= 0.0:
        raise DegenerateSignal("Unscaled multi-sine has zero energy over the horizon")
    return ms.scaled(np.sqrt(T * E0 * E0 / energy))


@dataclass(frozen=True)
class WhiteNoiseInput:
    std: float
    rng: RngSpec

    def __post_init__(self):
        if self.std < 0:
            raise ValueError(f"std must be non-negative, got {self.std}")

    def samples(self, T: int) -> np.ndarray:
        return self.std * self.rng.generator().standard_normal(T)


@dataclass(frozen=True)
class PrbsInput:
    """Maximal-length shift-register sequence mapped to ±amplitude, each bit held ``hold`` steps."""

    amplitude: float
    nbits: int = 7
    hold: int = 1
    seed: int = 1

    def __post_init__(self):
        if self.nbits < 2:
            raise ValueError("PRBS register needs at least 2 bits")
        if self.hold < 1:
            raise ValueError("hold must be at least 1")

    @property
    def period(self) -> int:
        return ((1 << self.nbits) - 1) * self.hold

    def _initial_state(self) -> np.ndarray:
        bits = (self.seed % ((1 << self.nbits) - 1)) + 1
        return np.array([(bits >> i) & 1 for i in range(self.nbits)], dtype=np.int8)

    def samples(self, T: int) -> np.ndarray:
        seq, _ = signal.max_len_seq(self.nbits, state=self._initial_state())
        bipolar = np.where(seq > 0, self.amplitude, -self.amplitude).astype(float)
        held = np.repeat(bipolar, self.hold)
        reps = -(-T // held.size)
        return np.tile(held, reps)[:T]


@dataclass
class ActuatorFilter:
    """First-order smoother y_k = (1-λ) y_{k-1} + λ u_k with unit DC gain."""

    smoothing: float
    state: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.smoothing <= 1.0:
            raise ValueError(f"smoothing must lie in (0, 1], got {self.smoothing}")

    def apply(self, sequence) -> np.ndarray:
        values = np.asarray(sequence, dtype=float).ravel()
        if self.smoothing == 1.0:
            output = values.copy()
        else:
            lam = self.smoothing
            zi = np.array([(1.0 - lam) * self.state])
            output, _ = signal.lfilter([lam], [1.0, -(1.0 - lam)], values, zi=zi)
        if output.size:
            self.state = float(output[-1])
        return output

    def frequency_response(self, f: float) -> complex:
        lam = self.smoothing
        return complex(lam / (1.0 - (1.0 - lam) * np.exp(-2j * np.pi * f)))


def actuator_filter(filter: ActuatorFilter, sequence) -> np.ndarray:
    return filter.apply(sequence)
