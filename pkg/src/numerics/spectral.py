import numpy as np

from ..errors import DegenerateSequence, FrequencyOffGrid


def as_sequence(sequence) -> np.ndarray:
    """Return a time-major ``(T, d)`` array; scalar sequences become ``(T, 1)``."""
    values = np.asarray(sequence)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    if values.ndim != 2 or values.shape[0] < 1:
        raise ValueError(f"Expected a nonempty sequence of vectors, got shape {values.shape}")
    return values


def dft_all(sequence) -> np.ndarray:
    """Unnormalized DFT y(e^{j2πk/T}) = Σ_t y_t e^{-j2πkt/T} at every grid index, shape ``(T, d)``."""
    return np.fft.fft(as_sequence(sequence), axis=0)


def dft(sequence, frequency_index: int) -> np.ndarray:
    values = as_sequence(sequence)
    T = values.shape[0]
    if not 0 <= frequency_index < T:
        raise FrequencyOffGrid(f"Frequency index {frequency_index} outside [0, {T})")
    phases = np.exp(-2j * np.pi * frequency_index * np.arange(T) / T)
    return phases @ values


def lag_autocorrelation(sequence, lag: int) -> float:
    """Pearson correlation between the sequence and its ``lag``-shifted copy."""
    values = np.asarray(sequence, dtype=float).ravel()
    if lag < 0 or values.size <= lag + 1:
        raise ValueError(f"Sequence of length {values.size} too short for lag {lag}")

    head = values[: values.size - lag]
    tail = values[lag:]
    head_c = head - head.mean()
    tail_c = tail - tail.mean()
    denominator = np.sqrt(np.dot(head_c, head_c) * np.dot(tail_c, tail_c))
    if denominator == 0.0:
        raise DegenerateSequence("Sample variance is zero")

    return float(np.clip(np.dot(head_c, tail_c) / denominator, -1.0, 1.0))
