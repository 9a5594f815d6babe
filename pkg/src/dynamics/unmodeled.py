import math
from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import signal

from ..errors import DimensionMismatch, StateBlowup

FILTER_GUARD = 1e12


class UnmodeledMap(ABC):
    """Causal, input-driven map u_k -> w_k ∈ R^n holding its own internal state."""

    n: int

    @abstractmethod
    def step(self, u: np.ndarray) -> np.ndarray:
        """Advance one step with input ``u`` and return ``w_k``."""

    def reset(self) -> None:
        pass

    def prime(self, past_inputs) -> None:
        """Run the map over inputs applied before the record starts and drop its outputs."""
        for u in np.asarray(past_inputs, dtype=float):
            self.step(u)


class NoUnmodeled(UnmodeledMap):
    def __init__(self, n: int):
        self.n = n

    def step(self, u: np.ndarray) -> np.ndarray:
        return np.zeros(self.n)

    def __repr__(self):
        return f"NoUnmodeled(n={self.n})"


def _scalar_input(u) -> float:
    values = np.asarray(u, dtype=float).ravel()
    if values.size != 1:
        raise DimensionMismatch(f"Unmodeled map expects a scalar input, got {values.size} entries")
    return float(values[0])


class HighPassNonlinearity(UnmodeledMap):
    """w̄_k = α w̄_{k-1} + α(u_k - β u_{k-1});  w_k = direction · c · w̄_k²."""

    def __init__(
        self,
        alpha: float,
        beta: float,
        c: float,
        direction: Optional[Sequence[float]] = None,
        n: int = 3,
        filter_state: float = 0.0,
        prev_input: float = 0.0,
    ):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")

        self.alpha = float(alpha)
        self.beta = float(beta)
        self.c = float(c)
        self.direction = np.ones(n) if direction is None else np.asarray(direction, dtype=float).ravel()
        self.n = self.direction.size
        self.filter_state = float(filter_state)
        self.prev_input = float(prev_input)
        self._initial = (self.filter_state, self.prev_input)
        self.steps = 0

    @property
    def dc_gain(self) -> float:
        return self.alpha * (1.0 - self.beta) / (1.0 - self.alpha)

    def step(self, u) -> np.ndarray:
        u_k = _scalar_input(u)
        self.filter_state = self.alpha * self.filter_state + self.alpha * (u_k - self.beta * self.prev_input)
        self.prev_input = u_k
        self.steps += 1
        if not math.isfinite(self.filter_state) or abs(self.filter_state) > FILTER_GUARD:
            raise StateBlowup(step=self.steps, norm=abs(self.filter_state), guard=FILTER_GUARD)
        return self.direction * (self.c * self.filter_state**2)

    def reset(self) -> None:
        self.filter_state, self.prev_input = self._initial
        self.steps = 0

    def prime(self, past_inputs) -> None:
        super().prime(past_inputs)
        self.steps = 0

    def __repr__(self):
        return f"HighPassNonlinearity(alpha={self.alpha}, beta={self.beta}, c={self.c}, n={self.n})"


class LinearFilterMap(UnmodeledMap):
    """SISO IIR filter ``b/a`` on the input, an optional static nonlinearity, then a fixed direction."""

    def __init__(
        self,
        b: Sequence[float],
        a: Sequence[float],
        direction: Optional[Sequence[float]] = None,
        n: int = 3,
        gain: float = 1.0,
        nonlinearity: Optional[Callable[[float], float]] = None,
    ):
        self.b = np.atleast_1d(np.asarray(b, dtype=float))
        self.a = np.atleast_1d(np.asarray(a, dtype=float))
        if self.a[0] == 0.0:
            raise ValueError("Leading denominator coefficient must be nonzero")
        poles = np.roots(self.a) if self.a.size > 1 else np.array([])
        if poles.size and np.max(np.abs(poles)) >= 1.0:
            raise ValueError("Filter denominator must be stable")

        self.direction = np.ones(n) if direction is None else np.asarray(direction, dtype=float).ravel()
        self.n = self.direction.size
        self.gain = float(gain)
        self.nonlinearity = nonlinearity
        self.reset()

    @classmethod
    def high_pass(cls, alpha: float, beta: float, c: float = 1.0, n: int = 3) -> "LinearFilterMap":
        """The linear part of ``HighPassNonlinearity`` without the squaring."""
        return cls(b=[alpha, -alpha * beta], a=[1.0, -alpha], n=n, gain=c)

    def step(self, u) -> np.ndarray:
        y, self._zi = signal.lfilter(self.b, self.a, [_scalar_input(u)], zi=self._zi)
        value = float(y[0])
        if self.nonlinearity is not None:
            value = self.nonlinearity(value)
        return self.direction * (self.gain * value)

    def reset(self) -> None:
        order = max(self.a.size, self.b.size) - 1
        self._zi = np.zeros(order)

    def frequency_response(self, f: float) -> complex:
        _, h = signal.freqz(self.b, self.a, worN=[2.0 * np.pi * f])
        return complex(self.gain * h[0])

    def __repr__(self):
        return f"LinearFilterMap(b={self.b.tolist()}, a={self.a.tolist()}, gain={self.gain}, n={self.n})"


def unmodeled_step(map: HighPassNonlinearity, u_k: float) -> np.ndarray:
    return map.step(u_k)


def hp_frequency_response(map: HighPassNonlinearity, f: float) -> complex:
    """α(z - β)/(z - α) at z = e^{j2πf}; the linear filter part only."""
    if not 0.0 <= f <= 0.5:
        raise ValueError(f"Frequency must lie in [0, 0.5] cycles/step, got {f}")
    z = np.exp(2j * np.pi * f)
    return complex(map.alpha * (z - map.beta) / (z - map.alpha))
