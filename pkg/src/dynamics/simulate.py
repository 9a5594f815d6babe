import copy
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .system import LinearSystem
from .unmodeled import NoUnmodeled, UnmodeledMap
from ..errors import DimensionMismatch, StateBlowup
from ..numerics.rng import RngSpec

DEFAULT_BLOWUP_GUARD = 1e12

InputPolicy = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # (T+1, n)
    inputs: np.ndarray  # (T, m)
    unmodeled: np.ndarray  # (T, n)
    noises: np.ndarray  # (T, n)

    def __post_init__(self):
        T = self.inputs.shape[0]
        if self.states.shape[0] != T + 1:
            raise DimensionMismatch(f"{self.states.shape[0]} states for {T} inputs")
        if self.unmodeled.shape[0] != T or self.noises.shape[0] != T:
            raise DimensionMismatch("unmodeled/noise records must have one row per input")
        for array in (self.states, self.inputs, self.unmodeled, self.noises):
            array.setflags(write=False)

    @property
    def length(self) -> int:
        return self.inputs.shape[0]

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def m(self) -> int:
        return self.inputs.shape[1]

    def regressors(self) -> np.ndarray:
        """φ_k = [x_k; u_k] for k = 0..T-1, shape ``(T, n+m)``."""
        return np.hstack([self.states[:-1], self.inputs])

    def window(self, start: int, stop: int) -> "Trajectory":
        return Trajectory(
            states=self.states[start : stop + 1].copy(),
            inputs=self.inputs[start:stop].copy(),
            unmodeled=self.unmodeled[start:stop].copy(),
            noises=self.noises[start:stop].copy(),
        )

    def replay_states(self, system: LinearSystem) -> np.ndarray:
        states = np.empty_like(self.states)
        states[0] = self.states[0]
        for k in range(self.length):
            states[k + 1] = system.A @ states[k] + system.B @ self.inputs[k] + self.unmodeled[k] + self.noises[k]
        return states

    def csv_header(self) -> list[str]:
        return (
            ["k"]
            + [f"x_{i + 1}" for i in range(self.n)]
            + [f"u_{i + 1}" for i in range(self.m)]
            + [f"w_{i + 1}" for i in range(self.n)]
        )

    def csv_rows(self):
        for k in range(self.length):
            yield [k, *self.states[k].tolist(), *self.inputs[k].tolist(), *self.unmodeled[k].tolist()]

    @classmethod
    def concatenate(cls, parts: list["Trajectory"]) -> "Trajectory":
        if not parts:
            raise ValueError("Nothing to concatenate")
        states = [parts[0].states[:1]] + [p.states[1:] for p in parts]
        return cls(
            states=np.vstack(states),
            inputs=np.vstack([p.inputs for p in parts]),
            unmodeled=np.vstack([p.unmodeled for p in parts]),
            noises=np.vstack([p.noises for p in parts]),
        )


class Plant:
    """Stateful true plant: the linear part, its unmodeled map and a process-noise stream.

    Epoch-based controllers drive one ``Plant`` across epochs so that the state,
    the unmodeled filter state and the noise stream all carry over.
    """

    def __init__(
        self,
        system: LinearSystem,
        unmodeled: Optional[UnmodeledMap],
        noise: Union[RngSpec, np.random.Generator],
        x0: Optional[np.ndarray] = None,
        blowup_guard: float = DEFAULT_BLOWUP_GUARD,
    ):
        self.system = system
        self.unmodeled = unmodeled if unmodeled is not None else NoUnmodeled(system.n)
        if self.unmodeled.n != system.n:
            raise DimensionMismatch(f"Unmodeled map outputs {self.unmodeled.n} entries, plant has n={system.n}")
        self.noise = noise.generator() if isinstance(noise, RngSpec) else noise
        self.x = np.zeros(system.n) if x0 is None else np.asarray(x0, dtype=float).copy()
        if self.x.shape != (system.n,):
            raise DimensionMismatch(f"x0 has shape {self.x.shape}, expected ({system.n},)")
        self.blowup_guard = blowup_guard
        self.k = 0

    def step(self, u) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        u = np.asarray(u, dtype=float).reshape(self.system.m)
        w = self.unmodeled.step(u)
        eta = self.system.sigma * self.noise.standard_normal(self.system.n)
        x_next = self.system.A @ self.x + self.system.B @ u + w + eta

        norm = float(np.linalg.norm(x_next))
        if not np.isfinite(norm) or norm > self.blowup_guard:
            raise StateBlowup(step=self.k + 1, norm=norm, guard=self.blowup_guard)

        self.x = x_next
        self.k += 1
        return u, w, eta

    def run(self, policy: InputPolicy, T: int, k_offset: int = 0) -> Trajectory:
        if T < 0:
            raise ValueError(f"T must be non-negative, got {T}")
        n, m = self.system.n, self.system.m
        states = np.empty((T + 1, n))
        inputs = np.empty((T, m))
        unmodeled = np.empty((T, n))
        noises = np.empty((T, n))
        states[0] = self.x

        for k in range(T):
            u, w, eta = self.step(policy(k_offset + k, self.x))
            inputs[k], unmodeled[k], noises[k] = u, w, eta
            states[k + 1] = self.x

        return Trajectory(states=states, inputs=inputs, unmodeled=unmodeled, noises=noises)


def open_loop(inputs) -> InputPolicy:
    values = np.asarray(inputs, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, 1)

    def policy(k: int, x: np.ndarray) -> np.ndarray:
        return values[k]

    return policy


def linear_feedback(K, offsets=None) -> InputPolicy:
    """u_k = K x_k + offset_k; ``offsets`` is indexed by the global step ``k``."""
    gain = np.atleast_2d(np.asarray(K, dtype=float))
    extra = None
    if offsets is not None:
        extra = np.asarray(offsets, dtype=float)
        if extra.ndim == 1:
            extra = extra.reshape(-1, 1)

    def policy(k: int, x: np.ndarray) -> np.ndarray:
        u = gain @ x
        return u if extra is None else u + extra[k]

    return policy


def simulate(
    system: LinearSystem,
    unmodeled: Optional[UnmodeledMap],
    policy: InputPolicy,
    T: int,
    rng: RngSpec,
    x0: Optional[np.ndarray] = None,
    blowup_guard: float = DEFAULT_BLOWUP_GUARD,
) -> Trajectory:
    """Simulate T steps of x_{k+1} = A x_k + B u_k + w_k + η_k.

    The caller's unmodeled map is copied, so repeated calls with the same
    arguments produce bit-identical trajectories.
    """
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    plant = Plant(system, copy.deepcopy(unmodeled), rng, x0=x0, blowup_guard=blowup_guard)
    return plant.run(policy, T)
