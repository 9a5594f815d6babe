import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import numpy as np

from ..config import Config
from ..errors import ConfigError, EmptyInput

SCENARIOS = ("estimation_sweep", "regret", "lower_bound", "actuator_demo", "bode")
UNMODELED_KINDS = ("none", "high_pass", "linear_high_pass")
INPUT_KINDS = ("white_noise", "multisine")
EXPLORATION_KINDS = ("multisine", "gaussian", "prbs")
BASELINE_KINDS = ("analytic", "empirical")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

TOP_LEVEL_KEYS = (
    "scenario",
    "seed",
    "replications",
    "horizon",
    "workers",
    "output",
    "plant",
    "unmodeled",
    "input",
    "control",
    "logging",
)


@dataclass(frozen=True)
class PlantSpec:
    coeffs: tuple[float, ...] = (0.048, -0.44, 1.2)
    sigma: Optional[float] = None
    noise_ratios: tuple[float, ...] = ()

    @property
    def n(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class UnmodeledSpec:
    kind: str = "none"
    alpha: float = 0.001
    beta: float = 1.0
    c: float = 0.0

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.c != 0.0


@dataclass(frozen=True)
class InputSpec:
    kinds: tuple[str, ...] = INPUT_KINDS
    energies: tuple[float, ...] = (1.0, 5.0, 10.0, 50.0, 100.0, 500.0)
    frequencies: tuple[float, ...] = (0.01, 0.05)
    horizons: tuple[int, ...] = (500, 1000, 2000)
    smoothing: float = 0.3


@dataclass(frozen=True)
class ControlSpec:
    q_scale: float = 10.0
    r_scale: float = 1.0
    base_length: int = 50
    amplitude_scale: float = 1.0
    amplitude_exponent: float = -0.25
    amplitude_fraction: float = 1.0
    perturb_scale: float = 0.01
    optimize_frequencies: bool = False
    baseline: str = "analytic"
    explorations: tuple[str, ...] = ("multisine", "gaussian")


@dataclass(frozen=True)
class LoggingSpec:
    level: str = "INFO"
    file: Optional[str] = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "estimation_sweep"
    seed: int = 0
    replications: int = 1
    horizon: int = 500
    workers: int = 1
    output: str = "results/output.csv"
    plant: PlantSpec = field(default_factory=PlantSpec)
    unmodeled: UnmodeledSpec = field(default_factory=UnmodeledSpec)
    input: InputSpec = field(default_factory=InputSpec)
    control: ControlSpec = field(default_factory=ControlSpec)
    logging: LoggingSpec = field(default_factory=LoggingSpec)

    @classmethod
    def from_config(
        cls,
        config: Config,
        seed: Optional[int] = None,
        output: Optional[str] = None,
        workers: Optional[int] = None,
    ) -> "ScenarioConfig":
        """Validate a loaded ``Config``; CLI overrides win over the file."""
        raw = config.as_dict()
        raw["workers"] = config.workers
        if config.log_file and isinstance(raw.get("logging", {}), dict):
            raw["logging"] = {**raw.get("logging", {}), "file": config.log_file}
        scenario = cls.from_dict(raw)

        overrides: dict[str, Any] = {}
        if seed is not None:
            overrides["seed"] = _integer(seed, "seed", minimum=0)
        if output is not None:
            overrides["output"] = str(output)
        if workers is not None:
            overrides["workers"] = _integer(workers, "workers", minimum=1)
        return replace(scenario, **overrides) if overrides else scenario

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        _reject_unknown(raw, TOP_LEVEL_KEYS, "")

        scenario = raw.get("scenario", cls.scenario)
        if scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}, got {scenario!r}", field="scenario")

        output = raw.get("output", cls.output)
        if not isinstance(output, str) or not output:
            raise ConfigError("output must be a non-empty path", field="output")

        return cls(
            scenario=scenario,
            seed=_integer(raw.get("seed", cls.seed), "seed", minimum=0),
            replications=_integer(raw.get("replications", cls.replications), "replications", minimum=1),
            horizon=_integer(raw.get("horizon", cls.horizon), "horizon", minimum=1),
            workers=_integer(raw.get("workers", cls.workers), "workers", minimum=1),
            output=output,
            plant=_plant(_section(raw, "plant")),
            unmodeled=_unmodeled(_section(raw, "unmodeled")),
            input=_input(_section(raw, "input")),
            control=_control(_section(raw, "control")),
            logging=_logging(_section(raw, "logging")),
        )

    def noise_conditions(self) -> list[tuple[str, Optional[float]]]:
        """``(label, ratio)`` pairs; an explicit σ gives one condition with ratio ``None``."""
        if self.plant.noise_ratios:
            return [(f"ratio={format(r, 'g')}", r) for r in self.plant.noise_ratios]
        return [(f"sigma={format(self.plant.sigma or 0.0, 'g')}", None)]


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be a mapping", field=name)
    return value


def _reject_unknown(section: dict, allowed: Sequence[str], prefix: str) -> None:
    for key in section:
        if key not in allowed:
            dotted = f"{prefix}.{key}" if prefix else str(key)
            raise ConfigError(f"unknown key: {dotted}", field=dotted)


def _number(value: Any, name: str, low: float = -math.inf, high: float = math.inf, open_low=False, open_high=False) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a number", field=name)
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number", field=name) from None
    if not math.isfinite(number):
        raise ConfigError(f"{name} must be finite", field=name)

    below = number <= low if open_low else number < low
    above = number >= high if open_high else number > high
    if below or above:
        left = "(" if open_low else "["
        right = ")" if open_high else "]"
        raise ConfigError(f"{name} must lie in {left}{low:g}, {high:g}{right}, got {number:g}", field=name)
    return number


def _integer(value: Any, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer", field=name)
    if isinstance(value, str):
        try:
            value = int(value.strip())
        except ValueError:
            raise ConfigError(f"{name} must be an integer", field=name) from None
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{name} must be an integer", field=name)
    if value < minimum:
        raise ConfigError(f"{name} must be at least {minimum}, got {value}", field=name)
    return int(value)


def _numbers(value: Any, name: str, **bounds) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or any(isinstance(v, (bool, list, dict)) for v in value):
        raise ConfigError(f"{name} must be a list of numbers", field=name)
    return tuple(_number(v, name, **bounds) for v in value)


def _choices(value: Any, name: str, allowed: Sequence[str]) -> tuple[str, ...]:
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{name} must be a non-empty list", field=name)
    for item in value:
        if item not in allowed:
            raise ConfigError(f"{name} entries must be one of {', '.join(allowed)}, got {item!r}", field=name)
    return tuple(value)


def _boolean(value: Any, name: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    raise ConfigError(f"{name} must be true or false", field=name)


def _frequencies(value: Any, name: str) -> tuple[float, ...]:
    freqs = _numbers(value, name, low=0.0, high=0.5, open_low=True)
    if len(set(freqs)) != len(freqs):
        raise ConfigError(f"{name} must be distinct", field=name)
    return freqs


def _plant(raw: dict) -> PlantSpec:
    _reject_unknown(raw, ("coeffs", "sigma", "noise_ratios"), "plant")
    defaults = PlantSpec()

    coeffs = _numbers(raw.get("coeffs", list(defaults.coeffs)), "plant.coeffs")
    if not coeffs:
        raise ConfigError("plant.coeffs must be a list of numbers", field="plant.coeffs")

    sigma = raw.get("sigma")
    if sigma is not None:
        sigma = _number(sigma, "plant.sigma", low=0.0)
    ratios = _numbers(raw.get("noise_ratios", []), "plant.noise_ratios", low=0.0)
    return PlantSpec(coeffs=coeffs, sigma=sigma, noise_ratios=ratios)


def _unmodeled(raw: dict) -> UnmodeledSpec:
    _reject_unknown(raw, ("kind", "alpha", "beta", "c"), "unmodeled")
    defaults = UnmodeledSpec()

    kind = raw.get("kind", defaults.kind)
    if kind not in UNMODELED_KINDS:
        raise ConfigError(f"unmodeled.kind must be one of {', '.join(UNMODELED_KINDS)}, got {kind!r}", field="unmodeled.kind")
    return UnmodeledSpec(
        kind=kind,
        alpha=_number(raw.get("alpha", defaults.alpha), "unmodeled.alpha", low=0.0, high=1.0, open_low=True, open_high=True),
        beta=_number(raw.get("beta", defaults.beta), "unmodeled.beta", low=0.0, high=1.0),
        c=_number(raw.get("c", defaults.c), "unmodeled.c"),
    )


def _input(raw: dict) -> InputSpec:
    _reject_unknown(raw, ("kinds", "energies", "frequencies", "horizons", "smoothing"), "input")
    defaults = InputSpec()

    horizons = raw.get("horizons", list(defaults.horizons))
    if not isinstance(horizons, (list, tuple)) or not horizons:
        raise ConfigError("input.horizons must be a non-empty list of integers", field="input.horizons")

    return InputSpec(
        kinds=_choices(raw.get("kinds", list(defaults.kinds)), "input.kinds", INPUT_KINDS),
        energies=_numbers(raw.get("energies", list(defaults.energies)), "input.energies", low=0.0),
        frequencies=_frequencies(raw.get("frequencies", list(defaults.frequencies)), "input.frequencies"),
        horizons=tuple(_integer(h, "input.horizons", minimum=1) for h in horizons),
        smoothing=_number(raw.get("smoothing", defaults.smoothing), "input.smoothing", low=0.0, high=1.0, open_low=True),
    )


def _control(raw: dict) -> ControlSpec:
    allowed = tuple(ControlSpec.__dataclass_fields__)
    _reject_unknown(raw, allowed, "control")
    defaults = ControlSpec()

    baseline = raw.get("baseline", defaults.baseline)
    if baseline not in BASELINE_KINDS:
        raise ConfigError(f"control.baseline must be one of {', '.join(BASELINE_KINDS)}, got {baseline!r}", field="control.baseline")

    return ControlSpec(
        q_scale=_number(raw.get("q_scale", defaults.q_scale), "control.q_scale", low=0.0),
        r_scale=_number(raw.get("r_scale", defaults.r_scale), "control.r_scale", low=0.0, open_low=True),
        base_length=_integer(raw.get("base_length", defaults.base_length), "control.base_length", minimum=1),
        amplitude_scale=_number(raw.get("amplitude_scale", defaults.amplitude_scale), "control.amplitude_scale", low=0.0),
        amplitude_exponent=_number(raw.get("amplitude_exponent", defaults.amplitude_exponent), "control.amplitude_exponent"),
        amplitude_fraction=_number(
            raw.get("amplitude_fraction", defaults.amplitude_fraction), "control.amplitude_fraction", low=0.5, high=1.0
        ),
        perturb_scale=_number(raw.get("perturb_scale", defaults.perturb_scale), "control.perturb_scale", low=0.0),
        optimize_frequencies=_boolean(
            raw.get("optimize_frequencies", defaults.optimize_frequencies), "control.optimize_frequencies"
        ),
        baseline=baseline,
        explorations=_choices(raw.get("explorations", list(defaults.explorations)), "control.explorations", EXPLORATION_KINDS),
    )


def _logging(raw: dict) -> LoggingSpec:
    _reject_unknown(raw, ("level", "file"), "logging")
    level = str(raw.get("level", "INFO")).upper()
    if level not in LOG_LEVELS:
        raise ConfigError(f"logging.level must be one of {', '.join(LOG_LEVELS)}, got {level!r}", field="logging.level")
    log_file = raw.get("file") or None
    return LoggingSpec(level=level, file=log_file)


@dataclass(frozen=True)
class RunSummary:
    condition: tuple
    count: int
    median: float
    p90: float
    mean: float
    std: float

    def row(self) -> list:
        return [*self.condition, self.count, self.median, self.p90, self.mean, self.std]


def nearest_rank(sorted_values: Sequence[float], p: float) -> float:
    rank = max(1, math.ceil(p * len(sorted_values) - 1e-9))
    return float(sorted_values[rank - 1])


def summarize(values: Sequence[float], condition: tuple = ()) -> RunSummary:
    """Nearest-rank median and 90th percentile, mean and population std.

    NaN entries are left out of the statistics. +inf entries count as the
    worst outcome: they rank last and make the mean and std infinite.
    """
    data = np.asarray(list(values), dtype=float)
    data = data[~np.isnan(data)]
    if data.size == 0:
        raise EmptyInput("Cannot summarize an empty set of values")

    ordered = np.sort(data)
    return RunSummary(
        condition=tuple(condition),
        count=int(ordered.size),
        median=nearest_rank(ordered, 0.5),
        p90=nearest_rank(ordered, 0.9),
        mean=float(np.mean(ordered)),
        std=float(np.std(ordered)) if np.all(np.isfinite(ordered)) else math.inf,
    )
