"""Run configuration: parsing, validation, and the effective-config echo.

Grammar (see README for the full key reference):

    # comment lines and blank lines are ignored
    [section]
    key = value

Sections and keys are a closed set; unknown names, duplicate keys, missing
required keys and malformed values are reported with the source line.  A
parsed config rendered with render_config() and parsed again yields the
identical configuration, which is what makes the echoed block written into
every run directory sufficient to reproduce the run.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .dynamics import ForcingSpec, InitialConditionSpec, PhysicsParams
from .grid import GridSpec
from .stepping import StepControl


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class MonitorConfig:
    """Breakdown-monitor thresholds and strip-fit options.

    With relative_to_initial_energy (the default), epsilon and energy_cap
    are multiplied by E(0) at run start; otherwise they are absolute.
    """

    epsilon: float = 1e-6
    energy_cap: float = 1e6
    relative_to_initial_energy: bool = True
    fit_window: tuple | None = None
    d_digits: int = 4
    statistic: str = "max"

    def __post_init__(self):
        if self.epsilon <= 0.0 or self.energy_cap <= 0.0:
            raise ValueError("epsilon and energy_cap must be > 0")
        if self.d_digits < 1:
            raise ValueError("d_digits must be >= 1")
        if self.statistic not in ("max", "rms"):
            raise ValueError("statistic must be 'max' or 'rms'")


@dataclass(frozen=True)
class OutputConfig:
    """Run-directory layout and emission cadence (0 = final state only)."""

    directory: str = "run_out"
    ledger_every: int = 1
    snapshot_every: int = 0
    spectra_every: int = 0

    def __post_init__(self):
        if self.ledger_every < 1:
            raise ValueError("ledger_every must be >= 1")
        if self.snapshot_every < 0 or self.spectra_every < 0:
            raise ValueError("cadences must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    physics: PhysicsParams
    initial_condition: InitialConditionSpec
    control: StepControl
    monitor: MonitorConfig = dataclass_field(default_factory=MonitorConfig)
    output: OutputConfig = dataclass_field(default_factory=OutputConfig)


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_int(raw: str) -> int:
    return int(raw.strip())


def _parse_float(raw: str) -> float:
    return float(raw.strip())


def _parse_str(raw: str) -> str:
    return raw.strip()


def _parse_center(raw: str) -> tuple:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated values, got {raw!r}")
    return tuple(float(p) for p in parts)


def _parse_window(raw: str):
    low = raw.strip().lower()
    if low == "auto":
        return None
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'auto' or 'lo, hi', got {raw!r}")
    return (int(parts[0]), int(parts[1]))


def _parse_optional_float(raw: str):
    low = raw.strip().lower()
    if low == "none":
        return None
    return float(raw)


# section -> key -> parser; None marks required keys
_SCHEMA = {
    "grid": {
        "n_points": _parse_int,
        "dealias": _parse_str,
    },
    "physics": {
        "nu": _parse_float,
        "nonlinearity": _parse_bool,
    },
    "forcing": {
        "kind": _parse_str,
        "amplitude": _parse_float,
        "length_scale": _parse_float,
        "center": _parse_center,
        "ramp_time": _parse_float,
    },
    "initial_condition": {
        "kind": _parse_str,
        "amplitude": _parse_float,
        "concentration": _parse_float,
        "seed": _parse_int,
    },
    "step_control": {
        "t_end": _parse_float,
        "cfl": _parse_float,
        "dt_min": _parse_float,
        "dt_max": _parse_float,
        "max_steps": _parse_int,
        "fixed_dt": _parse_optional_float,
    },
    "monitor": {
        "epsilon": _parse_float,
        "energy_cap": _parse_float,
        "relative_to_initial_energy": _parse_bool,
        "fit_window": _parse_window,
        "d_digits": _parse_int,
        "statistic": _parse_str,
    },
    "output": {
        "directory": _parse_str,
        "ledger_every": _parse_int,
        "snapshot_every": _parse_int,
        "spectra_every": _parse_int,
    },
}

_REQUIRED = (("grid", "n_points"), ("physics", "nu"), ("step_control", "t_end"))


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and validate the key-value grammar into a RunConfig."""
    values: dict = {name: {} for name in _SCHEMA}
    section = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(
                    f"{source}:{lineno}: unknown section [{section}]; expected one "
                    f"of {sorted(_SCHEMA)}"
                )
            continue
        if "=" not in line:
            raise ConfigError(
                f"{source}:{lineno}: expected 'key = value', got {rawline.strip()!r}"
            )
        if section is None:
            raise ConfigError(f"{source}:{lineno}: key outside any [section]")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"{source}:{lineno}: unknown key {key!r} in section [{section}]"
            )
        if key in values[section]:
            raise ConfigError(
                f"{source}:{lineno}: duplicate key {key!r} in section [{section}]"
            )
        try:
            values[section][key] = _SCHEMA[section][key](raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None

    for sec, key in _REQUIRED:
        if key not in values[sec]:
            raise ConfigError(f"{source}: missing required key {key!r} in [{sec}]")

    try:
        grid = GridSpec(
            n_points=values["grid"]["n_points"],
            dealias_rule=values["grid"].get("dealias", "two_thirds"),
        )
        forcing = ForcingSpec(**values["forcing"])
        physics = PhysicsParams(
            nu=values["physics"]["nu"],
            forcing=forcing,
            nonlinearity=values["physics"].get("nonlinearity", True),
        )
        ic = InitialConditionSpec(**values["initial_condition"])
        sc = values["step_control"]
        control = StepControl(
            t_end=sc["t_end"],
            cfl_number=sc.get("cfl", 0.5),
            dt_min=sc.get("dt_min", 1e-12),
            dt_max=sc.get("dt_max", 1e-2),
            max_steps=sc.get("max_steps", 1_000_000),
            fixed_dt=sc.get("fixed_dt"),
        )
        mon = MonitorConfig(**values["monitor"])
        out = OutputConfig(**values["output"])
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return RunConfig(
        grid=grid,
        physics=physics,
        initial_condition=ic,
        control=control,
        monitor=mon,
        output=out,
    )


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) or isinstance(value, np.floating):
        return f"{value:.17g}"
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Echo every effective value; parsing the result reproduces cfg."""
    f = cfg.physics.forcing
    mon = cfg.monitor
    window = "auto" if mon.fit_window is None else f"{mon.fit_window[0]}, {mon.fit_window[1]}"
    fixed = "none" if cfg.control.fixed_dt is None else _fmt(cfg.control.fixed_dt)
    lines = [
        "[grid]",
        f"n_points = {cfg.grid.n_points}",
        f"dealias = {cfg.grid.dealias_rule}",
        "",
        "[physics]",
        f"nu = {_fmt(cfg.physics.nu)}",
        f"nonlinearity = {_fmt(cfg.physics.nonlinearity)}",
        "",
        "[forcing]",
        f"kind = {f.kind}",
        f"amplitude = {_fmt(f.amplitude)}",
        f"length_scale = {_fmt(f.length_scale)}",
        f"center = {_fmt(f.center[0])}, {_fmt(f.center[1])}, {_fmt(f.center[2])}",
        f"ramp_time = {_fmt(f.ramp_time)}",
        "",
        "[initial_condition]",
        f"kind = {cfg.initial_condition.kind}",
        f"amplitude = {_fmt(cfg.initial_condition.amplitude)}",
        f"concentration = {_fmt(cfg.initial_condition.concentration)}",
        f"seed = {cfg.initial_condition.seed}",
        "",
        "[step_control]",
        f"t_end = {_fmt(cfg.control.t_end)}",
        f"cfl = {_fmt(cfg.control.cfl_number)}",
        f"dt_min = {_fmt(cfg.control.dt_min)}",
        f"dt_max = {_fmt(cfg.control.dt_max)}",
        f"max_steps = {cfg.control.max_steps}",
        f"fixed_dt = {fixed}",
        "",
        "[monitor]",
        f"epsilon = {_fmt(mon.epsilon)}",
        f"energy_cap = {_fmt(mon.energy_cap)}",
        f"relative_to_initial_energy = {_fmt(mon.relative_to_initial_energy)}",
        f"fit_window = {window}",
        f"d_digits = {mon.d_digits}",
        f"statistic = {mon.statistic}",
        "",
        "[output]",
        f"directory = {cfg.output.directory}",
        f"ledger_every = {cfg.output.ledger_every}",
        f"snapshot_every = {cfg.output.snapshot_every}",
        f"spectra_every = {cfg.output.spectra_every}",
        "",
    ]
    return "\n".join(lines)
