"""Experiment configuration: a flat INI file with typed sections.

Schema (see also the shipped files under ``configs/``)::

    [experiment]
    name = deblur | rates | noise_probe | gamma

    [operator]
    kind = deblur_1d | power_law
    exponent = -2.0          ; power_law only: the operator order -t

    [truth]
    kind = hat | coefficients
    path = signal.csv        ; coefficients only

    [schedule]
    alpha0 = 1.0
    kappa = 2.5
    r = 1.0

    [noise]
    noise_regularity = -0.6  ; smoothness index s used for rate predictions
    seeds = 0,1,2,...        ; explicit list; --seed-offset shifts all

    [grids]
    delta_grid = 1e-2,1e-3,...   ; positive, strictly decreasing
    s1_list = -3.0,-1.5,1.0      ; error norms to report

    [resolution]
    bandlimit = 128
    reference_bandlimit = 16384  ; >= 4 * bandlimit
    plot_points = 1024           ; grid for signal plots (deblur)

    [noise_probe]                ; noise_probe runs only
    s_values = -2.0,-0.6,0.0
    bandlimits = 1024,2048,4096
    growth_threshold = 0.02

    [gamma]                      ; gamma runs only
    test_function_count = 5

    [output]
    dir = out

Every value the runners consume, defaults included, lands in the metadata
sidecar so runs are reproducible from the recorded parameters alone.
"""

from __future__ import annotations

import configparser
import dataclasses
from pathlib import Path

from .errors import ConfigError

__all__ = ["ExperimentConfig", "load_config"]

EXPERIMENTS = ("deblur", "rates", "noise_probe", "gamma")

_KNOWN_KEYS = {
    "experiment": {"name"},
    "operator": {"kind", "exponent"},
    "truth": {"kind", "path"},
    "schedule": {"alpha0", "kappa", "r"},
    "noise": {"noise_regularity", "seeds"},
    "grids": {"delta_grid", "s1_list"},
    "resolution": {"bandlimit", "reference_bandlimit", "plot_points"},
    "noise_probe": {"s_values", "bandlimits", "growth_threshold"},
    "gamma": {"test_function_count"},
    "output": {"dir"},
}


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    operator_kind: str
    operator_exponent: float  # the order -t; -2.0 for deblur_1d
    truth_kind: str
    truth_path: str | None
    alpha0: float
    kappa: float
    r: float
    noise_regularity: float
    seeds: tuple
    delta_grid: tuple
    s1_list: tuple
    bandlimit: int
    reference_bandlimit: int
    plot_points: int
    probe_s_values: tuple
    probe_bandlimits: tuple
    probe_growth_threshold: float
    gamma_test_function_count: int
    output_dir: str

    def with_overrides(self, output_dir: str | None = None, seed_offset: int = 0) -> "ExperimentConfig":
        return dataclasses.replace(
            self,
            output_dir=output_dir if output_dir is not None else self.output_dir,
            seeds=tuple(seed + seed_offset for seed in self.seeds),
        )

    def to_metadata(self) -> dict:
        """Every consumed parameter, defaults included."""
        return {
            "experiment": self.experiment,
            "operator": {"kind": self.operator_kind, "exponent": self.operator_exponent},
            "truth": {"kind": self.truth_kind, "path": self.truth_path},
            "schedule": {"alpha0": self.alpha0, "kappa": self.kappa, "r": self.r},
            "noise": {
                "noise_regularity": self.noise_regularity,
                "seeds": list(self.seeds),
            },
            "grids": {"delta_grid": list(self.delta_grid), "s1_list": list(self.s1_list)},
            "resolution": {
                "bandlimit": self.bandlimit,
                "reference_bandlimit": self.reference_bandlimit,
                "plot_points": self.plot_points,
            },
            "noise_probe": {
                "s_values": list(self.probe_s_values),
                "bandlimits": list(self.probe_bandlimits),
                "growth_threshold": self.probe_growth_threshold,
            },
            "gamma": {"test_function_count": self.gamma_test_function_count},
            "output": {"dir": self.output_dir},
        }


def _float_list(text: str, where: str) -> tuple:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: expected a comma-separated float list: {exc}") from exc


def _int_list(text: str, where: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: expected a comma-separated integer list: {exc}") from exc


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, path: Path):
        self.parser = parser
        self.path = path

    def get(self, section: str, key: str, default: str | None = None) -> str:
        if not self.parser.has_option(section, key):
            if default is not None:
                return default
            raise ConfigError(f"{self.path}: missing required key [{section}] {key}")
        return self.parser.get(section, key)

    def getfloat(self, section: str, key: str, default: str | None = None) -> float:
        raw = self.get(section, key, default)
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{self.path}: [{section}] {key} must be a number") from exc

    def getint(self, section: str, key: str, default: str | None = None) -> int:
        raw = self.get(section, key, default)
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{self.path}: [{section}] {key} must be an integer") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with path.open() as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        unknown = set(parser.options(section)) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(
                f"{path}: unknown key(s) {sorted(unknown)} in section [{section}]"
            )

    reader = _Reader(parser, path)
    experiment = reader.get("experiment", "name")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"{path}: experiment name must be one of {EXPERIMENTS}")

    operator_kind = reader.get("operator", "kind", default="deblur_1d")
    if operator_kind == "deblur_1d":
        exponent = reader.getfloat("operator", "exponent", default="-2.0")
        if exponent != -2.0:
            raise ConfigError(f"{path}: deblur_1d has fixed exponent -2.0")
    elif operator_kind == "power_law":
        exponent = reader.getfloat("operator", "exponent")
        if exponent >= 0:
            raise ConfigError(f"{path}: power_law exponent must be negative (a smoothing order)")
    else:
        raise ConfigError(f"{path}: operator kind must be deblur_1d or power_law")

    truth_kind = reader.get("truth", "kind", default="hat")
    truth_path: str | None = None
    if truth_kind == "coefficients":
        truth_path = reader.get("truth", "path")
    elif truth_kind != "hat":
        raise ConfigError(f"{path}: truth kind must be hat or coefficients")

    alpha0 = reader.getfloat("schedule", "alpha0")
    kappa = reader.getfloat("schedule", "kappa")
    r = reader.getfloat("schedule", "r")
    if alpha0 <= 0 or kappa <= 0 or r < 0:
        raise ConfigError(f"{path}: schedule needs alpha0 > 0, kappa > 0, r >= 0")

    noise_regularity = reader.getfloat("noise", "noise_regularity", default="-0.6")
    seeds = _int_list(reader.get("noise", "seeds"), f"{path}: [noise] seeds")
    if not seeds:
        raise ConfigError(f"{path}: [noise] seeds must be nonempty")

    delta_grid = _float_list(reader.get("grids", "delta_grid"), f"{path}: [grids] delta_grid")
    if not delta_grid:
        raise ConfigError(f"{path}: [grids] delta_grid must be nonempty")
    if any(d <= 0 for d in delta_grid):
        raise ConfigError(f"{path}: deltas must be positive")
    if any(b >= a for a, b in zip(delta_grid, delta_grid[1:])):
        raise ConfigError(f"{path}: delta_grid must be strictly decreasing")
    s1_list = _float_list(reader.get("grids", "s1_list", default="-1.5"), f"{path}: [grids] s1_list")
    if not s1_list:
        raise ConfigError(f"{path}: [grids] s1_list must be nonempty")

    bandlimit = reader.getint("resolution", "bandlimit")
    reference = reader.getint("resolution", "reference_bandlimit")
    plot_points = reader.getint("resolution", "plot_points", default="1024")
    if bandlimit < 1 or reference < 1 or plot_points < 8:
        raise ConfigError(f"{path}: resolution values out of range")
    if reference < 4 * bandlimit:
        raise ConfigError(
            f"{path}: reference_bandlimit must be at least 4 * bandlimit "
            f"({4 * bandlimit}), got {reference}"
        )

    probe_s_values = _float_list(
        reader.get("noise_probe", "s_values", default="-2.0,-0.6,0.0"),
        f"{path}: [noise_probe] s_values",
    )
    probe_bandlimits = _int_list(
        reader.get("noise_probe", "bandlimits", default="1024,2048,4096,8192,16384"),
        f"{path}: [noise_probe] bandlimits",
    )
    if any(b2 <= b1 for b1, b2 in zip(probe_bandlimits, probe_bandlimits[1:])):
        raise ConfigError(f"{path}: [noise_probe] bandlimits must be strictly increasing")
    probe_threshold = reader.getfloat("noise_probe", "growth_threshold", default="0.02")

    test_function_count = reader.getint("gamma", "test_function_count", default="5")
    if test_function_count < 1:
        raise ConfigError(f"{path}: [gamma] test_function_count must be >= 1")

    output_dir = reader.get("output", "dir")

    return ExperimentConfig(
        experiment=experiment,
        operator_kind=operator_kind,
        operator_exponent=exponent,
        truth_kind=truth_kind,
        truth_path=truth_path,
        alpha0=alpha0,
        kappa=kappa,
        r=r,
        noise_regularity=noise_regularity,
        seeds=seeds,
        delta_grid=delta_grid,
        s1_list=s1_list,
        bandlimit=bandlimit,
        reference_bandlimit=reference,
        plot_points=plot_points,
        probe_s_values=probe_s_values,
        probe_bandlimits=probe_bandlimits,
        probe_growth_threshold=probe_threshold,
        gamma_test_function_count=test_function_count,
        output_dir=output_dir,
    )
