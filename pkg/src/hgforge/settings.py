"""Manage the application's settings."""
from __future__ import annotations

import os
from functools import singledispatch, wraps
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, TypeVar

import attrs
from tomlkit import comment, document, dumps, loads, nl, table
from tomlkit.exceptions import ParseError, TOMLKitError

from hgforge import __name__
from hgforge.elliptic import DEFAULT_INNER_RADIUS, DEFAULT_TAIL, LatticeSpec
from hgforge.errors import HgforgeError, LatticeError
from hgforge.params import DELTA_SEP, EPS_INT

THREADS_VARIABLE = "HGFORGE_THREADS"
MAX_M = 6


class ConfigLoadError(HgforgeError):
    """Signals an unrecoverable error when loading configuration.

    Hides lower-level errors, such as parsing and validation, behind a simple interface
    that contains the message we should display to the user.
    """


T = TypeVar("T")
V = TypeVar("V")
C = TypeVar("C")


def _report_attr_name(
    validator: Callable[[C, attrs.Attribute, V], T]
) -> Callable[[C, attrs.Attribute, V], T]:
    """Wrap validator func to consistently report attr name in case of failure."""

    @wraps(validator)
    def inner(inst: C, attr: attrs.Attribute, value: V) -> T:
        try:
            return validator(inst, attr, value)
        except (TypeError, ValueError) as err:
            raise err.__class__(f"{attr.name}: {str(err)}")

    return inner


@_report_attr_name
def _positive(inst: Any, attr: attrs.Attribute, value: float) -> None:
    if value <= 0:
        raise ValueError(f"Must be positive, got {value}.")


def _sections(cls: type) -> Callable[[Any], Any]:
    """Converter accepting either an instance or the mapping parsed from toml."""

    def convert(value: Any) -> Any:
        return value if isinstance(value, cls) else cls(**value)

    return convert


def _pair(value: Any) -> Tuple[float, float]:
    re, im = value
    return float(re), float(im)


@attrs.frozen
class Defaults:
    m: int = attrs.field(default=3, converter=int)
    trials: int = attrs.field(default=5, converter=int, validator=_positive)
    seed: int = attrs.field(default=0, converter=int)
    threads: int = attrs.field(default=1, converter=int, validator=_positive)

    @m.validator
    @_report_attr_name
    def supported_size(self, attr: attrs.Attribute, value: int) -> None:
        if not 1 <= value <= MAX_M:
            raise ValueError(f"Expected a value between 1 and {MAX_M}, got {value}.")


@attrs.frozen
class Tolerances:
    eps_int: float = attrs.field(default=EPS_INT, converter=float, validator=_positive)
    delta_sep: float = attrs.field(default=DELTA_SEP, converter=float, validator=_positive)
    residual: float = attrs.field(default=1e-9, converter=float, validator=_positive)
    elliptic: float = attrs.field(default=1e-8, converter=float, validator=_positive)
    oracle_points: int = attrs.field(default=20, converter=int, validator=_positive)


@attrs.frozen
class LatticeConfig:
    omega1: Tuple[float, float] = attrs.field(default=(1.0, 0.0), converter=_pair)
    omega2: Tuple[float, float] = attrs.field(default=(0.0, 0.8), converter=_pair)
    trunc: int = attrs.field(default=DEFAULT_INNER_RADIUS, converter=int)
    tail: float = attrs.field(default=DEFAULT_TAIL, converter=float, validator=_positive)

    @trunc.validator
    @_report_attr_name
    def valid_lattice(self, attr: attrs.Attribute, value: float) -> None:
        try:
            self.spec()
        except LatticeError as err:
            raise ValueError(str(err))

    def spec(self, **overrides) -> LatticeSpec:
        fields = {
            "omega1": complex(*self.omega1),
            "omega2": complex(*self.omega2),
            "n1": self.trunc,
            "tail": self.tail,
        }
        fields.update(overrides)
        return LatticeSpec(**fields)


@attrs.frozen
class DebugConfig:
    accelerate: bool = attrs.field(default=True, validator=attrs.validators.instance_of(bool))


@attrs.frozen
class Config:
    """Contents of user's configuration file."""

    defaults: Defaults = attrs.field(factory=Defaults, converter=_sections(Defaults))
    tolerances: Tolerances = attrs.field(
        factory=Tolerances, converter=_sections(Tolerances)
    )
    lattice: LatticeConfig = attrs.field(
        factory=LatticeConfig, converter=_sections(LatticeConfig)
    )
    debug: DebugConfig = attrs.field(factory=DebugConfig, converter=_sections(DebugConfig))


@attrs.frozen
class Settings:
    """Settings combined from all the sources."""

    config: Config
    threads: int
    config_dir: Optional[Path]


def _threads_from_env(default: int) -> int:
    raw = os.environ.get(THREADS_VARIABLE)
    if raw is None:
        return default
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigLoadError(f"{THREADS_VARIABLE} must be an integer, got {raw!r}.")
    if threads < 1:
        raise ConfigLoadError(f"{THREADS_VARIABLE} must be positive, got {threads}.")
    return threads


def initialize(config_root: Optional[Path]) -> Settings:
    """Load the settings from config_root, writing the defaults if needed."""
    config_root = (
        (Path.home() if config_root is None else config_root) / ".config" / __name__
    )
    config_root.mkdir(parents=True, exist_ok=True)
    config = load_config(config_root / "config.toml")
    return Settings(
        config=config,
        threads=_threads_from_env(config.defaults.threads),
        config_dir=config_root,
    )


def to_toml(config: Config) -> str:
    """Generate toml-formatted content for configuration."""
    doc = document()
    doc.add(comment("Defaults for the verification suites, overridden by CLI flags."))
    doc.add(nl())

    defaults = table()
    defaults.add("m", config.defaults.m)
    defaults.add("trials", config.defaults.trials)
    defaults.add("seed", config.defaults.seed)
    defaults.add("threads", config.defaults.threads)
    defaults.add(comment(f"{THREADS_VARIABLE} overrides threads."))
    doc.add("defaults", defaults)

    tolerances = table()
    for field in attrs.fields(Tolerances):
        tolerances.add(field.name, getattr(config.tolerances, field.name))
    doc.add("tolerances", tolerances)

    lattice = table()
    lattice.add(comment("Complex numbers are written as [re, im]."))
    lattice.add("omega1", list(config.lattice.omega1))
    lattice.add("omega2", list(config.lattice.omega2))
    lattice.add("trunc", config.lattice.trunc)
    lattice.add("tail", config.lattice.tail)
    doc.add("lattice", lattice)

    debug = table()
    debug.add("accelerate", config.debug.accelerate)
    debug.add(comment("Switch acceleration off for bit-stable lattice sums."))
    doc.add("debug", debug)
    return dumps(doc)


def load_config(src: Path) -> Config:
    if not src.exists():
        config = Config()
        src.write_text(to_toml(config))
        return config
    return _load_valid_config(**_parse_toml(src.read_text()))


def _load_valid_config(**kwargs) -> Config:
    try:
        return Config(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigLoadError(
            "Detected the following problems with your configuration:\n" + str(err)
        )


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, bool):
        return bool(value)
    if isinstance(value, int):
        return int(value)
    if isinstance(value, float):
        return float(value)
    return value


def _parse_toml(raw: str) -> Dict:
    try:
        return _plain(loads(raw))
    except TOMLKitError as err:
        raise ConfigLoadError((_explain_tomlkit_error(err, contents=raw)))


@singledispatch
def _explain_tomlkit_error(err: TOMLKitError, contents: str):
    _ = contents
    return "There was a problem parsing your configuration file: " + str(err)


@_explain_tomlkit_error.register
def _(err: ParseError, contents: str) -> str:
    problem_line = contents.split("\n")[err.line - 1]
    highlight_line = " " * err.col + "^"
    return "\n".join(
        (
            _explain_tomlkit_error.dispatch(TOMLKitError)(err, contents),
            problem_line,
            highlight_line,
        )
    )
