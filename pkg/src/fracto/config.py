"""Run configuration: a small ``key=value`` text format.

Grammar::

    config  := item*
    item    := "[" section "]" | key "=" value
    key     := name ("." name)?
    value   := any run of non-blank characters (lists are comma separated)

Items are separated by blanks or newlines and ``#`` starts a comment that runs
to the end of the line.  A ``[section]`` header prefixes the bare keys that
follow it; ``[run]`` returns to the top level.  Dotted keys name the section
explicitly (``solver.dt=0.01``).  Sections are ``run``, ``solver``,
``output`` and ``analysis``.  Unknown keys, duplicates and malformed values
are errors that carry the line and column of the offending token.

Defaults come from the scenario preset and are resolved by
:func:`parse_config`, so :func:`render_config` always writes a complete
configuration.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Sequence

from .analysis import Scenario, breather_preset, kink_preset
from .kernel import FractionalOrder
from .lattice import ChainParams, ModelParams

__all__ = [
    "AnalysisConfig",
    "ConfigError",
    "OutputConfig",
    "RunConfig",
    "SolverConfig",
    "parse_config",
    "render_config",
]

SCENARIOS = ("kink", "breather")
SYSTEMS = ("lattice", "fsg", "both")
STEPPERS = ("rk4", "central")
SCHEMES = ("gl", "gl_shifted", "integral_b", "spectral")
EDGES = ("auto", "zero", "periodic", "kink")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class SolverConfig:
    time_stepper: str = "rk4"
    scheme: str = "gl"
    dt: float | None = None  # None: per-run default (0.01, capped by the CFL bound for central)
    lattice_dt: float = 0.05
    h_ratio: int = 2
    edge: str = "auto"
    zero_mode: bool = False
    force: bool = False


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    snapshot_every: float = 5.0
    render: bool = True


@dataclass(frozen=True)
class AnalysisConfig:
    tail_window: tuple[float, float] = (0.2, 0.8)
    tolerance: float = 0.05
    core_fraction: float = 0.1


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    system: str
    alpha: tuple[float, ...]
    n_sites: int
    half_length: float
    t_end: float
    j0: float
    j1: float
    j2: float
    kappa: float
    nu: float | None
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    @property
    def wants_lattice(self) -> bool:
        return self.system in ("lattice", "both")

    @property
    def wants_fsg(self) -> bool:
        return self.system in ("fsg", "both")

    def scenario_for(self, alpha: float) -> Scenario:
        base = kink_preset() if self.scenario == "kink" else breather_preset()
        return Scenario(
            name=self.scenario,
            model=ModelParams(FractionalOrder(alpha), self.j0, self.j1, self.j2),
            chain=ChainParams(self.n_sites, self.half_length, base.chain.boundary),
            kappa=self.kappa,
            nu=self.nu,
            t_end=self.t_end,
            alphas=self.alpha,
        )

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["alpha"] = list(self.alpha)
        d["analysis"]["tail_window"] = list(self.analysis.tail_window)
        return d


# -- value parsers ------------------------------------------------------------


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _positive(text: str) -> float:
    value = _float(text)
    if value <= 0.0:
        raise ValueError("must be positive")
    return value


def _nonneg(text: str) -> float:
    value = _float(text)
    if value < 0.0:
        raise ValueError("must be non-negative")
    return value


def _int(text: str) -> int:
    if not re.fullmatch(r"[+-]?\d+", text):
        raise ValueError("expected an integer")
    return int(text)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true or false")


def _choice(options: tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        low = text.lower()
        if low not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return low

    return parse


def _alpha_list(text: str) -> tuple[float, ...]:
    out = []
    for part in text.split(","):
        a = _float(part)
        if abs(a - round(a)) < 1e-9:
            raise ValueError(
                f"alpha={part} is an integer; the fractional order must be non-integer "
                "(0 < alpha < 2, alpha != 1 for the field equation)"
            )
        FractionalOrder(a)
        out.append(a)
    if not out:
        raise ValueError("empty alpha list")
    return tuple(out)


def _window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("expected two comma-separated fractions")
    lo, hi = (_float(p) for p in parts)
    if not 0.0 < lo < hi <= 1.0:
        raise ValueError("need 0 < lo < hi <= 1")
    return lo, hi


def _optional(parse: Callable[[str], Any], word: str) -> Callable[[str], Any]:
    def wrapped(text: str) -> Any:
        return None if text.lower() == word else parse(text)

    return wrapped


_RUN_KEYS: dict[str, Callable[[str], Any]] = {
    "scenario": _choice(SCENARIOS),
    "system": _choice(SYSTEMS),
    "alpha": _alpha_list,
    "n_sites": _int,
    "half_length": _positive,
    "t_end": _nonneg,
    "j0": _nonneg,
    "j1": _nonneg,
    "j2": _nonneg,
    "kappa": _positive,
    "nu": _optional(_positive, "none"),
}

_SECTION_KEYS: dict[str, dict[str, Callable[[str], Any]]] = {
    "run": _RUN_KEYS,
    "solver": {
        "time_stepper": _choice(STEPPERS),
        "scheme": _choice(SCHEMES),
        "dt": _optional(_positive, "auto"),
        "lattice_dt": _positive,
        "h_ratio": _int,
        "edge": _choice(EDGES),
        "zero_mode": _bool,
        "force": _bool,
    },
    "output": {"dir": str, "snapshot_every": _positive, "render": _bool},
    "analysis": {"tail_window": _window, "tolerance": _positive, "core_fraction": _positive},
}

_TOKEN = re.compile(r"\S+")


def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        for m in _TOKEN.finditer(body):
            yield lineno, m.start() + 1, m.group()


def parse_config(text: str, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse and validate a configuration, filling every default.

    ``overrides`` are extra ``key=value`` items (dotted keys for sections)
    that replace values given in ``text``.
    """
    seen: dict[tuple[str, str], tuple[Any, int, int]] = {}
    _collect(text, seen, replace=False)
    _collect("\n".join(overrides), seen, replace=True)
    return _resolve(seen)


def _collect(text: str, seen: dict, replace: bool) -> None:
    section = "run"
    for line, col, tok in _tokens(text):
        if tok.startswith("["):
            name = tok[1:-1] if tok.endswith("]") else None
            if name not in _SECTION_KEYS:
                raise ConfigError(f"unknown section {tok!r}", line, col)
            section = name
            continue
        if "=" not in tok:
            raise ConfigError(f"expected key=value, got {tok!r}", line, col)
        key, value = tok.split("=", 1)
        if "." in key:
            if section != "run":
                raise ConfigError(f"dotted key {key!r} inside [{section}]", line, col)
            sec, _, key = key.partition(".")
        else:
            sec = section
        table = _SECTION_KEYS.get(sec)
        if table is None or key not in table:
            raise ConfigError(f"unknown key {sec + '.' + key if sec != 'run' else key!r}", line, col)
        if (sec, key) in seen and not replace:
            raise ConfigError(f"duplicate key {key!r}", line, col)
        if value == "":
            raise ConfigError(f"missing value for {key!r}", line, col + len(key) + 1)
        try:
            parsed = table[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line, col + len(key) + 1) from None
        seen[(sec, key)] = (parsed, line, col)


def _resolve(seen: dict[tuple[str, str], tuple[Any, int, int]]) -> RunConfig:
    def get(sec: str, key: str, default: Any) -> Any:
        return seen[(sec, key)][0] if (sec, key) in seen else default

    def where(sec: str, key: str) -> tuple[int | None, int | None]:
        item = seen.get((sec, key))
        return (item[1], item[2]) if item else (None, None)

    if ("run", "scenario") not in seen:
        raise ConfigError("missing required key 'scenario'", 1, 1)
    name = seen[("run", "scenario")][0]
    preset = kink_preset() if name == "kink" else breather_preset()
    system = get("run", "system", "both")
    alphas = get("run", "alpha", preset.alphas)
    if system != "lattice":
        for a in alphas:
            if not 0.0 < a < 2.0:
                raise ConfigError(f"alpha={a}: the field equation needs 0 < alpha < 2", *where("run", "alpha"))

    n_sites = get("run", "n_sites", preset.chain.n_oscillators)
    if n_sites < 3 or n_sites % 2 == 0:
        raise ConfigError("n_sites must be odd and at least 3", *where("run", "n_sites"))

    solver = SolverConfig(**{f.name: get("solver", f.name, getattr(SolverConfig(), f.name)) for f in fields(SolverConfig)})
    if solver.h_ratio < 1:
        raise ConfigError("h_ratio must be a positive integer", *where("solver", "h_ratio"))
    if solver.edge == "auto":
        solver = SolverConfig(**{**asdict(solver), "edge": "kink" if name == "kink" else "periodic"})
    output = OutputConfig(**{f.name: get("output", f.name, getattr(OutputConfig(), f.name)) for f in fields(OutputConfig)})
    analysis = AnalysisConfig(
        **{f.name: get("analysis", f.name, getattr(AnalysisConfig(), f.name)) for f in fields(AnalysisConfig)}
    )

    nu = get("run", "nu", preset.nu)
    if name == "breather" and nu is None:
        raise ConfigError("breather scenario needs nu", *where("run", "nu"))
    return RunConfig(
        scenario=name,
        system=system,
        alpha=tuple(alphas),
        n_sites=n_sites,
        half_length=get("run", "half_length", preset.chain.half_length),
        t_end=get("run", "t_end", preset.t_end),
        j0=get("run", "j0", preset.model.j0),
        j1=get("run", "j1", preset.model.j1),
        j2=get("run", "j2", preset.model.j2),
        kappa=get("run", "kappa", preset.kappa),
        nu=nu,
        solver=solver,
        output=output,
        analysis=analysis,
    )


def _fmt(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Complete text form; ``parse_config(render_config(c)) == c``."""
    lines = []
    for f in fields(RunConfig):
        if f.name in _RUN_KEYS:
            lines.append(f"{f.name}={_fmt(getattr(cfg, f.name))}")
    for sec in ("solver", "output", "analysis"):
        lines.append("")
        lines.append(f"[{sec}]")
        part = getattr(cfg, sec)
        for f in fields(part):
            value = getattr(part, f.name)
            if sec == "solver" and f.name == "dt" and value is None:
                lines.append("dt=auto")
            else:
                lines.append(f"{f.name}={_fmt(value)}")
    return "\n".join(lines) + "\n"
