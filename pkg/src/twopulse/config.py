"""Experiment configuration: a strict INI schema parsed with configparser.

See ``docs/config.md`` for the key reference.  Every violation in a file is
collected and reported together.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .core import (PUMP, SHAPES, STOKES, MediumPrep, Occupancy, PulseSpec, Quadrature,
                   SimulationGrid, make_doppler_quadrature, prep_violations)
from .errors import ConfigError

SOLVERS = ("full", "adiabatic", "analytic")
SCHEMES = ("trapezoid",)

_PULSE_KEYS = {"shape": "gaussian", "area": 0.0, "width": 1.0, "delay": 0.0, "phase": 0.0}
SCHEMA = {
    "medium": {"alpha2": 1.0, "beta2": 0.0, "delta_bar": 10.0, "t2_star": math.inf,
               "kappa": None, "mu": None, "doppler_nodes": 32, "entry": None, "exit": None},
    "pulse_a": dict(_PULSE_KEYS),
    "pulse_b": dict(_PULSE_KEYS),
    "grid": {"t_min": -10.0, "t_max": 50.0, "dt": 0.02, "z_min": 0.0, "z_max": 40.0,
             "dz": 0.05, "substeps": 1},
    "run": {"solver": "full", "stations": 6, "scheme": "trapezoid", "output": "out", "name": ""},
}
_STRINGS = {"shape", "solver", "scheme", "output", "name"}
_INTS = {"doppler_nodes", "substeps", "stations"}
_PI = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*$")


def parse_number(text: str) -> float:
    """Float with an optional ``pi`` factor: ``1.3pi``, ``0.005*pi``, ``pi``."""
    m = _PI.match(text)
    if m:
        return (float(m.group(1)) if m.group(1) else 1.0) * math.pi
    return float(text)


@dataclass
class GridConfig:
    t_min: float = -10.0
    t_max: float = 50.0
    dt: float = 0.02
    z_min: float = 0.0
    z_max: float = 40.0
    dz: float = 0.05
    substeps: int = 1

    @property
    def n_t(self) -> int:
        return int(round((self.t_max - self.t_min) / self.dt)) + 1

    @property
    def n_z(self) -> int:
        return max(1, int(round((self.z_max - self.z_min) / self.dz)))


@dataclass
class ExperimentConfig:
    """A validated experiment.  Distances ``z_*``, ``dz``, ``entry`` and
    ``exit`` are in absorption lengths (``kappa z``); times in reference
    widths."""

    alpha2: float = 1.0
    beta2: float = 0.0
    delta_bar: float = 10.0
    t2_star: float = math.inf
    kappa: float | None = 1.0
    mu: float | None = None
    doppler_nodes: int = 32
    entry: float | None = None
    exit: float | None = None
    pulse_a: PulseSpec = field(default_factory=lambda: PulseSpec(PUMP, "gaussian", 0.0))
    pulse_b: PulseSpec = field(default_factory=lambda: PulseSpec(STOKES, "gaussian", 0.0))
    grid: GridConfig = field(default_factory=GridConfig)
    solver: str = "full"
    stations: int = 6
    scheme: str = "trapezoid"
    output: str = "out"
    name: str = ""

    def quadrature(self) -> Quadrature:
        n = 1 if math.isinf(self.t2_star) else self.doppler_nodes
        return make_doppler_quadrature(self.delta_bar, self.t2_star, n)

    def medium(self) -> tuple[MediumPrep, float]:
        """Prepared medium (``mu`` resolved) and its absorption coefficient
        ``kappa`` for the reference width."""
        from .analytic import compute_kappa_delta, mu_for_kappa
        base = MediumPrep(self.alpha2, self.beta2, self.delta_bar, self.t2_star)
        q = self.quadrature()
        mu = self.mu if self.mu is not None else mu_for_kappa(base, self.kappa, 1.0, q)
        kappa = self.kappa if self.mu is None else compute_kappa_delta(
            MediumPrep(self.alpha2, self.beta2, self.delta_bar, self.t2_star, mu), 1.0, q).kappa
        occ = Occupancy(-math.inf if self.entry is None else self.entry / kappa,
                        math.inf if self.exit is None else self.exit / kappa)
        return MediumPrep(self.alpha2, self.beta2, self.delta_bar, self.t2_star, mu, occ), kappa

    def simulation_grid(self, kappa: float) -> SimulationGrid:
        g = self.grid
        return SimulationGrid(g.t_min, g.t_max, g.n_t, g.z_min / kappa, g.z_max / kappa, g.n_z,
                              self.quadrature())


def _convert(key, raw):
    if key in _STRINGS:
        return raw.strip()
    if key in _INTS:
        return int(raw)
    return parse_number(raw)


def parse_config(text: str, name: str = "") -> ExperimentConfig:
    """Parse and validate configuration text; raises :class:`ConfigError`
    listing every violation."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed config: {exc}".splitlines()[0]]) from None

    bad: list[str] = []
    values: dict[str, dict] = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            bad.append(f"unknown section [{sec}]")
            continue
        values[sec] = {}
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                bad.append(f"unknown key {key!r} in [{sec}]")
                continue
            try:
                values[sec][key] = _convert(key, raw)
            except ValueError:
                bad.append(f"[{sec}] {key}: cannot parse {raw!r}")

    def get(sec, key):
        return values.get(sec, {}).get(key, SCHEMA[sec][key])

    med = {k: get("medium", k) for k in SCHEMA["medium"]}
    if med["kappa"] is not None and med["mu"] is not None:
        bad.append("[medium] give kappa or mu, not both")
    if med["kappa"] is None and med["mu"] is None:
        med["kappa"] = 1.0
    if med["kappa"] is not None and not med["kappa"] > 0:
        bad.append("[medium] kappa must be positive")
    mu_check = med["mu"] if med["mu"] is not None else 1.0
    bad.extend(prep_violations(med["alpha2"], med["beta2"], med["t2_star"], mu_check))
    if med["doppler_nodes"] < 1:
        bad.append("[medium] doppler_nodes must be at least 1")
    if med["entry"] is not None and med["exit"] is not None and not med["entry"] < med["exit"]:
        bad.append("[medium] entry must lie before exit")

    pulses = {}
    for sec, channel in (("pulse_a", PUMP), ("pulse_b", STOKES)):
        p = {k: get(sec, k) for k in _PULSE_KEYS}
        if p["shape"] not in SHAPES:
            bad.append(f"[{sec}] shape must be one of {', '.join(SHAPES)}")
            p["shape"] = "gaussian"
        if not p["width"] > 0:
            bad.append(f"[{sec}] width must be positive")
            p["width"] = 1.0
        if p["area"] < 0:
            bad.append(f"[{sec}] area must be non-negative")
            p["area"] = 0.0
        pulses[sec] = PulseSpec(channel, p["shape"], p["area"], p["width"], p["delay"], p["phase"])

    grid = GridConfig(**{k: get("grid", k) for k in SCHEMA["grid"]})
    if not grid.dt > 0:
        bad.append("[grid] dt must be positive")
    if not grid.t_max > grid.t_min:
        bad.append("[grid] t_max must exceed t_min")
    if not grid.dz > 0:
        bad.append("[grid] dz must be positive")
    if not grid.z_max > grid.z_min:
        bad.append("[grid] z_max must exceed z_min")
    if grid.substeps < 1:
        bad.append("[grid] substeps must be at least 1")
    if grid.dt > 0 and grid.t_max > grid.t_min and (grid.t_max - grid.t_min) / grid.dt < 3:
        bad.append("[grid] time axis needs at least 4 samples")

    run = {k: get("run", k) for k in SCHEMA["run"]}
    if run["solver"] not in SOLVERS:
        bad.append(f"[run] solver must be one of {', '.join(SOLVERS)}")
    if run["scheme"] not in SCHEMES:
        bad.append(f"[run] scheme must be one of {', '.join(SCHEMES)}")
    if run["stations"] < 1:
        bad.append("[run] stations must be at least 1")
    if run["solver"] == "adiabatic":
        if med["delta_bar"] == 0:
            bad.append("[medium] the adiabatic solver needs delta_bar != 0")
        if not math.isinf(med["t2_star"]):
            bad.append("[medium] the adiabatic solver needs a sharp line (t2_star = inf)")
    if bad:
        raise ConfigError(bad)
    return ExperimentConfig(
        med["alpha2"], med["beta2"], med["delta_bar"], med["t2_star"], med["kappa"], med["mu"],
        med["doppler_nodes"], med["entry"], med["exit"], pulses["pulse_a"], pulses["pulse_b"],
        grid, run["solver"], run["stations"], run["scheme"], run["output"], run["name"] or name)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None
    return parse_config(text, name=path.stem)


def shipped_configs() -> dict[str, Path]:
    """Configuration files installed with the package, by name."""
    root = Path(__file__).parent / "configs"
    return {p.stem: p for p in sorted(root.glob("*.cfg"))}


def resolve_config(name_or_path) -> ExperimentConfig:
    """Load a config from a path, or by the name of a shipped config."""
    p = Path(name_or_path)
    if not p.exists():
        shipped = shipped_configs()
        if str(name_or_path) in shipped:
            p = shipped[str(name_or_path)]
    return load_config(p)

