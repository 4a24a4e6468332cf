"""Strict YAML configuration for the command-line front end.

A config file is a key-value tree with one block per physical subsystem.
Unknown keys anywhere are rejected with the offending key path; every
physical invariant of the embedded types is re-validated on load.  Named
presets provide complete operating points for the shipped demo figures;
a config file layered on top of a preset overrides individual keys.

The probe detuning may be given as the string ``"magic"``, which resolves
to the differential-light-shift zero of the configured polarization angle
inside the lower inter-resonance window.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .atom import CloudConfig, CsD1Constants
from .dynamics import DensityMatrix, MicrowaveConfig, clock_mixture, pure_state
from .ensemble import InhomogeneityConfig
from .errors import ConfigError
from .lightshift import ProbeConfig, find_magic_detunings

__all__ = [
    "RunConfig",
    "SimulationConfig",
    "SweepConfig",
    "OutputConfig",
    "PRESETS",
    "load_config",
]

# Lower inter-resonance window used to resolve detuning: "magic"
MAGIC_SEARCH_WINDOW_MHZ = (-1100.0, -50.0)


@dataclass(frozen=True)
class SimulationConfig:
    t_span_ms: float = 3.0
    dt_ms: float = 0.005
    seed: int = 0
    extra_loss_per_ms: float = 0.0
    scattering_rate_per_ms: float | None = None  # calibrate probe power when set
    pumping: bool = True
    initial_state: str = "3,0"  # "F,mF" or "mixture"

    def __post_init__(self):
        if self.t_span_ms <= 0 or self.dt_ms <= 0:
            raise ValueError("t_span_ms and dt_ms must be > 0")
        if self.extra_loss_per_ms < 0:
            raise ValueError("extra_loss_per_ms must be >= 0")
        if self.scattering_rate_per_ms is not None and self.scattering_rate_per_ms <= 0:
            raise ValueError("scattering_rate_per_ms must be > 0")

    def initial_density_matrix(self) -> DensityMatrix:
        if self.initial_state == "mixture":
            return clock_mixture(0.5)
        try:
            f_str, m_str = self.initial_state.split(",")
            return pure_state(int(f_str), int(m_str))
        except (ValueError, KeyError) as exc:
            raise ValueError(
                f"initial_state must be 'F,mF' or 'mixture', got {self.initial_state!r}"
            ) from exc


@dataclass(frozen=True)
class SweepConfig:
    """Detuning and polarization-angle grids for the sweep subcommands."""

    window_MHz: tuple[float, float] = (-1100.0, -60.0)
    n_points: int = 41
    theta_min_deg: float = 0.0
    theta_max_deg: float = 90.0
    n_theta: int = 13
    mask_gamma: float = 5.0

    def __post_init__(self):
        lo, hi = self.window_MHz
        if not lo < hi:
            raise ValueError("window_MHz must be (low, high) with low < high")
        if self.n_points < 2 or self.n_theta < 2:
            raise ValueError("n_points and n_theta must be >= 2")
        if self.mask_gamma < 0:
            raise ValueError("mask_gamma must be >= 0")


@dataclass(frozen=True)
class OutputConfig:
    plot_scripts: bool = True
    detection_efficiency: float = 1.0
    effective_atom_number: float | None = None  # defaults to total atom number

    def __post_init__(self):
        if not 0 < self.detection_efficiency <= 1:
            raise ValueError("detection_efficiency must be in (0, 1]")
        if self.effective_atom_number is not None and self.effective_atom_number <= 0:
            raise ValueError("effective_atom_number must be > 0")


@dataclass(frozen=True)
class RunConfig:
    atom: CsD1Constants
    cloud: CloudConfig
    probe: ProbeConfig
    microwave: MicrowaveConfig
    inhomogeneity: InhomogeneityConfig
    simulation: SimulationConfig
    sweep: SweepConfig
    output: OutputConfig


PRESETS: dict[str, dict[str, Any]] = {
    # Single ideal Rabi record at the magic detuning.
    "rabi-ideal": {
        "probe": {"detuning_MHz": "magic", "irradiance_rel": 16.0,
                  "polarization_angle_deg": 45.0},
        "cloud": {"od_resonant": 2.2},
        "microwave": {"rabi_kHz": 2.0},
        "inhomogeneity": {"probe_irradiance_rms_frac": 0.0, "n_samples": 1},
        "simulation": {"t_span_ms": 3.0},
    },
    # Rabi record with microwave-amplitude spread and extrinsic atom loss.
    "rabi-dephased": {
        "probe": {"detuning_MHz": "magic", "irradiance_rel": 16.0,
                  "polarization_angle_deg": 45.0},
        "cloud": {"od_resonant": 2.2},
        "microwave": {"rabi_kHz": 2.0, "inhomogeneity_frac": 0.015},
        "inhomogeneity": {"probe_irradiance_rms_frac": 0.0,
                          "mw_irradiance_rms_frac": 0.015, "n_samples": 16},
        "simulation": {"t_span_ms": 3.0, "extra_loss_per_ms": 0.4},
    },
    # Phase / differential-shift spectra over the lower window.
    "spectra": {
        "probe": {"detuning_MHz": "magic"},
        "sweep": {"window_MHz": [-1100.0, -60.0], "n_points": 301},
    },
    # Rabi-frequency chevron and magic-detuning-vs-angle scan.
    "chevron": {
        "probe": {"detuning_MHz": "magic", "irradiance_rel": 16.0},
        "microwave": {"rabi_kHz": 2.0},
        "inhomogeneity": {"probe_irradiance_rms_frac": 0.0, "n_samples": 1},
        "sweep": {"window_MHz": [-1000.0, -100.0], "n_points": 46},
    },
    # Measurement-strength sweep at constant scattering rate.
    "measurement": {
        "probe": {"detuning_MHz": "magic"},
        "cloud": {"od_resonant": 2.5},
        "microwave": {"rabi_kHz": 2.0, "inhomogeneity_frac": 0.015},
        "inhomogeneity": {"probe_irradiance_rms_frac": 0.15,
                          "mw_irradiance_rms_frac": 0.015, "n_samples": 16},
        "simulation": {"scattering_rate_per_ms": 1.25, "extra_loss_per_ms": 0.4,
                       "t_span_ms": 3.0},
        "sweep": {"window_MHz": [-1100.0, -60.0], "n_points": 33},
    },
}

_BLOCK_TYPES = {
    "atom": CsD1Constants,
    "cloud": CloudConfig,
    "probe": ProbeConfig,
    "microwave": MicrowaveConfig,
    "inhomogeneity": InhomogeneityConfig,
    "simulation": SimulationConfig,
    "sweep": SweepConfig,
    "output": OutputConfig,
}


def _merge(base: dict, override: dict) -> dict:
    out = {k: dict(v) for k, v in base.items()}
    for block, values in override.items():
        out.setdefault(block, {})
        out[block].update(values)
    return out


def _validate_tree(tree: Any, source: str) -> dict:
    if tree is None:
        return {}
    if not isinstance(tree, dict):
        raise ConfigError(f"{source}: top level must be a mapping of blocks")
    for block, values in tree.items():
        if block not in _BLOCK_TYPES:
            raise ConfigError(
                f"{source}: unknown block '{block}' "
                f"(expected one of {sorted(_BLOCK_TYPES)})"
            )
        if values is None:
            tree[block] = {}
        elif not isinstance(values, dict):
            raise ConfigError(f"{source}: block '{block}' must be a mapping")
    return tree


def _build_block(name: str, values: dict, source: str):
    cls = _BLOCK_TYPES[name]
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - allowed
    if unknown:
        raise ConfigError(
            f"{source}: unknown key(s) {sorted(unknown)} in block '{name}' "
            f"(expected subset of {sorted(allowed)})"
        )
    kwargs = dict(values)
    if name == "sweep" and "window_MHz" in kwargs:
        w = kwargs["window_MHz"]
        if not (isinstance(w, (list, tuple)) and len(w) == 2):
            raise ConfigError(f"{source}: sweep.window_MHz must be a 2-element list")
        kwargs["window_MHz"] = (float(w[0]), float(w[1]))
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: block '{name}': {exc}") from exc


def resolve_magic_detuning(theta_deg: float, atom: CsD1Constants) -> float:
    points = find_magic_detunings(theta_deg, MAGIC_SEARCH_WINDOW_MHZ, atom)
    if not points:
        raise ConfigError(
            f"probe.detuning_MHz = 'magic' but no differential-shift zero exists "
            f"in {MAGIC_SEARCH_WINDOW_MHZ} MHz at theta = {theta_deg} deg"
        )
    return points[0].detuning_MHz


def load_config(path: str | Path | None = None, preset: str | None = None,
                seed: int | None = None) -> RunConfig:
    """Load, merge (defaults <- preset <- file) and validate a RunConfig.

    ``seed`` overrides the simulation seed (CLI --seed flag).
    """
    tree: dict[str, dict] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset '{preset}' (available: {sorted(PRESETS)})"
            )
        tree = _merge(tree, {k: dict(v) for k, v in PRESETS[preset].items()})
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
        tree = _merge(tree, _validate_tree(loaded, str(path)))
    source = str(path) if path is not None else (preset or "defaults")
    tree = _validate_tree(tree, source)

    atom: CsD1Constants = _build_block("atom", tree.get("atom", {}), source)

    probe_values = dict(tree.get("probe", {}))
    theta = float(probe_values.get("polarization_angle_deg", 45.0))
    if "detuning_MHz" not in probe_values:
        raise ConfigError(f"{source}: probe.detuning_MHz is required "
                          "(a number in MHz, or 'magic')")
    if probe_values["detuning_MHz"] == "magic":
        probe_values["detuning_MHz"] = resolve_magic_detuning(theta, atom)
    probe: ProbeConfig = _build_block("probe", probe_values, source)

    microwave: MicrowaveConfig = _build_block(
        "microwave", tree.get("microwave", {}), source)
    inhomog_values = dict(tree.get("inhomogeneity", {}))
    # the microwave block's rms spread is the default for the ensemble layer
    inhomog_values.setdefault("mw_irradiance_rms_frac", microwave.inhomogeneity_frac)
    sim_values = dict(tree.get("simulation", {}))
    if seed is not None:
        sim_values["seed"] = int(seed)
    simulation: SimulationConfig = _build_block("simulation", sim_values, source)
    inhomog_values.setdefault("seed", simulation.seed)

    return RunConfig(
        atom=atom,
        cloud=_build_block("cloud", tree.get("cloud", {}), source),
        probe=probe,
        microwave=microwave,
        inhomogeneity=_build_block("inhomogeneity", inhomog_values, source),
        simulation=simulation,
        sweep=_build_block("sweep", tree.get("sweep", {}), source),
        output=_build_block("output", tree.get("output", {}), source),
    )
