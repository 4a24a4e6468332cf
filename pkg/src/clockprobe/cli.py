"""Command-line front end: figure-reproduction subcommands emitting CSVs.

Subcommands::

    clockprobe spectra     phase spectra, differential shift, magic points
    clockprobe rabi        one (ensemble-averaged) Rabi record
    clockprobe chevron     Rabi frequency vs detuning + magic detuning vs angle
    clockprobe measurement tau_d / eta^2 / SNR sweep at constant scattering rate

All take ``--config FILE --out DIR [--seed N] [--preset NAME]``.  Every
output CSV starts with the schema line ``# clockprobe v1`` and is written
atomically (temp file + rename), so a failed run leaves no partial files.
Exit codes: 0 success, 2 config error, 3 physics-domain error, 4 fit
failure.  ``CLOCKPROBE_WORKERS`` sets the process count for sweeps.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .birefringence import projection_noise_snr, state_phase_table
from .config import RunConfig, load_config
from .dynamics import RunSetup, rabi_frequency, run_simulation
from .ensemble import (
    calibrated_irradiance,
    ensemble_average,
    sweep_measurement_strength,
)
from .errors import (
    ClockProbeError,
    ConfigError,
    FitFailureError,
    NoBalanceError,
    ResonanceProximityError,
)
from .lightshift import (
    ProbeConfig,
    differential_clock_shift,
    dressed_clock_shift,
    find_magic_detunings,
    resonance_positions_MHz,
)

__all__ = ["main"]

SCHEMA_LINE = "# clockprobe v1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_FIT = 4


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CLOCKPROBE_WORKERS", "1")))
    except ValueError:
        return 1


def _pmap(func, items):
    """Order-preserving map, parallel when CLOCKPROBE_WORKERS > 1."""
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def write_csv(path: Path, columns: list[str], rows) -> None:
    """Atomic CSV write with the schema header line."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(SCHEMA_LINE + "\n")
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def _write_plot_script(path: Path, body: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write("#!/usr/bin/env python3\n"
                 '"""Standalone plot script; reads the CSVs next to it."""\n'
                 "import numpy as np\n"
                 "import matplotlib.pyplot as plt\n\n" + body)
    os.replace(tmp, path)


def build_setup(cfg: RunConfig) -> RunSetup:
    """Translate a validated RunConfig into a master-equation RunSetup.

    When a constant scattering rate is configured, the probe irradiance is
    recalibrated so the Hamiltonian and pumping rates stay consistent.
    """
    probe = cfg.probe
    sim = cfg.simulation
    if sim.scattering_rate_per_ms is not None and sim.pumping:
        s_cal = calibrated_irradiance(
            probe.detuning_MHz, probe.polarization_angle_deg,
            sim.scattering_rate_per_ms, cfg.atom)
        probe = replace(probe, irradiance_rel=s_cal)
    return RunSetup(
        probe=probe,
        microwave=cfg.microwave,
        cloud=cfg.cloud,
        atom=cfg.atom,
        extra_loss_per_ms=sim.extra_loss_per_ms,
        scattering_rate_per_ms=sim.scattering_rate_per_ms if sim.pumping else None,
        pumping_on=sim.pumping,
        initial=sim.initial_density_matrix(),
        t_span_ms=sim.t_span_ms,
        dt_ms=sim.dt_ms,
    )


# ---------------------------------------------------------------- spectra


def cmd_spectra(cfg: RunConfig, out: Path) -> None:
    atom, sweep = cfg.atom, cfg.sweep
    lo, hi = sweep.window_MHz
    grid = np.linspace(lo, hi, sweep.n_points)
    margin = 0.2 * atom.gamma_MHz
    positions = resonance_positions_MHz(atom).values()
    grid = np.array([d for d in grid
                     if min(abs(d - p) for p in positions) > margin])

    od = cfg.cloud.od_resonant
    theta = cfg.probe.polarization_angle_deg
    phase_rows = []
    du_rows = []
    for d in grid:
        probe = replace(cfg.probe, detuning_MHz=float(d))
        phases = state_phase_table(probe, atom, od=od)
        from .atom import IDX_DOWN, IDX_UP

        phase_rows.append((float(d), float(phases[IDX_UP]), float(phases[IDX_DOWN])))
        du_rows.append((float(d), differential_clock_shift(probe, atom)))

    points = find_magic_detunings(theta, (lo, hi), atom,
                                  irradiance_rel=cfg.probe.irradiance_rel)
    write_csv(out / "phase_spectrum.csv",
              ["detuning_MHz", "phi_up_rad", "phi_down_rad"], phase_rows)
    write_csv(out / "differential_shift.csv",
              ["detuning_MHz", "delta_shift_kHz"], du_rows)
    write_csv(out / "magic_points.csv",
              ["polarization_angle_deg", "detuning_MHz", "residual_kHz"],
              [(p.polarization_angle_deg, p.detuning_MHz, p.residual_dU_kHz)
               for p in points])
    if cfg.output.plot_scripts:
        _write_plot_script(out / "plot_spectra.py", _SPECTRA_PLOT)


_SPECTRA_PLOT = """\
ph = np.genfromtxt("phase_spectrum.csv", delimiter=",", names=True, skip_header=1)
du = np.genfromtxt("differential_shift.csv", delimiter=",", names=True, skip_header=1)
fig, (a, b) = plt.subplots(2, 1, sharex=True)
a.plot(ph["detuning_MHz"], ph["phi_up_rad"], label="spin up")
a.plot(ph["detuning_MHz"], ph["phi_down_rad"], label="spin down")
a.set_ylabel("phase (rad)"); a.legend()
b.plot(du["detuning_MHz"], du["delta_shift_kHz"])
b.axhline(0, color="k", lw=0.5)
b.set_xlabel("probe detuning (MHz)"); b.set_ylabel("diff. shift (kHz)")
fig.savefig("spectra.png", dpi=150)
"""


# ------------------------------------------------------------------- rabi


def cmd_rabi(cfg: RunConfig, out: Path) -> None:
    setup = build_setup(cfg)
    inhomog = cfg.inhomogeneity
    spreads = inhomog.probe_irradiance_rms_frac or inhomog.mw_irradiance_rms_frac
    if spreads:
        record = ensemble_average(setup, inhomog)
    else:
        record = run_simulation(setup)
    write_csv(out / "rabi_record.csv",
              ["time_s", "signal_rad", "s3", "pop_F3", "pop_F4", "lost"],
              record.csv_rows())
    if cfg.output.plot_scripts:
        _write_plot_script(out / "plot_rabi.py", _RABI_PLOT)


_RABI_PLOT = """\
r = np.genfromtxt("rabi_record.csv", delimiter=",", names=True, skip_header=1)
fig, (a, b) = plt.subplots(2, 1, sharex=True)
a.plot(r["time_s"] * 1e3, r["signal_rad"] * 1e3)
a.set_ylabel("polarimeter signal (mrad)")
b.plot(r["time_s"] * 1e3, r["s3"], label="s3")
b.plot(r["time_s"] * 1e3, r["lost"], label="lost")
b.set_xlabel("time (ms)"); b.legend()
fig.savefig("rabi.png", dpi=150)
"""


# ---------------------------------------------------------------- chevron


def _chevron_point(args):
    setup, inhomog, det = args
    probe = replace(setup.probe, detuning_MHz=det)
    point = replace(setup, probe=probe)
    du_kHz = dressed_clock_shift(probe, setup.atom,
                                 bias_field_G=setup.cloud.bias_field_G)
    analytic = math.hypot(setup.microwave.rabi_kHz, du_kHz)
    try:
        if inhomog.probe_irradiance_rms_frac or inhomog.mw_irradiance_rms_frac:
            record = ensemble_average(point, inhomog)
        else:
            record = run_simulation(point)
        omega = rabi_frequency(record, freq_hint_kHz=analytic)
        return (det, omega, analytic, abs(omega - analytic) / analytic, 0, "")
    except (FitFailureError, ClockProbeError) as exc:
        return (det, math.nan, analytic, math.nan, 0, str(exc))


def cmd_chevron(cfg: RunConfig, out: Path) -> None:
    atom, sweep = cfg.atom, cfg.sweep
    setup = build_setup(cfg)
    lo, hi = sweep.window_MHz
    grid = np.linspace(lo, hi, sweep.n_points)
    positions = resonance_positions_MHz(atom).values()

    tasks, rows = [], {}
    for d in grid:
        d = float(d)
        near = min(abs(d - p) for p in positions)
        if near <= sweep.mask_gamma * atom.gamma_MHz:
            rows[d] = (d, math.nan, math.nan, math.nan, 1, "")
        else:
            tasks.append((setup, cfg.inhomogeneity, d))
    for res in _pmap(_chevron_point, tasks):
        rows[res[0]] = res
    write_csv(out / "chevron.csv",
              ["detuning_MHz", "omega_kHz", "omega_analytic_kHz",
               "rel_residual", "masked", "error"],
              [rows[float(d)] for d in grid])

    thetas = np.linspace(sweep.theta_min_deg, sweep.theta_max_deg, sweep.n_theta)
    theta_rows = []
    for th in thetas:
        pts = find_magic_detunings(float(th), (lo, hi), atom,
                                   irradiance_rel=cfg.probe.irradiance_rel)
        if pts:
            theta_rows.append((float(th), pts[0].detuning_MHz, 1))
        else:
            theta_rows.append((float(th), math.nan, 0))
    write_csv(out / "magic_vs_theta.csv",
              ["polarization_angle_deg", "magic_detuning_MHz", "found"],
              theta_rows)
    if cfg.output.plot_scripts:
        _write_plot_script(out / "plot_chevron.py", _CHEVRON_PLOT)


_CHEVRON_PLOT = """\
c = np.genfromtxt("chevron.csv", delimiter=",", names=True, skip_header=1)
m = np.genfromtxt("magic_vs_theta.csv", delimiter=",", names=True, skip_header=1)
fig, (a, b) = plt.subplots(1, 2, figsize=(9, 4))
a.plot(c["detuning_MHz"], c["omega_kHz"], "o", ms=3, label="simulated")
a.plot(c["detuning_MHz"], c["omega_analytic_kHz"], "-", label="sqrt(chi^2 + dU^2)")
a.set_xlabel("probe detuning (MHz)"); a.set_ylabel("Rabi frequency (kHz)")
a.set_yscale("log"); a.legend()
b.plot(m["polarization_angle_deg"], m["magic_detuning_MHz"], "s-")
b.set_xlabel("polarization angle (deg)"); b.set_ylabel("magic detuning (MHz)")
fig.tight_layout(); fig.savefig("chevron.png", dpi=150)
"""


# ------------------------------------------------------------ measurement


def _measurement_point(args):
    setup, inhomog, rate, mask_gamma, eff, det = args
    return sweep_measurement_strength(
        [det], setup, inhomog, target_rate_per_ms=rate,
        mask_gamma=mask_gamma, detection_efficiency=eff)[0]


def _run_measurement_sweep(cfg: RunConfig, setup: RunSetup, grid) -> list:
    rate = cfg.simulation.scattering_rate_per_ms
    args = [(setup, cfg.inhomogeneity, rate, cfg.sweep.mask_gamma,
             cfg.output.detection_efficiency, float(d)) for d in grid]
    return _pmap(_measurement_point, args)


def _figure_rows(figures):
    for f in figures:
        yield (f.detuning_MHz, f.tau_d_ms, f.omega_kHz, f.eta, f.eta_sq,
               f.pn_snr, int(f.masked), f.error)


_MEASUREMENT_COLUMNS = ["detuning_MHz", "tau_d_ms", "omega_kHz", "eta",
                        "eta_sq", "pn_snr", "masked", "error"]


def cmd_measurement(cfg: RunConfig, out: Path) -> None:
    setup = build_setup(cfg)
    lo, hi = cfg.sweep.window_MHz
    grid = np.linspace(lo, hi, cfg.sweep.n_points)

    figures = _run_measurement_sweep(cfg, setup, grid)
    write_csv(out / "measurement.csv", _MEASUREMENT_COLUMNS,
              _figure_rows(figures))
    if cfg.simulation.extra_loss_per_ms > 0:
        no_loss = _run_measurement_sweep(
            cfg, replace(setup, extra_loss_per_ms=0.0), grid)
        write_csv(out / "measurement_no_loss.csv", _MEASUREMENT_COLUMNS,
                  _figure_rows(no_loss))

    ok = [f for f in figures if not f.masked and not f.error]
    summary_rows = []
    theta = cfg.probe.polarization_angle_deg
    magic = find_magic_detunings(theta, (lo, hi), cfg.atom)
    if magic:
        summary_rows.append(("magic_detuning_MHz", magic[0].detuning_MHz))
    if ok:
        peak_tau = max(ok, key=lambda f: f.tau_d_ms)
        peak_eta = max(ok, key=lambda f: f.eta_sq)
        summary_rows += [
            ("tau_d_peak_detuning_MHz", peak_tau.detuning_MHz),
            ("tau_d_peak_ms", peak_tau.tau_d_ms),
            ("eta_sq_peak_detuning_MHz", peak_eta.detuning_MHz),
            ("eta_sq_peak", peak_eta.eta_sq),
            ("pn_snr_at_eta_sq_peak", peak_eta.pn_snr),
        ]
        # extrapolation to OD = 1e3 at fixed geometry: atom number and
        # phase both scale with OD, so the SNR scales as sqrt(OD)
        cloud = cfg.cloud
        scale = 1e3 / cloud.od_resonant
        big = replace(cloud, od_resonant=1e3, atom_number=cloud.atom_number * scale)
        probe = replace(setup.probe, detuning_MHz=peak_eta.detuning_MHz)
        rate = cfg.simulation.scattering_rate_per_ms
        if rate is not None:
            # same per-point calibrated irradiance the sweep used
            probe = replace(probe, irradiance_rel=calibrated_irradiance(
                probe.detuning_MHz, probe.polarization_angle_deg, rate, cfg.atom))
        pn_big = projection_noise_snr(
            big, probe, cfg.atom, peak_eta.tau_d_ms * 1e-3,
            detection_efficiency=cfg.output.detection_efficiency)
        summary_rows += [
            ("pn_snr_od_1000", pn_big),
            ("pn_snr_ratio_od_1000", pn_big / peak_eta.pn_snr),
        ]
    write_csv(out / "summary.csv", ["quantity", "value"], summary_rows)
    if cfg.output.plot_scripts:
        _write_plot_script(out / "plot_measurement.py", _MEASUREMENT_PLOT)


_MEASUREMENT_PLOT = """\
m = np.genfromtxt("measurement.csv", delimiter=",", names=True, skip_header=1)
fig, (a, b) = plt.subplots(2, 1, sharex=True)
a.plot(m["detuning_MHz"], m["tau_d_ms"], "o-", ms=3)
a.set_ylabel("tau_d (ms)")
b.plot(m["detuning_MHz"], m["eta_sq"], "o-", ms=3)
b.set_xlabel("probe detuning (MHz)"); b.set_ylabel("eta^2"); b.set_yscale("log")
try:
    n = np.genfromtxt("measurement_no_loss.csv", delimiter=",", names=True,
                      skip_header=1)
    a.plot(n["detuning_MHz"], n["tau_d_ms"], "--")
    b.plot(n["detuning_MHz"], n["eta_sq"], "--")
except OSError:
    pass
fig.savefig("measurement.png", dpi=150)
"""


# ------------------------------------------------------------------- main


_COMMANDS = {
    "spectra": cmd_spectra,
    "rabi": cmd_rabi,
    "chevron": cmd_chevron,
    "measurement": cmd_measurement,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clockprobe",
        description="Continuous polarization probe of the Cs clock pseudo-spin",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", type=Path, default=None,
                       help="YAML config file (layered over the preset)")
        p.add_argument("--out", type=Path, required=True,
                       help="output directory for CSVs and plot scripts")
        p.add_argument("--seed", type=int, default=None,
                       help="override the simulation seed")
        p.add_argument("--preset", default=None,
                       help="named preset providing a complete operating point")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, preset=args.preset, seed=args.seed)
        _COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitFailureError as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (ResonanceProximityError, NoBalanceError, ClockProbeError,
            ValueError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
