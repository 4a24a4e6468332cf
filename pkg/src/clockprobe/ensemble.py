"""Inhomogeneity averaging and measurement-strength sweeps.

Probe and microwave irradiance spreads are sampled as one scalar per
ensemble member (each member is an atom subgroup at fixed local
irradiance), using deterministic stratified Gaussian quantiles so that
figures are reproducible and converge quickly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm

from .atom import CloudConfig, CsD1Constants
from .birefringence import projection_noise_snr, snr_eta
from .dynamics import (
    MicrowaveConfig,
    RunSetup,
    SimRecord,
    pumping_jump_operators,
    rabi_frequency,
    run_simulation,
    scattering_rate_per_ms,
    clock_mixture,
)
from .errors import ClockProbeError, FitFailureError, ResonanceProximityError
from .fitting import fit_decaying_sinusoid
from .lightshift import ProbeConfig, dressed_clock_shift, resonance_positions_MHz

__all__ = [
    "InhomogeneityConfig",
    "MeasurementFigure",
    "ensemble_average",
    "decay_time",
    "calibrated_irradiance",
    "sweep_measurement_strength",
]


@dataclass(frozen=True)
class InhomogeneityConfig:
    probe_irradiance_rms_frac: float = 0.15
    mw_irradiance_rms_frac: float = 0.0
    n_samples: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.probe_irradiance_rms_frac < 0 or self.mw_irradiance_rms_frac < 0:
            raise ValueError("rms fractions must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass(frozen=True)
class MeasurementFigure:
    """Figures of merit at one probe operating point."""

    detuning_MHz: float
    tau_d_ms: float
    omega_kHz: float
    eta: float
    eta_sq: float
    pn_snr: float
    masked: bool = False
    error: str = ""

    def __post_init__(self):
        if not self.masked and not self.error:
            if not math.isclose(self.eta_sq, self.eta**2, rel_tol=1e-12, abs_tol=0.0):
                raise ValueError("eta_sq must equal eta**2")


def _stratified_factors(rms_frac: float, n: int) -> np.ndarray:
    """Deterministic Gaussian quantile midpoints, truncated above zero."""
    if rms_frac == 0.0 or n == 1:
        return np.ones(n)
    q = (np.arange(n) + 0.5) / n
    factors = 1.0 + rms_frac * norm.ppf(q)
    return np.clip(factors, 1e-3, None)


def ensemble_average(setup: RunSetup, inhomog: InhomogeneityConfig) -> SimRecord:
    """Average of independent evolutions over the irradiance distributions.

    Probe factors scale both the light shift and the pumping rate;
    microwave factors scale the Rabi frequency.  The pairing of the two
    stratified lattices is a seeded random permutation, so the result is
    deterministic per seed, and with zero spreads (or n_samples = 1) it
    reduces exactly to a single evolution.
    """
    probe_f = _stratified_factors(inhomog.probe_irradiance_rms_frac, inhomog.n_samples)
    mw_f = _stratified_factors(inhomog.mw_irradiance_rms_frac, inhomog.n_samples)
    rng = np.random.default_rng(inhomog.seed)
    mw_f = mw_f[rng.permutation(inhomog.n_samples)]

    base: SimRecord | None = None
    signal = s3 = pops = lost = None
    for pf, mf in zip(probe_f, mw_f):
        rec = run_simulation(setup, probe_scale=float(pf), mw_scale=float(mf))
        if base is None:
            base = rec
            signal = rec.signal_rad.copy()
            s3 = rec.s3.copy()
            pops = rec.populations.copy()
            lost = rec.lost.copy()
        else:
            signal += rec.signal_rad
            s3 += rec.s3
            pops += rec.populations
            lost += rec.lost
    n = inhomog.n_samples
    return SimRecord(times_ms=base.times_ms, signal_rad=signal / n, s3=s3 / n,
                     populations=pops / n, lost=lost / n)


def decay_time(record: SimRecord, use_signal: bool = True,
               freq_hint_kHz: float | None = None) -> float:
    """1/e time (ms) of the fitted oscillation envelope."""
    y = record.signal_rad if use_signal else record.s3
    return fit_decaying_sinusoid(record.times_ms, y,
                                 freq_hint_kHz=freq_hint_kHz).tau_ms


def calibrated_irradiance(detuning_MHz: float, theta_deg: float,
                          target_rate_per_ms: float,
                          atom: CsD1Constants | None = None,
                          reference_rho: np.ndarray | None = None) -> float:
    """I/I_sat giving ``target_rate_per_ms`` at the reference population.

    Implements the constant-scattering-rate sweep protocol: the rate is
    linear in irradiance, so one unit-irradiance evaluation fixes the
    scale.
    """
    atom = atom or CsD1Constants()
    if reference_rho is None:
        reference_rho = clock_mixture(0.5).rho
    jumps = pumping_jump_operators(
        ProbeConfig(detuning_MHz, 1.0, theta_deg), atom)
    r_unit = scattering_rate_per_ms(jumps, reference_rho)
    return target_rate_per_ms / r_unit


def sweep_measurement_strength(detunings_MHz, setup: RunSetup,
                               inhomog: InhomogeneityConfig,
                               target_rate_per_ms: float | None = None,
                               mask_gamma: float = 5.0,
                               detection_efficiency: float = 1.0,
                               ) -> list[MeasurementFigure]:
    """tau_d, Omega, eta^2 and projection-noise SNR over a detuning grid.

    At each point the probe irradiance is rescaled to hold the reference
    scattering rate constant (default: the calibrated rate already in
    ``setup``), the ensemble average is run, and the oscillation fit
    yields tau_d and Omega.  Points within ``mask_gamma`` linewidths of a
    resonance are flagged as masked; per-point failures are recorded and
    the sweep continues.
    """
    atom = setup.atom
    if target_rate_per_ms is None:
        target_rate_per_ms = setup.scattering_rate_per_ms
    results: list[MeasurementFigure] = []
    for det in detunings_MHz:
        det = float(det)
        near = min(abs(det - p) for p in resonance_positions_MHz(atom).values())
        if near <= mask_gamma * atom.gamma_MHz:
            results.append(MeasurementFigure(det, math.nan, math.nan, math.nan,
                                             math.nan, math.nan, masked=True))
            continue
        try:
            probe = replace(setup.probe, detuning_MHz=det)
            if target_rate_per_ms is not None:
                s_cal = calibrated_irradiance(
                    det, probe.polarization_angle_deg, target_rate_per_ms, atom)
                probe = replace(probe, irradiance_rel=s_cal)
                point = replace(setup, probe=probe,
                                scattering_rate_per_ms=target_rate_per_ms)
            else:
                point = replace(setup, probe=probe)
            hint = math.hypot(
                setup.microwave.rabi_kHz,
                dressed_clock_shift(probe, atom,
                                    bias_field_G=setup.cloud.bias_field_G))
            rec = ensemble_average(point, inhomog)
            tau_ms = decay_time(rec, freq_hint_kHz=hint)
            omega = rabi_frequency(rec, freq_hint_kHz=hint)
            eta = snr_eta(point.probe, atom, setup.cloud, tau_ms * 1e-3,
                          detection_efficiency)
            pn = projection_noise_snr(setup.cloud, point.probe, atom, tau_ms * 1e-3,
                                      detection_efficiency=detection_efficiency)
            results.append(MeasurementFigure(det, tau_ms, omega, eta, eta**2, pn))
        except (FitFailureError, ResonanceProximityError, ClockProbeError) as exc:
            results.append(MeasurementFigure(det, math.nan, math.nan, math.nan,
                                             math.nan, math.nan, error=str(exc)))
    return results
