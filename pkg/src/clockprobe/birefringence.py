"""Birefringent phase spectra, Stokes polarimetry, shot noise and SNR figures.

Sign convention: positive phi rotates +j2 toward +j3 on the Poincare
sphere, and the per-state phase is the x-component optical phase minus the
z-component phase.  Absorption is neglected everywhere (the signal model
is purely dispersive); near-resonance operating points raise instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atom import CloudConfig, CsD1Constants, GroundState, state_index, state_registry
from .lightshift import (
    ProbeConfig,
    amplitude_tensor,
    check_off_resonance,
    excited_detunings_MHz,
    spherical_polarization,
)

__all__ = [
    "StokesVector",
    "PseudoSpin",
    "PhaseSpectrum",
    "per_state_phase",
    "state_phase_table",
    "collective_phase_eq1",
    "faraday_benchmark_phase",
    "apply_birefringence",
    "polarimeter_signal",
    "shot_noise_trace",
    "photon_flux_per_s",
    "snr_eta",
    "projection_noise_snr",
    "FARADAY_PHASE_PER_OD_PER_DETUNING",
]

# Benchmark constant: Faraday phase per unit OD per unit (Delta/Gamma) for a
# stretched-state angular-momentum measurement with Fz/F matched to S3/S.
# External calibration point; the birefringent phase is ~30% of it.
FARADAY_PHASE_PER_OD_PER_DETUNING = 7.0 / 20.0


@dataclass(frozen=True)
class StokesVector:
    """Classical Stokes vector; j0 is the magnitude in photon-flux units."""

    j0: float
    j1: float
    j2: float
    j3: float

    @property
    def degree_of_polarization(self) -> float:
        return math.sqrt(self.j1**2 + self.j2**2 + self.j3**2) / self.j0


@dataclass(frozen=True)
class PseudoSpin:
    """Collective clock pseudo-spin for closed-form expressions (S = N)."""

    s_total: float
    s3: float

    def __post_init__(self):
        if abs(self.s3) > self.s_total * (1 + 1e-12):
            raise ValueError("|S3| must not exceed S")


@dataclass(frozen=True)
class PhaseSpectrum:
    """Per-unit-OD clock-state phase spectra over a detuning grid."""

    detunings_MHz: np.ndarray
    phi_up_rad: np.ndarray
    phi_down_rad: np.ndarray


def per_state_phase(state: GroundState, probe: ProbeConfig,
                    atom: CsD1Constants | None = None, od: float = 1.0) -> float:
    """Birefringent phase (rad) if all atoms occupy ``state``.

    Computed as the difference of the x- and z-polarization dispersive
    phase shifts, summed over both excited hyperfine levels with their
    oscillator strengths; works for any ground sublevel, not just the
    clock states.
    """
    atom = atom or CsD1Constants()
    check_off_resonance(probe.detuning_MHz, atom)
    gi = state_index(state.F, state.mF)
    a = amplitude_tensor()
    exc_x = a[gi] @ spherical_polarization(90.0)  # pure x
    exc_z = a[gi] @ spherical_polarization(0.0)  # pure z (pi)
    dets = excited_detunings_MHz(probe.detuning_MHz, atom)[gi]
    diff = (np.abs(exc_x) ** 2 - np.abs(exc_z) ** 2) / dets
    return float(od / 2.0 * (atom.gamma_MHz / 2.0) * diff.sum())


def state_phase_table(probe: ProbeConfig, atom: CsD1Constants | None = None,
                      od: float = 1.0) -> np.ndarray:
    """per_state_phase for all 16 registry states, as one array."""
    return np.array([
        per_state_phase(st, probe, atom, od) for st in state_registry()
    ])


def collective_phase_eq1(spin: PseudoSpin, od: float,
                         atom: CsD1Constants | None = None) -> float:
    """Closed-form collective phase at the inter-resonance midpoint.

    Valid for a probe tuned exactly halfway between the F=4 -> F'=3,4
    transitions (Delta/Gamma = -128), neglecting the spin-down state.
    """
    atom = atom or CsD1Constants()
    if od <= 0:
        raise ValueError("od must be > 0")
    det_over_gamma = -(atom.excited_hf_splitting_MHz / 2.0) / atom.gamma_MHz
    return (5.0 / 96.0) * (od / det_over_gamma) * (spin.s3 + spin.s_total) / spin.s_total


def faraday_benchmark_phase(od: float, atom: CsD1Constants | None = None) -> float:
    """Benchmark Faraday phase magnitude at matched OD and Delta/Gamma = -128."""
    atom = atom or CsD1Constants()
    det_over_gamma = (atom.excited_hf_splitting_MHz / 2.0) / atom.gamma_MHz
    return FARADAY_PHASE_PER_OD_PER_DETUNING * od / det_over_gamma


def apply_birefringence(stokes: StokesVector, phi: float) -> StokesVector:
    """Rotate the Stokes vector by phi around the 1-axis of the Poincare sphere."""
    c, s = math.cos(phi), math.sin(phi)
    return StokesVector(
        j0=stokes.j0,
        j1=stokes.j1,
        j2=c * stokes.j2 - s * stokes.j3,
        j3=s * stokes.j2 + c * stokes.j3,
    )


def polarimeter_signal(stokes: StokesVector) -> float:
    """Ellipticity component seen by the quarter-wave-plate polarimeter."""
    return stokes.j3


def shot_noise_trace(clean_signal: np.ndarray, photon_flux: float, dt: float,
                     seed: int) -> np.ndarray:
    """Add photon shot noise with phase-equivalent sigma 1/sqrt(2 flux dt)."""
    if photon_flux <= 0 or dt <= 0:
        raise ValueError("photon_flux and dt must be > 0")
    rng = np.random.default_rng(seed)
    sigma = 1.0 / math.sqrt(2.0 * photon_flux * dt)
    return np.asarray(clean_signal, dtype=float) + rng.normal(0.0, sigma, len(clean_signal))


def aperture_factors(cloud: CloudConfig) -> tuple[float, float]:
    """(phase factor, flux factor) for the cloud-matched imaging aperture.

    The imaging system selects only the probe light passing through the
    cloud (aperture radius = cloud 1/e radius).  The detected flux is
    reduced by the Gaussian probe profile across the aperture, and the
    signal-weighted phase is reduced because the Gaussian column density
    falls off across the aperture; both factors follow in closed form.
    """
    a2 = cloud.cloud_radius_mm**2  # aperture radius = cloud radius
    alpha = 1.0 / cloud.cloud_radius_mm**2 + 1.0 / cloud.probe_radius_mm**2
    beta = 1.0 / cloud.probe_radius_mm**2
    flux_factor = -math.expm1(-beta * a2) / (beta * a2)
    phase_factor = (-math.expm1(-alpha * a2) / alpha) / (-math.expm1(-beta * a2) / beta)
    return phase_factor, flux_factor


def photon_flux_per_s(probe: ProbeConfig, atom: CsD1Constants,
                      cloud: CloudConfig, detection_efficiency: float = 1.0) -> float:
    """Detected photon flux through the cloud-matched aperture."""
    irradiance = probe.irradiance_rel * atom.i_sat_W_m2
    area = math.pi * (cloud.cloud_radius_mm * 1e-3) ** 2
    _, flux_factor = aperture_factors(cloud)
    return detection_efficiency * irradiance * area * flux_factor / atom.photon_energy_J


def snr_eta(probe: ProbeConfig, atom: CsD1Constants | None, cloud: CloudConfig,
            tau_d_s: float, detection_efficiency: float = 1.0) -> float:
    """SNR eta for a full-scale (S3 = S) measurement at bandwidth 1/tau_d.

    Uses the signal-weighted phase across the aperture; ``od_resonant`` is
    the peak optical density of the Gaussian cloud.
    """
    atom = atom or CsD1Constants()
    if tau_d_s <= 0:
        raise ValueError("tau_d_s must be > 0")
    up = state_registry()[state_index(4, 0)]
    phi = per_state_phase(up, probe, atom, od=cloud.od_resonant)
    phase_factor, _ = aperture_factors(cloud)
    flux = photon_flux_per_s(probe, atom, cloud, detection_efficiency)
    return abs(phi) * phase_factor * math.sqrt(2.0 * flux * tau_d_s)


def projection_noise_snr(cloud: CloudConfig, probe: ProbeConfig,
                         atom: CsD1Constants | None, tau_d_s: float,
                         n_eff: float | None = None,
                         detection_efficiency: float = 1.0) -> float:
    """SNR for resolving the coherent-state fluctuation sqrt(N) of S3 near 0.

    ``n_eff`` is the effective interrogated atom number; defaults to the
    total atom number.
    """
    n = cloud.atom_number if n_eff is None else n_eff
    eta = snr_eta(probe, atom, cloud, tau_d_s, detection_efficiency)
    return eta / (2.0 * math.sqrt(n))
