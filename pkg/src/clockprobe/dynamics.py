"""Lindblad master equation for the 16-level ground manifold.

The Hamiltonian is built in the frame rotating at the microwave drive
frequency; the Liouvillian is then time independent and the evolution uses
the exact exponential propagator at a fixed output step, so trace and
positivity are preserved to machine precision and halving the step leaves
every observable unchanged.

Internal units: time in ms, Hamiltonian entries in MHz, rates in 1/ms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from .atom import (
    CloudConfig,
    CsD1Constants,
    IDX_DOWN,
    IDX_UP,
    N_GROUND,
    state_index,
    state_registry,
    zeeman_hamiltonian,
)
from .errors import FitFailureError
from .lightshift import (
    ProbeConfig,
    amplitude_tensor,
    build_light_shift,
    check_off_resonance,
    excited_detunings_MHz,
    spherical_polarization,
)

__all__ = [
    "DensityMatrix",
    "MicrowaveConfig",
    "SimRecord",
    "RunSetup",
    "pumping_jump_operators",
    "scattering_rate_per_ms",
    "build_hamiltonian",
    "evolve",
    "run_simulation",
    "rabi_frequency",
    "pure_state",
    "clock_mixture",
]

_QS = (-1, 0, 1)


@dataclass
class DensityMatrix:
    """Ground-manifold state plus the lost-population reservoir."""

    rho: np.ndarray
    lost_population: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.shape != (N_GROUND, N_GROUND):
            raise ValueError("rho must be 16x16")
        total = float(np.trace(self.rho).real) + self.lost_population
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"trace + lost_population = {total} != 1")

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()


def pure_state(F: int, mF: int) -> DensityMatrix:
    rho = np.zeros((N_GROUND, N_GROUND), dtype=complex)
    rho[state_index(F, mF), state_index(F, mF)] = 1.0
    return DensityMatrix(rho)


def clock_mixture(p_up: float = 0.5) -> DensityMatrix:
    rho = np.zeros((N_GROUND, N_GROUND), dtype=complex)
    rho[IDX_UP, IDX_UP] = p_up
    rho[IDX_DOWN, IDX_DOWN] = 1.0 - p_up
    return DensityMatrix(rho)


@dataclass(frozen=True)
class MicrowaveConfig:
    """Microwave drive on the Delta m = 0 magnetic-dipole transitions."""

    rabi_kHz: float = 2.0  # clock-pair Rabi frequency chi
    detuning_kHz: float = 0.0  # drive minus unshifted clock frequency
    inhomogeneity_frac: float = 0.0  # rms fractional irradiance spread

    def __post_init__(self):
        if self.rabi_kHz < 0 or self.inhomogeneity_frac < 0:
            raise ValueError("rabi_kHz and inhomogeneity_frac must be >= 0")


@dataclass(frozen=True)
class SimRecord:
    """Time series output of one evolution (times in ms)."""

    times_ms: np.ndarray
    signal_rad: np.ndarray
    s3: np.ndarray
    populations: np.ndarray  # (n_t, 16)
    lost: np.ndarray

    def __post_init__(self):
        n = len(self.times_ms)
        for name in ("signal_rad", "s3", "lost"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length mismatch")
        if self.populations.shape != (n, N_GROUND):
            raise ValueError("populations shape mismatch")
        if np.any(np.diff(self.times_ms) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def pop_F3(self) -> np.ndarray:
        return self.populations[:, :7].sum(axis=1)

    @property
    def pop_F4(self) -> np.ndarray:
        return self.populations[:, 7:].sum(axis=1)

    def csv_rows(self):
        """Rows (time_s, signal_rad, s3, pop_F3, pop_F4, lost)."""
        for i, t in enumerate(self.times_ms):
            yield (t * 1e-3, self.signal_rad[i], self.s3[i],
                   self.pop_F3[i], self.pop_F4[i], self.lost[i])


def pumping_jump_operators(probe: ProbeConfig, atom: CsD1Constants | None = None,
                           total_rate_per_ms: float | None = None,
                           reference_rho: np.ndarray | None = None):
    """Adiabatic-elimination jump operators, one per emitted polarization q.

    Returns a list of (operator, rate_per_ms) pairs; the Lindblad term for
    each is rate * D[A_q].  When ``total_rate_per_ms`` is given, the
    common rate is rescaled so that the total photon scattering rate for
    ``reference_rho`` (default: equal clock-state mixture) matches it
    exactly; otherwise rates follow I/Delta^2 from the configured
    irradiance.
    """
    atom = atom or CsD1Constants()
    check_off_resonance(probe.detuning_MHz, atom)
    a = amplitude_tensor()
    eps = spherical_polarization(probe.polarization_angle_deg)
    dets = excited_detunings_MHz(probe.detuning_MHz, atom)
    # excitation amplitude weighted by Gamma/Delta (dimensionless)
    exc = (a @ eps) * (atom.gamma_MHz / dets)
    # A_q[g', g]: excite g through every e, decay to g' emitting polarization q
    ops = [a[:, :, qi] @ exc.T for qi in range(3)]
    # natural two-level scale: R = gamma * s * (Gamma/Delta)^2 / 8
    gamma_per_ms = 2.0 * math.pi * atom.gamma_MHz * 1e3
    rate = gamma_per_ms * probe.irradiance_rel / 8.0
    if total_rate_per_ms is not None:
        if reference_rho is None:
            reference_rho = clock_mixture(0.5).rho
        r_ref = sum(
            float(np.trace(op.conj().T @ op @ reference_rho).real) for op in ops
        ) * rate
        rate *= total_rate_per_ms / r_ref
    return [(op, rate) for op in ops]


def scattering_rate_per_ms(jumps, rho: np.ndarray) -> float:
    """Total photon scattering rate of ``rho`` under the given jump list."""
    return sum(
        r * float(np.trace(op.conj().T @ op @ rho).real) for op, r in jumps
    )


def microwave_coupling_matrix() -> np.ndarray:
    """Relative Delta m = 0 magnetic-dipole elements, 1 on the clock pair.

    <4,m|Sz|3,m> is proportional to sqrt((I+1/2)^2 - m^2); dividing by the
    m = 0 value makes the clock-pair element unity.
    """
    c = np.zeros((N_GROUND, N_GROUND))
    for m in range(-3, 4):
        r = math.sqrt(16 - m * m) / 4.0
        i3, i4 = state_index(3, m), state_index(4, m)
        c[i3, i4] = c[i4, i3] = r
    return c


def build_hamiltonian(probe: ProbeConfig | None, mw: MicrowaveConfig | None,
                      bias_field_G: float, atom: CsD1Constants | None = None,
                      mw_scale: float = 1.0) -> np.ndarray:
    """Rotating-frame Hamiltonian (16x16, MHz).

    Zeeman + probe light shift + microwave coupling in the rotating-wave
    approximation.  All Delta m = 0 pairs are coupled with their relative
    matrix elements, so Zeeman-detuned spectator transitions are
    represented rather than assumed away.
    """
    atom = atom or CsD1Constants()
    h = zeeman_hamiltonian(bias_field_G, atom).astype(complex)
    if probe is not None:
        h += build_light_shift(probe, atom).total
    if mw is not None:
        chi_MHz = mw.rabi_kHz * mw_scale * 1e-3
        det_MHz = mw.detuning_kHz * 1e-3
        h += 0.5 * chi_MHz * microwave_coupling_matrix()
        for i in range(7, 16):  # F = 4 block sits at -(drive detuning)
            h[i, i] -= det_MHz
    return h


def _liouvillian(h: np.ndarray, jumps, extra_loss_per_ms: float) -> np.ndarray:
    eye = np.eye(N_GROUND)
    omega = 2.0 * math.pi * 1e3 * h  # MHz -> rad/ms
    lv = -1j * (np.kron(omega, eye) - np.kron(eye, omega.T))
    for op, rate in jumps:
        opd = op.conj().T @ op
        lv += rate * (
            np.kron(op, op.conj())
            - 0.5 * (np.kron(opd, eye) + np.kron(eye, opd.T))
        )
    if extra_loss_per_ms:
        p = np.zeros((N_GROUND, N_GROUND))
        p[IDX_UP, IDX_UP] = p[IDX_DOWN, IDX_DOWN] = 1.0
        lv += -0.5 * extra_loss_per_ms * (np.kron(p, eye) + np.kron(eye, p.T))
    return lv


def evolve(rho0: DensityMatrix, hamiltonian: np.ndarray, jumps,
           extra_loss_per_ms: float, t_span_ms: float, dt_ms: float,
           state_phases: np.ndarray | None = None,
           check_invariants: bool = True) -> SimRecord:
    """Propagate the master equation and synthesize the polarimeter record.

    The Liouvillian is constant, so each output step applies the exact
    matrix exponential exp(L dt) once computed.  ``state_phases`` gives
    the per-state birefringent phase used for the signal; extrinsic loss
    drains the clock states uniformly into the lost-population reservoir.
    """
    if dt_ms <= 0 or t_span_ms <= 0:
        raise ValueError("t_span_ms and dt_ms must be > 0")
    lv = _liouvillian(hamiltonian, jumps, extra_loss_per_ms)
    prop = expm(lv * dt_ms)
    n_steps = int(round(t_span_ms / dt_ms))
    times = np.arange(n_steps + 1) * dt_ms
    if state_phases is None:
        state_phases = np.zeros(N_GROUND)

    vec = rho0.rho.reshape(-1).copy()
    initial_total = float(np.trace(rho0.rho).real) + rho0.lost_population
    pops = np.empty((n_steps + 1, N_GROUND))
    lost = np.empty(n_steps + 1)
    for i in range(n_steps + 1):
        rho = vec.reshape(N_GROUND, N_GROUND)
        p = np.real(np.diag(rho))
        pops[i] = p
        lost[i] = initial_total - float(np.trace(rho).real)
        if check_invariants:
            herm = np.abs(rho - rho.conj().T).max()
            if herm > 1e-10:
                raise RuntimeError(f"hermiticity violated at t = {times[i]:g} ms: {herm:g}")
            w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
            if w.min() < -1e-9:
                raise RuntimeError(
                    f"positivity violated at t = {times[i]:g} ms: min eig {w.min():g}"
                )
        if i < n_steps:
            vec = prop @ vec

    signal = pops @ state_phases
    s3 = pops[:, IDX_UP] - pops[:, IDX_DOWN]
    return SimRecord(times_ms=times, signal_rad=signal, s3=s3,
                     populations=pops, lost=lost)


@dataclass(frozen=True)
class RunSetup:
    """Everything needed for one master-equation run."""

    probe: ProbeConfig
    microwave: MicrowaveConfig = MicrowaveConfig()
    cloud: CloudConfig = CloudConfig()
    atom: CsD1Constants = CsD1Constants()
    extra_loss_per_ms: float = 0.0
    scattering_rate_per_ms: float | None = None  # calibrated when set
    pumping_on: bool = True
    initial: DensityMatrix | None = None  # default |3,0>
    t_span_ms: float = 3.0
    dt_ms: float = 0.005


def run_simulation(setup: RunSetup, probe_scale: float = 1.0,
                   mw_scale: float = 1.0) -> SimRecord:
    """Build Hamiltonian, jumps and signal phases for ``setup`` and evolve.

    ``probe_scale`` multiplies the probe irradiance (moving both the light
    shift and the pumping rates); ``mw_scale`` multiplies the microwave
    Rabi frequency.  Used by the ensemble-averaging layer.
    """
    from .birefringence import state_phase_table

    probe = setup.probe
    if probe_scale != 1.0:
        probe = replace(probe, irradiance_rel=probe.irradiance_rel * probe_scale)
    atom = setup.atom
    h = build_hamiltonian(probe, setup.microwave, setup.cloud.bias_field_G,
                          atom, mw_scale=mw_scale)
    if setup.pumping_on:
        target = None
        if setup.scattering_rate_per_ms is not None:
            target = setup.scattering_rate_per_ms * probe_scale
        jumps = pumping_jump_operators(probe, atom, total_rate_per_ms=target)
    else:
        jumps = []
    phases = state_phase_table(probe, atom, od=setup.cloud.od_resonant)
    rho0 = setup.initial if setup.initial is not None else pure_state(3, 0)
    return evolve(rho0, h, jumps, setup.extra_loss_per_ms,
                  setup.t_span_ms, setup.dt_ms, state_phases=phases)


def rabi_frequency(record: SimRecord, use_signal: bool = False,
                   freq_hint_kHz: float | None = None) -> float:
    """Dominant oscillation frequency (kHz) of the record.

    Least-squares fit of a decaying sinusoid on s3 (or the polarimeter
    signal); raises :class:`FitFailureError` when the oscillation
    amplitude is below 5x the fit residual.
    """
    from .fitting import fit_decaying_sinusoid

    y = record.signal_rad if use_signal else record.s3
    fit = fit_decaying_sinusoid(record.times_ms, y, freq_hint_kHz=freq_hint_kHz)
    return fit.freq_kHz
