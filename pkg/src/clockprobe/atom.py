"""Cs D1 physical model: constants, ground-state indexing, Zeeman Hamiltonian.

All frequencies are carried in MHz and magnetic fields in Gauss.  The
6P1/2 manifold is never represented as dynamical state; it enters only
through detuning denominators and branching ratios.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GroundState",
    "CsD1Constants",
    "CloudConfig",
    "state_registry",
    "excited_registry",
    "state_index",
    "zeeman_hamiltonian",
    "N_GROUND",
    "IDX_DOWN",
    "IDX_UP",
]

N_GROUND = 16


@dataclass(frozen=True)
class GroundState:
    """One 6S1/2 sublevel |F, mF> with F in {3, 4}."""

    F: int
    mF: int

    def __post_init__(self):
        if self.F not in (3, 4):
            raise ValueError(f"ground F must be 3 or 4, got {self.F}")
        if abs(self.mF) > self.F:
            raise ValueError(f"|mF| > F: F = {self.F}, mF = {self.mF}")


def state_registry() -> tuple[GroundState, ...]:
    """The 16 ground sublevels: F=3 block (mF = -3..+3) then F=4 (mF = -4..+4)."""
    return tuple(
        GroundState(F, m) for F in (3, 4) for m in range(-F, F + 1)
    )


def excited_registry() -> tuple[GroundState, ...]:
    """The 16 6P1/2 sublevels in the same F-then-mF ordering."""
    return state_registry()


def state_index(F: int, mF: int) -> int:
    """Index of |F, mF> in the registry (bijection onto 0..15)."""
    st = GroundState(F, mF)  # validates
    if st.F == 3:
        return st.mF + 3
    return 7 + st.mF + 4


IDX_DOWN = state_index(3, 0)  # |3,0>, pseudo-spin down
IDX_UP = state_index(4, 0)  # |4,0>, pseudo-spin up


@dataclass(frozen=True)
class CsD1Constants:
    """Cs D1 line constants.

    ``excited_hf_splitting_MHz`` and ``gamma_MHz`` are locked together by
    the ratio 1168 MHz = 256 Gamma.  ``i_sat_W_m2`` is the isotropic-
    convention D1 saturation irradiance (2.5 mW/cm^2); outputs that would
    depend on it are either ratios or recalibrated, so the convention
    cancels wherever possible.
    """

    gamma_MHz: float = 1168.0 / 256.0  # 4.5625
    excited_hf_splitting_MHz: float = 1168.0
    ground_hf_splitting_MHz: float = 9192.631770
    i_sat_W_m2: float = 25.0  # 2.5 mW/cm^2
    gF_upper: float = 0.25  # F = 4
    gF_lower: float = -0.25  # F = 3
    zeeman_MHz_per_G: float = 1.399624  # Bohr magneton / h
    wavelength_nm: float = 894.6

    def __post_init__(self):
        ratio = self.excited_hf_splitting_MHz / self.gamma_MHz
        if abs(ratio - 256.0) > 1e-9:
            raise ValueError(
                "excited_hf_splitting_MHz / gamma_MHz must equal 256 "
                f"(got {ratio})"
            )

    def g_factor(self, F: int) -> float:
        return self.gF_upper if F == 4 else self.gF_lower

    @property
    def photon_energy_J(self) -> float:
        h = 6.62607015e-34
        c = 2.99792458e8
        return h * c / (self.wavelength_nm * 1e-9)


@dataclass(frozen=True)
class CloudConfig:
    """Atom cloud and probe beam geometry."""

    atom_number: float = 3.5e6
    cloud_radius_mm: float = 0.25  # 1/e
    od_resonant: float = 1.8
    probe_radius_mm: float = 1.2  # 1/e
    bias_field_G: float = 0.5

    def __post_init__(self):
        for name in ("atom_number", "cloud_radius_mm", "od_resonant", "probe_radius_mm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.bias_field_G < 0:
            raise ValueError("bias_field_G must be >= 0")
        if self.probe_radius_mm <= self.cloud_radius_mm:
            warnings.warn(
                "probe 1/e radius does not exceed the cloud radius; the "
                "light-shift homogeneity assumption is broken",
                stacklevel=2,
            )


def zeeman_hamiltonian(bias_field_G: float, atom: CsD1Constants | None = None) -> np.ndarray:
    """Linear Zeeman Hamiltonian (16x16, MHz), diagonal in the registry basis.

    Entries are gF * mF * (muB/h) * B; gF has opposite signs for the two
    ground manifolds.  The quadratic (Breit-Rabi) term is negligible at
    the sub-Gauss fields considered here and is not included.
    """
    if bias_field_G < 0:
        raise ValueError("bias field must be >= 0")
    atom = atom or CsD1Constants()
    diag = np.array(
        [
            atom.g_factor(st.F) * st.mF * atom.zeeman_MHz_per_G * bias_field_G
            for st in state_registry()
        ]
    )
    return np.diag(diag)
