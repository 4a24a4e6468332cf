"""Light-shift operator, decomposition, magic frequencies, two-color balance."""

import math

import numpy as np
import pytest

from clockprobe.angular import dipole_element
from clockprobe.atom import CsD1Constants, IDX_DOWN, IDX_UP, state_registry
from clockprobe.errors import NoBalanceError, ResonanceProximityError
from clockprobe.lightshift import (
    ProbeConfig,
    build_light_shift,
    circular_polarization,
    differential_clock_shift,
    dressed_clock_shift,
    find_magic_detunings,
    resonance_positions_MHz,
    spherical_polarization,
    tensor_fz2_check,
    two_color_balance,
)

ATOM = CsD1Constants()


def oracle_level_shift(state, detuning_MHz, irradiance_rel, theta_deg):
    """Independent second-order perturbation sum over all dipole paths."""
    th = math.radians(theta_deg)
    eps = {-1: math.sin(th) / math.sqrt(2.0), 0: math.cos(th),
           1: -math.sin(th) / math.sqrt(2.0)}
    res = resonance_positions_MHz(ATOM)
    total = 0.0
    for eF in (3, 4):
        delta = detuning_MHz - res[f"F={state.F} -> F'={eF}"]
        amp = 0.0
        for q in (-1, 0, 1):
            mE = state.mF + q
            if abs(mE) > eF:
                continue
            amp += (eps[q] * dipole_element(state.F, state.mF, eF, mE, q).amplitude) ** 2
        total += ATOM.gamma_MHz**2 / 8.0 * irradiance_rel * amp / delta
    return total


class TestOperator:
    def test_diagonal_matches_perturbation_oracle(self):
        rng = np.random.default_rng(7)
        reg = state_registry()
        grid = np.concatenate([
            np.linspace(-1100, -60, 100),
            np.linspace(150, 7500, 100),
        ])
        for det in grid:
            theta = float(rng.uniform(0, 180))
            v = build_light_shift(ProbeConfig(float(det), 5.0, theta), ATOM).total
            for idx in (IDX_UP, IDX_DOWN, 0, 9):
                expected = oracle_level_shift(reg[idx], float(det), 5.0, theta)
                assert v[idx, idx].real == pytest.approx(expected, abs=1e-9)

    def test_hermitian_and_block_diagonal(self):
        v = build_light_shift(ProbeConfig(-300.0, 10.0, 30.0), ATOM).total
        assert np.abs(v - v.conj().T).max() < 1e-15
        assert np.abs(v[:7, 7:]).max() == 0.0

    def test_resonance_proximity_raises(self):
        with pytest.raises(ResonanceProximityError):
            build_light_shift(ProbeConfig(-1168.1, 1.0, 45.0), ATOM)
        with pytest.raises(ResonanceProximityError):
            build_light_shift(ProbeConfig(0.3, 1.0, 45.0), ATOM)

    def test_asymptotic_inverse_detuning(self):
        # far red of all resonances every element falls off as 1/|detuning|
        v1 = build_light_shift(ProbeConfig(-4.0e5, 1.0, 45.0), ATOM).total
        v2 = build_light_shift(ProbeConfig(-8.0e5, 1.0, 45.0), ATOM).total
        ratio = v1[IDX_UP, IDX_UP].real / v2[IDX_UP, IDX_UP].real
        assert ratio == pytest.approx(2.0, rel=5e-3)


class TestDecomposition:
    def test_completeness_for_100_random_probes(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            det = float(rng.uniform(-1100, -60))
            s = float(rng.uniform(0.5, 40))
            theta = float(rng.uniform(0, 180))
            op = build_light_shift(ProbeConfig(det, s, theta), ATOM)
            recon = op.scalar_part + op.vector_part + op.tensor_part
            scale = np.abs(op.total).max()
            assert np.abs(op.total - recon).max() <= 1e-12 * scale

    def test_vector_part_vanishes_for_linear_polarization(self):
        # xi1 is an atomic coefficient and stays finite; the operator's
        # vector part carries the ellipticity factor and must vanish
        for theta in (0.0, 30.0, 45.0, 90.0, 120.0):
            op = build_light_shift(ProbeConfig(-400.0, 16.0, theta), ATOM)
            assert np.abs(op.vector_part).max() < 1e-12
            assert abs(op.xi1_MHz) > 0

    def test_vector_part_nonzero_for_circular(self):
        op = build_light_shift(ProbeConfig(-400.0, 16.0, 45.0), ATOM,
                               polarization=circular_polarization(+1))
        assert np.abs(op.vector_part).max() > 1e-6
        assert abs(op.xi1_MHz) > 1e-8

    def test_vector_part_flips_with_handedness(self):
        op_p = build_light_shift(ProbeConfig(-400.0, 16.0, 45.0), ATOM,
                                 polarization=circular_polarization(+1))
        op_m = build_light_shift(ProbeConfig(-400.0, 16.0, 45.0), ATOM,
                                 polarization=circular_polarization(-1))
        assert np.abs(op_p.vector_part + op_m.vector_part).max() < 1e-12

    def test_scalar_part_is_identity_per_block(self):
        op = build_light_shift(ProbeConfig(-300.0, 8.0, 60.0), ATOM)
        for blk in (slice(0, 7), slice(7, 16)):
            s = op.scalar_part[blk, blk]
            assert np.allclose(s, s[0, 0] * np.eye(s.shape[0]))


class TestMagicDetunings:
    def test_single_root_near_minus_335(self):
        points = find_magic_detunings(45.0, (-1168.0, 0.0), ATOM)
        assert len(points) == 1
        p = points[0]
        assert p.detuning_MHz == pytest.approx(-335.0, abs=5.0)
        assert abs(p.residual_dU_kHz) < 1e-3  # below 1 Hz

    def test_sign_change_across_root(self):
        p = find_magic_detunings(45.0, (-1100.0, -50.0), ATOM)[0]
        lo = differential_clock_shift(ProbeConfig(p.detuning_MHz - 0.1, 1.0, 45.0), ATOM)
        hi = differential_clock_shift(ProbeConfig(p.detuning_MHz + 0.1, 1.0, 45.0), ATOM)
        assert lo * hi < 0

    def test_root_independent_of_irradiance(self):
        p1 = find_magic_detunings(45.0, (-1100.0, -50.0), ATOM, irradiance_rel=1.0)[0]
        p2 = find_magic_detunings(45.0, (-1100.0, -50.0), ATOM, irradiance_rel=30.0)[0]
        assert p1.detuning_MHz == pytest.approx(p2.detuning_MHz, abs=1e-3)

    def test_differential_shift_monotone_in_window(self):
        # the differential shift decreases monotonically between the F=4
        # resonances, so the window can hold at most one zero crossing
        grid = np.linspace(-1140.0, -30.0, 300)
        du = [differential_clock_shift(ProbeConfig(float(d), 1.0, 45.0), ATOM)
              for d in grid]
        assert np.all(np.diff(du) < 0)

    def test_no_root_for_pure_pi_polarization(self):
        assert find_magic_detunings(0.0, (-1100.0, -50.0), ATOM) == []

    def test_upper_window_has_root(self):
        points = find_magic_detunings(45.0, (8100.0, 9100.0), ATOM)
        assert len(points) == 1

    def test_window_containing_resonance_rejected(self):
        with pytest.raises(ValueError):
            find_magic_detunings(45.0, (-200.0, 200.0), ATOM)


class TestDressedShift:
    def test_agrees_with_diagonal_far_from_resonance(self):
        probe = ProbeConfig(-600.0, 16.0, 45.0)
        diag = differential_clock_shift(probe, ATOM)
        dressed = dressed_clock_shift(probe, ATOM, bias_field_G=0.5)
        assert dressed == pytest.approx(diag, rel=0.02)

    def test_repulsion_grows_toward_resonance(self):
        near = ProbeConfig(-100.0, 16.0, 45.0)
        far = ProbeConfig(-600.0, 16.0, 45.0)

        def rel_gap(probe):
            d = differential_clock_shift(probe, ATOM)
            return abs(dressed_clock_shift(probe, ATOM, 0.5) - d) / abs(d)

        assert rel_gap(near) > rel_gap(far)


class TestTensorDecoupling:
    def test_bias_field_suppresses_clock_coupling(self):
        probe = ProbeConfig(-335.0, 16.0, 45.0)
        with_field = tensor_fz2_check(probe, ATOM, bias_field_G=0.5)
        without = tensor_fz2_check(probe, ATOM, bias_field_G=0.0)
        assert without > 0
        assert with_field < without / 100

    def test_pure_pi_has_no_residual_coupling(self):
        # theta = 0 drives only q = 0, which cannot connect m = 0 to m != 0
        probe = ProbeConfig(-335.0, 16.0, 0.0)
        assert tensor_fz2_check(probe, ATOM, bias_field_G=0.0) < 1e-15


class TestTwoColor:
    def test_balanced_operating_point(self):
        sol = two_color_balance((8100.0, 9100.0), (-1100.0, -50.0), 45.0, ATOM)
        assert sol.phase_34_rad * sol.phase_44_rad < 0
        assert sol.power_ratio_34_over_44 > 0
        # equal clock mixture (S3 = 0) gives zero collective phase
        assert abs(sol.total_phase(0.5, 0.5, od=1.0)) < 1e-6

    def test_signal_remains_for_polarized_spin(self):
        sol = two_color_balance((8100.0, 9100.0), (-1100.0, -50.0), 45.0, ATOM)
        assert abs(sol.total_phase(1.0, 0.0, od=1.0)) > 1e-5

    def test_same_window_twice_raises(self):
        with pytest.raises(NoBalanceError):
            two_color_balance((-1100.0, -600.0), (-500.0, -50.0), 45.0, ATOM)
