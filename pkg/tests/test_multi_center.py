"""Multi-center solver: assembly, symmetries, intrinsic modes, patch oracle."""

import math

import numpy as np
import pytest
import scipy.optimize

from dirac_lattice import (
    Frequency,
    SingularSystemError,
    ValidationError,
    assemble,
    detect_intrinsic_modes,
    field_at,
    make_incident_wave,
    solve,
)
from dirac_lattice.multi_center import smallest_singular_value
from dirac_lattice.plane_lattice import f0_bloch
from dirac_lattice.single_center import ExtensionParameter, scattering_amplitude_sae


def _patch(L, a=1.0):
    n = (L - 1) // 2
    g = np.arange(-n, n + 1) * a
    X, Y = np.meshgrid(g, g)
    return np.column_stack([X.ravel(), Y.ravel(), np.zeros(L * L)])


class TestAssemble:
    def test_single_center_degenerate(self):
        om = Frequency(0.7 + 0.1j)
        k = make_incident_wave(om, (0.0, 0.0))
        sysm = assemble([[0.0, 0.0, 0.0]], ExtensionParameter(0.5), om, k)
        assert sysm.matrix.shape == (1, 1)
        assert sysm.matrix[0, 0] == pytest.approx(0.5 - 1j * om.omega)
        assert sysm.rhs[0] == pytest.approx(1.0)

    def test_two_center_symmetry(self):
        om = Frequency(0.9)
        k = make_incident_wave(om, (0.1, 0.0))
        d = 1.4
        sysm = assemble([[0, 0, 0], [d, 0, 0]], ExtensionParameter(0.3), om, k)
        kern = -np.exp(1j * om.omega * d) / d
        assert sysm.matrix[0, 1] == pytest.approx(kern)
        assert sysm.matrix[1, 0] == pytest.approx(kern)

    def test_three_collinear_hand_values(self):
        om = Frequency(1.0)
        k = make_incident_wave(om, (0.0, 0.0))
        alpha = ExtensionParameter(0.4)
        sysm = assemble([[0, 0, 0], [1, 0, 0], [2, 0, 0]], alpha, om, k)
        k1 = -np.exp(1j) / 1.0
        k2 = -np.exp(2j) / 2.0
        expected = np.array(
            [
                [0.4 - 1j, k1, k2],
                [k1, 0.4 - 1j, k1],
                [k2, k1, 0.4 - 1j],
            ]
        )
        assert np.allclose(sysm.matrix, expected, atol=1e-14)

    def test_matrix_symmetric_not_hermitian(self, rng):
        om = Frequency(0.8 + 0.2j)
        k = make_incident_wave(om, (0.2, -0.1))
        pts = rng.normal(size=(12, 3))
        sysm = assemble(pts, ExtensionParameter(-0.5), om, k)
        assert np.allclose(sysm.matrix, sysm.matrix.T, atol=1e-15)
        assert not np.allclose(sysm.matrix, sysm.matrix.conj().T, atol=1e-8)

    def test_duplicate_centers_rejected(self):
        om = Frequency(1.0)
        k = make_incident_wave(om, (0.0, 0.0))
        with pytest.raises(ValidationError):
            assemble([[0, 0, 0], [0, 0, 0]], ExtensionParameter(1.0), om, k)

    def test_size_cap_overridable(self):
        om = Frequency(1.0)
        k = make_incident_wave(om, (0.0, 0.0))
        pts = np.column_stack([np.arange(5.0), np.zeros(5), np.zeros(5)])
        with pytest.raises(ValidationError):
            assemble(pts, ExtensionParameter(1.0), om, k, max_centers=4)
        assemble(pts, ExtensionParameter(1.0), om, k, max_centers=5)


class TestSolve:
    def test_single_center_reduces_to_sae(self):
        om = Frequency(0.7 + 0.1j)
        k = make_incident_wave(om, (0.0, 0.0))
        alpha = ExtensionParameter(0.5)
        sol = solve(assemble([[0, 0, 0]], alpha, om, k))
        assert sol.f[0] == pytest.approx(scattering_amplitude_sae(alpha, om))

    def test_mirror_symmetry(self):
        om = Frequency(1.1)
        k = make_incident_wave(om, (0.0, 0.0))
        sol = solve(
            assemble([[0.7, 0, 0], [-0.7, 0, 0]], ExtensionParameter(0.4), om, k)
        )
        assert abs(sol.f[0] - sol.f[1]) < 1e-12

    def test_residual_reported(self):
        om = Frequency(0.9 + 0.3j)
        k = make_incident_wave(om, (0.1, 0.2))
        sol = solve(assemble(_patch(5), ExtensionParameter(-1.0), om, k))
        assert sol.residual_norm < 1e-10

    def test_translation_covariance(self, rng):
        om = Frequency(0.8 + 0.1j)
        k = make_incident_wave(om, (0.3, -0.2))
        pts = rng.normal(size=(9, 3))
        alpha = ExtensionParameter(0.9)
        d = np.array([0.37, -1.2, 0.55])
        sol0 = solve(assemble(pts, alpha, om, k))
        sol1 = solve(assemble(pts + d, alpha, om, k))
        phase = np.exp(1j * k.dot3(d))
        assert np.allclose(sol1.f, sol0.f * phase, rtol=1e-12)
        x = np.array([0.5, 0.4, 1.3])
        f0 = field_at(pts, sol0, x, k, om)
        f1 = field_at(pts + d, sol1, x + d, k, om)
        assert f1 == pytest.approx(f0 * phase, rel=1e-12)

    def test_patch_converges_to_bloch(self):
        # oracle for the Bloch reduction: central amplitude of an L x L
        # patch approaches f0 monotonically (alpha chosen away from the
        # lattice guided-mode resonances, where edges would contaminate)
        om = Frequency(0.6 + 0.1j)
        k = make_incident_wave(om, (0.0, 0.0))
        alpha = ExtensionParameter(-2.0)
        f0 = f0_bloch(alpha, om, k, 1.0)
        errs = []
        for L in (11, 21, 41):
            sol = solve(assemble(_patch(L), alpha, om, k))
            ic = int(np.argmin(np.abs(_patch(L)).sum(axis=1)))
            errs.append(abs(sol.f[ic] - f0) / abs(f0))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 0.01


class TestField:
    def test_zero_amplitudes_plane_wave(self):
        om = Frequency(1.0)
        k = make_incident_wave(om, (0.2, 0.0))
        pts = np.array([[0.0, 0.0, 0.0]])
        sol = solve(assemble(pts, ExtensionParameter(1e9), om, k))
        x = (0.3, 0.4, 0.8)
        assert field_at(pts, sol, x, k, om) == pytest.approx(
            np.exp(1j * k.dot3(x)), abs=1e-8
        )

    def test_far_field_phase_sum(self):
        # |x| -> inf: (|x|/e^{i w |x|}) (field - incident) approaches the
        # lattice-factor sum over centers
        om = Frequency(1.0)
        k = make_incident_wave(om, (0.2, 0.1))
        pts = _patch(3)
        alpha = ExtensionParameter(0.8)
        sol = solve(assemble(pts, alpha, om, k))
        xhat = np.array([0.3, 0.2, 0.933])
        xhat = xhat / np.linalg.norm(xhat)
        x = 1e4 * xhat
        w = om.omega
        got = (
            (field_at(pts, sol, x, k, om) - np.exp(1j * k.dot3(x)))
            * np.linalg.norm(x)
            / np.exp(1j * w * np.linalg.norm(x))
        )
        # the solved f_n already carry the incident phases e^{i k.a_n}
        expected = np.sum(sol.f * np.exp(-1j * w * (pts @ xhat)))
        assert abs(got - expected) < 1e-3

    def test_rejects_center_collision(self):
        om = Frequency(1.0)
        k = make_incident_wave(om, (0.0, 0.0))
        pts = np.array([[0.0, 0.0, 0.0]])
        sol = solve(assemble(pts, ExtensionParameter(1.0), om, k))
        with pytest.raises(ValidationError):
            field_at(pts, sol, (0.0, 0.0, 0.0), k, om)


class TestIntrinsicModes:
    def test_single_center_pole(self):
        alpha = ExtensionParameter(-1.0)
        scan = [1j * v for v in np.linspace(0.5, 1.5, 41)]
        out = detect_intrinsic_modes([[0, 0, 0]], alpha, scan)
        ws = np.array([w for w, _ in out])
        sig = np.array([s for _, s in out])
        assert ws[np.argmin(sig)] == pytest.approx(1j, abs=0.03)

    def test_two_center_split_levels(self):
        # kappa +/- solve kappa + alpha_SE = +/- e^{-kappa d}/d; oracle by
        # 1D root finding on the symmetric/antisymmetric factors
        alpha, d = -1.0, 2.0

        def sym(kap):
            return kap + alpha - math.exp(-kap * d) / d

        def asym(kap):
            return kap + alpha + math.exp(-kap * d) / d

        k_sym = scipy.optimize.brentq(sym, 0.5, 1.5)
        k_asym = scipy.optimize.brentq(asym, 0.5, 1.5)
        pts = [[0, 0, 0], [d, 0, 0]]
        for kap in (k_sym, k_asym):
            sig = smallest_singular_value(pts, ExtensionParameter(alpha), Frequency(1j * kap))
            assert sig < 1e-10

    def test_no_modes_for_positive_alpha(self):
        alpha = ExtensionParameter(1.0)
        scan = [1j * v for v in np.linspace(0.1, 3.0, 25)]
        out = detect_intrinsic_modes([[0, 0, 0], [1.5, 0, 0]], alpha, scan)
        assert min(s for _, s in out) > 0.3

    def test_near_singular_solve_refused(self):
        alpha = ExtensionParameter(-1.0)
        om = Frequency(1e-9 + 1j)  # at the single-center pole
        k = make_incident_wave(om, (0.0, 0.0))
        with pytest.raises(SingularSystemError) as exc:
            solve(assemble([[0, 0, 0]], alpha, om, k))
        assert exc.value.condition_estimate > 1e8
