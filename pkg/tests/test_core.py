import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_lattice import (
    Frequency,
    LatticeConfig,
    Mode,
    ModeKind,
    ValidationError,
    WaveVector,
    make_incident_wave,
)


def test_normal_incidence():
    k = make_incident_wave(Frequency(1.0), (0.0, 0.0))
    assert k.k3 == pytest.approx(1.0)


def test_three_four_five():
    k = make_incident_wave(Frequency(1.0), (0.6, 0.0))
    assert k.k3 == pytest.approx(0.8)


def test_complex_omega_branch():
    om = Frequency(1.0 + 0.1j)
    k = make_incident_wave(om, (0.5, 0.0))
    # principal sqrt, checked by squaring back
    assert k.k3**2 + 0.25 == pytest.approx(om.omega**2, rel=1e-14)
    assert k.k3.imag > 0.0


def test_evanescent_incidence_rejected():
    with pytest.raises(ValidationError):
        make_incident_wave(Frequency(1.0), (1.2, 0.0))


def test_negative_imag_omega_rejected():
    with pytest.raises(ValidationError):
        Frequency(1.0 - 0.2j)


def test_xi_accessor():
    assert Frequency(2.0 + 0.5j).xi == pytest.approx(0.5 - 2.0j)


@settings(max_examples=200, deadline=None)
@given(
    wr=st.floats(0.05, 20.0),
    wi=st.floats(0.0, 5.0),
    kx=st.floats(-3.0, 3.0),
    ky=st.floats(-3.0, 3.0),
)
def test_onshell_and_branch_properties(wr, wi, kx, ky):
    om = Frequency(wr + 1j * wi)
    if wi == 0.0 and kx * kx + ky * ky > wr * wr:
        return
    k = make_incident_wave(om, (kx, ky))
    assert abs(k.k_par_sq + k.k3**2 - om.omega**2) < 1e-12 * max(abs(om.omega) ** 2, 1.0)
    assert k.k3.imag >= -1e-15


def test_lattice_config():
    cfg = LatticeConfig(0.5)
    assert cfg.rho * cfg.a**2 == pytest.approx(1.0)
    assert LatticeConfig.from_density(4.0).a == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        LatticeConfig(0.0)


def test_mode_prefactors():
    w = 1.3
    assert Mode(ModeKind.SCALAR).planewave_prefactor(w, 0.3) == 1.0
    assert Mode(ModeKind.TE, 0.2).planewave_prefactor(w, 0.3) == pytest.approx(
        -4 * np.pi * w * w
    )
    assert Mode(ModeKind.TM, 0.2).planewave_prefactor(w, 0.3) == pytest.approx(
        -4 * np.pi * (w * w - 0.3)
    )
    assert Mode(ModeKind.P, 0.2).planewave_prefactor(w, 0.3) == pytest.approx(
        -4 * np.pi * 0.3
    )


def test_zero_coupling_rejected():
    with pytest.raises(ValidationError):
        Mode(ModeKind.TE, 0.0)
    Mode(ModeKind.TE, 0.0, strong_coupling=True)  # allowed with the flag


def test_wavevector_dot():
    k = WaveVector(k_par=np.array([0.3, 0.4]), k3=0.5 + 0.1j)
    assert k.dot3((1.0, 2.0, 3.0)) == pytest.approx(0.3 + 0.8 + 3 * (0.5 + 0.1j))
