"""Shared domain types: frequencies, wave vectors, modes, lattice geometry.

Conventions (natural units, c = 1):

* time dependence exp(-i omega t), retarded fields, Im(omega) >= 0;
* xi = -i omega is the imaginary-frequency variable;
* positions split as x = (x_par, z) with the lattice in the z = 0 plane.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

ONSHELL_RTOL = 1e-12


def sqrt_upper(z: complex) -> complex:
    """Square root with Im >= 0; negative real radicands map to +i sqrt|z|.

    This is the branch of the axial wavenumbers: principal square root
    reflected into the closed upper half plane.
    """
    s = complex(np.sqrt(complex(z)))
    if s.imag < 0.0:
        s = -s
    return s


class ModeKind(enum.Enum):
    SCALAR = "scalar"
    TE = "te"
    TM = "tm"
    P = "p"


@dataclass(frozen=True)
class Frequency:
    """Complex frequency with the retarded convention Im(omega) >= 0."""

    omega: complex

    def __post_init__(self):
        omega = complex(self.omega)
        if omega.imag < 0.0:
            raise ValidationError(f"Im(omega) must be >= 0, got {omega}")
        object.__setattr__(self, "omega", omega)

    @property
    def xi(self) -> complex:
        """Imaginary-frequency variable xi = -i omega."""
        return -1j * self.omega

    @property
    def is_real(self) -> bool:
        return self.omega.imag == 0.0


@dataclass(frozen=True)
class WaveVector:
    """In-plane wave vector plus axial component, k = (k_par, k3)."""

    k_par: np.ndarray
    k3: complex

    def __post_init__(self):
        k_par = np.asarray(self.k_par, dtype=float).reshape(2)
        k3 = complex(self.k3)
        if k3.imag < -1e-15:
            raise ValidationError(f"Im(k3) must be >= 0, got {k3}")
        object.__setattr__(self, "k_par", k_par)
        object.__setattr__(self, "k3", k3)

    @property
    def k_par_sq(self) -> float:
        return float(self.k_par @ self.k_par)

    def dot3(self, x: np.ndarray) -> complex:
        """k . x for a 3-vector x."""
        x = np.asarray(x, dtype=float).reshape(3)
        return self.k_par[0] * x[0] + self.k_par[1] * x[1] + self.k3 * x[2]

    def onshell_defect(self, omega: Frequency) -> float:
        """|k_par^2 + k3^2 - omega^2|, the on-shell residual."""
        return abs(self.k_par_sq + self.k3 * self.k3 - omega.omega**2)


@dataclass(frozen=True)
class Mode:
    """Physical channel and its coupling constant.

    The coupling is g (dimension length) for SCALAR, the in-plane
    polarizability alpha_par for TE/TM and the perpendicular one alpha_3
    for P (dimension length^3). ``strong_coupling`` marks the formal
    infinite-coupling (Dirichlet-type) limit, in which ``coupling`` is
    ignored.
    """

    kind: ModeKind
    coupling: complex = 1.0
    strong_coupling: bool = False

    def __post_init__(self):
        if not self.strong_coupling and self.coupling == 0:
            raise ValidationError("coupling must be nonzero (or set strong_coupling)")
        object.__setattr__(self, "coupling", complex(self.coupling))

    @property
    def inverse_coupling(self) -> complex:
        return 0.0 if self.strong_coupling else 1.0 / self.coupling

    def planewave_prefactor(self, omega: complex, q_par_sq: float | complex) -> complex:
        """Multiplicative coupling factor P acting on a plane-wave component.

        For the component exp(i q_par.x_par + i gamma |z|) the in-plane
        Laplacian gives -q_par^2 and the axial second derivative gives
        -(omega^2 - q_par^2), so:

          SCALAR -> 1, TE -> -4 pi omega^2, TM -> -4 pi (omega^2 - q_par^2),
          P -> -4 pi q_par^2.
        """
        if self.kind is ModeKind.SCALAR:
            return 1.0
        if self.kind is ModeKind.TE:
            return -4.0 * math.pi * omega * omega
        if self.kind is ModeKind.TM:
            return -4.0 * math.pi * (omega * omega - q_par_sq)
        return -4.0 * math.pi * q_par_sq


@dataclass(frozen=True)
class LatticeConfig:
    """Square lattice with spacing a; rho = 1/a^2 is the areal density."""

    a: float

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValidationError(f"lattice spacing must be positive, got {self.a}")

    @property
    def rho(self) -> float:
        return 1.0 / (self.a * self.a)

    @classmethod
    def from_density(cls, rho: float) -> "LatticeConfig":
        if not rho > 0.0:
            raise ValidationError(f"density must be positive, got {rho}")
        return cls(a=1.0 / math.sqrt(rho))


def make_incident_wave(omega: Frequency, k_par) -> WaveVector:
    """Incident plane wave with k3 solving the on-shell condition.

    k3 = sqrt(omega^2 - k_par^2) on the Im >= 0 branch (positive real when
    propagating). Real omega with |k_par| > |omega| is rejected: no
    propagating incident wave exists there.
    """
    k_par = np.asarray(k_par, dtype=float).reshape(2)
    kp2 = float(k_par @ k_par)
    if omega.is_real and kp2 > omega.omega.real**2:
        raise ValidationError(
            f"|k_par|={math.sqrt(kp2):g} exceeds |omega|={abs(omega.omega):g}: "
            "no propagating incident wave"
        )
    k3 = sqrt_upper(omega.omega**2 - kp2)
    wave = WaveVector(k_par=k_par, k3=k3)
    defect = wave.onshell_defect(omega)
    if defect > ONSHELL_RTOL * max(abs(omega.omega) ** 2, 1.0):
        raise ValidationError(f"on-shell residual too large: {defect:g}")
    return wave
