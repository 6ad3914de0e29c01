"""Single point-scatterer physics: self-adjoint extension, renormalization
schemes, phi_0 self-terms, and the fields around one center.

Sign conventions (see also the package notes): with retarded waves
exp(i omega r)/r the renormalized self-terms are

    phi_0^scalar = 1/g_r + i omega / (4 pi)
    phi_0^TE     = 1/alpha_ren -   i omega^3
    phi_0^TM     = 1/alpha_ren -   i omega^3 / 3
    phi_0^P      = 1/alpha_ren - 2 i omega^3 / 3

which is the unique assignment consistent with evaluating the regularized
self-energy integrals and with the optical theorem for the resulting
scattering amplitudes (f_scalar = -1/(4 pi phi_0), f_TE = omega^2/phi_0, ...).
The extension parameter maps to the renormalized scalar coupling as
alpha_SE = -4 pi / g_r.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Frequency, ModeKind, WaveVector
from .errors import PoleError, ValidationError

_4PI = 4.0 * math.pi


@dataclass(frozen=True)
class ExtensionParameter:
    """Self-adjoint-extension parameter (1/length); negative values bind."""

    alpha_se: float

    def __post_init__(self):
        if not math.isfinite(self.alpha_se):
            raise ValidationError("alpha_se must be finite")

    @property
    def g_renormalized(self) -> float:
        """Equivalent renormalized scalar coupling, g_r = -4 pi / alpha_SE."""
        if self.alpha_se == 0.0:
            raise ValidationError("alpha_se = 0 has no finite coupling image")
        return -_4PI / self.alpha_se

    @classmethod
    def from_g_renormalized(cls, g_r: float) -> "ExtensionParameter":
        if g_r == 0.0:
            raise ValidationError("g_r must be nonzero")
        return cls(alpha_se=-_4PI / g_r)


class RenormScheme(enum.Enum):
    FIELD_THEORETIC = "field_theoretic"
    ELECTROSTATIC = "electrostatic"


@dataclass(frozen=True)
class BoundState:
    kappa: float
    normalization: float


def scattering_amplitude_sae(alpha: ExtensionParameter, omega: Frequency) -> complex:
    """f = 1/(alpha_SE - i omega), the s-wave point-scatterer amplitude."""
    den = alpha.alpha_se - 1j * omega.omega
    if abs(den) < 1e-300:
        raise PoleError(f"amplitude pole at omega = {omega.omega}")
    return 1.0 / den


def bound_state(alpha: ExtensionParameter) -> BoundState | None:
    """Bound state for alpha_SE < 0: decay rate -alpha_SE, norm sqrt(-alpha_SE/2pi)."""
    if alpha.alpha_se >= 0.0:
        return None
    kappa = -alpha.alpha_se
    return BoundState(kappa=kappa, normalization=math.sqrt(kappa / (2.0 * math.pi)))


def scattering_length(alpha: ExtensionParameter) -> float:
    """s-wave scattering length a_0 = -1/alpha_SE."""
    if alpha.alpha_se == 0.0:
        raise ValidationError("alpha_se = 0: scattering length infinite")
    return -1.0 / alpha.alpha_se


def sae_boundary_params(alpha: ExtensionParameter, eps: float) -> tuple[float, float]:
    """Boundary-condition parameters (mu, theta) on a sphere of radius eps.

    mu = 1/eps and tan(theta/2) = eps*alpha_SE - 1.
    """
    if not eps > 0.0:
        raise ValidationError("eps must be positive")
    return 1.0 / eps, 2.0 * math.atan(eps * alpha.alpha_se - 1.0)


# counterterm ledger: 1/coupling_ren = 1/coupling + c32/eps^{3/2} + c12(omega)/eps^{1/2}
_C32 = {
    ModeKind.SCALAR: 0.0,
    ModeKind.TE: 0.0,
    ModeKind.TM: 1.0 / (6.0 * math.sqrt(2.0 * math.pi)),
    ModeKind.P: 1.0 / (12.0 * math.sqrt(2.0 * math.pi)),
}
_C12_OMEGA2 = {
    ModeKind.SCALAR: 0.0,
    ModeKind.TE: -1.0,
    ModeKind.TM: -1.0 / 3.0,
    ModeKind.P: -1.0 / 6.0,
}

# finite radiation terms of phi_0, relative to the renormalized coupling
_RADIATION = {
    ModeKind.SCALAR: lambda w: 1j * w / _4PI,
    ModeKind.TE: lambda w: -1j * w**3,
    ModeKind.TM: lambda w: -1j * w**3 / 3.0,
    ModeKind.P: lambda w: -2j * w**3 / 3.0,
}


def renormalize_coupling(mode, eps: float, scheme: RenormScheme, omega: Frequency) -> complex:
    """Inverse renormalized coupling from the bare one at smearing eps.

    Field-theoretic scheme: add the divergent counterterms

      scalar: + (2 pi)^{-3/2} eps^{-1/2}
      TE:     - omega^2 (2 pi eps)^{-1/2}
      TM:     + (6 sqrt(2 pi))^{-1} eps^{-3/2} - (omega^2/3) (2 pi eps)^{-1/2}
      P:      + (12 sqrt(2 pi))^{-1} eps^{-3/2} - (omega^2/6) (2 pi eps)^{-1/2}

    The electrostatic scheme additionally absorbs the finite radiation
    terms (the phi_0 self-term then equals the inverse coupling exactly).
    Returns the inverse coupling so that sweeps may pass through zero.
    """
    if not eps > 0.0:
        raise ValidationError("eps must be positive")
    kind = mode.kind
    w = omega.omega
    inv = mode.inverse_coupling
    if kind is ModeKind.SCALAR:
        inv = inv + (2.0 * math.pi) ** -1.5 / math.sqrt(eps)
    else:
        inv = inv + _C32[kind] * eps**-1.5
        inv = inv + _C12_OMEGA2[kind] * w * w / math.sqrt(2.0 * math.pi * eps)
    if scheme is RenormScheme.ELECTROSTATIC:
        inv = inv + _RADIATION[kind](w)
    return complex(inv)


def phi0(kind, inverse_renormalized_coupling: complex, omega: Frequency,
         scheme: RenormScheme = RenormScheme.FIELD_THEORETIC) -> complex:
    """Renormalized self-term phi_0 of a single center.

    Field-theoretic scheme: inverse coupling plus the radiation term
    (i omega/4pi scalar, -i omega^3 {1, 1/3, 2/3} for TE/TM/P). In the
    electrostatic scheme the radiation term lives inside the coupling and
    phi_0 is the inverse coupling itself.
    """
    if scheme is RenormScheme.ELECTROSTATIC:
        return complex(inverse_renormalized_coupling)
    return complex(inverse_renormalized_coupling + _RADIATION[kind](omega.omega))


def _helmholtz_radial(omega: complex, r: float):
    """f = e^{i w r}/r and its first two radial derivatives."""
    e = np.exp(1j * omega * r)
    f = e / r
    fp = (1j * omega / r - 1.0 / r**2) * e
    fpp = (-(omega**2) / r - 2j * omega / r**2 + 2.0 / r**3) * e
    return f, fp, fpp


def single_center_field(
    kind,
    phi0_value: complex,
    x,
    k: WaveVector,
    omega: Frequency,
) -> complex:
    """Total field at x for one center at the origin.

    scalar: e^{ik.x} - (1/(4 pi phi0)) e^{i w r}/r
    TE:     e^{ik.x} + (w^2/phi0) e^{i w r}/r
    TM:     e^{ik.x} + (1/phi0) (w^2 + Lap_par) e^{i w r}/r
    P:      e^{ik.x} + (1/phi0) (w^2 + d_z^2)  e^{i w r}/r

    The differential operators are applied analytically.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise ValidationError("field is singular at the center")
    w = omega.omega
    inc = np.exp(1j * k.dot3(x))
    f, fp, fpp = _helmholtz_radial(w, r)
    if kind is ModeKind.SCALAR:
        return complex(inc - f / (_4PI * phi0_value))
    if kind is ModeKind.TE:
        return complex(inc + w * w * f / phi0_value)
    rho2 = x[0] ** 2 + x[1] ** 2
    if kind is ModeKind.TM:
        lap_par = fpp * rho2 / r**2 + fp * (2.0 / r - rho2 / r**3)
        return complex(inc + (w * w * f + lap_par) / phi0_value)
    if kind is ModeKind.P:
        z2 = x[2] ** 2
        dzz = fpp * z2 / r**2 + fp * (1.0 / r - z2 / r**3)
        return complex(inc + (w * w * f + dzz) / phi0_value)
    raise ValidationError(f"unknown mode kind {kind!r}")


def self_energy_integral(kind, eps: float, omega: Frequency, tol: float = 1e-12) -> complex:
    """Regularized self-energy integral (the phi_0 - 1/coupling piece).

    Numerically integrates int_0^inf ds e^{-s xi^2} P K_{s+2 eps}(0) with the
    mode's derivative insertion; used to audit the renormalization ledger.
    Convergent quadrature needs Re(xi^2) > 0, i.e. |Im omega| > |Re omega|;
    other frequencies are reached by the closed form's continuation, tested
    separately.
    """
    from ._quadrature import quad_decaying

    if not eps > 0.0:
        raise ValidationError("eps must be positive")
    xi = -1j * omega.omega
    if (xi * xi).real <= 0.0:
        raise ValidationError("quadrature needs |Im omega| > |Re omega|")

    def kernel(s):
        sig = s + 2.0 * eps
        base = (_4PI * sig) ** -1.5
        if kind is ModeKind.SCALAR:
            ins = np.ones_like(sig)
        elif kind is ModeKind.TE:
            ins = _4PI * xi * xi * np.ones_like(sig)
        elif kind is ModeKind.TM:
            ins = _4PI * (xi * xi + 1.0 / sig)
        else:
            ins = _4PI * (xi * xi + 0.5 / sig)
        return np.exp(-s * xi * xi) * ins * base

    scale = min(1.0 / (xi * xi).real, 1.0)
    if eps < 1e-3:
        scale = min(scale, 50.0 * eps)
    val, _ = quad_decaying(kernel, 0.0, scale, tol=tol)
    return complex(val)
