"""Continuum-sheet limits with both orderings of (a -> 0, eps -> 0).

Closed continuum reflection coefficients (rho = 1/a^2 kept finite):

    scalar: r = -1 / (1 - 2 i k3 / (rho g_r))
    TE:     r = -1 / (1 - a^2 k3 / (2 pi i omega^2 alpha))
    TM:     r = -1 / (1 - a^2 / (2 pi i alpha k3))         (a->0 first)
    P:      r = -1 / (1 - a^2 k3 / (2 pi i k_par^2 alpha)) (subtracted)

The TE coefficient is the scalar one under g -> -4 pi alpha omega^2, which
is exactly the coupling substitution that turns the scalar sheet equation
into the TE one.

For the a -> 0 first path at smearing eps > 0 the mode functions are

    scalar: 1/g_r      + e^{2 eps xi^2} Q_{1/2}(2 eps) / (2 a^2 sqrt(beta'))...
    (see phi_tilde_a0)

with beta' = xi^2 + k_par^2 (= -k3^2 on shell) and the incomplete integrals

    Q_nu(s0) = integral_{s0}^inf u^{-nu} e^{-u beta'} du

continued to scattering kinematics through the retarded branch
sqrt(beta') = -i k3.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import backends
from ._quadrature import quad_complex
from .core import Frequency, ModeKind, WaveVector
from .errors import ValidationError
from .lattice_sums import sqrt_retarded

_SQRTPI = math.sqrt(math.pi)
_2PI = 2.0 * math.pi


class LimitPath(enum.Enum):
    EPS_FIRST_THEN_A = "eps_first_then_a"
    A_FIRST_THEN_EPS = "a_first_then_eps"


class LimitOutcome(enum.Enum):
    FINITE_COMMUTING = "finite_commuting"
    FINITE_NONCOMMUTING = "finite_noncommuting"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class LimitReport:
    mode: ModeKind
    path: LimitPath
    outcome: LimitOutcome
    limiting_r: complex | None
    divergence_exponent: float | None
    note: str = ""
    subtracted_r: complex | None = None


def h_eps(z: float, eps: float, omega: Frequency, k_par) -> complex:
    """z-profile of the smeared-sheet solution.

    h_eps(z) = (-i k3 / sqrt(pi)) e^{-2 eps k_par^2} integral_0^inf
               ds (s+eps)^{-1/2} exp(-z^2/(4(s+eps)) - s(xi^2 + k_par^2));

    h_0(z) = e^{i k3 |z|} exactly. For eps > 0 the semi-infinite integral is
    split into the closed-form full integral (whose retarded continuation
    is the outgoing plane wave) minus an adaptive quadrature over (0, eps],
    which stays finite-interval for every kinematics.
    """
    if eps < 0.0:
        raise ValidationError("eps must be >= 0")
    k_par = np.asarray(k_par, dtype=float).reshape(2)
    kp2 = float(k_par @ k_par)
    xi = -1j * omega.omega
    beta = xi * xi + kp2
    sqb = sqrt_retarded(beta)  # = -i k3 on shell
    k3 = 1j * sqb
    if eps == 0.0:
        return complex(np.exp(1j * k3 * abs(z)))
    pref = (-1j * k3 / _SQRTPI) * np.exp(-2.0 * eps * kp2 + eps * beta)
    full = _SQRTPI / sqb * np.exp(-abs(z) * sqb)
    if z != 0.0:

        def head_integrand(sig):
            return sig**-0.5 * np.exp(-sig * beta - z * z / (4.0 * sig))

        head, _ = quad_complex(head_integrand, 0.0, eps, tol=1e-12)
    else:
        # substitute sig = eps t^2 to lift the endpoint singularity
        def head_integrand(t):
            return 2.0 * math.sqrt(eps) * np.exp(-eps * t * t * beta)

        head, _ = quad_complex(head_integrand, 0.0, 1.0, tol=1e-12)
    return complex(pref * (full - head))


def _q_half(s0: float, beta: complex) -> complex:
    """integral_{s0}^inf u^{-1/2} e^{-u beta} du on the retarded branch."""
    sqb = sqrt_retarded(beta)
    return _SQRTPI / sqb * backends.erfc_cmplx(sqb * math.sqrt(s0))


def _q_3half(s0: float, beta: complex) -> complex:
    """integral_{s0}^inf u^{-3/2} e^{-u beta} du on the retarded branch."""
    sqb = sqrt_retarded(beta)
    e = np.exp(-beta * s0)
    return 2.0 * (e / math.sqrt(s0) - _SQRTPI * sqb * backends.erfc_cmplx(sqb * math.sqrt(s0)))


def phi_tilde_a0(
    kind: ModeKind,
    inverse_coupling: complex,
    eps: float,
    a: float,
    omega: Frequency,
    k: WaveVector,
    subtract_singular: bool = False,
) -> complex:
    """Mode phi~ after the a -> 0 (continuum sheet) limit at smearing eps > 0.

    The 1/a^2 factors are the finite density rho. eps -> 0 closed forms:

      scalar: 1/g_r + i/(2 a^2 k3)
      TE:     1/alpha - 2 pi i omega^2/(a^2 k3)
      TM:     1/alpha - 2 pi i k3/a^2
      P:      1/alpha - 2 pi i k_par^2/(a^2 k3) + sqrt(2 pi)/(a^2 sqrt(eps))

    The P mode has no finite limit; ``subtract_singular`` removes the
    sqrt(2 pi)/(a^2 sqrt(eps)) term by hand (the formal subtraction that
    reproduces the known perpendicular-polarizability coefficient).
    """
    if not eps > 0.0:
        raise ValidationError("phi_tilde_a0 needs eps > 0 (use the closed forms at 0)")
    kp2 = k.k_par_sq
    xi = -1j * omega.omega
    w = omega.omega
    beta = xi * xi + kp2
    a2 = a * a
    pref = np.exp(2.0 * eps * xi * xi)
    q12 = _q_half(2.0 * eps, beta)
    if kind is ModeKind.SCALAR:
        return complex(inverse_coupling + pref * q12 / (2.0 * _SQRTPI * a2))
    if kind is ModeKind.TE:
        return complex(inverse_coupling - pref * 2.0 * _SQRTPI * w * w * q12 / a2)
    if kind is ModeKind.TM:
        k3sq = -beta  # omega^2 - k_par^2
        return complex(inverse_coupling - pref * 2.0 * _SQRTPI * k3sq * q12 / a2)
    if kind is ModeKind.P:
        q32 = _q_3half(2.0 * eps, beta)
        val = inverse_coupling - pref * 2.0 * _SQRTPI * (w * w * q12 - 0.5 * q32) / a2
        if subtract_singular:
            val = val - math.sqrt(_2PI) / (a2 * math.sqrt(eps))
        return complex(val)
    raise ValidationError(f"unknown mode kind {kind!r}")


def r_continuum(
    kind: ModeKind,
    omega: Frequency,
    k: WaveVector,
    coupling: complex | None = None,
    a: float | None = None,
    rho: float | None = None,
    strong_coupling: bool = False,
    hydrodynamic_g: complex | None = None,
) -> complex:
    """Continuum-sheet reflection coefficient of the given mode.

    Exactly one of a or rho fixes the density (rho = 1/a^2). For the scalar
    mode ``coupling`` is g_r; passing ``hydrodynamic_g`` instead evaluates
    the directly-solved sheet formula with the bare g (the two formulas are
    identical in form). ``strong_coupling`` gives the Dirichlet-type limit.
    """
    if (a is None) == (rho is None):
        raise ValidationError("pass exactly one of a or rho")
    if rho is None:
        rho = 1.0 / (a * a)
    a2 = 1.0 / rho
    k3 = k.k3
    if abs(k3) == 0.0:
        raise ValidationError("grazing incidence (k3 = 0) rejected")
    w = omega.omega
    if strong_coupling:
        return complex(-1.0)
    if kind is ModeKind.SCALAR:
        g = hydrodynamic_g if hydrodynamic_g is not None else coupling
        if g is None or g == 0:
            raise ValidationError("scalar coupling required")
        return complex(-1.0 / (1.0 - 2j * k3 / (rho * g)))
    if coupling is None or coupling == 0:
        raise ValidationError("polarizability required")
    if kind is ModeKind.TE:
        return complex(-1.0 / (1.0 - a2 * k3 / (2j * math.pi * w * w * coupling)))
    if kind is ModeKind.TM:
        return complex(-1.0 / (1.0 - a2 / (2j * math.pi * coupling * k3)))
    kp2 = k.k_par_sq
    if kp2 == 0.0:
        raise ValidationError("P-mode continuum coefficient undefined at normal incidence")
    return complex(-1.0 / (1.0 - a2 * k3 / (2j * math.pi * kp2 * coupling)))


def scaling_probe(quantity, a_values) -> float:
    """Least-squares slope of log|quantity(a)| vs log a.

    Needs at least three spacings spanning a decade; flags non-monotone data.
    """
    a_values = np.asarray(sorted(a_values, reverse=True), dtype=float)
    if len(a_values) < 3:
        raise ValidationError("need at least 3 lattice spacings")
    if a_values[0] / a_values[-1] < 10.0 - 1e-9:
        raise ValidationError("spacings must span at least a decade")
    mags = np.array([abs(quantity(a)) for a in a_values])
    if np.any(mags <= 0.0):
        raise ValidationError("quantity must be nonzero on the sweep")
    diffs = np.diff(np.log(mags))
    if not (np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12)):
        raise ValidationError("non-monotone scaling data")
    slope = np.polyfit(np.log(a_values), np.log(mags), 1)[0]
    return float(slope)


def _fit_eps_exponent(values, eps_values) -> float:
    eps_values = np.asarray(eps_values, dtype=float)
    mags = np.abs(np.asarray(values))
    return float(np.polyfit(np.log(eps_values), np.log(mags), 1)[0])


def order_of_limits_report(
    kind: ModeKind,
    omega: Frequency,
    k: WaveVector,
    coupling: complex,
    a: float,
    r_tolerance: float = 1e-3,
) -> LimitReport:
    """Compare the two orders of the (a -> 0, eps -> 0) limiting process.

    scalar/TE: both paths agree -> FiniteCommuting with the limiting r.
    TM: eps-first diverges like a^-3 (no continuum limit), a-first is
        finite -> FiniteNoncommuting, r from the a-first path.
    P:  divergent on both paths; the eps-exponent -1/2 of the a-first path
        is fitted and the formally subtracted r attached as annotation.
    """
    from .lattice_sums import EwaldParams, phi_lattice_regularized

    kp2 = k.k_par_sq
    if kind in (ModeKind.SCALAR, ModeKind.TE):
        r_closed = r_continuum(kind, omega, k, coupling=coupling, a=a)
        # a-first path: extrapolate the eps-regularized sheet to eps = 0;
        # the defect is O(sqrt(eps)), so eliminate the half-power term
        eps_seq = (1e-3, 5e-4, 2.5e-4)
        rs = []
        for e in eps_seq:
            phi = phi_tilde_a0(kind, 1.0 / coupling, e, a, omega, k)
            rs.append(_r_from_phi_a0(kind, phi, omega, k, a))
        rt2 = math.sqrt(2.0)
        r_afirst = (rt2 * rs[-1] - rs[-2]) / (rt2 - 1.0)
        agree = abs(r_afirst - r_closed) <= r_tolerance * max(abs(r_closed), 1e-30)
        return LimitReport(
            mode=kind,
            path=LimitPath.A_FIRST_THEN_EPS,
            outcome=LimitOutcome.FINITE_COMMUTING if agree else LimitOutcome.FINITE_NONCOMMUTING,
            limiting_r=complex(r_closed),
            divergence_exponent=None,
            note="both orders give the same sheet coefficient"
            if agree
            else "paths disagree beyond tolerance",
        )
    if kind is ModeKind.TM:
        # eps-first path: |phi~| ~ a^-3, one power too singular for a sheet
        a_seq = np.array([0.4, 0.2, 0.1, 0.05, 0.04]) * a
        params = EwaldParams()

        def phi_of_a(av):
            return phi_lattice_regularized(
                kind, 0.0, omega, k.k_par, av, 1.0 / coupling, params
            )

        slope = scaling_probe(phi_of_a, a_seq)
        r_afirst = r_continuum(kind, omega, k, coupling=coupling, a=a)
        return LimitReport(
            mode=kind,
            path=LimitPath.A_FIRST_THEN_EPS,
            outcome=LimitOutcome.FINITE_NONCOMMUTING,
            limiting_r=complex(r_afirst),
            divergence_exponent=float(slope),
            note="eps-first path diverges (no continuum limit); a-first path "
            "reproduces the hydrodynamic sheet coefficient",
        )
    # P mode: eps-divergent even after a -> 0
    if kp2 == 0.0:
        raise ValidationError("P-mode report needs oblique incidence")
    eps_seq = np.array([1e-4, 4e-5, 1.6e-5])
    finite_part = phi_tilde_a0(ModeKind.P, 1.0 / coupling, eps_seq[-1], a, omega, k,
                               subtract_singular=True)
    divergent = [
        phi_tilde_a0(ModeKind.P, 1.0 / coupling, e, a, omega, k) - finite_part
        for e in eps_seq
    ]
    exponent = _fit_eps_exponent(divergent, eps_seq)
    r_sub = r_continuum(ModeKind.P, omega, k, coupling=coupling, a=a)
    return LimitReport(
        mode=kind,
        path=LimitPath.A_FIRST_THEN_EPS,
        outcome=LimitOutcome.DIVERGENT,
        limiting_r=None,
        divergence_exponent=exponent,
        note="divergent on both paths; removing the sqrt(2 pi)/(a^2 sqrt(eps)) "
        "term by hand reproduces the perpendicular-polarizability coefficient",
        subtracted_r=complex(r_sub),
    )


def _r_from_phi_a0(kind: ModeKind, phi: complex, omega: Frequency, k: WaveVector,
                   a: float) -> complex:
    """Reflection coefficient of the regularized sheet from its phi~."""
    a2 = a * a
    k3 = k.k3
    w = omega.omega
    if kind is ModeKind.SCALAR:
        return complex(1.0 / (2j * a2 * k3 * phi))
    if kind is ModeKind.TE:
        return complex(_2PI * 1j * w * w / (a2 * k3 * phi))
    if kind is ModeKind.TM:
        return complex(_2PI * 1j * k3 / (a2 * phi))
    return complex(_2PI * 1j * k.k_par_sq / (a2 * k3 * phi))
