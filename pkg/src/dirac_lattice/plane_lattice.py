"""Bloch-reduced scattering on the homogeneous square lattice.

Reflection coefficients (diffraction order n, q_n = k_par + 2 pi n / a,
Gamma_n = sqrt(omega^2 - q_n^2) on the Im >= 0 branch):

    scalar: r_n = 2 pi i f0 / (a^2 Gamma_n) = -i/(2 a^2 Gamma_n phi~)
    TE:     r_n = 2 pi i omega^2 / (a^2 Gamma_n phi~^TE)
    TM:     r_n = 2 pi i Gamma_n / (a^2 phi~^TM)
    P:      r_n = 2 pi i q_n^2 / (a^2 Gamma_n phi~^P)

with the mode phi~ functions from ``lattice_sums.phi_lattice_regularized``
at eps = 0. These signs make every continuum limit agree with the directly
solved delta-sheet equations, and make the flux balance below exact.

Energy flux of the scalar mode functions is weighted per mode: the
conserved combination is sum over propagating n of

    w_n (|r_n|^2 + |delta_n0 + r_n|^2) = 1

with w_n = Gamma_n/k3 (scalar, TE), k3/Gamma_n (TM) and
(k_par^2 Gamma_n)/(k3 q_n^2) (P); the weights follow from the physical
field amplitudes the scalar functions generate in each channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import Frequency, Mode, ModeKind, WaveVector, sqrt_upper
from .errors import ConvergenceError, ValidationError, WoodAnomalyError
from .lattice_sums import (
    EwaldParams,
    WOOD_TOLERANCE,
    j_sum,
    phi_lattice_regularized,
)
from .single_center import ExtensionParameter
from . import backends

_2PI = 2.0 * math.pi


@dataclass(frozen=True)
class DiffractionOrder:
    n: tuple[int, int]
    q_n: np.ndarray
    gamma_n: complex
    propagating: bool
    r_n: complex | None = None

    def with_reflection(self, r: complex) -> "DiffractionOrder":
        return replace(self, r_n=complex(r))

    def direction(self, omega: Frequency) -> np.ndarray:
        """Outgoing parallel direction q_n/omega of this order.

        Over all orders these are the allowed scattering directions of the
        lattice (the von Laue set); only propagating orders have |dir| < 1.
        """
        return self.q_n / omega.omega.real


@dataclass(frozen=True)
class BlochIndex:
    """k_par folded into the first Brillouin zone: k_par = q + 2 pi m / a."""

    q: np.ndarray
    m: tuple[int, int]

    @classmethod
    def from_k_par(cls, k_par, a: float) -> "BlochIndex":
        k_par = np.asarray(k_par, dtype=float).reshape(2)
        g = _2PI / a
        m = np.round(k_par / g).astype(int)
        return cls(q=k_par - g * m, m=(int(m[0]), int(m[1])))


def gamma(omega: Frequency, k_par, a: float, n) -> complex:
    """Axial wavenumber Gamma_n = sqrt(omega^2 - q_n^2), Im >= 0 branch.

    Flags a Wood anomaly when |Gamma_n| < 1e-4 |omega| (i.e. the squared
    quantities are within 1e-8 of each other).
    """
    k_par = np.asarray(k_par, dtype=float).reshape(2)
    q = k_par + _2PI * np.asarray(n, dtype=float) / a
    g = sqrt_upper(omega.omega**2 - float(q @ q))
    if abs(g) ** 2 <= WOOD_TOLERANCE * abs(omega.omega) ** 2:
        raise WoodAnomalyError(
            f"Wood anomaly at order {tuple(n)}: Gamma = {g:.3e}", order=tuple(n), gamma=g
        )
    return g


def diffraction_order(omega: Frequency, k_par, a: float, n) -> DiffractionOrder:
    k_par = np.asarray(k_par, dtype=float).reshape(2)
    q = k_par + _2PI * np.asarray(n, dtype=float) / a
    g = gamma(omega, k_par, a, n)
    propagating = omega.is_real and g.imag < 1e-12 * abs(g) and g.real > 0.0
    return DiffractionOrder(
        n=(int(n[0]), int(n[1])), q_n=q, gamma_n=g, propagating=propagating
    )


def propagating_orders(omega: Frequency, k_par, a: float) -> list[DiffractionOrder]:
    """All orders with q_n^2 < omega^2 (real omega), by exact enumeration.

    The search radius |n| <= a(|omega| + |k_par|)/(2 pi) + 1 is exhaustive
    for the exact criterion; the n = 0 specular order is always present.
    """
    if not omega.is_real or not omega.omega.real > 0.0:
        raise ValidationError("propagating orders need real omega > 0")
    w = omega.omega.real
    k_par = np.asarray(k_par, dtype=float).reshape(2)
    nmax = int(math.ceil(a * (w + float(np.linalg.norm(k_par))) / _2PI)) + 1
    out = []
    for n1 in range(-nmax, nmax + 1):
        for n2 in range(-nmax, nmax + 1):
            q = k_par + _2PI * np.array([n1, n2]) / a
            if float(q @ q) < w * w:
                out.append(diffraction_order(omega, k_par, a, (n1, n2)))
    return out


def f0_bloch(
    alpha: ExtensionParameter,
    omega: Frequency,
    k: WaveVector,
    a: float,
    params: EwaldParams | None = None,
    tol: float = 1e-10,
) -> complex:
    """Bloch amplitude f_0 = 1/(alpha_SE - i omega - J_1(omega, k))."""
    j1 = j_sum(1, omega, k.k_par, a, params, tol).value
    den = alpha.alpha_se - 1j * omega.omega - j1
    if abs(den) < 1e-10 * max(abs(j1), abs(omega.omega), 1.0):
        raise ConvergenceError(f"lattice resonance: |denominator| = {abs(den):.3e}")
    return 1.0 / den


def phi_tilde(
    mode: Mode,
    inverse_renormalized_coupling: complex,
    omega: Frequency,
    k: WaveVector,
    a: float,
    params: EwaldParams | None = None,
    tol: float = 1e-10,
) -> complex:
    """Mode phi~(k) of the lattice at eps = 0 (closed J-sum forms)."""
    return phi_lattice_regularized(
        mode.kind, 0.0, omega, k.k_par, a, inverse_renormalized_coupling, params, tol
    )


def reflection(
    mode: Mode,
    phi_tilde_value: complex,
    omega: Frequency,
    k: WaveVector,
    a: float,
    n,
) -> complex:
    """Reflection coefficient r_n of one diffraction order."""
    g = gamma(omega, k.k_par, a, n)
    w = omega.omega
    a2 = a * a
    if mode.kind is ModeKind.SCALAR:
        return complex(-1j / (2.0 * a2 * g * phi_tilde_value))
    if mode.kind is ModeKind.TE:
        return complex(2j * math.pi * w * w / (a2 * g * phi_tilde_value))
    if mode.kind is ModeKind.TM:
        return complex(2j * math.pi * g / (a2 * phi_tilde_value))
    q = k.k_par + _2PI * np.asarray(n, dtype=float) / a
    return complex(2j * math.pi * float(q @ q) / (a2 * g * phi_tilde_value))


def field_spherical(
    f0: complex,
    x,
    omega: Frequency,
    k: WaveVector,
    a: float,
    radius: int = 2000,
    tol: float = 1e-10,
) -> complex:
    """Spherical-wave representation e^{ik.x} + f0 F(x); needs Im omega > 0.

    F sums the outgoing spherical waves over lattice sites within the given
    shell radius; raises if the damped tail bound cannot reach tol.
    """
    if not omega.omega.imag > 0.0:
        raise ValidationError("spherical representation needs Im omega > 0")
    x = np.asarray(x, dtype=float).reshape(3)
    # sites live in the z = 0 plane only; fold the parallel part
    xp = x[:2] - a * np.round(x[:2] / a)
    if abs(x[2]) < 1e-14 and np.hypot(xp[0], xp[1]) < 1e-12 * a:
        raise ValidationError("evaluation point collides with a lattice site")
    val, tail, _ = backends.field_sum_kernel(
        complex(omega.omega), k.k_par[0], k.k_par[1], a,
        float(x[0]), float(x[1]), float(x[2]), radius, tol,
    )
    if not tail < tol:
        raise ConvergenceError(
            f"field sum tail {tail:.3e} above tolerance (insufficient damping)",
            error_estimate=float(tail),
        )
    inc = np.exp(1j * k.dot3(x))
    return complex(inc + f0 * val)


def _order_block(omega: Frequency, k_par, a: float, z: float, order_radius: int | None):
    """Orders to include in the plane-wave sum at height z."""
    w = omega.omega
    k_par = np.asarray(k_par, dtype=float).reshape(2)
    if order_radius is None:
        q_cut = abs(w) + 10.0 / max(abs(z), 1e-6)
        nmax = int(math.ceil(a * (q_cut + float(np.linalg.norm(k_par))) / _2PI)) + 1
    else:
        nmax = order_radius
    n1, n2 = np.meshgrid(np.arange(-nmax, nmax + 1), np.arange(-nmax, nmax + 1))
    n1 = n1.ravel()
    n2 = n2.ravel()
    qx = k_par[0] + _2PI * n1 / a
    qy = k_par[1] + _2PI * n2 / a
    q2 = qx * qx + qy * qy
    gam = np.array([sqrt_upper(w * w - t) for t in q2])
    small = np.abs(gam) ** 2 <= WOOD_TOLERANCE * abs(w) ** 2
    if np.any(small):
        i = int(np.argmax(small))
        raise WoodAnomalyError(
            f"Wood anomaly at order ({n1[i]},{n2[i]})",
            order=(int(n1[i]), int(n2[i])), gamma=complex(gam[i]),
        )
    return n1, n2, qx, qy, q2, gam


def field_planewave(
    mode: Mode,
    phi_tilde_value: complex,
    x,
    omega: Frequency,
    k: WaveVector,
    a: float,
    order_radius: int | None = None,
) -> complex:
    """Plane-wave (diffraction-order) representation of the lattice field.

    Valid off the lattice plane (z != 0); the P-mode delta(z) term is
    excluded by construction. Evanescent orders are kept out to
    |q| <= |omega| + 10/|z| unless an explicit order radius is given.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    z = float(x[2])
    if z == 0.0:
        raise ValidationError("plane-wave representation needs z != 0")
    w = omega.omega
    n1, n2, qx, qy, q2, gam = _order_block(omega, k.k_par, a, z, order_radius)
    phase = np.exp(1j * (gam * abs(z) + qx * x[0] + qy * x[1]))
    if mode.kind is ModeKind.SCALAR:
        # 2 pi i f0 / a^2 with f0 = -1/(4 pi phi~)
        coef = -1j / (2.0 * a * a * phi_tilde_value)
    elif mode.kind is ModeKind.TE:
        coef = 2j * math.pi * w * w / (a * a * phi_tilde_value)
    elif mode.kind is ModeKind.TM:
        coef = 2j * math.pi / (a * a * phi_tilde_value)
    else:
        coef = 2j * math.pi / (a * a * phi_tilde_value)
    if mode.kind in (ModeKind.SCALAR, ModeKind.TE):
        summed = np.sum(phase / gam)
    elif mode.kind is ModeKind.TM:
        summed = np.sum(gam * phase)  # (omega^2 - q_n^2)/Gamma_n = Gamma_n
    else:
        summed = np.sum(q2 * phase / gam)  # (omega^2 - Gamma_n^2) = q_n^2
    inc = np.exp(1j * k.dot3(x))
    return complex(inc + coef * summed)


def flux_weights(mode_kind: ModeKind, orders, k3: float, k_par_sq: float):
    """Energy-flux weight of each propagating order, normalized to 1 at n=0."""
    ws = []
    for o in orders:
        g = o.gamma_n.real
        if mode_kind in (ModeKind.SCALAR, ModeKind.TE):
            ws.append(g / k3)
        elif mode_kind is ModeKind.TM:
            ws.append(k3 / g)
        else:
            q2 = float(o.q_n @ o.q_n)
            if q2 == 0.0 or k_par_sq == 0.0:
                raise ValidationError(
                    "P-mode flux undefined at normal incidence (q_n = 0)"
                )
            ws.append(k_par_sq * g / (k3 * q2))
    return np.array(ws)


def flux_balance(
    omega: Frequency,
    k: WaveVector,
    a: float,
    alpha: ExtensionParameter | None = None,
    mode: Mode | None = None,
    inverse_renormalized_coupling: complex | None = None,
    params: EwaldParams | None = None,
    tol: float = 1e-10,
) -> float:
    """Unitarity deficit sum_prop w_n (|r_n|^2 + |delta_n0 + r_n|^2) - 1.

    Vanishes for real frequency and real (lossless) coupling; pass either
    alpha (scalar/SAE form) or mode + inverse renormalized coupling.
    """
    if not omega.is_real:
        raise ValidationError("flux balance is defined for real omega")
    if (alpha is None) == (mode is None):
        raise ValidationError("pass exactly one of alpha or mode")
    if mode is None:
        mode = Mode(ModeKind.SCALAR, coupling=1.0)
        f0 = f0_bloch(alpha, omega, k, a, params, tol)
        phi_value = -1.0 / (4.0 * math.pi * f0)
    else:
        if inverse_renormalized_coupling is None:
            inverse_renormalized_coupling = mode.inverse_coupling
        phi_value = phi_tilde(mode, inverse_renormalized_coupling, omega, k, a, params, tol)
    orders = propagating_orders(omega, k.k_par, a)
    k3 = k.k3.real
    weights = flux_weights(mode.kind, orders, k3, k.k_par_sq)
    total = 0.0
    for o, w_n in zip(orders, weights):
        r = reflection(mode, phi_value, omega, k, a, o.n)
        t = r + (1.0 if o.n == (0, 0) else 0.0)
        total += w_n * (abs(r) ** 2 + abs(t) ** 2)
    return float(total - 1.0)
