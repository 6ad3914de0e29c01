"""Lattice sums J_s(omega, k) and regularized lattice phi functions.

The central object is

    J_s(omega, k) = sum_{n != 0} exp(i omega |a n| + i k.a n) / |a n|^s

over the square lattice a*(n1, n2), s in {1, 2, 3}. The n = 0 term is always
excluded (self-field separation). Two evaluation routes:

* ``j_sum_direct``: brute-force shell summation, valid for Im(omega) > 0,
  with a rigorous geometric tail bound. This is the oracle.

* ``j_sum``: Ewald split, valid for real or complex omega. The proper-time
  representation exp(i omega r)/r = (4 pi)^{-1/2} I_{3/2}(0, inf; r) with

      I_nu(s0, s1; r) = integral_{s0}^{s1} u^{-nu} e^{-u xi^2 - r^2/(4u)} du

  is split at u = s_star: the small-u part is summed in real space
  (Gaussian-convergent), the large-u part is Poisson-resummed over
  reciprocal vectors q_m = k + 2 pi m / a, where its transform

      g_nu(p) = 4 pi integral_{s_star}^inf u^{1-nu} e^{-u (p^2 - omega^2)} du

  is an incomplete-gamma / complementary-error-function expression whose
  analytic continuation to real omega carries the retarded branch
  sqrt(p^2 - omega^2) -> -i Gamma for propagating orders.

The nu = 3/2 family gives J_1; the nu = 5/2 family gives the combination
xi J_2 + J_3 (xi = -i omega). J_2 alone is recovered from the damping
integral J_2(omega) = integral_0^inf J_1(omega + i u) du, and J_3 follows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import backends
from .core import Frequency
from .errors import ConvergenceError, ValidationError, WoodAnomalyError

_SQRTPI = math.sqrt(math.pi)

WOOD_TOLERANCE = 1e-8

# Gauss-Legendre cache for the damping-ray quadrature.
_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(n: int):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (x, w)
    return _GL_CACHE[n]


class LatticeSumMethod(enum.Enum):
    DIRECT_DAMPED = "DirectDamped"
    EWALD_SPLIT = "EwaldSplit"


@dataclass(frozen=True)
class LatticeSumResult:
    value: complex
    abs_error_estimate: float
    method: LatticeSumMethod
    terms_used: int


@dataclass(frozen=True)
class EwaldParams:
    """Tuning knobs for the Ewald evaluation.

    split_parameter: proper-time split point s_star (length^2). The default
    a^2/(4 pi) balances real- and reciprocal-space Gaussian decay rates; it
    is capped at 4/|omega|^2 so that exp(|omega|^2 s_star) stays small
    (conditioning of the propagating-order error functions).
    """

    split_parameter: float | None = None
    real_space_radius: int = 60
    reciprocal_radius: int = 60
    quadrature_nodes: int = 24

    def __post_init__(self):
        if self.split_parameter is not None and not self.split_parameter > 0.0:
            raise ValidationError("split_parameter must be positive")
        for name in ("real_space_radius", "reciprocal_radius", "quadrature_nodes"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")

    def split_for(self, a: float, omega: complex) -> float:
        if self.split_parameter is not None:
            return self.split_parameter
        s = a * a / (4.0 * math.pi)
        w2 = abs(omega) ** 2
        if w2 > 0.0:
            s = min(s, 4.0 / w2)
        return s


def heat_kernel(s: float, x) -> float:
    """Gaussian heat kernel exp(-x^2/4s)/(4 pi s)^(3/2), the smeared delta."""
    if not s > 0.0:
        raise ValidationError(f"heat kernel needs s > 0, got {s}")
    x = np.asarray(x, dtype=float).reshape(3)
    x2 = float(x @ x)
    return math.exp(-x2 / (4.0 * s)) / (4.0 * math.pi * s) ** 1.5


def sqrt_retarded(beta: complex) -> complex:
    """Branch of sqrt(beta) continued from Im(omega) > 0 in beta = q^2 - omega^2.

    The physical frequencies drive beta into the closed lower half plane,
    where the continued branch is -i sqrt(-beta) (principal inner sqrt):
    positive real for evanescent beta > 0, -i Gamma for propagating beta < 0.
    """
    beta = complex(beta)
    if beta.imag != 0.0:
        # principal branch is the correct continuation off the real axis
        # (fourth quadrant for Im beta < 0, first for Im beta > 0)
        return complex(np.sqrt(beta))
    if beta.real >= 0.0:
        return complex(math.sqrt(beta.real))
    return complex(0.0, -math.sqrt(-beta.real))


def j_sum_direct(
    s_exp: int,
    omega: Frequency,
    k_par,
    a: float,
    radius: int,
    tol: float | None = None,
) -> LatticeSumResult:
    """Damped direct evaluation of J_s; requires Im(omega) > 0 strictly.

    Sums shells max(|n1|,|n2|) = 1..radius (stopping early once the tail
    bound is below tol, if given). The error estimate is the geometric
    shell bound with rate Im(omega)*a.
    """
    _check_s_exp(s_exp)
    if not omega.omega.imag > 0.0:
        raise ValidationError("j_sum_direct needs Im(omega) > 0 for convergence")
    if radius < 1:
        raise ValidationError("radius must be >= 1")
    if not a > 0.0:
        raise ValidationError("lattice spacing must be positive")
    kx, ky = np.asarray(k_par, dtype=float).reshape(2)
    value, tail, shells = backends.j_sum_direct_kernel(
        s_exp, complex(omega.omega), kx, ky, a, radius, tol
    )
    return LatticeSumResult(
        value=complex(value),
        abs_error_estimate=float(tail),
        method=LatticeSumMethod.DIRECT_DAMPED,
        terms_used=4 * shells * (shells + 1),
    )


def _check_s_exp(s_exp: int):
    if s_exp not in (1, 2, 3):
        raise ValidationError(f"s_exp must be 1, 2 or 3, got {s_exp}")


def _recip_sums(omega, kx, ky, a, s_star, max_shells, tol, check_wood=True):
    """Reciprocal-space parts of the nu = 3/2 and 5/2 Ewald sums.

    Returns (R32, R52, tail, n_terms) where
      R32 = (1/a^2) sum_m 4 pi sqrt(pi) erfc(sqrt(beta_m s_star)) / sqrt(beta_m)
      R52 = (1/a^2) sum_m 8 pi [e^{-beta_m s_star}/sqrt(s_star)
                                - sqrt(pi beta_m) erfc(sqrt(beta_m s_star))]
    with beta_m = q_m^2 - omega^2 on the retarded branch.
    """
    erfc = backends.erfc_cmplx_array
    w2 = omega * omega
    g = 2.0 * math.pi / a
    r32 = 0.0 + 0.0j
    r52 = 0.0 + 0.0j
    inv_a2 = 1.0 / (a * a)
    sqs = math.sqrt(s_star)
    n_terms = 0
    tail = np.inf
    prev_small = 0
    for m in range(0, max_shells + 1):
        if m == 0:
            m1 = np.array([0])
            m2 = np.array([0])
        else:
            m1, m2 = _full_shell_indices(m)
        qx = kx + g * m1
        qy = ky + g * m2
        q2 = qx * qx + qy * qy
        beta = q2 - w2
        if check_wood:
            bad = np.abs(beta) <= WOOD_TOLERANCE * max(abs(w2), 1e-300)
            if np.any(bad):
                i = int(np.argmax(bad))
                raise WoodAnomalyError(
                    f"Wood anomaly: |omega^2 - q_n^2| too small at n=({m1[i]},{m2[i]})",
                    order=(int(m1[i]), int(m2[i])),
                    gamma=complex(np.sqrt(complex(-beta[i]))),
                )
        sb = np.array([sqrt_retarded(b) for b in beta])
        ef = erfc(sb * sqs)
        t32 = 4.0 * math.pi * _SQRTPI * ef / sb
        t52 = 8.0 * math.pi * (np.exp(-beta * s_star) / sqs - _SQRTPI * sb * ef)
        r32 += inv_a2 * np.sum(t32)
        r52 += inv_a2 * np.sum(t52)
        n_terms += len(m1)
        shell_mag = inv_a2 * max(np.max(np.abs(t32)), np.max(np.abs(t52))) * max(8 * m, 1)
        # once q_min on the shell exceeds |omega| the terms fall like
        # exp(-s_star q^2); bound the remainder geometrically
        q_in = g * m - math.hypot(kx, ky)
        if m > 0 and q_in > 0 and q_in * q_in > abs(w2):
            ratio = math.exp(-s_star * (2 * m + 1) * g * g) * (1.0 + 1.0 / m)
            if ratio < 1.0:
                tail = shell_mag * ratio / (1.0 - ratio)
                if tail < tol and shell_mag < tol:
                    prev_small += 1
                    if prev_small >= 2:
                        break
                else:
                    prev_small = 0
    return r32, r52, tail, n_terms


def _full_shell_indices(m: int):
    n2a = np.arange(-m, m + 1)
    n1a = np.full(2 * m + 1, m)
    n1b = np.arange(-(m - 1), m)
    n2b = np.full(2 * m - 1, m)
    n1 = np.concatenate([n1a, -n1a, n1b])
    n2 = np.concatenate([n2a, -n2a, n2b])
    n1 = np.concatenate([n1, n1b])
    n2 = np.concatenate([n2, -n2b])
    return n1, n2


def _b_terms(xi: complex, s_star: float):
    """n = 0 large-proper-time integrals B_nu = int_{s_star}^inf u^-nu e^{-u xi^2} du."""
    erfc = backends.erfc_cmplx
    sqs = math.sqrt(s_star)
    e = np.exp(-xi * xi * s_star)
    b32 = 2.0 * (e / sqs - xi * _SQRTPI * erfc(xi * sqs))
    b52 = (2.0 / 3.0) * s_star**-1.5 * e - (2.0 / 3.0) * xi * xi * b32
    return b32, b52


def _m_sums(omega, kx, ky, a, s_star, s_lower, params, tol, check_wood=True):
    """Primed lattice sums of I_nu(s_lower, inf) for nu = 3/2, 5/2.

    Returns (M32, M52, SB, err, n_terms):
      M_nu = sum'_n e^{i k.a_n} I_nu(s_lower, inf; r_n)
      SB   = sum'_n e^{i k.a_n} s_lower^{-3/2} e^{-s_lower xi^2 - r_n^2/(4 s_lower)}
    """
    xi = -1j * omega
    s32, s52, sb, tail_r, shells = backends.ewald_real_kernel(
        complex(omega), kx, ky, a, s_star, s_lower, params.real_space_radius, tol
    )
    if not tail_r < tol:
        raise ConvergenceError(
            f"Ewald real-space sum: tail {tail_r:.3e} above tolerance {tol:.3e} "
            f"at radius {params.real_space_radius}",
            error_estimate=float(tail_r),
        )
    r32, r52, tail_q, nq = _recip_sums(
        omega, kx, ky, a, s_star, params.reciprocal_radius, tol, check_wood
    )
    if not tail_q < tol:
        raise ConvergenceError(
            f"Ewald reciprocal sum: tail {tail_q:.3e} above tolerance {tol:.3e} "
            f"at radius {params.reciprocal_radius}",
            error_estimate=float(tail_q),
        )
    b32, b52 = _b_terms(xi, s_star)
    m32 = s32 + r32 - b32
    m52 = s52 + r52 - b52
    err = float(tail_r + tail_q)
    return m32, m52, sb, err, 4 * shells * (shells + 1) + nq


def _j1_w_ewald(omega, kx, ky, a, params, tol, check_wood=True):
    """(J_1, W = xi J_2 + J_3, err, terms) by the Ewald split."""
    s_star = params.split_for(a, omega)
    m32, m52, _, err, n = _m_sums(omega, kx, ky, a, s_star, 0.0, params, tol, check_wood)
    j1 = m32 / (2.0 * _SQRTPI)
    w = m52 / (4.0 * _SQRTPI)
    return j1, w, err, n


def _j1_any(omega, kx, ky, a, params, tol):
    """J_1 by whichever route is cheaper at this damping."""
    if omega.imag * a >= 2.0:
        radius = max(4, int(math.ceil(40.0 / (omega.imag * a))))
        val, tail, shells = backends.j_sum_direct_kernel(
            1, omega, kx, ky, a, radius, tol
        )
        return val, float(tail), 4 * shells * (shells + 1)
    j1, _, err, n = _j1_w_ewald(omega, kx, ky, a, params, tol, check_wood=False)
    return j1, err, n


def _j2_damping_integral(omega, kx, ky, a, params, tol):
    """J_2(omega) = integral_0^inf J_1(omega + i u) du by panel quadrature."""
    nodes = params.quadrature_nodes
    x_hi, w_hi = _gl_rule(nodes)
    x_lo, w_lo = _gl_rule(max(nodes // 2, 4))
    total = 0.0 + 0.0j
    quad_err = 0.0
    eval_err = 0.0
    n_terms = 0
    edges = [0.0]
    # resolve both the 1/a panel scale and the integrand's omega-scale
    # structure near u = 0 (branch points at distance ~ Gamma^2/omega)
    width = min(0.25 / a, 0.5 / max(abs(omega), 1.0))
    while edges[-1] * a < 45.0:
        edges.append(edges[-1] + width)
        width *= 1.7
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        acc_hi = 0.0 + 0.0j
        panel_eval_err = 0.0
        for xn, wn in zip(x_hi, w_hi):
            val, err, n = _j1_any(omega + 1j * (mid + half * xn), kx, ky, a, params, tol)
            acc_hi += wn * val
            panel_eval_err += wn * err
            n_terms += n
        acc_lo = 0.0 + 0.0j
        for xn, wn in zip(x_lo, w_lo):
            val, _, _ = _j1_any(omega + 1j * (mid + half * xn), kx, ky, a, params, tol)
            acc_lo += wn * val
        total += half * acc_hi
        quad_err += half * abs(acc_hi - acc_lo)
        eval_err += half * panel_eval_err
    u_max = edges[-1]
    tail = (8.0 / (a * a)) * math.exp(-u_max * a)
    return total, quad_err + eval_err + tail, n_terms


def j_sum(
    s_exp: int,
    omega: Frequency,
    k_par,
    a: float,
    params: EwaldParams | None = None,
    tol: float = 1e-10,
) -> LatticeSumResult:
    """Ewald evaluation of J_s, valid for real or complex omega.

    Raises WoodAnomalyError when some reciprocal vector satisfies
    |omega^2 - q_n^2| <= 1e-8 |omega|^2, and ConvergenceError when the
    configured radii cannot push the error estimate below tol.
    """
    _check_s_exp(s_exp)
    if not a > 0.0:
        raise ValidationError("lattice spacing must be positive")
    params = params or EwaldParams()
    kx, ky = np.asarray(k_par, dtype=float).reshape(2)
    w = complex(omega.omega)

    j1, comb, err, n_terms = _j1_w_ewald(w, kx, ky, a, params, tol)
    if s_exp == 1:
        return LatticeSumResult(complex(j1), err, LatticeSumMethod.EWALD_SPLIT, n_terms)

    j2, err2, n2 = _j2_damping_integral(w, kx, ky, a, params, tol)
    if s_exp == 2:
        return LatticeSumResult(
            complex(j2), err2, LatticeSumMethod.EWALD_SPLIT, n_terms + n2
        )
    # J_3 = W - xi J_2 with xi = -i omega
    xi = -1j * w
    j3 = comb - xi * j2
    return LatticeSumResult(
        complex(j3),
        err + abs(xi) * err2,
        LatticeSumMethod.EWALD_SPLIT,
        n_terms + n2,
    )


# ---------------------------------------------------------------------------
# regularized lattice phi functions
# ---------------------------------------------------------------------------


def diagonal_remainder(kind, eps: float, omega: Frequency) -> complex:
    """Finite part of the renormalized diagonal (self) term at smearing eps.

    Closed form c * xi^p * e^{2 eps xi^2} erfc(xi sqrt(2 eps)); the eps -> 0
    limits are iw/4pi (scalar), -i w^3 (TE), -i w^3/3 (TM), -2i w^3/3 (P),
    approached with an O(sqrt(eps)) defect.
    """
    from .core import ModeKind

    xi = -1j * omega.omega
    if eps > 0.0:
        e = np.exp(2.0 * eps * xi * xi) * backends.erfc_cmplx(xi * math.sqrt(2.0 * eps))
    else:
        e = 1.0
    if kind is ModeKind.SCALAR:
        return complex(-xi / (4.0 * math.pi) * e)
    if kind is ModeKind.TE:
        return complex(-(xi**3) * e)
    if kind is ModeKind.TM:
        return complex(-(xi**3) / 3.0 * e)
    return complex(-2.0 * (xi**3) / 3.0 * e)


def phi_lattice_regularized(
    kind,
    eps: float,
    omega: Frequency,
    k_par,
    a: float,
    renormalized_inverse_coupling: complex,
    params: EwaldParams | None = None,
    tol: float = 1e-10,
) -> complex:
    """Mode-resolved lattice phi-tilde(k) at smearing eps >= 0.

    eps = 0 reproduces the closed forms

      scalar: 1/g_r + i omega/(4 pi) + J_1/(4 pi)
      TE:     1/alpha_ren - i omega^3      - omega^2 J_1
      TM:     1/alpha_ren - i omega^3 / 3  + i omega J_2 - J_3
      P:      1/alpha_ren - 2i omega^3 / 3 - omega^2 J_1 - i omega J_2 + J_3

    (the -i omega^3 pieces are the renormalized self-term finite parts; for
    the electrostatic scheme they are absorbed into the coupling, so pass
    that scheme's inverse coupling and subtract nothing here). For eps > 0
    every proper-time integral gains a lower cutoff 2*eps and the whole
    lattice part a factor e^{2 eps xi^2}; all pieces stay in closed
    error-function form, evaluated with the same Ewald split.
    """
    from .core import ModeKind

    if eps < 0.0:
        raise ValidationError("eps must be >= 0")
    params = params or EwaldParams()
    kx, ky = np.asarray(k_par, dtype=float).reshape(2)
    w = complex(omega.omega)
    xi = -1j * w
    s_star = params.split_for(a, w)
    s_lower = 2.0 * eps
    if s_lower >= s_star:
        s_star = 2.0 * s_lower
    m32, m52, sb, err, _ = _m_sums(w, kx, ky, a, s_star, s_lower, params, tol)
    pref = np.exp(2.0 * eps * xi * xi)

    diag = renormalized_inverse_coupling + diagonal_remainder(kind, eps, omega)
    if kind is ModeKind.SCALAR:
        lattice = (4.0 * math.pi) ** -1.5 * m32
    elif kind is ModeKind.TE:
        lattice = (xi * xi) * m32 / (2.0 * _SQRTPI)
    elif kind is ModeKind.TM:
        lattice = (-0.5 * m52 + sb) / (2.0 * _SQRTPI)
    elif kind is ModeKind.P:
        lattice = (xi * xi * m32 + 0.5 * m52) / (2.0 * _SQRTPI)
    else:
        raise ValidationError(f"unknown mode kind {kind!r}")
    return complex(diag + pref * lattice)
