"""Pure-numpy implementations of the hot kernels.

A Cython twin (``_kernels``) provides the same functions; ``backends``
selects whichever is importable. Everything here is vectorized per lattice
shell, so the fallback stays usable for the full test suite, just slower.

All lattice kernels share conventions:

* square lattice sites a*(n1, n2, 0), the origin excluded where noted;
* xi = -i*omega (imaginary-frequency variable), so exp(i*omega*r) =
  exp(-xi*r);
* shells are enumerated by the sup-norm m = max(|n1|, |n2|), and each
  kernel returns a monotone tail bound based on the decay rate of its own
  summand.
"""

from __future__ import annotations

import numpy as np

_SQRTPI = np.sqrt(np.pi)
_INV_SQRTPI = 1.0 / _SQRTPI

# ---------------------------------------------------------------------------
# complementary error function for complex argument
# ---------------------------------------------------------------------------

_ERFC_SERIES_RADIUS = 2.5
_ERFC_CF_DEPTH = 80
_ERFC_SERIES_TERMS = 64


def _erfc_series(z: np.ndarray) -> np.ndarray:
    # erfc(z) = 1 - (2/sqrt(pi)) e^{-z^2} sum_n 2^n z^{2n+1} / (2n+1)!!
    # The summand is cancellation-free for real z and mild for |z| <= 2.5.
    z2 = 2.0 * z * z
    term = z.astype(np.complex128).copy()
    acc = term.copy()
    for n in range(1, _ERFC_SERIES_TERMS):
        term = term * z2 / (2 * n + 1)
        acc += term
        if np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(acc)), 1e-300):
            break
    return 1.0 - 2.0 * _INV_SQRTPI * np.exp(-z * z) * acc


def _erfc_cf(z: np.ndarray) -> np.ndarray:
    # Laplace continued fraction, fixed-depth backward recursion:
    # erfc(z) = e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(...))))
    # Valid for Re z > 0; used only for |z| > series radius.
    t = np.zeros_like(z)
    for k in range(_ERFC_CF_DEPTH, 0, -1):
        t = (0.5 * k) / (z + t)
    return np.exp(-z * z) * _INV_SQRTPI / (z + t)


def _weideman_coeffs(n: int):
    # Rational approximation of the Faddeeva function on the upper half
    # plane, J.A.C. Weideman, SIAM J. Numer. Anal. 31 (1994) 1497.
    big_l = np.sqrt(n / np.sqrt(2.0))
    idx = np.arange(-2 * n + 1, 2 * n)
    theta = (np.pi / (2 * n)) * idx
    t = big_l * np.tan(0.5 * theta)
    fn = np.zeros(idx.size + 1)
    fn[1:] = np.exp(-t * t) * (big_l * big_l + t * t)
    coefs = np.fft.fft(np.fft.fftshift(fn)).real / (4 * n)
    return big_l, np.flipud(coefs[1 : n + 1])


_WEIDEMAN_N = 42
_WEIDEMAN_L, _WEIDEMAN_A = _weideman_coeffs(_WEIDEMAN_N)


def _faddeeva_upper(u: np.ndarray) -> np.ndarray:
    """Faddeeva w(u) for Im(u) >= 0: Weideman inside |u| < 8, CF outside."""
    out = np.empty_like(u)
    far = np.abs(u) >= 8.0
    if np.any(far):
        uf = u[far]
        t = np.zeros_like(uf)
        for k in range(_ERFC_CF_DEPTH, 0, -1):
            t = (0.5 * k) / (uf - t)
        out[far] = 1j * _INV_SQRTPI / (uf - t)
    if np.any(~far):
        un = u[~far]
        big_l = _WEIDEMAN_L
        zz = (big_l + 1j * un) / (big_l - 1j * un)
        out[~far] = (
            2.0 * np.polyval(_WEIDEMAN_A, zz) / (big_l - 1j * un) ** 2
            + _INV_SQRTPI / (big_l - 1j * un)
        )
    return out


def _erfc_via_faddeeva(z: np.ndarray) -> np.ndarray:
    # erfc(z) = e^{-z^2} w(iz); Im(iz) = Re z >= 0 here, which rescues the
    # near-imaginary-axis region where the erfc fraction fails.
    return np.exp(-z * z) * _faddeeva_upper(1j * z)


def erfc_cmplx_array(z: np.ndarray) -> np.ndarray:
    """erfc for arrays of complex argument (series + continued fraction)."""
    z = np.asarray(z, dtype=np.complex128)
    flat = z.ravel()
    out = np.empty_like(flat)

    neg = flat.real < 0.0
    w = np.where(neg, -flat, flat)

    # Series in the disc, Weideman-backed Faddeeva in the annulus (the erfc
    # fraction is unreliable near the imaginary axis), plain fraction far out.
    mag = np.abs(w)
    small = mag <= _ERFC_SERIES_RADIUS
    mid = ~small & (mag < 8.0)
    far = mag >= 8.0
    if np.any(small):
        out[small] = _erfc_series(w[small])
    if np.any(mid):
        out[mid] = _erfc_via_faddeeva(w[mid])
    if np.any(far):
        out[far] = _erfc_cf(w[far])

    out[neg] = 2.0 - out[neg]
    return out.reshape(z.shape)


def erfc_cmplx(z: complex) -> complex:
    """erfc for a single complex argument."""
    return complex(erfc_cmplx_array(np.array([z]))[0])


# ---------------------------------------------------------------------------
# shell enumeration
# ---------------------------------------------------------------------------


def _half_shell(m: int):
    """Canonical half of the square shell max(|n1|,|n2|) = m.

    Each returned point represents the pair {n, -n}; together the pairs
    tile the full shell of 8m points.
    """
    n2a = np.arange(-m, m + 1)
    n1a = np.full(2 * m + 1, m)
    n1b = np.arange(-(m - 1), m)
    n2b = np.full(2 * m - 1, m)
    return np.concatenate([n1a, n1b]), np.concatenate([n2a, n2b])


def _full_shell(m: int):
    n1h, n2h = _half_shell(m)
    return np.concatenate([n1h, -n1h]), np.concatenate([n2h, -n2h])


# ---------------------------------------------------------------------------
# direct damped lattice sum
# ---------------------------------------------------------------------------


def j_sum_direct_kernel(s_exp, omega, kx, ky, a, radius, tol):
    """Sum exp(i*omega*r + i*k.a_n)/r^s over 0 < max|n| <= radius.

    Requires Im(omega) > 0. Returns (value, tail_bound, shells_used); the
    tail bound is the geometric shell bound with damping rate Im(omega)*a.
    Stops early once the bound drops below tol (if tol is not None).
    """
    eta = omega.imag * a
    value = 0.0 + 0.0j
    used = radius
    q = np.exp(-eta)
    for m in range(1, radius + 1):
        n1, n2 = _half_shell(m)
        r = a * np.hypot(n1, n2)
        phase = (kx * n1 + ky * n2) * a
        value += np.sum(2.0 * np.cos(phase) * np.exp(1j * omega * r) / r**s_exp)
        bound = _direct_tail(s_exp, eta, a, m, q)
        if tol is not None and bound < tol:
            used = m
            break
    tail = _direct_tail(s_exp, eta, a, used, q)
    return value, tail, used


def _direct_tail(s_exp, eta, a, m, q):
    # shells m' > m: 8 m' e^{-eta m'} / (a m')^s, ratio <= q for s >= 1
    if q >= 1.0:
        return np.inf
    b_next = 8.0 * (m + 1) * np.exp(-eta * (m + 1)) / (a * (m + 1)) ** s_exp
    return b_next / (1.0 - q)


# ---------------------------------------------------------------------------
# Ewald real-space partial sums
# ---------------------------------------------------------------------------


def _i32_upto(r, xi, s, emr, epr):
    """integral_0^s u^{-3/2} exp(-u xi^2 - r^2/(4u)) du, vectorized in r.

    emr = exp(-xi r), epr = exp(+xi r) are passed in to share them between
    the nu = 3/2 and nu = 5/2 pieces.
    """
    p = r / (2.0 * np.sqrt(s))
    q = xi * np.sqrt(s)
    gm = erfc_cmplx_array(p - q)
    gp = erfc_cmplx_array(p + q)
    return (_SQRTPI / r) * (emr * gm + epr * gp), gm, gp


def _i52_upto(r, xi, s, emr, epr):
    """integral_0^s u^{-5/2} exp(-u xi^2 - r^2/(4u)) du."""
    f, gm, gp = _i32_upto(r, xi, s, emr, epr)
    extra = (4.0 / (r * r * np.sqrt(s))) * np.exp(-r * r / (4.0 * s) - xi * xi * s)
    h = (2.0 / (r * r)) * f - (2.0 * _SQRTPI * xi / (r * r)) * (epr * gp - emr * gm) + extra
    return h, f


def ewald_real_kernel(omega, kx, ky, a, s_star, s_lower, max_shells, tol):
    """Real-space (small proper time) parts of the Ewald-split lattice sums.

    Returns (S32, S52, SB, tail, shells) where

      S32 = sum'_n e^{i k.a_n} I_{3/2}(s_lower, s_star; r_n)
      S52 = sum'_n e^{i k.a_n} I_{5/2}(s_lower, s_star; r_n)
      SB  = sum'_n e^{i k.a_n} s_lower^{-3/2} e^{-s_lower xi^2 - r_n^2/(4 s_lower)}

    with I_nu(s0, s1; r) = integral_{s0}^{s1} u^{-nu} e^{-u xi^2 - r^2/4u} du.
    SB is the boundary term needed by the TM combination when s_lower > 0
    (it is 0 for s_lower = 0). The summand decays like exp(-r^2/(4 s_star)),
    which drives the shell tail bound.
    """
    xi = -1j * omega
    s32 = 0.0 + 0.0j
    s52 = 0.0 + 0.0j
    sb = 0.0 + 0.0j
    prev_mag = None
    used = max_shells
    tail = np.inf
    for m in range(1, max_shells + 1):
        n1, n2 = _half_shell(m)
        r = a * np.hypot(n1, n2)
        w = 2.0 * np.cos((kx * n1 + ky * n2) * a)
        emr = np.exp(-xi * r)
        epr = np.exp(xi * r)
        h1, f1 = _i52_upto(r, xi, s_star, emr, epr)
        if s_lower > 0.0:
            h0, f0 = _i52_upto(r, xi, s_lower, emr, epr)
            i32 = f1 - f0
            i52 = h1 - h0
            bnd = s_lower**-1.5 * np.exp(-s_lower * xi * xi - r * r / (4.0 * s_lower))
            sb += np.sum(w * bnd)
        else:
            i32 = f1
            i52 = h1
        s32 += np.sum(w * i32)
        s52 += np.sum(w * i52)
        mag = max(np.max(np.abs(i32)), np.max(np.abs(i52)))
        shell_mag = 8.0 * m * mag
        ratio = np.exp(-(2 * m + 1) * a * a / (4.0 * s_star)) * (1.0 + 1.0 / m)
        if ratio < 1.0:
            tail = shell_mag * ratio / (1.0 - ratio)
            if tail < tol and prev_mag is not None and shell_mag < tol:
                used = m
                break
        prev_mag = shell_mag
    return s32, s52, sb, tail, used


# ---------------------------------------------------------------------------
# spherical-wave lattice field sum
# ---------------------------------------------------------------------------


def field_sum_kernel(omega, kx, ky, a, x, y, z, radius, tol):
    """F(x) = sum_n exp(i omega |x - a_n| + i k.a_n)/|x - a_n|, all n.

    Needs Im(omega) > 0 for convergence. Returns (value, tail_bound,
    shells_used); stops early when the damped tail bound is below tol.
    """
    eta = omega.imag
    rho = np.hypot(x, y)
    value = np.exp(1j * omega * np.sqrt(x * x + y * y + z * z))
    value = value / np.sqrt(x * x + y * y + z * z)  # n = 0 term
    used = radius
    tail = np.inf
    for m in range(1, radius + 1):
        n1, n2 = _full_shell(m)
        dx = x - a * n1
        dy = y - a * n2
        rr = np.sqrt(dx * dx + dy * dy + z * z)
        phase = (kx * n1 + ky * n2) * a
        value += np.sum(np.exp(1j * (omega * rr + phase)) / rr)
        rmin = a * (m + 1) - rho
        if rmin > 0.0:
            q = np.exp(-eta * a)
            if q < 1.0:
                tail = 8.0 * (m + 1) * np.exp(-eta * rmin) / rmin / (1.0 - q)
                if tail < tol:
                    used = m
                    break
    return value, tail, used


# ---------------------------------------------------------------------------
# multi-center system assembly
# ---------------------------------------------------------------------------


def assemble_kernel(centers: np.ndarray, alpha_se: float, omega: complex) -> np.ndarray:
    """Dense interaction matrix: diag alpha_SE - i omega, off-diag -e^{i omega d}/d."""
    n = centers.shape[0]
    diff = centers[:, None, :] - centers[None, :, :]
    d = np.sqrt(np.sum(diff * diff, axis=2))
    np.fill_diagonal(d, 1.0)
    mat = -np.exp(1j * omega * d) / d
    np.fill_diagonal(mat, alpha_se - 1j * omega)
    return mat.astype(np.complex128)
