# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the hot kernels in _kernels_py (same contracts)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, cos, exp, hypot, sin, sqrt

cnp.import_array()

cdef double SQRTPI = sqrt(M_PI)
cdef double INV_SQRTPI = 1.0 / SQRTPI
cdef double SERIES_RADIUS = 2.5
cdef int CF_DEPTH = 80
cdef int SERIES_TERMS = 64

# Weideman rational approximation of the Faddeeva function (module init).
cdef int WEIDEMAN_N = 42
cdef double WEIDEMAN_L
cdef double[::1] WEIDEMAN_A


def _weideman_init(int n):
    big_l = np.sqrt(n / np.sqrt(2.0))
    idx = np.arange(-2 * n + 1, 2 * n)
    theta = (np.pi / (2 * n)) * idx
    t = big_l * np.tan(0.5 * theta)
    fn = np.zeros(idx.size + 1)
    fn[1:] = np.exp(-t * t) * (big_l * big_l + t * t)
    coefs = np.fft.fft(np.fft.fftshift(fn)).real / (4 * n)
    return float(big_l), np.ascontiguousarray(np.flipud(coefs[1 : n + 1]))


_L, _A = _weideman_init(WEIDEMAN_N)
WEIDEMAN_L = _L
WEIDEMAN_A = _A


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double complex cexp_c(double complex z) nogil:
    cdef double e = exp(z.real)
    return e * cos(z.imag) + 1j * (e * sin(z.imag))


cdef double complex _erfc_series(double complex z) nogil:
    cdef double complex z2 = 2.0 * z * z
    cdef double complex term = z
    cdef double complex acc = z
    cdef int n
    for n in range(1, SERIES_TERMS):
        term = term * z2 / (2.0 * n + 1.0)
        acc = acc + term
        if cabs2(term) < 1e-36 * (cabs2(acc) + 1e-300):
            break
    return 1.0 - 2.0 * INV_SQRTPI * cexp_c(-z * z) * acc


cdef double complex _erfc_cf(double complex z) nogil:
    cdef double complex t = 0.0
    cdef int k
    for k in range(CF_DEPTH, 0, -1):
        t = (0.5 * k) / (z + t)
    return cexp_c(-z * z) * INV_SQRTPI / (z + t)


cdef double complex _faddeeva_mid(double complex u) nogil:
    cdef double complex iz = 1j * u
    cdef double complex zden = WEIDEMAN_L - iz
    cdef double complex big_z = (WEIDEMAN_L + iz) / zden
    cdef double complex poly = 0.0
    cdef int i
    for i in range(WEIDEMAN_N):
        poly = poly * big_z + WEIDEMAN_A[i]
    return 2.0 * poly / (zden * zden) + INV_SQRTPI / zden


cdef double complex _erfc_one(double complex z) nogil:
    cdef bint neg = z.real < 0.0
    cdef double complex w = -z if neg else z
    cdef double m2 = cabs2(w)
    cdef double complex out
    cdef double complex t = 0.0
    cdef int k
    if m2 <= SERIES_RADIUS * SERIES_RADIUS:
        out = _erfc_series(w)
    elif m2 < 64.0:
        # erfc(w) = e^{-w^2} w_F(i w), Weideman mid-range
        out = cexp_c(-w * w) * _faddeeva_mid(1j * w)
    else:
        out = _erfc_cf(w)
    if neg:
        out = 2.0 - out
    return out


def erfc_cmplx(z):
    """erfc for a single complex argument (series/Weideman/CF scheme)."""
    return complex(_erfc_one(complex(z)))


def erfc_cmplx_array(z):
    """erfc for arrays of complex argument."""
    z_arr = np.asarray(z, dtype=np.complex128)
    cdef cnp.ndarray flat = np.ascontiguousarray(z_arr.ravel())
    cdef cnp.ndarray out = np.empty_like(flat)
    cdef double complex[::1] zi = flat
    cdef double complex[::1] oi = out
    cdef Py_ssize_t i, n = flat.shape[0]
    for i in range(n):
        oi[i] = _erfc_one(zi[i])
    return out.reshape(z_arr.shape)


def j_sum_direct_kernel(int s_exp, omega, double kx, double ky, double a,
                        int radius, tol):
    """Shell summation of exp(i omega r + i k.a_n)/r^s over 0 < max|n| <= radius."""
    cdef double complex w = omega
    cdef double eta = w.imag * a
    cdef double q = exp(-eta)
    cdef double tol_c = -1.0 if tol is None else float(tol)
    cdef double complex value = 0.0
    cdef double complex iw = 1j * w
    cdef int m, n1, n2, used = radius
    cdef double r, phase, bound
    for m in range(1, radius + 1):
        n1 = m
        for n2 in range(-m, m + 1):
            r = a * hypot(n1, n2)
            phase = (kx * n1 + ky * n2) * a
            value = value + 2.0 * cos(phase) * cexp_c(iw * r) / r ** s_exp
        n2 = m
        for n1 in range(-(m - 1), m):
            r = a * hypot(n1, n2)
            phase = (kx * n1 + ky * n2) * a
            value = value + 2.0 * cos(phase) * cexp_c(iw * r) / r ** s_exp
        if tol_c > 0.0 and q < 1.0:
            bound = 8.0 * (m + 1) * exp(-eta * (m + 1)) / (a * (m + 1)) ** s_exp / (1.0 - q)
            if bound < tol_c:
                used = m
                break
    if q < 1.0:
        bound = 8.0 * (used + 1) * exp(-eta * (used + 1)) / (a * (used + 1)) ** s_exp / (1.0 - q)
    else:
        bound = np.inf
    return complex(value), float(bound), used


cdef inline void _i_upto(double r, double complex xi, double s,
                         double complex emr, double complex epr,
                         double complex *f_out, double complex *h_out) nogil:
    """I_{3/2}(0,s;r) and I_{5/2}(0,s;r) closed forms."""
    cdef double sq = sqrt(s)
    cdef double complex p = r / (2.0 * sq)
    cdef double complex q = xi * sq
    cdef double complex gm = _erfc_one(p - q)
    cdef double complex gp = _erfc_one(p + q)
    cdef double complex f = (SQRTPI / r) * (emr * gm + epr * gp)
    cdef double complex extra = (4.0 / (r * r * sq)) * cexp_c(-r * r / (4.0 * s) - xi * xi * s)
    f_out[0] = f
    h_out[0] = (2.0 / (r * r)) * f - (2.0 * SQRTPI * xi / (r * r)) * (epr * gp - emr * gm) + extra


cdef void _point_sums(double r, double w_cos, double complex xi, double s_star,
                      double s_lower, double complex *acc32,
                      double complex *acc52, double complex *accb,
                      double *mag) nogil:
    cdef double complex emr = cexp_c(-xi * r)
    cdef double complex epr = cexp_c(xi * r)
    cdef double complex f1, h1, f0, h0, i32, i52, bnd
    _i_upto(r, xi, s_star, emr, epr, &f1, &h1)
    if s_lower > 0.0:
        _i_upto(r, xi, s_lower, emr, epr, &f0, &h0)
        i32 = f1 - f0
        i52 = h1 - h0
        bnd = s_lower ** -1.5 * cexp_c(-s_lower * xi * xi - r * r / (4.0 * s_lower))
        accb[0] = accb[0] + w_cos * bnd
    else:
        i32 = f1
        i52 = h1
    acc32[0] = acc32[0] + w_cos * i32
    acc52[0] = acc52[0] + w_cos * i52
    cdef double m1 = sqrt(cabs2(i32))
    cdef double m2 = sqrt(cabs2(i52))
    if m1 > mag[0]:
        mag[0] = m1
    if m2 > mag[0]:
        mag[0] = m2


def ewald_real_kernel(omega, double kx, double ky, double a, double s_star,
                      double s_lower, int max_shells, double tol):
    """Real-space Ewald partial sums; see the numpy twin for the contract."""
    cdef double complex w = omega
    cdef double complex xi = -1j * w
    cdef double complex s32 = 0.0, s52 = 0.0, sb = 0.0
    cdef double tail = np.inf
    cdef double prev_mag = -1.0
    cdef int m, n1, n2, used = max_shells
    cdef double r, wc, mag, shell_mag, ratio
    for m in range(1, max_shells + 1):
        mag = 0.0
        n1 = m
        for n2 in range(-m, m + 1):
            r = a * hypot(n1, n2)
            wc = 2.0 * cos((kx * n1 + ky * n2) * a)
            _point_sums(r, wc, xi, s_star, s_lower, &s32, &s52, &sb, &mag)
        n2 = m
        for n1 in range(-(m - 1), m):
            r = a * hypot(n1, n2)
            wc = 2.0 * cos((kx * n1 + ky * n2) * a)
            _point_sums(r, wc, xi, s_star, s_lower, &s32, &s52, &sb, &mag)
        shell_mag = 8.0 * m * mag
        ratio = exp(-(2 * m + 1) * a * a / (4.0 * s_star)) * (1.0 + 1.0 / m)
        if ratio < 1.0:
            tail = shell_mag * ratio / (1.0 - ratio)
            if tail < tol and prev_mag >= 0.0 and shell_mag < tol:
                used = m
                break
        prev_mag = shell_mag
    return complex(s32), complex(s52), complex(sb), float(tail), used


def field_sum_kernel(omega, double kx, double ky, double a, double x,
                     double y, double z, int radius, double tol):
    """Spherical-wave lattice sum; see the numpy twin for the contract."""
    cdef double complex w = omega
    cdef double eta = w.imag
    cdef double rho = hypot(x, y)
    cdef double complex iw = 1j * w
    cdef double r0 = sqrt(x * x + y * y + z * z)
    cdef double complex value = cexp_c(iw * r0) / r0
    cdef double tail = np.inf
    cdef int m, n1, n2, used = radius
    cdef double dx, dy, rr, rmin, q
    q = exp(-eta * a)
    for m in range(1, radius + 1):
        for n1 in (-m, m):
            for n2 in range(-m, m + 1):
                dx = x - a * n1
                dy = y - a * n2
                rr = sqrt(dx * dx + dy * dy + z * z)
                value = value + cexp_c(1j * (w * rr + (kx * n1 + ky * n2) * a)) / rr
        for n2 in (-m, m):
            for n1 in range(-(m - 1), m):
                dx = x - a * n1
                dy = y - a * n2
                rr = sqrt(dx * dx + dy * dy + z * z)
                value = value + cexp_c(1j * (w * rr + (kx * n1 + ky * n2) * a)) / rr
        rmin = a * (m + 1) - rho
        if rmin > 0.0 and q < 1.0:
            tail = 8.0 * (m + 1) * exp(-eta * rmin) / rmin / (1.0 - q)
            if tail < tol:
                used = m
                break
    return complex(value), float(tail), used


def assemble_kernel(cnp.ndarray[cnp.float64_t, ndim=2] centers, double alpha_se,
                    omega):
    """Dense multi-center interaction matrix."""
    cdef double complex w = omega
    cdef Py_ssize_t n = centers.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] mat = np.empty((n, n), dtype=np.complex128)
    cdef double complex diag = alpha_se - 1j * w
    cdef double complex iw = 1j * w
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, d
    cdef double complex kern
    for i in range(n):
        mat[i, i] = diag
        for j in range(i + 1, n):
            dx = centers[i, 0] - centers[j, 0]
            dy = centers[i, 1] - centers[j, 1]
            dz = centers[i, 2] - centers[j, 2]
            d = sqrt(dx * dx + dy * dy + dz * dz)
            kern = -cexp_c(iw * d) / d
            mat[i, j] = kern
            mat[j, i] = kern
    return mat
