"""Arbitrary-geometry zero-range multiple scattering (scalar / SAE form).

The amplitudes f_n of the outgoing spherical waves solve the dense system

    (alpha_SE - i omega) f_m - sum_{n != m} e^{i omega d_mn}/d_mn f_n = e^{i k.a_m}

whose homogeneous solutions (detected via the smallest singular value)
are the intrinsic modes of the arrangement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import backends
from .core import Frequency, WaveVector
from .errors import SingularSystemError, ValidationError
from .single_center import ExtensionParameter

CONDITION_LIMIT = 1e12
DEFAULT_MAX_CENTERS = 4000


@dataclass(frozen=True)
class MultiCenterSystem:
    centers: np.ndarray
    alpha_se: ExtensionParameter
    omega: Frequency
    k: WaveVector
    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def size(self) -> int:
        return len(self.rhs)


@dataclass(frozen=True)
class AmplitudeSolution:
    f: np.ndarray
    residual_norm: float


def assemble(centers, alpha_se: ExtensionParameter, omega: Frequency,
             k: WaveVector, max_centers: int = DEFAULT_MAX_CENTERS) -> MultiCenterSystem:
    """Build the dense interaction matrix and plane-wave right-hand side.

    Dense storage and direct solve target desk-scale systems; raise the
    max_centers cap explicitly for larger ones.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.ndim != 2 or centers.shape[1] != 3:
        raise ValidationError("centers must be an (N, 3) array")
    n = centers.shape[0]
    if n < 1:
        raise ValidationError("need at least one center")
    if n > max_centers:
        raise ValidationError(
            f"{n} centers exceeds the dense-solver cap {max_centers}; "
            "pass max_centers explicitly to override"
        )
    if n > 1:
        diff = centers[:, None, :] - centers[None, :, :]
        d2 = np.sum(diff * diff, axis=2)
        np.fill_diagonal(d2, np.inf)
        if np.min(d2) <= 0.0:
            raise ValidationError("centers must be pairwise distinct")
    matrix = backends.assemble_kernel(
        np.ascontiguousarray(centers), alpha_se.alpha_se, complex(omega.omega)
    )
    phases = centers @ np.array([k.k_par[0], k.k_par[1], k.k3], dtype=complex)
    rhs = np.exp(1j * phases)
    return MultiCenterSystem(
        centers=centers, alpha_se=alpha_se, omega=omega, k=k, matrix=matrix, rhs=rhs
    )


def solve(system: MultiCenterSystem) -> AmplitudeSolution:
    """LU solve with a condition estimate; near-singular systems are refused."""
    mat = system.matrix
    lu, piv = scipy.linalg.lu_factor(mat)
    # 1-norm condition estimate from the factorization
    diag = np.abs(np.diag(lu))
    if np.min(diag) == 0.0:
        raise SingularSystemError("singular system matrix", condition_estimate=np.inf)
    norm1 = np.linalg.norm(mat, 1)
    try:
        rcond = scipy.linalg.lapack.zgecon(lu, norm1)[0]
    except Exception:
        rcond = 1.0 / (norm1 * np.linalg.norm(np.linalg.inv(mat), 1))
    cond = 1.0 / max(rcond, 1e-300)
    # relative conditioning misses the degenerate pole case (e.g. a 1x1
    # system exactly at the amplitude pole), so also compare the matrix
    # scale against the physical scale alpha_SE - i omega
    scale = max(1.0, abs(system.alpha_se.alpha_se) + abs(system.omega.omega))
    if cond > CONDITION_LIMIT or norm1 < 1e-8 * scale:
        cond = max(cond, scale / max(norm1, 1e-300))
        raise SingularSystemError(
            f"system near-singular (condition estimate {cond:.3e}): "
            "close to an intrinsic mode",
            condition_estimate=float(cond),
        )
    f = scipy.linalg.lu_solve((lu, piv), system.rhs)
    residual = float(np.linalg.norm(mat @ f - system.rhs))
    return AmplitudeSolution(f=f, residual_norm=residual)


def field_at(centers, solution: AmplitudeSolution, x, k: WaveVector,
             omega: Frequency) -> complex:
    """Total field e^{ik.x} + sum_n f_n e^{i omega |x-a_n|}/|x-a_n|."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    x = np.asarray(x, dtype=float).reshape(3)
    d = np.linalg.norm(centers - x[None, :], axis=1)
    if np.min(d) == 0.0:
        raise ValidationError("field evaluation at a center")
    inc = np.exp(1j * k.dot3(x))
    return complex(inc + np.sum(solution.f * np.exp(1j * omega.omega * d) / d))


def smallest_singular_value(centers, alpha_se: ExtensionParameter,
                            omega: Frequency) -> float:
    """sigma_min of the system matrix (scale-robust singularity measure)."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    mat = backends.assemble_kernel(
        np.ascontiguousarray(centers), alpha_se.alpha_se, complex(omega.omega)
    )
    return float(scipy.linalg.svdvals(mat)[-1])


def detect_intrinsic_modes(centers, alpha_se: ExtensionParameter,
                           omega_scan) -> list[tuple[complex, float]]:
    """Scan of sigma_min over complex frequencies; minima flag intrinsic modes."""
    out = []
    for w in omega_scan:
        out.append((complex(w), smallest_singular_value(centers, alpha_se, Frequency(w))))
    return out
