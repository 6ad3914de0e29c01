"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set DIRAC_LATTICE_BACKEND to "compiled" or "python" to force a choice;
"compiled" raises if the extension was not built.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

_FUNCTIONS = (
    "erfc_cmplx",
    "erfc_cmplx_array",
    "j_sum_direct_kernel",
    "ewald_real_kernel",
    "field_sum_kernel",
    "assemble_kernel",
)


def _load() -> tuple[ModuleType, str]:
    choice = os.environ.get("DIRAC_LATTICE_BACKEND", "").strip().lower()
    if choice == "python":
        return _kernels_py, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels, "compiled"
    except ImportError:
        if choice == "compiled":
            raise ImportError(
                "DIRAC_LATTICE_BACKEND=compiled but the extension is not built; "
                "run `python setup.py build_ext --inplace`"
            )
        return _kernels_py, "python"


_BACKEND, _BACKEND_NAME = _load()


def backend_name() -> str:
    return _BACKEND_NAME


def get_backend() -> ModuleType:
    return _BACKEND


erfc_cmplx = _BACKEND.erfc_cmplx
erfc_cmplx_array = _BACKEND.erfc_cmplx_array
j_sum_direct_kernel = _BACKEND.j_sum_direct_kernel
ewald_real_kernel = _BACKEND.ewald_real_kernel
field_sum_kernel = _BACKEND.field_sum_kernel
assemble_kernel = _BACKEND.assemble_kernel
