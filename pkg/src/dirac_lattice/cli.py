"""Command-line interface.

Subcommands: sum, single, solve, reflect, field, limits. All results are
emitted as a JSON object {"inputs", "values", "error_estimates", "method"}
on stdout (complex numbers as {"re": ..., "im": ...}); --csv additionally
writes any sweep table. Validation errors exit 2, numerical failures 3,
with a machine-readable error object on stderr.
"""

from __future__ import annotations

import argparse
import csv as _csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import Frequency, LatticeConfig, Mode, ModeKind, make_incident_wave
from .errors import ConvergenceError, DiracLatticeError, ValidationError, WoodAnomalyError
from .lattice_sums import EwaldParams, j_sum, j_sum_direct
from .limits import order_of_limits_report, r_continuum
from .multi_center import assemble, detect_intrinsic_modes, solve
from .plane_lattice import (
    f0_bloch,
    field_planewave,
    field_spherical,
    flux_balance,
    phi_tilde,
    propagating_orders,
    reflection,
)
from .single_center import (
    ExtensionParameter,
    RenormScheme,
    bound_state,
    phi0,
    renormalize_coupling,
    sae_boundary_params,
    scattering_amplitude_sae,
    scattering_length,
)

_MODE_NAMES = {
    "scalar": ModeKind.SCALAR,
    "te": ModeKind.TE,
    "tm": ModeKind.TM,
    "p": ModeKind.P,
}


def _cnum(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _encode(obj):
    if isinstance(obj, complex):
        return _cnum(obj)
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_encode(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _emit(payload: dict, csv_path: str | None = None, csv_rows=None, csv_header=None):
    print(json.dumps(_encode(payload), indent=2, sort_keys=True))
    if csv_path and csv_rows is not None:
        with open(csv_path, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(csv_header)
            writer.writerows(csv_rows)


def _max_workers() -> int:
    env = os.environ.get("DIRAC_LATTICE_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _sweep_map(fn, points):
    workers = _max_workers()
    if workers == 1 or len(points) <= 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points))


def _omega(args) -> Frequency:
    return Frequency(args.omega + 1j * getattr(args, "omega_im", 0.0))


def _spacing(args) -> float:
    if (args.a is None) == (getattr(args, "rho", None) is None):
        raise ValidationError("pass exactly one of --a / --rho")
    if args.a is not None:
        return LatticeConfig(args.a).a
    return LatticeConfig.from_density(args.rho).a


def _mode(args) -> Mode:
    kind = _MODE_NAMES[args.mode]
    return Mode(kind, coupling=args.coupling)


def _inverse_coupling(args, mode: Mode, omega: Frequency) -> complex:
    """Inverse renormalized coupling; --bare-eps treats --coupling as bare."""
    bare_eps = getattr(args, "bare_eps", None)
    if bare_eps is None:
        return mode.inverse_coupling
    scheme = RenormScheme(getattr(args, "scheme", "field_theoretic"))
    return renormalize_coupling(mode, bare_eps, scheme, omega)


def _ewald_params(args) -> EwaldParams:
    kw = {}
    if getattr(args, "split", None) is not None:
        kw["split_parameter"] = args.split
    if getattr(args, "nodes", None) is not None:
        kw["quadrature_nodes"] = args.nodes
    return EwaldParams(**kw)


def _sweep_values(spec: str) -> list[float]:
    """Parse 'start:stop:count' (geometric if prefixed 'g') or comma list."""
    if ":" in spec:
        geometric = spec.startswith("g")
        body = spec[1:] if geometric else spec
        start, stop, count = body.split(":")
        start, stop, count = float(start), float(stop), int(count)
        if count < 1:
            raise ValidationError("sweep needs at least one point")
        if count == 1:
            return [start]
        if geometric:
            return list(np.geomspace(start, stop, count))
        return list(np.linspace(start, stop, count))
    return [float(t) for t in spec.split(",") if t]


def _cmd_sum(args) -> dict:
    omega = _omega(args)
    params = _ewald_params(args)
    if args.sweep_a and args.sweep_kx:
        raise ValidationError("sweep either a or kx, not both")
    if args.sweep_a:
        points = [(a, (args.kpar[0], args.kpar[1])) for a in _sweep_values(args.sweep_a)]
    elif args.sweep_kx:
        a0 = _spacing(args)
        points = [(a0, (kx, args.kpar[1])) for kx in _sweep_values(args.sweep_kx)]
    else:
        points = [(_spacing(args), (args.kpar[0], args.kpar[1]))]

    def one(pt):
        a, kp = pt
        if args.direct:
            res = j_sum_direct(args.s, omega, kp, a, radius=args.radius, tol=args.tol)
        else:
            res = j_sum(args.s, omega, kp, a, params, tol=args.tol)
        return a, kp, res

    rows = _sweep_map(one, points)
    values = {
        f"J_{args.s}": [r.value for _, _, r in rows],
        "a": [a for a, _, _ in rows],
        "k_par": [list(kp) for _, kp, _ in rows],
    }
    errors = {f"J_{args.s}": [r.abs_error_estimate for _, _, r in rows]}
    method = rows[0][2].method.value
    csv_rows = [
        (a, kp[0], kp[1], r.value.real, r.value.imag, r.abs_error_estimate)
        for a, kp, r in rows
    ]
    return {
        "payload": {
            "inputs": {
                "s": args.s,
                "omega": omega.omega,
                "tol": args.tol,
            },
            "values": values,
            "error_estimates": errors,
            "method": method,
        },
        "csv_rows": csv_rows,
        "csv_header": ("a", "kx", "ky", "re", "im", "abs_error_estimate"),
    }


def _cmd_single(args) -> dict:
    omega = _omega(args)
    alpha = ExtensionParameter(args.alpha_se)
    values: dict = {
        "scattering_amplitude": scattering_amplitude_sae(alpha, omega),
        "scattering_length": None if args.alpha_se == 0 else scattering_length(alpha),
    }
    bs = bound_state(alpha)
    values["bound_state"] = (
        None if bs is None else {"kappa": bs.kappa, "normalization": bs.normalization}
    )
    if args.eps is not None:
        mu, theta = sae_boundary_params(alpha, args.eps)
        values["boundary_params"] = {"mu": mu, "theta": theta}
    scheme = RenormScheme(args.scheme)
    for name, kind in _MODE_NAMES.items():
        inv = _inverse_coupling(args, Mode(kind, coupling=args.coupling), omega)
        values[f"phi0_{name}"] = phi0(kind, inv, omega, scheme)
    return {
        "payload": {
            "inputs": {
                "alpha_se": args.alpha_se,
                "omega": omega.omega,
                "eps": args.eps,
                "scheme": args.scheme,
                "coupling": args.coupling,
            },
            "values": values,
            "error_estimates": {},
            "method": "closed_form",
        }
    }


def _read_centers(path: str) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for rec in _csv.reader(fh):
            if not rec:
                continue
            try:
                rows.append([float(rec[0]), float(rec[1]), float(rec[2])])
            except (ValueError, IndexError):
                if not rows:
                    continue  # header line
                raise ValidationError(f"malformed centers row: {rec!r}")
    if not rows:
        raise ValidationError(f"no centers found in {path}")
    return np.asarray(rows, dtype=float)


def _cmd_solve(args) -> dict:
    omega = _omega(args)
    centers = _read_centers(args.centers)
    k = make_incident_wave(omega, (args.kpar[0], args.kpar[1]))
    alpha = ExtensionParameter(args.alpha_se)
    if args.scan_omega_im:
        scan = [args.omega + 1j * v for v in _sweep_values(args.scan_omega_im)]
        modes = detect_intrinsic_modes(centers, alpha, scan)
        return {
            "payload": {
                "inputs": {"alpha_se": args.alpha_se, "centers": args.centers,
                           "scan": [w for w, _ in modes]},
                "values": {"sigma_min": [s for _, s in modes]},
                "error_estimates": {},
                "method": "svd_scan",
            },
            "csv_rows": [(w.real, w.imag, s) for w, s in modes],
            "csv_header": ("omega_re", "omega_im", "sigma_min"),
        }
    system = assemble(centers, alpha, omega, k)
    sol = solve(system)
    csv_rows = [
        (c[0], c[1], c[2], f.real, f.imag) for c, f in zip(centers, sol.f)
    ]
    return {
        "payload": {
            "inputs": {
                "alpha_se": args.alpha_se,
                "omega": omega.omega,
                "k_par": list(args.kpar),
                "n_centers": len(centers),
            },
            "values": {"amplitudes": list(sol.f)},
            "error_estimates": {"residual_norm": sol.residual_norm},
            "method": "dense_lu",
        },
        "csv_rows": csv_rows,
        "csv_header": ("x", "y", "z", "f_re", "f_im"),
    }


def _cmd_reflect(args) -> dict:
    omega = _omega(args)
    a = _spacing(args)
    params = _ewald_params(args)
    kp_list = (
        [(v, args.kpar[1]) for v in _sweep_values(args.sweep_kx)]
        if args.sweep_kx
        else [(args.kpar[0], args.kpar[1])]
    )

    def one(kp):
        k = make_incident_wave(omega, kp)
        if args.mode == "scalar" and args.alpha_se is not None:
            alpha = ExtensionParameter(args.alpha_se)
            f0 = f0_bloch(alpha, omega, k, a, params, tol=args.tol)
            phi_value = -1.0 / (4.0 * math.pi * f0)
            mode = Mode(ModeKind.SCALAR, coupling=1.0)
        else:
            mode = _mode(args)
            inv = _inverse_coupling(args, mode, omega)
            phi_value = phi_tilde(mode, inv, omega, k, a, params, tol=args.tol)
        orders = propagating_orders(omega, k.k_par, a)
        refl = {o.n: reflection(mode, phi_value, omega, k, a, o.n) for o in orders}
        if args.mode == "scalar" and args.alpha_se is not None:
            deficit = flux_balance(omega, k, a, alpha=ExtensionParameter(args.alpha_se),
                                   params=params, tol=args.tol)
        else:
            deficit = flux_balance(omega, k, a, mode=mode, params=params, tol=args.tol)
        return kp, refl, deficit


    rows = _sweep_map(one, kp_list)
    values = []
    csv_rows = []
    for kp, refl, deficit in rows:
        values.append(
            {
                "k_par": list(kp),
                "orders": [
                    {"n": list(n), "r": r} for n, r in sorted(refl.items())
                ],
                "flux_deficit": deficit,
                "flux_alert_exceeded": abs(deficit) > args.flux_alert,
            }
        )
        for n, r in sorted(refl.items()):
            csv_rows.append((kp[0], kp[1], n[0], n[1], r.real, r.imag, deficit))
    return {
        "payload": {
            "inputs": {
                "mode": args.mode,
                "omega": omega.omega,
                "a": a,
                "alpha_se": args.alpha_se,
                "coupling": args.coupling,
                "tol": args.tol,
            },
            "values": {"sweep": values},
            "error_estimates": {"flux_deficit_alert": args.flux_alert},
            "method": "ewald_bloch",
        },
        "csv_rows": csv_rows,
        "csv_header": ("kx", "ky", "n1", "n2", "r_re", "r_im", "flux_deficit"),
    }


def _cmd_field(args) -> dict:
    omega = _omega(args)
    a = _spacing(args)
    params = _ewald_params(args)
    k = make_incident_wave(omega, (args.kpar[0], args.kpar[1]))
    pts = np.array(args.points, dtype=float).reshape(-1, 3)
    mode = _mode(args)
    if mode.kind is ModeKind.SCALAR and args.alpha_se is not None:
        alpha = ExtensionParameter(args.alpha_se)
        f0 = f0_bloch(alpha, omega, k, a, params, tol=args.tol)
        phi_value = -1.0 / (4.0 * math.pi * f0)
    else:
        phi_value = phi_tilde(mode, mode.inverse_coupling, omega, k, a, params,
                              tol=args.tol)
        f0 = -1.0 / (4.0 * math.pi * phi_value)

    def one(x):
        row = {"x": list(x)}
        row["planewave"] = field_planewave(mode, phi_value, x, omega, k, a)
        if omega.omega.imag > 0.0 and mode.kind is ModeKind.SCALAR:
            row["spherical"] = field_spherical(f0, x, omega, k, a, tol=args.tol)
        else:
            row["spherical"] = None
        return row

    rows = _sweep_map(one, list(pts))
    csv_rows = []
    for row in rows:
        pw = row["planewave"]
        sp = row["spherical"]
        csv_rows.append(
            (*row["x"], pw.real, pw.imag,
             sp.real if sp is not None else "", sp.imag if sp is not None else "")
        )
    return {
        "payload": {
            "inputs": {
                "mode": args.mode,
                "omega": omega.omega,
                "a": a,
                "k_par": list(args.kpar),
            },
            "values": {"samples": rows},
            "error_estimates": {"tol": args.tol},
            "method": "planewave+spherical",
        },
        "csv_rows": csv_rows,
        "csv_header": ("x", "y", "z", "pw_re", "pw_im", "sph_re", "sph_im"),
    }


def _cmd_limits(args) -> dict:
    omega = _omega(args)
    a = _spacing(args)
    k = make_incident_wave(omega, (args.kpar[0], args.kpar[1]))
    kind = _MODE_NAMES[args.mode]
    rep = order_of_limits_report(kind, omega, k, args.coupling, a)
    values = {
        "outcome": rep.outcome.value,
        "path": rep.path.value,
        "limiting_r": rep.limiting_r,
        "divergence_exponent": rep.divergence_exponent,
        "subtracted_r": rep.subtracted_r,
        "note": rep.note,
    }
    if kind is not ModeKind.P:
        values["r_continuum"] = r_continuum(kind, omega, k, coupling=args.coupling, a=a)
    return {
        "payload": {
            "inputs": {
                "mode": args.mode,
                "omega": omega.omega,
                "a": a,
                "coupling": args.coupling,
                "k_par": list(args.kpar),
            },
            "values": values,
            "error_estimates": {},
            "method": "order_of_limits",
        }
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dirac-lattice",
        description="Scattering on 2D lattices of point scatterers / dipoles",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, kpar=True, lattice=True, ewald=True):
        sp.add_argument("--omega", type=float, required=True)
        sp.add_argument("--omega-im", type=float, default=0.0)
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--csv", type=str, default=None)
        if kpar:
            sp.add_argument("--kpar", type=float, nargs=2, default=(0.0, 0.0))
        if lattice:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--a", type=float, default=None)
            g.add_argument("--rho", type=float, default=None)
        if ewald:
            sp.add_argument("--split", type=float, default=None)
            sp.add_argument("--nodes", type=int, default=None)

    sp = sub.add_parser("sum", help="lattice sums J_s over an a- or k-sweep")
    common(sp)
    sp.add_argument("--s", type=int, choices=(1, 2, 3), required=True)
    sp.add_argument("--sweep-a", type=str, default=None,
                    help="a-sweep 'start:stop:count' (prefix g for geometric) or list")
    sp.add_argument("--sweep-kx", type=str, default=None,
                    help="kx-sweep at fixed a (same syntax)")
    sp.add_argument("--direct", action="store_true",
                    help="force the damped direct sum (needs Im omega > 0)")
    sp.add_argument("--radius", type=int, default=2000)
    sp.set_defaults(func=_cmd_sum)

    sp = sub.add_parser("single", help="single-center quantities")
    sp.add_argument("--omega", type=float, default=1.0)
    sp.add_argument("--omega-im", type=float, default=0.0)
    sp.add_argument("--alpha-se", type=float, required=True)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--scheme", choices=("field_theoretic", "electrostatic"),
                    default="field_theoretic")
    sp.add_argument("--coupling", type=float, default=1.0,
                    help="renormalized coupling, or bare with --bare-eps")
    sp.add_argument("--bare-eps", type=float, default=None,
                    help="treat --coupling as bare; renormalize at this smearing")
    sp.add_argument("--csv", type=str, default=None)
    sp.set_defaults(func=_cmd_single)

    sp = sub.add_parser("solve", help="multi-center amplitudes from a CSV of centers")
    common(sp, lattice=False, ewald=False)
    sp.add_argument("--centers", type=str, required=True,
                    help="CSV file, one x,y,z row per center")
    sp.add_argument("--alpha-se", type=float, required=True)
    sp.add_argument("--scan-omega-im", type=str, default=None,
                    help="scan Im(omega) for intrinsic modes instead of solving")
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("reflect", help="reflection coefficients and flux deficit")
    common(sp)
    sp.add_argument("--mode", choices=tuple(_MODE_NAMES), default="scalar")
    sp.add_argument("--alpha-se", type=float, default=None)
    sp.add_argument("--coupling", type=float, default=1.0,
                    help="renormalized coupling, or bare with --bare-eps")
    sp.add_argument("--bare-eps", type=float, default=None,
                    help="treat --coupling as bare; renormalize at this smearing")
    sp.add_argument("--scheme", choices=("field_theoretic", "electrostatic"),
                    default="field_theoretic")
    sp.add_argument("--sweep-kx", type=str, default=None)
    sp.add_argument("--flux-alert", type=float, default=1e-6,
                    help="deficit magnitude above which the output is flagged")
    sp.set_defaults(func=_cmd_reflect)

    sp = sub.add_parser("field", help="field samples in both representations")
    common(sp)
    sp.add_argument("--mode", choices=tuple(_MODE_NAMES), default="scalar")
    sp.add_argument("--alpha-se", type=float, default=None)
    sp.add_argument("--coupling", type=float, default=1.0)
    sp.add_argument("--points", type=float, nargs="+", required=True,
                    help="flat list of x y z triples")
    sp.set_defaults(func=_cmd_field)

    sp = sub.add_parser("limits", help="order-of-limits report for a mode")
    common(sp, ewald=False)
    sp.add_argument("--mode", choices=tuple(_MODE_NAMES), required=True)
    sp.add_argument("--coupling", type=float, default=1.0)
    sp.set_defaults(func=_cmd_limits)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (ValidationError, ValueError) as exc:
        json.dump({"error": "validation", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (ConvergenceError, WoodAnomalyError, DiracLatticeError) as exc:
        json.dump({"error": "numerical", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    _emit(result["payload"], getattr(args, "csv", None),
          result.get("csv_rows"), result.get("csv_header"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
