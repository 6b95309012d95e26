"""Command-line entry point: ``halphen-lab <command> ...``.

Exit codes: 0 when everything requested passes, 1 when a check or an
integration fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__, connections, dynamics, elliptic, frobenius, qseries, verify
from .elliptic import EVEN_CHARS, ThetaChar
from .report import SCHEMA, dumps

PI = math.pi
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """``"RE,IM"`` or a single real number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}")


def parse_char(text: str) -> ThetaChar:
    try:
        eps, delta = (int(x) for x in text.split(","))
        return ThetaChar(eps, delta)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a characteristic like 0,1 but got {text!r}") from exc


def _state_from_json(text: str) -> list[complex]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--init is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise UsageError("--init must be a JSON list")
    out = []
    for item in data:
        if isinstance(item, dict) and set(item) == {"re", "im"}:
            out.append(complex(item["re"], item["im"]))
        elif isinstance(item, (int, float)):
            out.append(complex(item))
        elif isinstance(item, list) and len(item) == 2:
            out.append(complex(item[0], item[1]))
        else:
            raise UsageError(f"cannot read state component {item!r}")
    return out


def _emit(args, payload: dict, text: str | None = None) -> None:
    if args.json or text is None:
        sys.stdout.write(dumps(payload))
    else:
        print(text)


# -- commands ------------------------------------------------------------------


def cmd_series(args) -> int:
    name = args.name
    s = qseries.eisenstein(int(name[1]), args.order)
    if args.format == "csv" and not args.json:
        for n, num, den in qseries.to_rows(s):
            print(f"{n},{num},{den}")
        return EXIT_OK
    payload = {
        "schema": SCHEMA,
        "name": name,
        "order": s.order,
        "coefficients": [{"n": n, "numerator": num, "denominator": den} for n, num, den in qseries.to_rows(s)],
    }
    sys.stdout.write(dumps(payload))
    return EXIT_OK


def series_from_json(text: str) -> qseries.QSeries:
    data = json.loads(text)
    rows = [(c["n"], c["numerator"], c["denominator"]) for c in data["coefficients"]]
    return qseries.from_rows(rows)


def cmd_eval(args) -> int:
    tau = args.tau
    z = args.z
    fn = args.fn
    extra = {}
    if fn in ("E2", "E4", "E6"):
        value, tail = qseries.evaluate(qseries.eisenstein(int(fn[1]), args.order), tau)
        extra["tail"] = tail
    elif fn == "theta":
        if args.k is not None:
            value = elliptic.jacobi_theta(args.k, z, tau)
            extra["k"] = args.k
        else:
            char = args.char or ThetaChar(0, 0)
            value = elliptic.theta_char(char, z, tau, tol=args.tol)
            extra["char"] = [char.eps, char.delta]
    elif fn == "wp":
        value = elliptic.wp(z, tau, tol=args.tol)
    elif fn == "wp_prime":
        value = elliptic.wp_prime(z, tau, tol=args.tol)
    elif fn == "ek":
        c = elliptic.elliptic_constants(tau, args.order)
        value = list(c.e)
        extra.update(g2=c.g2, g3=c.g3)
    elif fn == "eta1":
        value = elliptic.elliptic_constants(tau, args.order).eta1
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(fn)
    payload = {"schema": SCHEMA, "fn": fn, "tau": tau}
    if fn in ("theta", "wp", "wp_prime"):
        payload["z"] = z
    payload["value"] = value
    payload.update(extra)
    text = " ".join(_fmt(v) for v in (value if isinstance(value, list) else [value]))
    _emit(args, payload, text)
    return EXIT_OK


def _fmt(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def default_initial_state(system: str, tau: complex, order: int) -> list[complex]:
    """Series-backed initial data at ``tau`` for each system."""
    E = [qseries.evaluate_value(qseries.eisenstein(w, order), tau) for w in (2, 4, 6)]
    if system == "ramanujan":
        return E
    rescaled = [PI**2 * E[0] / 12, PI**4 * E[1] / 12, PI**6 * E[2] / 216]
    if system == "rescaled":
        return rescaled
    if system == "lifted":
        return rescaled + [1.0]
    if system == "chazy":
        return list(dynamics.gamma_data(tau, order)[:3])
    if system == "halphen":
        return list(dynamics.initial_labels(dynamics.chazy_roots(tau, order)))
    raise UsageError(f"no default initial data for {system}")


SYSTEM_DIMS = {"ramanujan": 3, "rescaled": 3, "halphen": 3, "chazy": 3, "lifted": 4}


def cmd_integrate(args) -> int:
    system = args.system
    if args.param == "tau":
        start = dynamics.tau_to_time(system, args.start)
        end = dynamics.tau_to_time(system, args.end)
    else:
        start, end = args.start, args.end
    if args.init is not None:
        y0 = _state_from_json(args.init)
    else:
        if args.param != "tau":
            raise UsageError("--init is required with --param time")
        y0 = default_initial_state(system, args.start, args.order)
    if len(y0) != SYSTEM_DIMS[system]:
        raise UsageError(f"{system} needs {SYSTEM_DIMS[system]} components, got {len(y0)}")
    cfg = dynamics.IntegratorConfig(atol=args.atol, rtol=args.rtol, **({"max_steps": args.max_steps} if args.max_steps else {}))
    status = "ok"
    message = ""
    try:
        traj = dynamics.integrate(dynamics.SYSTEMS[system], y0, [start, end], cfg)
    except dynamics.IntegrationError as exc:
        traj = exc.trajectory
        status = "error"
        message = str(exc)
    payload = {
        "schema": SCHEMA,
        "system": system,
        "param": args.param,
        "from": args.start,
        "to": args.end,
        "time_from": start,
        "time_to": end,
        "initial": list(y0),
        "final": list(traj.final),
        "final_time": traj.params[-1],
        "accepted": traj.accepted,
        "rejected": traj.rejected,
        "samples": len(traj),
        "max_local_error": max(traj.errors) if traj.errors else 0.0,
        "status": status,
    }
    if message:
        payload["message"] = message
    if args.trajectory:
        payload["trajectory"] = [{"t": t, "state": list(s)} for t, s in zip(traj.params, traj.states)]
    text = f"{status}: final state " + " ".join(_fmt(v) for v in traj.final)
    if message:
        text += f"\n{message}"
    _emit(args, payload, text)
    return EXIT_OK if status == "ok" else EXIT_FAIL


def cmd_frobenius(args) -> int:
    p = frobenius.FlatPoint(args.t1, args.t2, args.t3)
    coeffs = frobenius.char_poly(p, args.order)
    u = frobenius.canonical_coords(p, args.order)
    cob = frobenius.change_of_basis(p, args.order)
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    payload = {
        "schema": SCHEMA,
        "point": {"t1": p.t1, "t2": p.t2, "t3": p.t3},
        "F": frobenius.potential_F(p, args.order),
        "C": frobenius.structure_constants(p, args.order),
        "g": frobenius.intersection_form(p, args.order),
        "charpoly": coeffs,
        "u": u.as_array(),
        "M": cob.M,
        "residuals": {
            "charpoly_at_u": float(np.max(np.abs(np.polyval(coeffs, u.as_array())))) / scale,
            "associativity": frobenius.associativity_check(p, args.order),
            "change_of_basis": cob.oracle_deviation,
            "change_of_basis_printed_z": cob.literal_deviation,
            "euler": abs(frobenius.euler_residual(p, args.order)),
        },
    }
    sys.stdout.write(dumps(payload))
    return EXIT_OK


def cmd_connections(args) -> int:
    tau = args.tau
    es = elliptic.elliptic_constants(tau, args.order).e
    wirt = {}
    for char in EVEN_CHARS:
        wirt[str(char)] = {
            "value": connections.wirtinger_connection(char, tau, args.order),
            "minus_6e_stated": -6 * es[connections.STATED_PAIRING[char] - 1],
            "minus_6e_jacobi": -6 * es[connections.JACOBI_PAIRING[char] - 1],
        }
    E4 = qseries.evaluate_value(qseries.eisenstein(4, args.order), tau)
    serre_a, serre_b = connections.serre_residuals(args.order)
    payload = {
        "schema": SCHEMA,
        "tau": tau,
        "e": list(es),
        "wirtinger": wirt,
        "klein_invariant": connections.klein_invariant_connection(tau, args.order),
        "curvature": {
            "value": connections.affine_curvature(tau, args.order),
            "pi2_E4_over_18": PI**2 / 18 * E4,
            "series_identity_exact": connections.curvature_residual(args.order).is_zero(),
        },
        "serre_checks": {
            "serre2_E4_plus_E6_over_3_is_zero": serre_a.is_zero(),
            "serre3_E6_plus_E4sq_over_2_is_zero": serre_b.is_zero(),
        },
    }
    sys.stdout.write(dumps(payload))
    return EXIT_OK


def cmd_verify(args) -> int:
    settings = verify.Settings(order=args.order, tol=args.tol, tau=args.tau)
    report = verify.run(args.suite, settings)
    if args.json:
        sys.stdout.write(dumps(report.as_dict(timings=args.timings)))
    else:
        print(report.text())
    return EXIT_OK if report.ok else EXIT_FAIL


# -- parser --------------------------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("order must be non-negative")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return value


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--json", action="store_true", default=default(False), help="machine-readable output")
    p.add_argument("--order", type=_positive_int, default=default(qseries.DEFAULT_ORDER), help="q-series truncation order")
    p.add_argument("--tol", type=_positive_float, default=default(1e-8), help="numerical tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halphen-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("series", help="dump Eisenstein coefficients")
    p.add_argument("--name", choices=("E2", "E4", "E6"), required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("eval", help="evaluate a function at a point")
    p.add_argument("--fn", choices=("theta", "wp", "wp_prime", "ek", "eta1", "E2", "E4", "E6"), required=True)
    p.add_argument("--tau", type=parse_complex, required=True)
    p.add_argument("--z", type=parse_complex, default=0j)
    p.add_argument("--char", type=parse_char, help="theta characteristic EPS,DELTA")
    p.add_argument("--k", type=int, choices=(1, 2, 3, 4), help="Jacobi theta index (overrides --char)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("integrate", help="integrate one of the systems along a straight path")
    p.add_argument("--system", choices=tuple(SYSTEM_DIMS), required=True)
    p.add_argument("--from", dest="start", type=parse_complex, required=True)
    p.add_argument("--to", dest="end", type=parse_complex, required=True)
    p.add_argument("--param", choices=("tau", "time"), default="tau", help="interpret endpoints as tau or as system time")
    p.add_argument("--init", help="initial state as a JSON list (default: series data at --from)")
    p.add_argument("--atol", type=_positive_float, default=1e-12)
    p.add_argument("--rtol", type=_positive_float, default=1e-12)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--trajectory", action="store_true", help="include every accepted sample")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("frobenius", help="Frobenius manifold data at a flat point")
    p.add_argument("--t1", type=parse_complex, required=True)
    p.add_argument("--t2", type=parse_complex, required=True)
    p.add_argument("--t3", type=parse_complex, required=True)
    p.set_defaults(func=cmd_frobenius)

    p = sub.add_parser("connections", help="Wirtinger connections, curvature and Serre checks at tau")
    p.add_argument("--tau", type=parse_complex, default=2j)
    p.set_defaults(func=cmd_connections)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", choices=tuple(verify.SUITES) + ("all",), default="all")
    p.add_argument("--tau", type=parse_complex, default=2j)
    p.add_argument("--timings", action="store_true", help="record per-check runtimes (breaks byte-identical output)")
    p.set_defaults(func=cmd_verify)

    for action in sub.choices.values():
        _add_globals(action, suppress=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"halphen-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ZeroDivisionError as exc:
        print(f"halphen-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
