"""Command-line front end.

Every command reads one JSON document (a path, inline JSON, or ``-`` for
stdin) and prints one JSON document. The exit status reports whether the
computation ran, not which way the verdict went::

    0  computed
    2  malformed input
    3  solver failure
    4  Boundary verdict under --strict
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import linalg as la
from .convert import (BOUNDARY, FEASIBLE, INFEASIBLE, ChoiMatrix, check_condition2,
                      check_rng, check_selfdual, constraint_matrices, evaluate_witness,
                      verify_choi, w_value, w_verdict)
from .errors import ArtforgeError, BoundaryAmbiguous, SolverFailure
from .io import decode_matrix, encode_matrix
from .minentropy import (BipartiteState, OmegaParams, R_fixed, R_full, build_omega,
                         f_omega, guessing_value, guessing_value_dual)
from .rdm import rdm
from .sdp import FarkasCertificate, verify_certificate
from .theory import (TheorySpec, build_theory, double_dual_check, dual_membership,
                     g_range, g_value, sample_dual_state)
from .tolerances import EPS_CERT, EPS_FEAS

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_BOUNDARY = 0, 2, 3, 4

log = logging.getLogger("artforge")


class InputError(Exception):
    pass


# --- input helpers ---------------------------------------------------------


def load_input(source: str):
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith(("{", "[")):
        text = source
    else:
        path = Path(source)
        if not path.exists():
            raise InputError(f"no such file: {source}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc


def _get(obj: dict, *keys, required=True):
    for k in keys:
        if k in obj:
            return obj[k]
    if required:
        raise InputError(f"missing field {keys[0]!r}")
    return None


def _matrix(obj, *keys, required=True):
    raw = _get(obj, *keys, required=required)
    return None if raw is None else decode_matrix(raw)


def _theory(obj, *keys, required=True):
    raw = _get(obj, *keys, required=required)
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise InputError("a theory must be a JSON object with a 'type' field")
    return build_theory(TheorySpec.from_json(raw))


def _theories(obj):
    t_in = _theory(obj, "theory_in", "theory")
    t_out = _theory(obj, "theory_out", required=False) or t_in
    return t_in, t_out


def _clean(x):
    """Make a payload JSON-safe: numpy scalars to floats, non-finite to null."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def render(payload, fmt: str) -> str:
    payload = _clean(payload)
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2)
    rows = payload if isinstance(payload, list) else [payload]
    out = []
    for i, row in enumerate(rows):
        if len(rows) > 1:
            out.append(f"# instance {i}")
        flat = {}
        for k, v in row.items():
            if isinstance(v, dict):
                # one level of nesting is shown as dotted keys
                flat.update({f"{k}.{kk}": vv for kk, vv in v.items()})
            else:
                flat[k] = v
        row = flat
        for k in sorted(row):
            v = row[k]
            if isinstance(v, (dict, list)):
                # matrices and nested records stay in the JSON output
                if isinstance(v, list) and all(not isinstance(e, (list, dict)) for e in v):
                    out.append(f"{k:<24} {' '.join(f'{e:.10g}' if isinstance(e, float) else str(e) for e in v)}")
                continue
            if isinstance(v, float):
                v = f"{v:.10g}"
            out.append(f"{k:<24} {v}")
    return "\n".join(out)


# --- commands --------------------------------------------------------------


def verify_conversion(instance: dict, cert: dict) -> dict:
    """Replay a conversion certificate through the library's checks."""
    t_in, t_out = _theories(instance)
    rho = _matrix(instance, "rho")
    rho_out = _matrix(instance, "rho_out", "rho_prime")
    self_dual = cert.get("operation_class") == "self_dual"
    verdict = cert.get("verdict")
    failures = []
    if verdict == FEASIBLE:
        if "choi" not in cert:
            raise InputError("Feasible certificate without a Choi matrix")
        dims = tuple(cert.get("dims") or (t_out.dim, t_in.dim))
        choi = ChoiMatrix(dims, decode_matrix(cert["choi"]))
        failures = verify_choi(choi, rho, rho_out, t_in, t_out, self_dual=self_dual)
    elif verdict == INFEASIBLE:
        if "witness" not in cert and not (self_dual and "farkas" in cert):
            raise InputError("Infeasible certificate without a witness")
        if "witness" in cert:
            w = cert["witness"]
            _, margin = evaluate_witness(decode_matrix(w["N"]), decode_matrix(w["Y"]),
                                         decode_matrix(w["tau"]), rho, rho_out,
                                         t_out.max_rank_state, t_in, t_out, self_dual)
            if margin <= EPS_CERT:
                failures.append(f"witness margin {margin:.3e} is not positive")
        if "farkas" in cert:
            r = np.asarray(cert["farkas"]["coefficients"], dtype=float)
            H = constraint_matrices(rho, rho_out, t_in, t_out, self_dual)
            if len(r) != len(H) or not verify_certificate(
                    FarkasCertificate(r, np.zeros(1), 0.0), H):
                failures.append("Farkas coefficients do not certify infeasibility")
    else:
        raise InputError(f"cannot verify a certificate with verdict {verdict!r}")
    return {"verdict": verdict, "valid": not failures, "failures": failures}


def cmd_convert(obj: dict, args) -> tuple[dict, int]:
    t_in, t_out = _theories(obj)
    rho = la.as_density(_matrix(obj, "rho"))
    rho_out = la.as_density(_matrix(obj, "rho_out", "rho_prime"))
    check = check_selfdual if args.self_dual else check_rng
    cert = check(rho, t_in, rho_out, t_out, eps_feas=args.tol_feas)
    payload = cert.to_json()
    if args.cross_check and not args.self_dual:
        w = w_value(rho, t_in, rho_out, t_out)
        payload["w_value"] = w
        payload["cross_check"] = {"w_verdict": w_verdict(w),
                                  "agrees": cert.verdict == BOUNDARY or w_verdict(w) == cert.verdict}
    if args.scan:
        rng = np.random.default_rng(args.seed)
        extra = [cert.dual_tuple] if cert.dual_tuple is not None else None
        rep = check_condition2(rho, rho_out, t_in, t_out, samples=args.scan, rng=rng,
                               tol=args.tol_feas, extra=extra)
        payload["condition2"] = rep.to_json()
    if args.verify and cert.verdict != BOUNDARY:
        payload["verification"] = verify_conversion(obj, payload)
    code = EXIT_BOUNDARY if (args.strict and cert.verdict == BOUNDARY) else EXIT_OK
    return payload, code


def cmd_hmin(obj: dict, args) -> tuple[dict, int]:
    if args.build:
        p = _get(obj, "params")
        params = OmegaParams(decode_matrix(_get(p, "eta")),
                             tuple(decode_matrix(w) for w in _get(p, "omegas")),
                             tuple(decode_matrix(s) for s in _get(p, "sigmas")))
        state = build_omega(params, la.as_density(_matrix(obj, "rho")))
    else:
        dims = _get(obj, "dims")
        if len(dims) != 2:
            raise InputError("dims must be [dA, dB]")
        state = BipartiteState(tuple(dims), _matrix(obj, "omega", "state"))
    primal = guessing_value(state)
    dual = guessing_value_dual(state)
    payload = {
        "dims": list(state.dims),
        "hmin": primal.hmin,
        "hmin_dual": dual.hmin,
        "gap": abs(primal.hmin - dual.hmin),
        "two_pow_neg_hmin": primal.two_pow_neg_hmin,
        "guessing_probability": primal.two_pow_neg_hmin,
    }
    return payload, EXIT_OK


def cmd_rdm(obj: dict, args) -> tuple[dict, int]:
    theory = _theory({"theory": obj} if "type" in obj else obj, "theory")
    verdict = rdm(theory)
    payload = verdict.to_json()
    payload["route"] = "unital" if theory.contains_maximally_mixed else "general"
    return payload, EXIT_OK


def cmd_theory(obj: dict, args) -> tuple[dict, int]:
    raw = obj if "type" in obj else _get(obj, "theory")
    theory = build_theory(TheorySpec.from_json(raw), verify=args.verify,
                          rng=np.random.default_rng(args.seed))
    lo, hi = g_range(theory)
    ddc = None
    if theory.contains_maximally_mixed:
        ddc = double_dual_check(theory, rng=np.random.default_rng(args.seed))
    payload = {
        "type": theory.kind,
        "dim": theory.dim,
        "n": theory.n,
        "dim_v": len(theory.v_basis),
        "dim_v_perp": len(theory.v_perp_basis),
        "g_range": [lo, hi],
        "contains_maximally_mixed": theory.contains_maximally_mixed,
        "double_dual_check": ddc,
        "state_basis": [encode_matrix(s) for s in theory.state_basis],
        "max_rank_state": encode_matrix(theory.max_rank_state),
    }
    return payload, EXIT_OK


def cmd_dual(obj: dict, args) -> tuple[dict, int]:
    theory = _theory(obj, "theory")
    payload = {}
    if "omega" in obj:
        omega = la.as_density(decode_matrix(obj["omega"]))
        member = dual_membership(omega, theory)
        payload["member"] = member
        payload["g_value"] = g_value(omega, theory) if member else None
    if "direction" in obj:
        omega = sample_dual_state(theory, decode_matrix(obj["direction"]))
        payload["sample"] = encode_matrix(omega)
        payload["sample_g_value"] = g_value(omega, theory)
    lo, hi = g_range(theory)
    payload["g_range"] = [lo, hi]
    return payload, EXIT_OK


def cmd_monotone(obj: dict, args) -> tuple[dict, int]:
    kind = _get(obj, "kind")
    rho = la.as_density(_matrix(obj, "rho"))
    eta = la.as_density(_matrix(obj, "eta"))
    if kind == "f_omega":
        theory = _theory(obj, "theory", "theory_in")
        omegas = [decode_matrix(w) for w in _get(obj, "omegas")]
        res = f_omega(rho, eta, omegas, theory)
    elif kind in ("R_fixed", "R_full"):
        t_in, t_out = _theories(obj)
        t = float(_get(obj, "t"))
        side = obj.get("side", "in")
        if kind == "R_fixed":
            res = R_fixed(rho, eta, t, t_in, t_out, side=side)
        else:
            res = R_full(rho, eta, t, t_in, t_out, side=side,
                         restarts=int(obj.get("restarts", 3)),
                         rng=np.random.default_rng(args.seed))
    else:
        raise InputError(f"unknown monotone kind {kind!r}")
    payload = res.to_json()
    payload["kind"] = kind
    return payload, EXIT_OK


def cmd_verify(obj: dict, args) -> tuple[dict, int]:
    instance = _get(obj, "instance")
    cert = _get(obj, "certificate")
    return verify_conversion(instance, cert), EXIT_OK


COMMANDS = {
    "convert": (cmd_convert, "decide a state conversion and emit a certificate"),
    "hmin": (cmd_hmin, "conditional min-entropy, primal and dual"),
    "rdm": (cmd_rdm, "resource destroying map existence"),
    "theory": (cmd_theory, "structural report on a free set"),
    "dual": (cmd_dual, "dual-set membership, g values and samples"),
    "monotone": (cmd_monotone, "evaluate f_omega, R_fixed or R_full"),
    "verify": (cmd_verify, "re-check a conversion certificate"),
}


def _tolerance(text: str) -> float:
    x = float(text)
    if not x >= 1e-12:
        raise argparse.ArgumentTypeError("tolerance overrides must be at least 1e-12")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", help="JSON file, inline JSON, or - for stdin")
        p.add_argument("--format", choices=("json", "table"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol-feas", type=_tolerance, default=EPS_FEAS)
        p.add_argument("--batch", action="store_true",
                       help="input is a list of instances; emit a list of results")
        if name == "convert":
            p.add_argument("--self-dual", action="store_true")
            p.add_argument("--cross-check", action="store_true",
                           help="also evaluate the W functional")
            p.add_argument("--scan", type=int, default=0, metavar="N",
                           help="sample N dual tuples against the necessary condition")
            p.add_argument("--strict", action="store_true",
                           help="exit 4 on a Boundary verdict")
            p.add_argument("--verify", action="store_true",
                           help="replay the emitted certificate")
        if name == "hmin":
            p.add_argument("--build", action="store_true",
                           help="build the bipartite state from params and rho")
        if name == "theory":
            p.add_argument("--verify", action="store_true",
                           help="run the affineness diagnostic on custom generators")
    return parser


def _setup_logging():
    level = os.environ.get("ARTFORGE_LOG")
    if not level:
        return
    logging.basicConfig(stream=sys.stderr, format="%(name)s %(levelname)s %(message)s",
                        level=getattr(logging, level.upper(), logging.DEBUG))


def run(argv=None) -> tuple[str, int]:
    """Parse arguments and execute; returns (rendered output, exit code)."""
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        obj = load_input(args.input)
        instances = obj if args.batch else [obj]
        if args.batch and not isinstance(obj, list):
            raise InputError("--batch expects a JSON list of instances")
        results, code = [], EXIT_OK
        for inst in instances:
            if not isinstance(inst, dict):
                raise InputError("each instance must be a JSON object")
            payload, c = fn(inst, args)
            results.append(payload)
            code = max(code, c)
        out = results if args.batch else results[0]
        return render(out, args.format), code
    except (SolverFailure, BoundaryAmbiguous, np.linalg.LinAlgError) as exc:
        return render({"error": str(exc), "kind": "solver"}, args.format), EXIT_SOLVER
    except (InputError, ArtforgeError, ValueError, KeyError, TypeError) as exc:
        return render({"error": str(exc), "kind": "input"}, args.format), EXIT_INPUT


def main(argv=None) -> int:
    _setup_logging()
    text, code = run(argv)
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
