"""Command-line entry point: ``bellscope <subcommand> [options]``.

Every JSON artifact carries ``tool_version``, ``command`` and
``resolved_config`` next to its ``result``. Exit status is 0 on success,
1 on a domain error (a JSON error object is printed to stdout) and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import __version__
from . import correlation as corr
from . import family, formats, polytope, quantum, states
from .errors import BellscopeError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _build_parser():
    p = _Parser(prog="bellscope", description="Bell inequalities, LHV polytopes and quantum violations.")
    p.add_argument("--version", action="version", version=f"bellscope {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="output path (default: stdout)")
        return sp

    sp = add("family", "enumerate the complete full-correlation family")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--canonical", action="store_true", help="also report orbit representatives")

    sp = add("membership", "classical-region membership of a correlation vector")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--table", help="correlation table JSON (m = v = 2)")
    g.add_argument("--xi", help="comma-separated full correlations xi(s), s in bit order")

    sp = add("polytope", "facets (and optionally face counts) of a polytope")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--n", type=int, help="use the correlation polytope of n parties")
    g.add_argument("--vertices", help="polytope JSON {dimension, vertices}")
    sp.add_argument("--project", action="store_true", help="work inside the affine hull")
    sp.add_argument("--euler", action="store_true", help="also run the face-count check")
    sp.add_argument("--max-dim", type=int, default=8)

    sp = add("seesaw", "maximize a Bell operator on a state by see-saw iteration")
    sp.add_argument("--beta", required=True, help="inequality JSON (beta-v1)")
    sp.add_argument("--state", required=True, help="state JSON {site_dims, matrix}")
    sp.add_argument("--restarts", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--iters", type=int, default=500)
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = add("chshmax", "closed-form CHSH maximum of a two-qubit state")
    sp.add_argument("--state", required=True)

    sp = add("fine", "joint-distribution LP for a (2,2,2) table")
    sp.add_argument("--table", required=True)

    sp = add("werner-mc", "Monte Carlo check of the Werner-state LHV model")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--bases", choices=["computational", "random"], default="computational")
    sp.add_argument("--basis-seed", type=int, default=0)

    sp = add("gaussian", "pseudo-spin CHSH value of two-mode squeezed states")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--r", type=float)
    g.add_argument("--r-grid", help="start:stop:step, stop included within half a step")
    sp.add_argument("--ncut", type=int, default=40)
    sp.add_argument("--no-renormalize", action="store_true")
    sp.add_argument("--format", choices=["json", "csv"], help="default: csv if --out ends in .csv")

    sp = add("mermin", "Mermin coefficients, classical and GHZ quantum values")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seesaw", action="store_true", help="also run see-saw on the GHZ state")
    sp.add_argument("--restarts", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    return p


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out")}


# ---------------------------------------------------------------- commands


def _cmd_family(args):
    members = list(family.enumerate_family(args.n))
    result = {"n": args.n, "count": len(members), "inequalities": [b.to_dict() for b in members]}
    if args.canonical:
        reps = {tuple(family.canonicalize(b).beta) for b in members}
        result["orbits"] = [list(r) for r in sorted(reps, reverse=True)]
    return result


def _cmd_membership(args):
    if args.table:
        xi = formats.table_from_dict(formats.load_json(args.table)).full_correlations()
    else:
        try:
            xi = np.array([float(x) for x in args.xi.split(",")])
        except ValueError:
            raise BellscopeError("--xi must be a comma-separated list of numbers") from None
    n = xi.size.bit_length() - 1
    mem = family.lhv_membership(xi)
    lp = polytope.lp_membership(xi, polytope.correlation_vertices(n))
    out = {
        "xi": xi,
        "inside": mem.inside,
        "l1_mass": mem.l1_mass,
        "spectrum": mem.spectrum,
        "lp_inside": lp.inside,
    }
    if lp.inside:
        out["weights"] = lp.weights
    elif lp.separator is not None:
        out["separator"] = lp.separator.to_dict()
    return out


def _cmd_polytope(args):
    if args.n is not None:
        pts = polytope.correlation_vertices(args.n)
    else:
        pts = formats.polytope_from_dict(formats.load_json(args.vertices))
    facets = polytope.facet_enumeration(pts, max_dim=args.max_dim, project=args.project)
    out = {"dimension": pts.dimension, "vertex_count": len(pts), "facets": [h.to_dict() for h in facets]}
    if args.euler:
        e = polytope.euler_check(pts)
        out["euler"] = {"f_vector": e.f_vector, "alternating_sum": e.alternating_sum,
                        "expected": e.expected, "holds": e.holds}
    return out


def _cmd_seesaw(args):
    beta = formats.beta_from_dict(formats.load_json(args.beta))
    rho = formats.state_from_dict(formats.load_json(args.state))
    res = quantum.seesaw(beta, rho, iters=args.iters, restarts=args.restarts, seed=args.seed, tol=args.tol)
    return {
        "value": res.value,
        "iterations": res.iterations,
        "converged": res.converged,
        "best_restart": res.restart,
        "restart_traces": res.restart_traces,
        "observables": res.observables.to_dict(),
    }


def _cmd_chshmax(args):
    rho = formats.state_from_dict(formats.load_json(args.state))
    res = quantum.chsh_max_qubits(rho)
    return {"value": res.value, "overall": res.overall, "R": res.R}


def _cmd_fine(args):
    table = formats.table_from_dict(formats.load_json(args.table))
    res = corr.fine_joint_lp(table)
    out = {"feasible": res.feasible, "residual": res.residual}
    if res.joint is not None:
        out["joint"] = res.joint
    if res.certificate is not None:
        out["certificate"] = {"beta": res.certificate.beta, "value": res.certificate.value}
    return out


def _cmd_werner_mc(args):
    d = args.d
    if args.bases == "computational":
        ua = ub = np.eye(d)
    else:
        rng = np.random.default_rng(args.basis_seed)
        ua, ub = quantum.haar_unitary(d, rng), quantum.haar_unitary(d, rng)
    res = states.werner_lhv_mc(d, states.basis_projectors(ua), states.basis_projectors(ub),
                               samples=args.samples, seed=args.seed)
    return res.to_dict()


def _cmd_gaussian(args):
    rs = [args.r] if args.r is not None else formats.parse_grid(args.r_grid)
    return [g.to_dict() for g in states.gaussian_curve(rs, args.ncut, renormalize=not args.no_renormalize)]


def _cmd_mermin(args):
    beta = family.mermin(args.n)
    out = {
        "inequality": beta.to_dict(),
        "classical_max": family.classical_max(beta).value,
        "quantum_bound": 2 ** ((args.n - 1) / 2),
    }
    angles = np.array([[0.0, np.pi / 2]] * args.n)
    out["ghz_planar_max"] = float(np.max(quantum.ghz_spectrum(beta, angles).eigenvalues))
    if args.seesaw:
        out["seesaw_value"] = quantum.seesaw(beta, states.ghz_state(args.n),
                                             restarts=args.restarts, seed=args.seed).value
    return out


_COMMANDS = {
    "family": _cmd_family,
    "membership": _cmd_membership,
    "polytope": _cmd_polytope,
    "seesaw": _cmd_seesaw,
    "chshmax": _cmd_chshmax,
    "fine": _cmd_fine,
    "werner-mc": _cmd_werner_mc,
    "gaussian": _cmd_gaussian,
    "mermin": _cmd_mermin,
}


def _gaussian_csv(rows, header):
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "value", "analytic"])
    for row in rows:
        w.writerow([repr(float(row["r"])), repr(float(row["value"])), repr(float(row["analytic"]))])
    return buf.getvalue()


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    config = _config(args)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            result = _COMMANDS[args.command](args)
    except (BellscopeError, OSError, ValueError) as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}, "command": args.command}
        sys.stdout.write(formats.dumps(err))
        return 1
    meta = {"tool_version": __version__, "command": args.command, "resolved_config": config}
    fmt = getattr(args, "format", None)
    if args.command == "gaussian" and (fmt == "csv" or (fmt is None and (args.out or "").endswith(".csv"))):
        header = [f"{k}={json.dumps(formats.to_jsonable(v), sort_keys=True)}" for k, v in meta.items()]
        _emit(_gaussian_csv(result, header), args.out)
    else:
        _emit(formats.dumps({**meta, "result": result}), args.out)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
