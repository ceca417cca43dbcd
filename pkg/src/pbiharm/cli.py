"""Command-line entry point: ``pbiharm {certify,solve,branch,testfun}``.

Exit codes: 0 ok, 1 usage or config error, 2 certificate denied,
3 solver did not converge.
"""

import argparse
import csv
import dataclasses
import datetime as _dt
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, solver, testfun
from .certificate import certify
from .core import SpecError, parse_spec
from .geometry import geometry

EXIT_OK, EXIT_ERROR, EXIT_DENIED, EXIT_NONCONVERGED = 0, 1, 2, 3


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization


def fmt(x):
    """17 significant digits; infinities as the strings "inf"/"-inf"."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _json_scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isinf(x) or math.isnan(x):
            return json.dumps(fmt(x))
        out = fmt(x)
        if "e" not in out and "." not in out and "n" not in out:
            out += ".0"
        return out
    return json.dumps(v)


def dumps(obj, indent=2, _level=0):
    """JSON text with every float written at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if dataclasses.is_dataclass(obj):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _json_scalar(obj)


def report_dict(report):
    d = dataclasses.asdict(report)
    d["center"] = list(report.center)
    return d


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_manifest(out_path, command, config_text, seed=None):
    # kept beside the outputs so the outputs themselves stay byte-deterministic
    stamp = os.environ.get("SOURCE_DATE_EPOCH")
    when = (_dt.datetime.fromtimestamp(int(stamp), _dt.timezone.utc) if stamp
            else _dt.datetime.now(_dt.timezone.utc))
    manifest = {
        "command": command,
        "spec_digest": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
        "tool_version": __version__,
        "timestamp": when.isoformat(timespec="seconds"),
        "seed": seed,
    }
    _write(str(out_path) + ".manifest.json", dumps(manifest) + "\n")


def _csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def _load(config):
    try:
        text = Path(config).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}") from None
    return text, parse_spec(text)


def cmd_certify(args):
    text, spec = _load(args.config)
    report = certify(spec)
    out = dumps(report_dict(report)) + "\n"
    if args.output:
        _write(args.output, out)
        _write_manifest(args.output, "certify", text)
    else:
        sys.stdout.write(out)
    return EXIT_OK if report.granted else EXIT_DENIED


def _grid_for(spec):
    if spec.domain.shape != "ball":
        raise CliError("solver requires ball domain")
    s = spec.solver
    return solver.RadialGrid(spec.N, spec.p, spec.domain.radius, s.n, spec.nonlinearity,
                             spec.domain.center)


def _read_solution_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["r"]) for r in rows]), np.array([float(r["u"]) for r in rows])


def cmd_solve(args):
    text, spec = _load(args.config)
    if not args.lam > 0:
        raise CliError("lambda must be positive")
    grid = _grid_for(spec)
    values = None
    if args.init == "file":
        if not args.init_file:
            raise CliError("--init file needs --init-file")
        r, u = _read_solution_csv(args.init_file)
        values = grid.interior(np.interp(grid.r, r, u))
    rec = solver.minimize(grid, args.lam, args.init, delta=spec.delta, values=values,
                          tol=spec.solver.tol, max_iter=spec.solver.max_iter)
    st = rec.state
    prefix = args.prefix
    _write(prefix + ".csv", _csv_text(["r", "u"], zip(grid.r, st.values)))
    meta = {
        "lambda": args.lam, "energy": st.energy, "residual": st.residual, "norm": st.norm,
        "max_abs": st.max_abs, "classification": rec.classification,
        "converged": rec.converged, "iterations": rec.iterations, "n": grid.n,
        "init": args.init, "reason": rec.reason,
    }
    _write(prefix + ".json", dumps(meta) + "\n")
    if args.mountain_pass and rec.converged:
        _write_mountain_pass(grid, args.lam, rec, spec, prefix + "_mp")
    _write_manifest(prefix, "solve", text)
    return EXIT_OK if rec.converged else EXIT_NONCONVERGED


def _write_mountain_pass(grid, lam, rec, spec, prefix):
    # saddle search between the trivial state and the computed solution;
    # a failure is reported in the metadata, not through the exit code
    mp = solver.mountain_pass(grid, lam, np.zeros(grid.n), rec.state.values,
                              tol=max(spec.solver.tol, 1e-6), images=spec.solver.mp_images)
    st = mp.state
    _write(prefix + ".csv", _csv_text(["r", "u"], zip(grid.r, st.values)))
    meta = {
        "lambda": lam, "energy": st.energy, "residual": st.residual, "norm": st.norm,
        "max_abs": st.max_abs, "classification": mp.classification,
        "converged": mp.converged, "iterations": mp.iterations, "n": grid.n,
        "initial_path_max": mp.initial_path_max,
        "endpoint_energies": list(mp.endpoint_energies), "reason": mp.reason,
    }
    _write(prefix + ".json", dumps(meta) + "\n")


def parse_range(text):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise CliError(f"malformed range {text!r}; expected a:b:n") from None
    if n < 1 or (n > 1 and not b > a):
        raise CliError(f"malformed range {text!r}")
    return [a] if n == 1 else list(np.linspace(a, b, n))


def cmd_branch(args):
    text, spec = _load(args.config)
    lambdas = parse_range(args.range)
    if any(lam <= 0 for lam in lambdas):
        raise CliError("lambda values must be positive")
    grid = _grid_for(spec)
    try:
        intervals = certify(spec).intervals
    except ValueError:
        intervals = None
    count = args.multistart if args.multistart is not None else spec.solver.multistart
    seed = args.seed if args.seed is not None else spec.solver.seed
    rows = solver.branch_sweep(grid, lambdas, spec.delta, intervals, count=count, seed=seed,
                               tol=spec.solver.tol, max_iter=spec.solver.max_iter,
                               distinct_tol=spec.solver.distinct_tol, workers=args.workers)
    width = max((len(r.solutions) for r in rows), default=0)
    header = ["lambda", "in_lambda1", "below_lambda3h", "n_distinct", "n_failed"]
    for i in range(1, width + 1):
        header += [f"class_{i}", f"energy_{i}", f"norm_{i}"]
    table = []
    for row in rows:
        line = [row.lam, str(row.in_lambda1).lower(), str(row.below_lambda3h).lower(),
                len(row.solutions), row.failures]
        for rec in row.solutions:
            line += [rec.classification, rec.state.energy, rec.state.norm]
        line += [""] * (len(header) - len(line))
        table.append(line)
    out = _csv_text(header, table)
    if args.output:
        _write(args.output, out)
        _write_manifest(args.output, "branch", text, seed)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def testfun_summary(spec):
    geo = geometry(spec)
    p, N, tau, delta, k = spec.p, spec.N, geo.tau, spec.delta, geo.k
    log_sig, _ = testfun.log_sigma(p, N, tau, spec.quad_tol)
    phi = testfun.phi_u_delta(p, N, tau, delta, log_sig)
    params = testfun.TestFnParams(tau, delta, geo.center, N, p)
    phi_quad = testfun.radial_energy_quadrature(params)
    summary = {
        "tau": tau, "delta": delta, "k": k, "k_source": geo.k_source,
        "sigma": math.exp(log_sig), "K": testfun.K_const(p, N, tau, k, log_sig),
        "eta": testfun.eta(spec.gamma, delta, p, N, tau, k, log_sig),
        "phi_u_delta": phi, "r": testfun.r_level(spec.gamma, p, k),
        "phi_u_delta_quadrature": phi_quad,
        "discrepancy": abs(phi - phi_quad) / phi,
    }
    if spec.r1 is not None:
        vparams = testfun.TestFnParams(tau, delta, geo.center, N, p, "v_delta", spec.r1, spec.r2)
        summary.update({
            "r1": spec.r1, "r2": spec.r2,
            "sigma_general": testfun.sigma_general(p, N, spec.r1, spec.r2, spec.quad_tol),
            "K_general": testfun.K_general(p, N, spec.r1, spec.r2, k),
            "phi_v_delta": testfun.phi_v_delta(p, N, spec.r1, spec.r2, delta, k),
            "phi_v_delta_quadrature": testfun.radial_energy_quadrature(vparams),
        })
    return summary, params


def cmd_testfun(args):
    text, spec = _load(args.config)
    summary, params = testfun_summary(spec)
    ls = np.linspace(0.0, params.tau, args.samples)
    header = ["l", "value", "laplacian"]
    cols = [ls, params.profile(ls), params.laplacian(ls)]
    if spec.r1 is not None:
        header += ["v_value", "v_laplacian"]
        cols += [testfun.v_delta_profile(ls, spec.r1, spec.r2, spec.delta),
                 testfun.v_delta_laplacian(ls, spec.r1, spec.r2, spec.delta, spec.N)]
    _write(args.prefix + ".csv", _csv_text(header, zip(*cols)))
    _write(args.prefix + ".json", dumps(summary) + "\n")
    _write_manifest(args.prefix, "testfun", text)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="pbiharm", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="evaluate hypotheses and parameter intervals")
    c.add_argument("config")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("solve", help="compute one critical point on a ball")
    s.add_argument("config")
    s.add_argument("--lam", type=float, required=True)
    s.add_argument("--init", choices=("zero", "udelta", "file"), default="udelta")
    s.add_argument("--init-file")
    s.add_argument("--prefix", required=True)
    s.add_argument("--mountain-pass", action="store_true",
                   help="also search for a saddle between 0 and the solution (PREFIX_mp.*)")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("branch", help="multistart sweep over a lambda range")
    b.add_argument("config")
    b.add_argument("--range", required=True, help="a:b:n")
    b.add_argument("--multistart", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_branch)

    t = sub.add_parser("testfun", help="sample the test functions and their constants")
    t.add_argument("config")
    t.add_argument("--prefix", required=True)
    t.add_argument("--samples", type=int, default=201)
    t.set_defaults(func=cmd_testfun)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (CliError, SpecError, ValueError, ArithmeticError) as exc:
        print(f"pbiharm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
