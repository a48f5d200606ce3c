"""Command-line entry point.

Every subcommand runs one experiment and writes a table (CSV) or a record
(JSON). With ``--out`` the result goes to that file and a manifest
``<out>.manifest.json`` records the command, parameters, seed, version,
wall time and a SHA-256 digest of the output.

Exit codes: 0 on success, 1 for bad parameters or usage, 2 for numerical
failures (truncation or non-convergence).
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import NumericalError
from .harmonic import limit_constant_scan, mc_estimate
from .learner import scaling_experiment
from .overlap import compute_cn, from_overlaps, spectrum
from .polyroots import RootSet, derivative_roots
from .sampling import StreamKey, make_distribution, sample_sorted, substream
from .stable.charfn import CharFunction, StableLawSpec, calibrate
from .stable.experiments import density_gap_experiment, zolotarev_residual
from .stable.inversion import invert_to_density

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


# --------------------------------------------------------------------------
# argument helpers


def _int_list(text: str) -> List[int]:
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


class GridArg(str):
    """The ``lo:hi:step`` text as typed, with the expanded nodes in ``values``."""

    values: np.ndarray


def _grid(text: str) -> GridArg:
    try:
        lo, hi, step = (float(t) for t in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("grid must look like lo:hi:step") from exc
    if not (hi > lo and step > 0):
        raise argparse.ArgumentTypeError("grid needs hi > lo and step > 0")
    m = int(round((hi - lo) / step))
    out = GridArg(text)
    out.values = lo + step * np.arange(m + 1)
    return out


def _add_dist_args(p):
    p.add_argument("--family", choices=["power", "plateau"], default="power")
    p.add_argument("--beta", type=float, default=0.0, help="density exponent (power family)")
    p.add_argument("--c0", type=float, default=None, help="plateau height (plateau family)")
    p.add_argument("--width", type=float, default=None, help="plateau width (plateau family)")


def _dist(args):
    return make_distribution(args.family, args.beta, c0=args.c0, width=args.width)


def _stable_spec(alpha: float, dist=None) -> StableLawSpec:
    if dist is None:
        dist = make_distribution("power", alpha - 1.0)
    spec = StableLawSpec.for_distribution(dist)
    return calibrate(spec, dist)


# --------------------------------------------------------------------------
# subcommands; each returns (columns, rows) for tables or a dict for records


def cmd_sample(args):
    s = sample_sorted(_dist(args), args.n, StreamKey(args.seed, (0,)))
    return ["x"], [[v] for v in s.values]


def cmd_harmonic(args):
    summ = mc_estimate(args.statistic, _dist(args), args.n, args.reps,
                       StreamKey(args.seed, (1,)), threads=args.threads)
    return summ.to_dict()


def cmd_scan(args):
    rows = limit_constant_scan(args.statistic, _dist(args), args.ns, args.reps,
                               StreamKey(args.seed, (2,)), threads=args.threads)
    return ["n", "reps", "mean", "stderr"], [[r.n, r.reps, r.mean, r.stderr] for r in rows]


def _density_table(grid):
    return ["x", "value"], [[x, v] for x, v in zip(grid.abscissae, grid.values)]


def cmd_stable_density(args):
    spec = _stable_spec(args.alpha)
    grid = invert_to_density(CharFunction("psi_stable", spec=spec), args.grid.values, args.eps)
    logger.info("K=%g quadrature error %.3g total mass %.12f", grid.K,
                grid.quadrature_error_bound, grid.total_mass())
    return _density_table(grid)


def cmd_finite_n_density(args):
    cf = CharFunction("psi_finite_n", dist=_dist(args), n=args.n)
    grid = invert_to_density(cf, args.grid.values, args.eps)
    return _density_table(grid)


def cmd_density_gap(args):
    rows = density_gap_experiment(_dist(args), args.ns, args.grid.values)
    cols = ["n", "gap", "ratio", "support_floor", "below_floor_max", "error_bound"]
    return cols, [[getattr(r, c) for c in cols] for r in rows]


def cmd_zolotarev(args):
    lhs, rhs = zolotarev_residual(args.alpha, np.asarray(args.xs))
    return ["x", "lhs", "rhs", "abs_diff"], [[x, l, r, abs(l - r)]
                                             for x, l, r in zip(args.xs, lhs, rhs)]


def _roots_from_args(args, key):
    if args.roots is not None:
        return np.asarray(args.roots)
    if args.random is None:
        raise UsageError("give --roots or --random")
    return np.sort(key.generator().random(args.random))


def cmd_poly_roots(args):
    x = _roots_from_args(args, StreamKey(args.seed, (3,)))
    d = derivative_roots(RootSet(np.sort(x), clamped_zero=args.clamped))
    return ["mu", "bracket_lo", "bracket_hi"], [[m, lo, hi] for m, (lo, hi)
                                                in zip(d.mu, d.bracket_certificates)]


def cmd_matrix_spectrum(args):
    if args.overlaps is not None:
        a = np.asarray(args.overlaps)
    elif args.random is not None:
        x = StreamKey(args.seed, (4,)).generator().random(args.random - 1)
        a = np.concatenate([[1.0], 1.0 - x])
    else:
        raise UsageError("give --overlaps or --random")
    M = from_overlaps(a, learner_mode=args.learner)
    sp = spectrum(M)
    return ["mu", "lambda"], [[m, l] for m, l in zip(sp.mu, sp.lam)]


def cmd_cn(args):
    from .learner import random_learner
    dist = _dist(args)
    key = StreamKey(args.seed, (5,))
    rows = []
    for r in range(args.reps):
        M = random_learner(dist, args.n, substream(key, r))
        c = compute_cn(M)
        rows.append([r, c.exact, c.approx, c.mu_star, c.lambda_star])
    return ["rep", "C_exact", "C_approx", "mu_star", "lambda_star"], rows


def cmd_learner(args):
    rows = scaling_experiment(_dist(args), args.delta, args.ns, args.reps,
                              StreamKey(args.seed, (6,)))
    return ["n", "median_n_delta", "ratio", "reps"], [[r.n, r.median_n_delta, r.ratio, r.reps]
                                                       for r in rows]


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    return v


def render(result, fmt: str, command: str) -> str:
    if isinstance(result, dict):
        if fmt == "csv":
            cols = list(result)
            flat = [result[c] if not isinstance(result[c], dict) else json.dumps(result[c], sort_keys=True)
                    for c in cols]
            return ",".join(cols) + "\n" + ",".join(v if isinstance(v, str) else _fmt(v)
                                                    for v in flat) + "\n"
        body = {"schema_version": SCHEMA_VERSION, "command": command, "result": _jsonable(result)}
        return json.dumps(body, indent=2, sort_keys=True) + "\n"
    cols, rows = result
    if fmt == "json":
        body = {"schema_version": SCHEMA_VERSION, "command": command, "columns": cols,
                "rows": _jsonable([[float(x) if not isinstance(x, (int, np.integer)) else int(x)
                                    for x in row] for row in rows])}
        return json.dumps(body, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_manifest(out: Path, command: str, params: Dict, seed: int, wall: float):
    digest = hashlib.sha256(out.read_bytes()).hexdigest()
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": _jsonable(params),
        "seed": seed,
        "version": __version__,
        "wall_time_s": wall,
        "outputs": {out.name: {"sha256": digest}},
    }
    path = out.with_name(out.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# --------------------------------------------------------------------------


COMMANDS = {
    "sample": cmd_sample,
    "harmonic": cmd_harmonic,
    "scan": cmd_scan,
    "stable-density": cmd_stable_density,
    "finite-n-density": cmd_finite_n_density,
    "density-gap": cmd_density_gap,
    "zolotarev": cmd_zolotarev,
    "poly-roots": cmd_poly_roots,
    "matrix-spectrum": cmd_matrix_spectrum,
    "cn": cmd_cn,
    "learner": cmd_learner,
}

DEFAULT_FORMAT = {"harmonic": "json"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    common.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="harmonic-stable", description="Harmonic means, stable laws, "
                     "derivative roots, structured stochastic matrices and the memoryless learner.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", parents=[common], help="sorted sample from a sampling law")
    _add_dist_args(p)
    p.add_argument("--n", type=int, required=True)

    for name, helptext in (("harmonic", "Monte Carlo mean of a harmonic-mean statistic"),
                           ("scan", "the same estimate over several sample sizes")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _add_dist_args(p)
        p.add_argument("--statistic", default="H_log_n",
                       help="H, H_log_n, n_H, Y, H_log2_shift, H_scaled or m<i>")
        p.add_argument("--reps", type=int, required=True)
        if name == "harmonic":
            p.add_argument("--n", type=int, required=True)
        else:
            p.add_argument("--ns", type=_int_list, required=True)

    p = sub.add_parser("stable-density", parents=[common], help="stable limit density by inversion")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--grid", type=_grid, default=_grid("-5:60:0.05"))
    p.add_argument("--eps", type=float, default=None)

    p = sub.add_parser("finite-n-density", parents=[common], help="density of Y_n by inversion")
    _add_dist_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=_grid, default=_grid("-5:60:0.05"))
    p.add_argument("--eps", type=float, default=None)

    p = sub.add_parser("density-gap", parents=[common], help="sup |g_n - g| for alpha = 1")
    _add_dist_args(p)
    p.add_argument("--ns", type=_int_list, default=[100, 1000, 10000])
    p.add_argument("--grid", type=_grid, default=_grid("-5:60:0.05"))

    p = sub.add_parser("zolotarev", parents=[common], help="duality identity between alpha and 1/alpha")
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--xs", type=_float_list, default=[0.5, 1.0, 2.0, 3.0])

    p = sub.add_parser("poly-roots", parents=[common], help="roots of p' for given roots of p")
    p.add_argument("--roots", type=_float_list, default=None)
    p.add_argument("--random", type=int, default=None, help="draw this many uniform roots")
    p.add_argument("--clamped", action="store_true", help="add a root at 0")

    p = sub.add_parser("matrix-spectrum", parents=[common], help="eigenvalues of the overlap matrix")
    p.add_argument("--overlaps", type=_float_list, default=None)
    p.add_argument("--random", type=int, default=None, help="learner instance of this size")
    p.add_argument("--learner", action="store_true", help="validate as a learner (a_1 = 1)")

    p = sub.add_parser("cn", parents=[common], help="C_n for random learner instances")
    _add_dist_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=1)

    p = sub.add_parser("learner", parents=[common], help="N_delta scaling table")
    _add_dist_args(p)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--ns", type=_int_list, required=True)
    p.add_argument("--reps", type=int, default=50)
    return parser


_VALUE_FLAGS = ("--grid", "--xs", "--roots", "--overlaps")


def _join_negative_values(argv: Sequence[str]) -> List[str]:
    """Rewrite ``--grid -5:60:0.05`` as ``--grid=-5:60:0.05``.

    argparse would otherwise read a value starting with ``-`` as a flag.
    """
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fmt = args.format or DEFAULT_FORMAT.get(args.command, "csv")
    params = {k: (str(v) if isinstance(v, (Path, GridArg)) else v)
              for k, v in vars(args).items() if k not in ("out", "verbose")}
    start = time.perf_counter()
    try:
        result = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2
    except (ValueError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    text = render(result, fmt, args.command)
    wall = time.perf_counter() - start
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
        write_manifest(args.out, args.command, params, args.seed, wall)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
