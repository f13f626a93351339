"""Command-line interface: sampling, estimation, constants and simulations.

Every command writes result records as CSV (the default) or newline-delimited
JSON.  Each record echoes the parameters needed to reproduce it.  Wall time
is left out unless ``--timing`` is given, so reruns produce identical bytes.

Exit codes: 0 on success, 1 on a usage error, 2 on a numerical or I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import experiments as ex
from . import likelihood, pvii, theory

__all__ = ["OutputRecord", "emit", "main"]

SCHEMA_VERSION = "1"
BASE_COLUMNS = ["command", "schema_version", "timing"]


class UsageError(Exception):
    pass


@dataclass
class OutputRecord:
    command: str
    params: dict
    results: dict
    timing: float | None = None
    schema_version: str = field(default=SCHEMA_VERSION)

    @classmethod
    def from_dict(cls, d: dict) -> "OutputRecord":
        return cls(d["command"], d["params"], d["results"], d.get("timing"), d["schema_version"])


def _plain(v):
    """Convert numpy scalars and arrays, tuples and nested dicts to JSON types."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, list):
        return ";".join(_cell(x) for x in v)
    return str(v)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _row(r: OutputRecord) -> dict:
    row = _flatten(r.results)
    row.update(_flatten(r.params, "params."))
    row.update({"command": r.command, "schema_version": r.schema_version, "timing": r.timing})
    return row


def _render(records, fmt: str) -> str:
    records = [OutputRecord(r.command, _plain(r.params), _plain(r.results), r.timing, r.schema_version)
               for r in records]
    if fmt == "json":
        return "".join(json.dumps(asdict(r)) + "\n" for r in records)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    rows = [_row(r) for r in records]
    columns = []
    for row in rows:
        columns.extend(k for k in row if k not in columns)
    if not rows:
        columns = list(BASE_COLUMNS)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def emit(records, fmt: str = "csv", path: str | None = None) -> None:
    """Write ``records`` as CSV or newline-delimited JSON to ``path`` or stdout.

    CSV follows RFC 4180 (CRLF line ends, minimal quoting): a header row,
    then one row per record with results first, then ``params.*`` columns.
    Floats use 17 significant digits so every value parses back exactly.
    """
    text = _render(records, fmt)
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.replace("\n", ",").split(",") if tok.strip()]
    except ValueError as err:
        raise UsageError(f"could not parse data: {err}") from None
    if not vals:
        raise UsageError("no data values given")
    return vals


def _read_data(args) -> list[float]:
    if (args.data is None) == (args.infile is None):
        raise UsageError("give exactly one of --data or --in")
    if args.data is not None:
        return _float_list(args.data)
    with open(args.infile, encoding="utf-8") as fh:
        return _float_list(fh.read())


def _method(name: str) -> str:
    return "local_from_median" if name == "local" else name


def _common(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--timing", action="store_true", help="record wall seconds in the output")


def _build_parser() -> _Parser:
    parser = _Parser(prog="pviiloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw a PVII sample")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    _common(p)

    for name, text in (("mle", "location MLE of a sample"), ("roots", "all roots of the score equation")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--data", help="comma-separated values")
        p.add_argument("--in", dest="infile", help="file with one value per line")
        if name == "mle":
            p.add_argument("--method", choices=("global", "local"), default="global")
        _common(p)

    p = sub.add_parser("theory", help="closed-form asymptotic constants")
    p.add_argument("--m", type=float, action="append", required=True)
    _common(p)

    p = sub.add_parser("simulate", help="seeded Monte Carlo experiments")
    p.add_argument("kind", choices=("variance", "clt", "roots", "deviation", "lil"))
    p.add_argument("--m", type=float, action="append", required=True)
    p.add_argument("--n", type=int, action="append", required=True)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--eps", type=float, action="append", default=None)
    p.add_argument("--lambda-exp", type=float, default=0.25)
    p.add_argument("--method", choices=("global", "local"), default="global")
    p.add_argument("--workers", type=int, default=None)
    _common(p)
    return parser


def _cmd_sample(args):
    p = pvii.DistParams(args.m, args.mu, args.sigma)
    s = pvii.sample(args.n, p, pvii.make_rng(args.seed))
    params = {"m": p.m, "mu": p.mu, "sigma": p.sigma, "n": args.n, "seed": args.seed}
    return [OutputRecord("sample", params, {"index": i, "value": v}) for i, v in enumerate(s.values)]


def _scan_params() -> dict:
    return {
        "scan_step": likelihood.SCAN_STEP,
        "max_halvings": likelihood.MAX_HALVINGS,
        "tie_tol": likelihood.TIE_TOL,
    }


def _cmd_mle(args):
    data = _read_data(args)
    res = likelihood.mle(data, method=_method(args.method))
    params = {"method": res.method, "n": len(data), "data": data, **_scan_params()}
    results = {
        "estimate": res.estimate,
        "tie": res.tie,
        "roots": res.roots.roots,
        "losses": res.losses,
        "root_count": len(res.roots),
    }
    return [OutputRecord("mle", params, results)]


def _cmd_roots(args):
    data = _read_data(args)
    rs = likelihood.find_roots(data)
    params = {"n": len(data), "data": data, **_scan_params()}
    return [
        OutputRecord("roots", params, {
            "index": i,
            "root": r,
            "lower": rs.brackets[i, 0],
            "upper": rs.brackets[i, 1],
            "loss": likelihood.loss(r, data),
            "count": len(rs),
        })
        for i, r in enumerate(rs.roots)
    ]


def _cmd_theory(args):
    out = []
    for m in args.m:
        c = theory.constants(m)
        out.append(OutputRecord("theory", {"m": m}, asdict(c)))
    return out


def _config(args, m: float) -> ex.ExperimentConfig:
    if args.reps is None:
        raise UsageError("simulate needs --reps")
    eps = tuple(args.eps) if args.eps else (1.0,)
    return ex.ExperimentConfig(
        m=m,
        n_values=tuple(args.n),
        reps=args.reps,
        seed=args.seed,
        workers=args.workers,
        eps=eps,
        lambda_exponent=args.lambda_exp,
        method=_method(args.method),
    )


def _cmd_simulate(args):
    name = f"simulate {args.kind}"
    if args.kind != "variance" and len(args.m) != 1:
        raise UsageError(f"{name} takes a single --m")
    out = []
    for m in args.m:
        cfg = _config(args, m)
        params = cfg.context()
        if args.kind == "variance":
            for row in ex.run_variance_table(cfg):
                results = {
                    "m": row.m, "n": row.n, "estimate": row.estimate, "mc_se": row.mc_se,
                    "reps": row.reps_used, "unstable": row.unstable,
                    "tail_fraction": row.tail_fraction, "failures": row.failures,
                }
                out.append(OutputRecord(name, params, results))
        elif args.kind == "clt":
            if len(cfg.n_values) != 1:
                raise UsageError("simulate clt takes a single --n")
            out.append(OutputRecord(name, params, ex.run_clt(cfg)))
        elif args.kind == "roots":
            census = ex.run_root_census(cfg)
            for k, cnt in sorted(census.counts.items()):
                out.append(OutputRecord(name, params, {
                    "m": m, "n": census.n, "roots": k, "count": cnt,
                    "frequency": census.frequency(k), "reps": census.reps,
                    "fitted_intensity": census.fitted_intensity, "c_m": census.c_m,
                    "failures": census.failures,
                }))
        elif args.kind == "deviation":
            out.extend(OutputRecord(name, params, row) for row in ex.run_deviation(cfg))
        else:
            trace = ex.run_lil_trace(cfg)
            for n, s, top in zip(trace["checkpoints"], trace["s_values"], trace["running_max"]):
                out.append(OutputRecord(name, params, {
                    "m": m, "n": n, "s_n": s, "running_max": top,
                    "sup_statistic": trace["sup_statistic"], "lil_const": trace["lil_const"],
                }))
    return out


_COMMANDS = {
    "sample": _cmd_sample,
    "mle": _cmd_mle,
    "roots": _cmd_roots,
    "theory": _cmd_theory,
    "simulate": _cmd_simulate,
}


def _attach_values(argv: list[str]) -> list[str]:
    # data lists such as "-2,2" would otherwise be read as options
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--data", "--in"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = _build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_attach_values(argv))
        start = time.perf_counter()
        records = _COMMANDS[args.command](args)
        if args.timing:
            wall = time.perf_counter() - start
            for r in records:
                r.timing = wall
        emit(records, args.format, args.out)
    except SystemExit as stop:
        # --help and --version exit through argparse
        return int(stop.code or 0)
    except UsageError as err:
        print(str(err), file=sys.stderr)
        return 1
    except ValueError as err:
        # invalid parameter values are usage errors too
        print(parser.format_usage() + f"pviiloc: error: {err}", file=sys.stderr)
        return 1
    except (ArithmeticError, OSError) as err:
        print(f"pviiloc: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
