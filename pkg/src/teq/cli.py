"""Command-line front end: ``teq bound | single-vector | erasure-compare | cascade | verify``.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from importlib import metadata

import numpy as np

from . import bounds as bd
from . import channels as ch
from . import oracle as orc
from . import single_vector as sv

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2

FAMILIES = ("depolarizing", "classical-noise", "bitflip", "phaseflip")
# oracle budget used by ``verify`` when no flags are given
VERIFY_BUDGET = orc.OracleBudget(restarts=8, max_evals=2000)


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# --- channel ingestion ---------------------------------------------------------


def parse_kraus_json(text: str, tol: float = 1e-10) -> ch.KrausChannel:
    """Parse ``{"n": int, "kraus": [[[[re, im], ...], ...], ...]}`` into a validated channel."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"channel file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "n" not in data or "kraus" not in data:
        raise InputError('channel file must be an object with keys "n" and "kraus"')
    n = data["n"]
    if not isinstance(n, int) or n < 2:
        raise InputError(f'"n" must be an integer >= 2, got {n!r}')
    try:
        arr = np.asarray(data["kraus"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"Kraus entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim != 4 or arr.shape[-1] != 2:
        raise InputError("Kraus operators must be nested as operators x rows x entries x [re, im]")
    if arr.shape[1:3] != (n, n):
        raise InputError(f"dimension mismatch: expected {n}x{n} operators, got {arr.shape[1]}x{arr.shape[2]}")
    ops = arr[..., 0] + 1j * arr[..., 1]
    try:
        return ch.validate(ops, tol)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def kraus_to_json(c: ch.KrausChannel) -> str:
    kraus = [[[[float(z.real), float(z.imag)] for z in row] for row in f] for f in c.ops]
    return json.dumps({"n": c.n, "kraus": kraus})


def family_channel(name: str, n: int | None, q: float | None, u: float | None) -> ch.KrausChannel:
    try:
        if name in ("depolarizing", "classical-noise"):
            if n is None or q is None:
                raise InputError(f"family {name} needs --n and --q")
            make = ch.depolarizing_quantum if name == "depolarizing" else ch.noisy_classical
            return make(n, q)
        if name in ("bitflip", "phaseflip"):
            if u is None:
                raise InputError(f"family {name} needs --u")
            if n not in (None, 2):
                raise InputError(f"family {name} is defined for n=2 only")
            return ch.bitflip(u) if name == "bitflip" else ch.phaseflip(u)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    raise InputError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")


# --- output ------------------------------------------------------------------------


def _num(x):
    """Round-trip-exact float: 17 significant digits."""
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    return float(f"{x:.17g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, int, np.floating, np.integer, np.bool_, bool)) or obj is None:
        return _num(obj)
    return obj


def _angle(x, degrees: bool):
    if x is None:
        return None
    return float(np.degrees(x)) if degrees else float(x)


def _complex_list(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


class Record:
    """One command's output: a flat mapping of scalar results plus echoed inputs."""

    def __init__(self, command: str, args: argparse.Namespace, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.results: dict = {}
        self.rows: list[dict] = []
        self.extra: dict = {}
        self.deterministic = getattr(args, "deterministic", False)
        self.seed = getattr(args, "seed", None)
        self.units = "deg" if getattr(args, "degrees", False) else "rad"

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "version": _version(),
            "units": self.units,
            "results": self.results,
        }
        if self.rows:
            out["rows"] = self.rows
        if self.extra:
            out["extra"] = self.extra
        if not self.deterministic:
            out["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return _clean(out)


def render(record: Record, fmt: str) -> str:
    data = record.to_dict()
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=False)
    rows = data.get("rows") or [data["results"]]
    if fmt == "csv":
        keys: list[str] = []
        for row in rows:
            for k, v in row.items():
                if k not in keys and not isinstance(v, (list, dict)):
                    keys.append(k)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in keys})
        return buf.getvalue().rstrip("\n")
    lines = [f"# teq {data['command']}  (angles in {data['units']})"]
    width = max([len(k) for k in list(data["inputs"]) + list(data["results"])] + [1])
    for k, v in data["inputs"].items():
        if v is not None:
            lines.append(f"  {k:>{width}s} = {v}")
    if data.get("rows"):
        keys = [k for k in data["rows"][0] if not isinstance(data["rows"][0][k], (list, dict))]
        cols = [max(len(k), *(len(_text_cell(r.get(k))) for r in data["rows"])) for k in keys]
        lines.append("  " + "  ".join(f"{k:>{w}s}" for k, w in zip(keys, cols)))
        for row in data["rows"]:
            lines.append("  " + "  ".join(f"{_text_cell(row.get(k)):>{w}s}" for k, w in zip(keys, cols)))
    else:
        for k, v in data["results"].items():
            if not isinstance(v, (list, dict)):
                lines.append(f"  {k:>{width}s} : {_text_cell(v)}")
    return "\n".join(lines)


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return v


def _text_cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


# --- commands ----------------------------------------------------------------------


def _optimizer_config(args) -> bd.OptimizerConfig:
    base = bd.OptimizerConfig()
    cfg = bd.OptimizerConfig(
        restarts=args.restarts if args.restarts is not None else base.restarts,
        max_evals=args.max_evals if args.max_evals is not None else base.max_evals,
        seed=args.seed if args.seed is not None else base.seed,
        tol=args.tol if args.tol is not None else base.tol,
    )
    if cfg.restarts < 0 or cfg.max_evals < 1 or cfg.tol <= 0:
        raise InputError("--restarts must be >= 0, --max-evals >= 1 and --tol > 0")
    return cfg


def cmd_bound(args) -> Record:
    if (args.channel is None) == (args.family is None):
        raise InputError("give exactly one channel source: --channel FILE or --family NAME")
    tol = 1e-10
    if args.channel is not None:
        try:
            with open(args.channel) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read channel file: {exc}") from exc
        c = parse_kraus_json(text, tol)
        source = {"channel": args.channel}
    else:
        c = family_channel(args.family, args.n, args.q, args.u)
        source = {"family": args.family, "n": args.n, "q": args.q, "u": args.u}
    cfg = _optimizer_config(args)
    flavor = args.measure
    report = bd.channel_bounds(c, flavor, cfg)
    deg = args.degrees
    rec = Record("bound", args, {**source, "measure": flavor, "restarts": cfg.restarts,
                                 "max_evals": cfg.max_evals, "tol": cfg.tol})
    rec.results = {
        "n": c.n,
        "d": c.d,
        "lower": _angle(report.lower, deg),
        "upper": _angle(report.upper, deg),
        "exact": _angle(report.exact, deg),
        "lower_kind": report.lower_kind,
        "tightened": report.diagnostics["tightened"],
        "extension_dim": report.diagnostics["extension_dim"],
        "extension_measure": _angle(report.diagnostics["extension_measure"], deg),
        "lower_evals": report.diagnostics["lower"]["evals"],
        "upper_evals": report.diagnostics["upper"]["evals"],
        "lower_converged": report.diagnostics["lower"]["converged"],
        "upper_converged": report.diagnostics["upper"]["converged"],
    }
    rec.extra = {"v_lower": _complex_list(report.v_lower.v), "v_upper": _complex_list(report.v_upper.v),
                 "note": "dilations with more than d+1 ancilla levels are not searched"}
    return rec


def cmd_single_vector(args) -> Record:
    if args.overlap_re is None or args.overlap_im is None:
        raise InputError("single-vector needs --overlap-re and --overlap-im")
    w = complex(args.overlap_re, args.overlap_im)
    if abs(w) > 1 + 1e-12:
        raise InputError(f"overlap {w} lies outside the unit disk")
    deg = args.degrees
    rec = Record("single-vector", args, {"overlap_re": args.overlap_re, "overlap_im": args.overlap_im,
                                         "dim": args.dim if args.brute else None})
    rec.results = {
        "f_max": _angle(sv.f_max(w), deg),
        "f_sum_lower": _angle(sv.f_sum_lower(w), deg),
        "f_sum_upper": _angle(sv.f_sum_upper(w), deg),
    }
    if args.brute:
        dim = args.dim or 2
        if not 2 <= dim <= orc.MAX_VECTOR_DIM:
            raise InputError(f"--dim must be in 2..{orc.MAX_VECTOR_DIM}")
        a = np.zeros(dim, dtype=complex)
        a[0] = 1
        b = np.zeros(dim, dtype=complex)
        b[0] = w
        b[1] = np.sqrt(max(1 - abs(w) ** 2, 0.0))
        seed = args.seed or 0
        budget = _oracle_budget(args, orc.OracleBudget(restarts=4, max_evals=1500))
        rec.results["brute_max"] = _angle(orc.brute_single_vector(a, b, "max", budget, seed).value, deg)
        rec.results["brute_sum"] = _angle(orc.brute_single_vector(a, b, "sum", budget, seed).value, deg)
    return rec


def cmd_erasure_compare(args) -> Record:
    if args.n is None or args.delta is None:
        raise InputError("erasure-compare needs --n and --delta")
    try:
        res = bd.erasure_compare(args.n, args.delta)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    deg = args.degrees
    rec = Record("erasure-compare", args, {"n": args.n, "delta": args.delta})
    rec.results = {
        "quantum": _angle(res.quantum, deg),
        "classical": _angle(res.classical, deg),
        "ratio": res.ratio,
        "asymptote": res.asymptote,
        "limit": res.limit,
    }
    return rec


def cmd_cascade(args) -> Record:
    if args.n is None or args.q is None or args.k is None:
        raise InputError("cascade needs --n, --q and --k")
    try:
        res = bd.cascade_analysis(args.n, args.q, args.k)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    deg = args.degrees
    rec = Record("cascade", args, {"n": args.n, "q": args.q, "k": args.k})
    rec.results = {
        "single": _angle(res.single, deg),
        "separate": _angle(res.separate, deg),
        "combined": _angle(res.combined, deg),
        "ratio": res.ratio,
        "sqrt_k": res.sqrt_k,
        "small_noise": res.small_noise,
        "limit": res.limit,
    }
    if not res.small_noise:
        rec.extra = {"note": "outside the small-noise regime; ratio is not compared with sqrt(k)"}
    return rec


def _oracle_budget(args, default: orc.OracleBudget) -> orc.OracleBudget:
    restarts = args.restarts if args.restarts is not None else default.restarts
    max_evals = args.max_evals if args.max_evals is not None else default.max_evals
    if restarts < 1 or max_evals < 1:
        raise InputError("--restarts and --max-evals must be positive for the oracle")
    return orc.OracleBudget(restarts, max_evals)


def cmd_verify(args) -> tuple[Record, int]:
    seed = args.seed if args.seed is not None else 0
    trials = args.trials if args.trials is not None else 100
    if trials < 0:
        raise InputError("--trials must be >= 0")
    rec = Record("verify", args, {"suite": args.suite, "seed": seed, "trials": trials})
    failures = []
    if args.suite in ("lemmas", "all"):
        for check in (orc.check_polygon_reduction, orc.check_chord_min_angle, orc.check_appendix_identity):
            rep = check(seed, trials)
            rec.rows.append({"check": rep.name, "trials": rep.trials, "violations": rep.violations,
                             "max_residual": rep.max_residual, "passed": rep.passed,
                             "vacuous": rep.vacuous})
            failures += [{"check": rep.name, **f} for f in rep.failures]
    if args.suite in ("oracle", "all"):
        budget = _oracle_budget(args, VERIFY_BUDGET)
        n_channels = args.trials if args.trials is not None else 20
        cases = orc.oracle_suite(seed, n_channels, budget)
        held = sum(case.holds for case in cases)
        rec.rows.append({"check": "oracle-sandwich", "trials": len(cases), "violations": len(cases) - held,
                         "max_residual": max([max(0.0, case.lower - case.oracle, case.oracle - case.upper)
                                              for case in cases], default=0.0),
                         "passed": held == len(cases), "vacuous": len(cases) == 0})
        failures += [{"check": "oracle-sandwich", "label": case.label, "lower": case.lower,
                      "oracle": case.oracle, "upper": case.upper, "seed": seed}
                     for case in cases if not case.holds]
    total = sum(row["trials"] for row in rec.rows)
    bad = sum(row["violations"] for row in rec.rows)
    rec.results = {"checks": len(rec.rows), "trials": total, "violations": bad,
                   "passed": bad == 0, "vacuous": total == 0}
    if failures:
        rec.extra = {"failures": failures}
    return rec, (EXIT_OK if bad == 0 else EXIT_VERIFY)


# --- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teq", description="Time-energy cost of unitaries and quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("text", "json", "csv"), default="text")
    common.add_argument("--degrees", action="store_true", help="report angles in degrees")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp field")
    common.add_argument("--seed", type=int, default=None)

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--restarts", type=int, default=None)
    opt.add_argument("--max-evals", type=int, default=None)
    opt.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("bound", parents=[common, opt], help="lower/upper bounds on a channel's measure")
    p.add_argument("--channel", help="Kraus JSON file")
    p.add_argument("--family", help=f"one of {', '.join(FAMILIES)}")
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--u", type=float)
    p.add_argument("--measure", choices=bd.FLAVORS, default="max")

    p = sub.add_parser("single-vector", parents=[common, opt], help="closed forms for one input vector")
    p.add_argument("--overlap-re", type=float)
    p.add_argument("--overlap-im", type=float)
    p.add_argument("--brute", action="store_true", help="also run the brute-force search")
    p.add_argument("--dim", type=int, default=None)

    p = sub.add_parser("erasure-compare", parents=[common], help="quantum vs classical noise at equal trace distance")
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)

    p = sub.add_parser("cascade", parents=[common], help="k separate depolarizing runs vs one combined run")
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--k", type=int)

    p = sub.add_parser("verify", parents=[common, opt], help="randomized lemma and oracle checks")
    p.add_argument("--suite", choices=("lemmas", "oracle", "all"), default="lemmas")
    p.add_argument("--trials", type=int, default=None)
    return parser


COMMANDS = {
    "bound": cmd_bound,
    "single-vector": cmd_single_vector,
    "erasure-compare": cmd_erasure_compare,
    "cascade": cmd_cascade,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            rec, code = cmd_verify(args)
        else:
            rec, code = COMMANDS[args.command](args), EXIT_OK
    except InputError as exc:
        print(f"teq {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(render(rec, args.output))
    return code


if __name__ == "__main__":
    sys.exit(main())
