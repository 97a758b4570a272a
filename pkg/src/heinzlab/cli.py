"""Command line interface: ``heinzlab {eval,verify,sweep,report}``.

Exit codes: 0 success, 1 failed certification or evaluation error,
2 usage error, 3 domain precondition violated, 4 I/O failure.
Numbers are printed with 17 significant digits so doubles round-trip.
"""

import argparse
import csv
import itertools
import json
import sys

import numpy as np

from . import convex, linalg, matrix_ineq, scalar
from .certifier import SCHEMA, TrialConfig, certify
from .errors import DomainError, EvaluationError
from .matrix_ineq import MatrixTriple, NormSelector
from .results import SandwichResult
from .scalar import ExponentP, PositivePair, PowerIndex, WeightSplit

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def fmt(x):
    return "%.17g" % float(x)


def format_value(value):
    if isinstance(value, SandwichResult):
        text = ", ".join(fmt(v) for v in value.as_tuple())
        if value.log_scale:
            text += f" (log_scale {fmt(value.log_scale)})"
        return text
    if isinstance(value, np.ndarray) and value.ndim == 2:
        return json.dumps(linalg.matrix_to_doc(value))
    if isinstance(value, (tuple, list, np.ndarray)):
        return ", ".join(fmt(v) for v in value)
    return fmt(value)


# --------------------------------------------------------------------------
# eval operations


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"--op {args.op} needs {flags}")


def _pair(args):
    _need(args, "a", "b")
    return PositivePair(args.a, args.b)


def _weight(args):
    _need(args, "nu")
    return WeightSplit(args.nu)


def _phi(args):
    _need(args, "phi")
    return convex.from_key(args.phi)


def _norm(args):
    return NormSelector.parse(args.norm)


def _matrix(args):
    _need(args, "matrix_file")
    return linalg.read_matrix(args.matrix_file)


def _triple(args):
    _need(args, "matrix_file")
    with open(args.matrix_file) as fh:
        return MatrixTriple.from_doc(json.load(fh))


def _exp(args):
    _need(args, "p")
    return ExponentP(args.p)


def _idx(args):
    _need(args, "m")
    return PowerIndex(args.m)


def _points(args):
    _need(args, "w", "z", "y", "x")
    return args.w, args.z, args.y, args.x


def _scan(args):
    _need(args, "grid")
    s = matrix_ineq.heinz_convexity_scan(_triple(args), _norm(args), args.grid)
    lines = [f"{fmt(n)}, {fmt(v)}" for n, v in s.rows()]
    lines.append(
        f"convex={s.convex} symmetric={s.symmetric} min_near_half={s.min_near_half}"
    )
    return "\n".join(lines)


OPS = {
    "weighted-arithmetic": lambda a: scalar.weighted_arithmetic(_pair(a), _weight(a)),
    "weighted-geometric": lambda a: scalar.weighted_geometric(_pair(a), _weight(a)),
    "heinz-mean": lambda a: scalar.heinz_mean(_pair(a), _weight(a)),
    "young-sandwich": lambda a: scalar.young_sandwich(_pair(a), _weight(a)),
    "squared-young-sandwich": lambda a: scalar.squared_young_sandwich(_pair(a), _weight(a)),
    "power-p-sandwich": lambda a: scalar.power_p_sandwich(_pair(a), _weight(a), _exp(a)),
    "power-m-refinement-term": lambda a: scalar.power_m_refinement_term(_pair(a), _weight(a), _idx(a)),
    "theorem22-chain": lambda a: scalar.theorem22_chain(_pair(a), _weight(a), _idx(a)),
    "heinz-sandwich": lambda a: scalar.heinz_sandwich(_pair(a), _weight(a)),
    "heinz-power-sandwich": lambda a: scalar.heinz_power_sandwich(_pair(a), _weight(a), _exp(a)),
    "slope-chain": lambda a: convex.slope_chain(_phi(a), *_points(a)),
    "difference-dominance": lambda a: convex.difference_dominance(
        _phi(a), convex.PointQuadruple(*reversed(_points(a)))
    ),
    "phi-young-sandwich": lambda a: convex.phi_young_sandwich(_phi(a), _pair(a), _weight(a)),
    "phi-heinz-sandwich": lambda a: convex.phi_heinz_sandwich(
        _phi(a), _pair(a), _weight(a), halved=a.halved
    ),
    "eigenvalues": lambda a: linalg.hermitian_eigendecomposition(_matrix(a)).eigenvalues,
    "psd-power": lambda a: linalg.PsdMatrix(_matrix(a)).power(_weight(a).nu),
    "singular-values": lambda a: linalg.singular_values(_matrix(a)),
    "schatten": lambda a: (_need(a, "p"), linalg._check_p(a.p), linalg.schatten_norm(_matrix(a), a.p))[2],
    "hilbert-schmidt": lambda a: linalg.hilbert_schmidt_norm(_matrix(a)),
    "spectral": lambda a: linalg.spectral_norm(_matrix(a)),
    "hs-identity-residual": lambda a: matrix_ineq.hs_identity_residual(_triple(a)),
    "hs-young-sandwich": lambda a: matrix_ineq.hs_young_sandwich(_triple(a), _weight(a)),
    "phi-hs-sandwich": lambda a: matrix_ineq.phi_hs_sandwich(_triple(a), _weight(a), _phi(a), a.form),
    "heinz-norm-bounds": lambda a: matrix_ineq.heinz_norm_bounds(_triple(a), _weight(a), _norm(a)),
    "heinz-norm-sandwich": lambda a: matrix_ineq.heinz_norm_sandwich(_triple(a), _weight(a), _norm(a)),
    "phi-heinz-norm-sandwich": lambda a: matrix_ineq.phi_heinz_norm_sandwich(
        _triple(a), _weight(a), _norm(a), _phi(a), a.form
    ),
    "heinz-convexity-scan": _scan,
}


def cmd_eval(args):
    value = OPS[args.op](args)
    print(value if isinstance(value, str) else format_value(value))
    return EXIT_OK


# --------------------------------------------------------------------------
# verify / report


def _parse_perturb(items):
    out = {}
    for item in items or []:
        key, sep, factor = item.rpartition("=")
        if not sep:
            raise UsageError(f"--perturb expects ID=FACTOR, got {item!r}")
        try:
            out[key] = float(factor)
        except ValueError as exc:
            raise UsageError(f"bad factor in --perturb {item!r}") from exc
    return out


def _parse_range_pair(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--scalar-range expects LO:HI (log10), got {text!r}") from exc
    return lo, hi


def cmd_verify(args):
    cfg = TrialConfig(
        seed=args.seed,
        trials=args.trials,
        scalar_range=_parse_range_pair(args.scalar_range),
        dim_max=args.dim_max,
        nu_strategy=args.nu_strategy,
        tol_rel_scalar=args.tol_scalar,
        tol_rel_matrix=args.tol_matrix,
    )
    report = certify(cfg, args.suite, perturb=_parse_perturb(args.perturb))
    with open(args.out, "w") as fh:
        fh.write(report.to_json())
    print(report.summary_line())
    return EXIT_OK if report.ok else EXIT_FAIL


def _opt(x):
    return "-" if x is None else "%.3g" % x


def cmd_report(args):
    with open(args.input) as fh:
        doc = json.load(fh)
    if doc.get("schema") != SCHEMA:
        raise DomainError(f"unsupported report schema {doc.get('schema')!r}")
    print(f"suite={doc['suite']} seed={doc['config']['seed']} trials={doc['trials']}")
    header = ("id", "trials", "errors", "hits", "violations", "min_lower", "median_lower", "min_upper")
    rows = [header]
    for e in doc["inequalities"]:
        rows.append(
            (
                e["id"],
                str(e["trials"]),
                str(e["evaluation_errors"]),
                str(e["equality_hits"]),
                str(e["violation_count"]),
                _opt(e["min_lower_slack"]),
                _opt(e["median_lower_slack"]),
                _opt(e["min_upper_slack"]),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    for e in doc["inequalities"]:
        for v in e["violations"]:
            print(f"violation {v['inequality_id']}: slack {v['observed_slack']:.3g}, shrunk {json.dumps(v['shrunk_inputs'])}")
    print(doc["summary"])
    return EXIT_OK if doc["status"] == "OK" else EXIT_FAIL


# --------------------------------------------------------------------------
# sweep


def parse_grid(text, integer=False):
    """``start:stop[:step]`` (inclusive) or a single value."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}; expected start:stop[:step]") from exc
    if len(nums) == 1:
        values = nums
    elif len(nums) in (2, 3):
        start, stop = nums[0], nums[1]
        step = nums[2] if len(nums) == 3 else 1.0
        if not step > 0:
            raise DomainError(f"range step must be positive in {text!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1 if stop >= start else 0
        values = [start + k * step for k in range(count)]
    else:
        raise UsageError(f"bad range {text!r}; expected start:stop[:step]")
    if integer:
        if any(v != int(v) for v in values):
            raise DomainError(f"range {text!r} must contain integers")
        values = [int(v) for v in values]
    return values


def _scalar_row(ineq, a, b, nu, m, p, phi, halved):
    pair, w = PositivePair(a, b), WeightSplit(nu)
    if ineq == "eq4":
        return scalar.young_sandwich(pair, w).as_tuple()
    if ineq == "eq7":
        return scalar.squared_young_sandwich(pair, w).as_tuple()
    if ineq == "eq8":
        t1, _, t3, _ = scalar.theorem22_chain(pair, w, PowerIndex(m))
        return (t1, t3)
    if ineq == "eq9":
        return scalar.heinz_power_sandwich(pair, w, ExponentP(1.0)).as_tuple()
    if ineq == "eq10":
        return scalar.heinz_sandwich(pair, w).as_tuple()
    if ineq == "eq14":
        return convex.phi_young_sandwich(phi, pair, w).as_tuple()
    if ineq == "eq15":
        return scalar.power_p_sandwich(pair, w, ExponentP(p)).as_tuple()
    if ineq == "eq16":
        return scalar.theorem22_chain(pair, w, PowerIndex(m))
    if ineq == "eq17":
        return convex.phi_heinz_sandwich(phi, pair, w, halved=halved).as_tuple()
    if ineq == "eq18":
        return scalar.heinz_power_sandwich(pair, w, ExponentP(p)).as_tuple()
    raise AssertionError(ineq)


SCALAR_SWEEPS = {
    # id: parameters beyond a, b, nu
    "eq4": (),
    "eq7": (),
    "eq8": ("m",),
    "eq9": (),
    "eq10": (),
    "eq14": ("phi",),
    "eq15": ("p",),
    "eq16": ("m",),
    "eq17": ("phi",),
    "eq18": ("p",),
}
MATRIX_SWEEPS = ("eq21", "thm31", "heinz-bounds", "eq24", "cor31", "heinz-scan")


def _term_names(n):
    if n == 2:
        return ["lower", "upper"], ["slack"]
    if n == 3:
        return ["lower", "middle", "upper"], ["lower_slack", "upper_slack"]
    return [f"t{i + 1}" for i in range(n)], [f"slack{i + 1}{i + 2}" for i in range(n - 1)]


def _slacks(terms):
    return [terms[i + 1] - terms[i] for i in range(len(terms) - 1)]


def cmd_sweep(args):
    ineq = args.ineq
    if ineq not in SCALAR_SWEEPS and ineq not in MATRIX_SWEEPS:
        known = ", ".join(sorted(SCALAR_SWEEPS) + list(MATRIX_SWEEPS))
        raise UsageError(f"unknown --ineq {ineq!r} (known: {known})")
    rows, header = [], None
    if ineq == "heinz-scan":
        _need(args, "grid")
        s = matrix_ineq.heinz_convexity_scan(_triple(args), _norm(args), args.grid)
        header = ["nu", "f"]
        rows = [list(r) for r in s.rows()]
    elif ineq in MATRIX_SWEEPS:
        _need(args, "nu")
        t = _triple(args)
        norm = _norm(args)
        phi = convex.from_key(args.phi) if args.phi else None
        for nu in parse_grid(args.nu):
            w = WeightSplit(nu)
            if ineq == "eq21":
                terms = matrix_ineq.hs_young_sandwich(t, w).as_tuple()
            elif ineq == "thm31":
                _need(args, "phi")
                terms = matrix_ineq.phi_hs_sandwich(t, w, phi, args.form).as_tuple()
            elif ineq == "heinz-bounds":
                terms = matrix_ineq.heinz_norm_bounds(t, w, norm)
            elif ineq == "eq24":
                terms = matrix_ineq.heinz_norm_sandwich(t, w, norm).as_tuple()
            else:
                _need(args, "phi")
                terms = matrix_ineq.phi_heinz_norm_sandwich(t, w, norm, phi, args.form).as_tuple()
            names, snames = _term_names(len(terms))
            header = ["nu"] + names + snames
            rows.append([nu, *terms, *_slacks(terms)])
    else:
        _need(args, "a", "b", "nu")
        extra = SCALAR_SWEEPS[ineq]
        axes = {
            "a": parse_grid(args.a),
            "b": parse_grid(args.b),
            "nu": parse_grid(args.nu),
        }
        if "m" in extra:
            _need(args, "m")
            axes["m"] = parse_grid(args.m, integer=True)
        if "p" in extra:
            _need(args, "p")
            axes["p"] = parse_grid(args.p)
        phi = _phi(args) if "phi" in extra else None
        names = list(axes)
        for combo in itertools.product(*axes.values()):
            params = dict(zip(names, combo))
            terms = _scalar_row(
                ineq, params["a"], params["b"], params["nu"], params.get("m"), params.get("p"), phi, args.halved
            )
            tn, sn = _term_names(len(terms))
            header = names + tn + sn
            rows.append([*combo, *terms, *_slacks(terms)])
    if not rows:
        raise DomainError("empty parameter grid")
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([v if isinstance(v, (int, np.integer)) and not isinstance(v, bool) else fmt(v) for v in r])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _add_scalar_flags(p, ranged=False):
    kind = str if ranged else float
    for name in ("a", "b", "nu"):
        p.add_argument(f"--{name}", type=kind)
    p.add_argument("--m", type=str if ranged else int)
    p.add_argument("--p", type=kind)
    p.add_argument("--phi", help="convex function key: pow:P, exp or spow:C:P")
    p.add_argument("--halved", action="store_true", help="halved Heinz variant")
    p.add_argument("--matrix-file", help="matrix or triple JSON document")
    p.add_argument("--norm", default="trace", help="trace, hs, spectral or schatten:P")
    p.add_argument("--form", default="theorem", choices=["theorem", "display"])
    p.add_argument("--grid", type=int)


def build_parser():
    parser = _Parser(prog="heinzlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate one operation")
    p.add_argument("--op", required=True, choices=sorted(OPS))
    _add_scalar_flags(p)
    for name in ("w", "z", "y", "x"):
        p.add_argument(f"--{name}", type=float)

    p = sub.add_parser("verify", help="run a certification suite")
    p.add_argument("--suite", choices=["scalar", "matrix", "all"], default="all")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--dim-max", type=int, default=6)
    p.add_argument("--scalar-range", default="-3:3", help="log10 range LO:HI for a and b")
    p.add_argument("--nu-strategy", choices=["uniform", "boundary-weighted"], default="boundary-weighted")
    p.add_argument("--tol-scalar", type=float, default=1e-12)
    p.add_argument("--tol-matrix", type=float, default=1e-9)
    p.add_argument("--out", default="heinzlab-report.json")
    p.add_argument("--perturb", action="append", help=argparse.SUPPRESS)

    p = sub.add_parser("sweep", help="tabulate an inequality over a parameter grid")
    p.add_argument("--ineq", required=True)
    _add_scalar_flags(p, ranged=True)
    p.add_argument("--out", help="CSV path (default: standard output)")

    p = sub.add_parser("report", help="summarise a report file")
    p.add_argument("--in", dest="input", required=True)
    return parser


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "sweep": cmd_sweep, "report": cmd_report}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"heinzlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"heinzlab: precondition violated: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, json.JSONDecodeError) as exc:
        print(f"heinzlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EvaluationError as exc:
        print(f"heinzlab: evaluation error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
