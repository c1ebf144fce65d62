"""Command-line front end.

Every subcommand takes a sequence source: a gallery name (see
``bochnerlab.gallery.names()``) or a path to a JSON file holding either an
array of step functions or an object with ``members`` and an optional
``limit``. Output goes to stdout unless ``--out`` is given.

Exit codes: 0 success, 1 failed property checks, 2 malformed input or
arguments, 3 dyadic resolution beyond ``--max-level``.
"""

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import config, gallery
from .convergence import LatticeViolation, ReportConfig, lattice_report
from .dyadic import DyadicPartition, DyadicSet
from .functionals import (PettisCapError, equi_modulus, pettis_norm_bounds,
                          pettis_norm_exact, pettis_ui_modulus, ui_modulus)
from .oscillation import (DEFAULT_EPS_GRID, bocce_osc, pettis_bocce_interval,
                          small_bocce_osc)
from .seqspace import Functional
from .serialize import csv_text, dumps
from .stepfn import FunctionSequence, cond_expectation, l1_norm
from .tightbite import biting_decompose, tightness_search

__all__ = ["main", "build_parser"]


class InputError(ValueError):
    """Command-line input that cannot be interpreted."""


def _eps_grid(text):
    try:
        values = [float(Fraction(t.strip())) for t in text.split(",")
                  if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad eps grid {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("eps values must be positive")
    return tuple(values)


def _positive_int(text):
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _load_source(source, prefix):
    if source in gallery.names():
        return gallery.get(source, prefix)
    if not os.path.exists(source):
        raise InputError(f"{source!r} is neither a gallery name "
                         f"({', '.join(gallery.names())}) nor a file")
    try:
        with open(source, encoding="utf-8") as fh:
            seq = FunctionSequence.from_json(json.load(fh))
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON: {exc}") from exc
    except (KeyError, TypeError) as exc:
        raise InputError(f"{source}: malformed sequence: {exc}") from exc
    if not seq.label:
        seq.label = os.path.basename(source)
    return seq.prefix(prefix) if prefix else seq


def _load_functionals(text, kind):
    if text is None:
        return None
    if text.startswith("coords:"):
        try:
            coords = [int(c) for c in text[7:].split(",") if c.strip()]
        except ValueError as exc:
            raise InputError(f"bad coordinate list {text!r}") from exc
        return [Functional.coordinate(c, kind) for c in coords]
    try:
        with open(text, encoding="utf-8") as fh:
            data = json.load(fh)
        family = [Functional.from_json(d) for d in data]
    except OSError as exc:
        raise InputError(f"cannot read functionals: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{text}: malformed functionals: {exc}") from exc
    for x in family:
        if x.kind is not kind:
            raise InputError(f"functional acts on {x.kind.value}, "
                             f"sequence lives in {kind.value}")
    return family


def _member(seq, k):
    if not 1 <= k <= len(seq):
        raise InputError(f"--k {k} outside 1..{len(seq)}")
    return seq.member(k)


def _emit(args, payload=None, rows=None):
    if args.format == "csv":
        if rows is None:
            raise InputError("this subcommand has no CSV form")
        text = csv_text(rows)
    else:
        text = dumps(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_report(args):
    K = args.prefix
    seq = _load_source(args.source, K)
    overrides = dict(eps_grid=args.eps_grid, search_level=args.level,
                     tol=args.tol, criteria=not args.no_criteria,
                     functionals=_load_functionals(args.functionals,
                                                   seq.kind))
    if args.source in gallery.names():
        cfg = gallery.report_config(args.source, K, **overrides)
    else:
        cfg = ReportConfig(**overrides)
    report = lattice_report(seq, cfg)
    _emit(args, report, report.csv_rows())
    return 0


def _cmd_pettis(args):
    seq = _load_source(args.source, max(args.prefix or 0, args.k))
    f = _member(seq, args.k)
    family = _load_functionals(args.functionals, seq.kind)
    try:
        result = pettis_norm_exact(f, args.cap)
    except PettisCapError as exc:
        if family is None:
            raise
        result = pettis_norm_bounds(f, family)
        payload = {"k": args.k, "note": str(exc), **result.to_json()}
    else:
        payload = {"k": args.k, **result.to_json()}
    payload["l1_norm"] = l1_norm(f)
    _emit(args, payload, [(args.k, "pettis", result.value),
                          (args.k, "pettis.lower", result.lower),
                          (args.k, "pettis.upper", result.upper)])
    return 0


def _cmd_bocce(args):
    seq = _load_source(args.source, max(args.prefix or 0, args.k))
    f = _member(seq, args.k)
    a = _parse_set(args.set)
    value = bocce_osc(f, a)
    lo, hi, exact = pettis_bocce_interval(f, a, args.cap)
    payload = {"k": args.k, "set": a.to_text(), "bocce": value,
               "pettis_bocce": {"lower": lo, "upper": hi, "exact": exact}}
    _emit(args, payload, [(args.k, "bocce", value),
                          (args.k, "pettis_bocce.lower", lo),
                          (args.k, "pettis_bocce.upper", hi)])
    return 0


def _parse_set(text):
    if text == "full":
        return DyadicSet.full(0)
    try:
        return DyadicSet.parse(text)
    except config.ResolutionError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _cmd_tight(args):
    seq = _load_source(args.source, args.prefix)
    grid = (args.eps,) if args.eps is not None else args.eps_grid
    found = tightness_search(seq, grid)
    payload = {"label": seq.label, "K": len(seq), "witnesses": found}
    rows = []
    for w in found:
        rows.append((len(seq), f"tight.found.eps={w.eps:g}", int(w.found)))
        for k, e in enumerate(w.escape, start=1):
            rows.append((k, f"tight.escape.eps={w.eps:g}", e))
    _emit(args, payload, rows)
    return 0


def _cmd_bite(args):
    seq = _load_source(args.source, args.prefix)
    bite = biting_decompose(seq, args.schedule, args.target)
    rows = []
    for k, (m, l1, kf) in enumerate(zip(bite.removed_measure, bite.bitten_l1,
                                        bite.removed_ky_fan), start=1):
        rows += [(k, "bite.removed_measure", m), (k, "bite.bitten_l1", l1),
                 (k, "bite.removed_ky_fan", kf)]
    _emit(args, {"label": seq.label, "K": len(seq), "biting": bite}, rows)
    return 0


def _cmd_moduli(args):
    seq = _load_source(args.source, args.prefix)
    n = len(seq)
    thresholds = [2.0 ** j for j in range(n + 1)]
    deltas = [2.0 ** -j for j in range(n + 1)]
    curves = {"ui": ui_modulus(seq, thresholds),
              "equi": equi_modulus(seq, deltas)}
    family = _load_functionals(args.functionals, seq.kind)
    if family:
        curves["pettis_ui"] = pettis_ui_modulus(seq, family, thresholds)
    rows = [(n, f"modulus.{name}.c={t:g}", v)
            for name, curve in sorted(curves.items())
            for t, v in curve.csv_rows()]
    _emit(args, {"label": seq.label, "K": n, "moduli": curves}, rows)
    return 0


def _cmd_property(args):
    """Randomized invariant checks; exit status 1 when any fails."""
    rng = np.random.default_rng(args.seed)
    tally = {}

    def record(name, ok):
        t = tally.setdefault(name, {"passed": 0, "failed": 0})
        t["passed" if ok else "failed"] += 1

    for _ in range(args.count):
        seq = gallery.random_sequence(rng, int(rng.integers(3, 9)),
                                      max_level=3)
        try:
            rep = lattice_report(seq, ReportConfig(criteria=False,
                                                   tightness=False,
                                                   biting=False))
            rep.check_lattice()
        except LatticeViolation:
            record("lattice", False)
            continue
        record("lattice", True)
        for d, p, s, kf in zip(seq.deviations(), rep.trends["pettis"],
                               rep.trends["strong"], rep.trends["ky_fan"]):
            record("pettis_below_bochner", p <= s * (1 + 1e-12) + 1e-15)
            record("ky_fan_below_sqrt_l1", kf <= math.sqrt(s) + 1e-12)
        f = seq.members[0]
        level = int(rng.integers(0, 4))
        part = DyadicPartition.from_labels(
            level, rng.integers(0, 3, size=1 << level))
        lhs = small_bocce_osc(f, part)
        rhs = l1_norm(f - cond_expectation(f, part))
        record("small_bocce_identity", abs(lhs - rhs) <= 1e-12 * max(1, rhs))
    failed = sum(t["failed"] for t in tally.values())
    _emit(args, {"seed": args.seed, "count": args.count, "checks": tally},
          [(args.count, f"property.{k}.failed", v["failed"])
           for k, v in sorted(tally.items())])
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bochnerlab",
        description="Convergence diagnostics for sequences of vector-valued "
                    "step functions.")
    parser.add_argument("--max-level", type=int, default=None,
                        help="largest dyadic level allowed (default 20)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, prefix=8):
        p.add_argument("source", help="gallery name or sequence JSON file")
        p.add_argument("--prefix", type=_positive_int, default=prefix,
                       help="number of members to use")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--functionals",
                       help="'coords:1,2,...' or a JSON file of functionals")
        p.add_argument("--eps-grid", type=_eps_grid, default=DEFAULT_EPS_GRID,
                       help="comma-separated eps values, e.g. 1/2,1/4")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--cap", type=_positive_int, default=None,
                       help="block cap for exact Pettis norms")

    p = sub.add_parser("report", help="full convergence report")
    common(p)
    p.add_argument("--level", type=int, default=3,
                   help="search level of the oscillation checks")
    p.add_argument("--tol", type=float, default=None,
                   help="convergence tolerance (default 1/sqrt(prefix))")
    p.add_argument("--no-criteria", action="store_true",
                   help="skip the oscillation criterion searches")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("pettis", help="exact Pettis norm of one member")
    common(p, prefix=None)
    p.add_argument("--k", type=_positive_int, required=True)
    p.set_defaults(func=_cmd_pettis)

    p = sub.add_parser("bocce", help="Bocce oscillations of one member")
    common(p, prefix=None)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--set", default="full",
                   help="'full' or a dyadic set 'level:hexmask'")
    p.set_defaults(func=_cmd_bocce)

    p = sub.add_parser("tight", help="tightness witnesses")
    common(p)
    p.add_argument("--eps", type=float, default=None,
                   help="single eps instead of the grid")
    p.set_defaults(func=_cmd_tight)

    p = sub.add_parser("bite", help="biting decomposition")
    common(p)
    p.add_argument("--schedule", choices=("linear", "quadratic"),
                   default="linear")
    p.add_argument("--target", type=float, default=1.0)
    p.set_defaults(func=_cmd_bite)

    p = sub.add_parser("moduli", help="integrability moduli")
    common(p)
    p.set_defaults(func=_cmd_moduli)

    p = sub.add_parser("property", help="randomized invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=_positive_int, default=20)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_property)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    previous = None
    try:
        if args.max_level is not None:
            previous = config.configure(max_level=args.max_level)
        return args.func(args)
    except config.ResolutionError as exc:
        print(f"bochnerlab: resolution overflow: {exc}", file=sys.stderr)
        return 3
    except (InputError, ValueError, KeyError, IndexError,
            PettisCapError) as exc:
        print(f"bochnerlab: error: {exc}", file=sys.stderr)
        return 2
    finally:
        if previous is not None:
            config.configure(**previous)


if __name__ == "__main__":
    sys.exit(main())
