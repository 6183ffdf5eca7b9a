"""Command line front end: ``coarse-coorbit <command> ...``.

Every command writes one JSON report (``schema`` 1, sorted keys) to ``--out``
or stdout, and plot-ready CSV tables next to ``--out`` as
``<stem>.<table>.csv``.  Exit codes: 0 equivalent/success, 1 not
equivalent/reject, 2 indeterminate, 64 usage, 65 malformed input, 66 missing
input, 73 unwritable output.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import exact as ex
from .coarse import chain_pair_distances, chain_space, qi_probe, word_space
from .covering import (
    AlphaModulationFamily,
    AnnulusWindow,
    CoveringFamily,
    InducedFamily,
    OracleBudget,
    admissibility_bounds,
    family_from_json,
    weak_equivalence_verdict,
)
from .equivalence import algebra_invariants, coorbit_equivalent, dual_orbit, nonequivalence_witness, transfer_map
from .groups import ShearletGroupSpec, d4_family, group_from_json, standard_group, toeplitz_group
from .lattice import WordMetricLattice

SCHEMA = 1
ENV_PREFIX = "COARSE_COORBIT_"

EXIT_OK, EXIT_NO, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_DATA, EXIT_NOINPUT, EXIT_CANTCREAT = 64, 65, 66, 73

VERDICT_EXIT = {
    "EQUIVALENT": EXIT_OK,
    "EQUIVALENT-evidence": EXIT_OK,
    "EMBEDDING-EVIDENCE": EXIT_OK,
    "NOT-EQUIVALENT": EXIT_NO,
    "REJECT": EXIT_NO,
    "INDETERMINATE": EXIT_UNKNOWN,
}

CSV_HELP = """CSV tables (written next to --out as <stem>.<table>.csv):
  covering make     nerve: i,j,status        (status yes|undecided)
  covering compare  counts: direction,radius,max_count_lower,max_count_upper
  covering metric   distances: x_1..x_d,y_1..y_d,d
  qi-probe          envelope: radius,d_source,d_image_min,d_image_max
  witness           witness: n,log_increment
  group info        invariants: name,value
  equivalence check conjugator: row,col,value (only when C is returned)
"""


class UsageError(Exception):
    pass


class InputError(Exception):
    """Malformed input document; the message names the file and field."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 64 instead of argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ config


def _env(name: str, default: Any) -> Any:
    return os.environ.get(ENV_PREFIX + name, default)


def _parse_radii(text: str | None) -> list[float] | None:
    if text is None or text == "":
        return None
    try:
        radii = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--radii: expected comma separated numbers, got {text!r}") from exc
    if not radii or any(r <= 0 or not math.isfinite(r) for r in radii):
        raise UsageError("--radii: values must be positive and finite")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise UsageError("--radii: values must be strictly increasing")
    return radii


def _int_option(args: argparse.Namespace, name: str, env: str, default: int, minimum: int = 0) -> int:
    raw = getattr(args, name, None)
    if raw is None:
        raw = _env(env, default)
    try:
        value = int(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--{name.replace('_', '-')}: expected an integer, got {raw!r}") from exc
    if value < minimum:
        raise UsageError(f"--{name.replace('_', '-')}: must be at least {minimum}")
    return value


def _config(args: argparse.Namespace) -> dict:
    radii = _parse_radii(args.radii if args.radii is not None else _env("RADII", None))
    arithmetic = args.arithmetic or _env("ARITHMETIC", "exact")
    if arithmetic not in ("exact", "float"):
        raise UsageError(f"arithmetic mode must be exact or float, got {arithmetic!r}")
    return {
        "command": args.command_name,
        "inputs": [str(p) for p in getattr(args, "inputs", [])],
        "radii": radii,
        "seed": _int_option(args, "seed", "SEED", 0),
        "budgets": {
            "depth": _int_option(args, "budget_depth", "BUDGET_DEPTH", 12, 1),
            "pairs": _int_option(args, "budget_pairs", "BUDGET_PAIRS", 1000, 1),
            "seeds": _int_option(args, "budget_seeds", "BUDGET_SEEDS", 200, 1),
        },
        "arithmetic": arithmetic,
        "workers": _int_option(args, "workers", "WORKERS", 1, 1),
        "out": args.out if args.out is not None else _env("OUT", None),
    }


def _budget(cfg: dict) -> OracleBudget:
    return OracleBudget(depth=cfg["budgets"]["depth"], seed=cfg["seed"], workers=cfg["workers"])


# ------------------------------------------------------------------ inputs


def _read_json(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    return data


def _floatify(obj: Any) -> Any:
    """Rational strings and integers to floats, for --float runs."""
    if isinstance(obj, dict):
        return {k: (v if k in ("kind", "label", "domain", "group") and isinstance(v, str) else _floatify(v)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_floatify(v) for v in obj]
    if isinstance(obj, (int, str)) and not isinstance(obj, bool):
        try:
            return float(ex.parse_scalar(obj))
        except ValueError:
            return obj
    return obj


def _is_group_doc(data: dict) -> bool:
    return "d" in data and "parameters" not in data


def load_group(path: str) -> ShearletGroupSpec:
    data = _read_json(path)
    # reports written by `group make` wrap the spec
    if isinstance(data, dict) and "schema" in data and isinstance(data.get("result"), dict) and "group" in data["result"]:
        data = data["result"]["group"]
    try:
        return group_from_json(data)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_family(path: str, arithmetic: str = "exact") -> CoveringFamily:
    data = _read_json(path)
    if arithmetic == "float":
        data = _floatify(data)
    try:
        return family_from_json(data, base_dir=Path(path).parent)
    except FileNotFoundError:
        raise
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _default_radii(fam: CoveringFamily) -> list[float]:
    return [2.0, 3.0, 4.0] if isinstance(fam, InducedFamily) else [64.0, 256.0, 1024.0]


# ----------------------------------------------------------------- sampling


def sample_points(fam: CoveringFamily, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points well inside the truncation window of ``fam`` at ``radius``."""
    if isinstance(fam, InducedFamily):
        inner = max(radius - 1.0, 0.5)
        n = fam.group.n
        eps = np.ones(count)
        return fam.group.orbit_map_array(eps, rng.uniform(-inner, inner, count), rng.uniform(-inner, inner, (count, n)))
    cov = fam.build(radius)
    w = cov.window
    if isinstance(w, AnnulusWindow):
        if w.positive:
            lo = max(w.lo, 0.0) * 1.01 or 1e-3
            return np.exp(rng.uniform(math.log(lo), math.log(0.99 * w.hi), (count, 1)))
        pts = rng.uniform(-0.99 * w.hi, 0.99 * w.hi, (count, cov.dim))
        if isinstance(fam, AlphaModulationFamily):
            pts[pts == 0] = 1.0
        return pts
    lo, hi = cov.extent
    pts = rng.uniform(lo, hi, (4 * count, cov.dim))
    hits = cov.locate_many(pts)
    return pts[[bool(h) for h in hits]][:count]


# ------------------------------------------------------------------ output


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return ex.format_scalar(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return round(v, 12)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def _write(cfg: dict, result: dict, tables: dict[str, tuple[list, list]]) -> None:
    report = {"schema": SCHEMA, "config": cfg, "result": result}
    text = dump_report(report)
    out = cfg["out"]
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        for name, (header, rows) in tables.items():
            with open(path.with_name(f"{path.stem}.{name}.csv"), "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(_clean(rows))
    except OSError as exc:
        raise PermissionError(f"cannot write {out}: {exc}") from exc


# ---------------------------------------------------------------- commands


def cmd_covering_make(args, cfg) -> int:
    fam = load_family(args.inputs[0], cfg["arithmetic"])
    radii = cfg["radii"] or _default_radii(fam)
    cfg["radii"] = radii
    cov = fam.build(radii[-1], _budget(cfg))
    nerve = cov.nerve
    adm = admissibility_bounds(cov)
    lo, hi = cov.extent
    result = {
        "covering": cov.to_json(),
        "family": fam.to_json(),
        "sets": len(cov),
        "edges": len(nerve.edges),
        "undecided_pairs": len(nerve.indeterminate),
        "admissibility": {"lower": adm.lower, "upper": adm.upper},
        "extent": [list(map(float, lo)), list(map(float, hi))],
    }
    rows = [(i, j, "yes") for i, j in sorted(nerve.edges)] + [(i, j, "undecided") for i, j in sorted(nerve.indeterminate)]
    _write(cfg, result, {"nerve": (["i", "j", "status"], rows)})
    return EXIT_OK


def cmd_covering_compare(args, cfg) -> int:
    q = load_family(args.inputs[0], cfg["arithmetic"])
    p = load_family(args.inputs[1], cfg["arithmetic"])
    radii = cfg["radii"] or _default_radii(q)
    cfg["radii"] = radii
    if len(radii) < 2:
        raise UsageError("--radii: covering compare needs at least two radii")
    try:
        res = weak_equivalence_verdict(q, p, radii, budget=_budget(cfg))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    rows = [("forward", r, a, b) for r, a, b in zip(res.forward.radii, res.forward.lower, res.forward.upper)]
    rows += [("backward", r, a, b) for r, a, b in zip(res.backward.radii, res.backward.lower, res.backward.upper)]
    _write(cfg, res.to_json(), {"counts": (["direction", "radius", "max_count_lower", "max_count_upper"], rows)})
    return VERDICT_EXIT[res.verdict]


def cmd_covering_metric(args, cfg) -> int:
    fam = load_family(args.inputs[0], cfg["arithmetic"])
    radii = cfg["radii"] or _default_radii(fam)[:1]
    cfg["radii"] = radii
    R = radii[-1]
    cov = fam.build(R, _budget(cfg))
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["budgets"]["pairs"]
    xs = sample_points(fam, R, n, rng)
    ys = sample_points(fam, R, n, rng)
    m = min(len(xs), len(ys))
    xs, ys = xs[:m], ys[:m]
    d = chain_pair_distances(cov, list(xs), list(ys))
    finite = d[np.isfinite(d)]
    result = {
        "covering": cov.to_json(),
        "pairs": m,
        "disconnected_pairs": int(m - finite.size),
        "max_distance": float(finite.max()) if finite.size else math.inf,
        "mean_distance": float(finite.mean()) if finite.size else math.inf,
    }
    dim = cov.dim
    header = [f"x_{k + 1}" for k in range(dim)] + [f"y_{k + 1}" for k in range(dim)] + ["d"]
    rows = [list(x) + list(y) + [v] for x, y, v in zip(xs, ys, d)]
    _write(cfg, result, {"distances": (header, rows)})
    return EXIT_OK


def cmd_group_make(args, cfg) -> int:
    cfg["inputs"] = []
    lam = [ex.parse_scalar(v) for v in args.lam.split(",")] if args.lam else None
    try:
        if args.kind == "standard":
            spec = standard_group(args.d, lam)
        elif args.kind == "toeplitz":
            spec = toeplitz_group(args.d, ex.parse_scalar(args.delta))
        else:
            if args.alpha is None:
                raise UsageError("--alpha is required for d4_family")
            spec = d4_family(args.alpha, lam)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cfg["group"] = {"kind": args.kind, "d": args.d, "lambda": args.lam, "delta": args.delta, "alpha": args.alpha}
    _write(cfg, {"group": spec.to_json()}, {})
    return EXIT_OK


def cmd_group_info(args, cfg) -> int:
    spec = load_group(args.inputs[0])
    inv = algebra_invariants(spec)
    result = {
        "group": spec.to_json(),
        "dual_orbit": dual_orbit(spec).describe(),
        "invariants": inv.table(),
        "filtration_violations": [list(v) for v in spec.filtration_violations()],
    }
    rows = [(k, json.dumps(_clean(v))) for k, v in sorted(inv.table().items())]
    _write(cfg, result, {"invariants": (["name", "value"], rows)})
    return EXIT_OK


def cmd_equivalence_check(args, cfg) -> int:
    a, b = load_group(args.inputs[0]), load_group(args.inputs[1])
    candidate = None
    if args.candidate:
        data = _read_json(args.candidate)
        try:
            candidate = [[ex.parse_scalar(v) for v in row] for row in data["C"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.candidate}: field 'C': expected a matrix of rationals") from exc
    verdict = coorbit_equivalent(a, b, seeds=cfg["budgets"]["seeds"], seed=cfg["seed"], candidate=candidate)
    result = verdict.to_json()
    result["budgets_used"] = {"seeds": cfg["budgets"]["seeds"]}
    tables = {}
    C = verdict.evidence.get("C")
    if C is not None:
        tables["conjugator"] = (["row", "col", "value"], [(i, j, v) for i, row in enumerate(C) for j, v in enumerate(row)])
    _write(cfg, result, tables)
    return VERDICT_EXIT[verdict.result]


def cmd_witness(args, cfg) -> int:
    a, b = load_group(args.inputs[0]), load_group(args.inputs[1])
    index = None if args.index is None else args.index - 2
    try:
        w = nonequivalence_witness(a, b, index, cap=args.cap)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    unbounded = w.monotone() and w.exceeds(args.bound)
    result = {"witness": w.table(), "bound": args.bound, "exceeds_bound": w.exceeds(args.bound), "monotone": w.monotone()}
    rows = list(zip(range(len(w.log_increments)), w.log_increments))
    _write(cfg, result, {"witness": (["n", "log_increment"], rows)})
    return EXIT_NO if unbounded else EXIT_UNKNOWN


def _probe_coverings(qa: CoveringFamily, qb: CoveringFamily, cfg: dict, npts: int):
    radii = cfg["radii"] or _default_radii(qa)
    cfg["radii"] = radii
    rng = np.random.default_rng(cfg["seed"])
    spaces = []
    for R in radii:
        ca, cb = qa.build(R, _budget(cfg)), qb.build(R, _budget(cfg))
        pts = sample_points(qa, 0.9 * R, 2 * npts, rng)
        ok = [bool(a) and bool(b) for a, b in zip(ca.locate_many(pts), cb.locate_many(pts))]
        pts = list(pts[ok][:npts])
        spaces.append((chain_space(ca, pts), chain_space(cb, pts)))
    return (lambda x: x), spaces


def _probe_orbit(g: ShearletGroupSpec, cfg: dict, npts: int):
    radii = cfg["radii"] or [2.0, 4.0, 8.0]
    cfg["radii"] = radii
    lat = WordMetricLattice(g)
    fam = InducedFamily(g)
    rng = np.random.default_rng(cfg["seed"])
    spaces = []
    for R in radii:
        outer = 2 * R + 2
        T = lat.truncate(outer)
        cov = fam.build(outer, _budget(cfg))
        keys = lat.box_keys([-R] * g.d, [R] * g.d)
        X = word_space(T, [lat.point(k) for k in keys])
        ys = g.orbit_map_array(np.ones(npts), rng.uniform(-R, R, npts), rng.uniform(-R, R, (npts, g.n)))
        spaces.append((X, chain_space(cov, list(ys))))
    return (lambda h: np.array([float(v) for v in g.orbit_map(h)])), spaces


def _probe_transfer(a: ShearletGroupSpec, b: ShearletGroupSpec, cfg: dict):
    if any(x != y for x, y in zip(a.lam, b.lam)):
        caps = [int(r) for r in (cfg["radii"] or [6, 9, 12])]
        cfg["radii"] = caps
        if max(caps) > 60:
            raise UsageError("--radii: witness caps must be at most 60")
        w = nonequivalence_witness(a, b, cap=max(caps))
        src, elements, images = w.source, w.elements, w.images
        la, lb = WordMetricLattice(src), WordMetricLattice(w.target)
        ta, tb = la.around(elements, 2), lb.around(images, 2)
        phi = transfer_map(src, w.target)
        spaces = [(word_space(ta, elements[: c + 1]), word_space(tb, images[: c + 1])) for c in caps]
        return phi, spaces
    radii = cfg["radii"] or [2.0, 3.0, 4.0]
    cfg["radii"] = radii
    la, lb = WordMetricLattice(a), WordMetricLattice(b)
    phi = transfer_map(a, b)
    spaces = []
    for R in radii:
        keys = la.box_keys([-R] * a.d, [R] * a.d)
        xs = [la.point(k) for k in keys]
        ys = [phi(x) for x in xs]
        spaces.append((word_space(la.around(xs, 2), xs), word_space(lb.around(ys, 2), ys)))
    return phi, spaces


def cmd_qi_probe(args, cfg) -> int:
    docs = [_read_json(p) for p in args.inputs]
    groups = [_is_group_doc(d) for d in docs]
    if len(docs) == 1:
        if not groups[0]:
            raise UsageError("qi-probe with one input needs a group spec (orbit map into its induced covering)")
        f, spaces = _probe_orbit(load_group(args.inputs[0]), cfg, args.points)
        mode = "orbit-map"
    elif all(groups):
        f, spaces = _probe_transfer(load_group(args.inputs[0]), load_group(args.inputs[1]), cfg)
        mode = "transfer-map"
    elif not any(groups):
        qa, qb = (load_family(p, cfg["arithmetic"]) for p in args.inputs)
        f, spaces = _probe_coverings(qa, qb, cfg, args.points)
        mode = "identity"
    else:
        raise UsageError("qi-probe inputs must both be group specs or both covering specs")
    budget = max(cfg["budgets"]["pairs"], 1000)
    cfg["budgets"]["pairs"] = budget
    rep = qi_probe(f, spaces, pair_budget=budget, seed=cfg["seed"])
    result = rep.to_json()
    result["mode"] = mode
    _write(cfg, result, {"envelope": (["radius", "d_source", "d_image_min", "d_image_max"], rep.csv_rows())})
    return VERDICT_EXIT[rep.verdict]


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (environment overrides use the COARSE_COORBIT_ prefix)")
    g.add_argument("--radii", help="comma separated, strictly increasing truncation radii [RADII]")
    g.add_argument("--seed", type=int, help="random seed, recorded in the report [SEED]")
    g.add_argument("--budget-depth", type=int, help="intersection oracle refinement depth [BUDGET_DEPTH]")
    g.add_argument("--budget-pairs", type=int, help="sampled pairs or points [BUDGET_PAIRS]")
    g.add_argument("--budget-seeds", type=int, help="conjugator search starts [BUDGET_SEEDS]")
    mode = g.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="arithmetic", action="store_const", const="exact", help="exact rationals where possible (default) [ARITHMETIC]")
    mode.add_argument("--float", dest="arithmetic", action="store_const", const="float", help="floating point covering construction")
    g.add_argument("--workers", type=int, help="worker threads for the intersection oracle [WORKERS]")
    g.add_argument("--out", help="report path; CSV tables go next to it [OUT]")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="coarse-coorbit", description=__doc__.split("\n\n")[0], epilog=CSV_HELP, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cov = sub.add_parser("covering", help="build, compare and measure coverings", epilog=CSV_HELP, formatter_class=fmt)
    csub = cov.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = csub.add_parser("make", help="build a truncation and its nerve", epilog=CSV_HELP, formatter_class=fmt)
    p.add_argument("inputs", nargs=1, metavar="COVERING.json")
    p.set_defaults(handler=cmd_covering_make)
    p = csub.add_parser("compare", help="weak equivalence verdict over growing radii", epilog=CSV_HELP, formatter_class=fmt)
    p.add_argument("inputs", nargs=2, metavar="COVERING.json")
    p.set_defaults(handler=cmd_covering_compare)
    p = csub.add_parser("metric", help="chain distances of sampled point pairs", epilog=CSV_HELP, formatter_class=fmt)
    p.add_argument("inputs", nargs=1, metavar="COVERING.json")
    p.set_defaults(handler=cmd_covering_metric)

    grp = sub.add_parser("group", help="shearlet group specs")
    gsub = grp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = gsub.add_parser("make", help="write a built-in group spec")
    p.add_argument("--kind", choices=["standard", "toeplitz", "d4_family"], required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lam", help="comma separated lambda_2..lambda_d, e.g. 1/2,1/3")
    p.add_argument("--delta", default="1/2", help="Toeplitz spacing (default 1/2)")
    p.add_argument("--alpha", type=int, choices=[-1, 0, 1])
    p.set_defaults(handler=cmd_group_make)
    p = gsub.add_parser("info", help="orbit and algebra invariants", epilog=CSV_HELP, formatter_class=fmt)
    p.add_argument("inputs", nargs=1, metavar="GROUP.json")
    p.set_defaults(handler=cmd_group_info)

    eq = sub.add_parser("equivalence", help="coorbit equivalence of shearlet groups")
    esub = eq.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = esub.add_parser("check", help="run the equivalence pipeline", epilog=CSV_HELP, formatter_class=fmt)
    p.add_argument("inputs", nargs=2, metavar="GROUP.json")
    p.add_argument("--candidate", help="JSON file {\"C\": [[...]]} with a conjugator to verify")
    p.set_defaults(handler=cmd_equivalence_check)

    p = sub.add_parser("qi-probe", help="quasi-isometry probe", epilog=CSV_HELP, formatter_class=fmt)
    p.add_argument(
        "inputs",
        nargs="+",
        metavar="SPEC.json",
        help="one group (orbit map from its lattice), two groups (transfer map) or two coverings (identity)",
    )
    p.add_argument("--points", type=int, default=300, help="sample size per radius (default 300)")
    p.set_defaults(handler=cmd_qi_probe)

    p = sub.add_parser("witness", help="non-equivalence witness sequence", epilog=CSV_HELP, formatter_class=fmt)
    p.add_argument("inputs", nargs=2, metavar="GROUP.json")
    p.add_argument("--index", type=int, help="shear coordinate i >= 2 with lambda_i != lambda'_i")
    p.add_argument("--cap", type=int, default=60, help="largest n (at most 60)")
    p.add_argument("--bound", type=float, default=1e6, help="increment bound that must be exceeded")
    p.set_defaults(handler=cmd_witness)

    for parent in (cov, grp, eq):
        for action in parent._subparsers._group_actions[0].choices.values():
            _common(action)
    for name in ("qi-probe", "witness"):
        _common(sub.choices[name])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.command_name = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    if args.command == "qi-probe" and len(args.inputs) > 2:
        parser.error("qi-probe takes one or two inputs")
    try:
        cfg = _config(args)
        return args.handler(args, cfg)
    except UsageError as exc:
        print(f"coarse-coorbit: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"coarse-coorbit: invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"coarse-coorbit: no such file: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except PermissionError as exc:
        print(f"coarse-coorbit: {exc}", file=sys.stderr)
        return EXIT_CANTCREAT


if __name__ == "__main__":
    sys.exit(main())
