#!/usr/bin/env python3
"""
Bananaworld Correlation Analyzer - Main Application
Command-line entry point: every library capability as a reproducible JSON report
"""

import argparse
import csv
import io
import json
import logging
import sys
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from bananaworld import banana_sim, polytopes, quantum
from bananaworld.config import AnalyzerConfig, load_config
from bananaworld.constants import (CONTEXTS, KLYACHKO_BANANA_VALUE, LIBRARY_VERSION, TABLE_TITLES,
                                   TSIRELSON_BOUND)
from bananaworld.correlation_core import (CorrelationArray, Setting, chsh_max, chsh_values,
                                          marginals, no_signaling_check, product_form_check,
                                          table, validate)
from bananaworld.errors import BananaworldError, SamplingError
from bananaworld.serialization import array_to_csv, array_to_dict, load_array, scalar_to_json

logger = logging.getLogger("bananaworld.cli")

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE = 2

SOURCES = ("epr", "pure", "klyachko", "lhv")
KLYACHKO_MODES = ("quantum", "classical-bruteforce", "banana")


class Report:
    """Command name, echoed inputs, results, library version and seed when stochastic"""

    def __init__(self, command: str, inputs: Dict[str, Any], results: Any,
                 seed: Optional[int] = None, rows: Optional[List[List[Any]]] = None):
        self.command = command
        self.inputs = inputs
        self.results = results
        self.seed = seed
        self.rows = rows  # tabular view for --format csv

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "command": self.command,
            "inputs": jsonable(self.inputs),
            "results": jsonable(self.results),
            "version": LIBRARY_VERSION,
        }
        if self.seed is not None:
            payload["seed"] = self.seed
        return payload

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            for row in self.rows if self.rows is not None else _flatten(self.to_dict()):
                writer.writerow([_csv_cell(v) for v in row])
            return buffer.getvalue()
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def jsonable(value: Any) -> Any:
    """Fractions as 'num/den', numpy scalars as Python numbers, enums by name"""
    if isinstance(value, Fraction):
        return scalar_to_json(value)
    if isinstance(value, Enum):
        return value.name
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [jsonable(v) for v in items]
    return value


def _csv_cell(value: Any) -> Any:
    value = jsonable(value)
    return repr(value) if isinstance(value, float) else value


def _flatten(payload: Any, prefix: str = "") -> List[List[Any]]:
    rows = [["key", "value"]] if not prefix else []
    if isinstance(payload, dict):
        for key, value in payload.items():
            rows += _flatten(value, f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(payload, list):
        for i, value in enumerate(payload):
            rows += _flatten(value, f"{prefix}[{i}]")
    else:
        rows.append([prefix, payload])
    return rows


# --- command handlers --------------------------------------------------------------------

def _array_tolerance(array: CorrelationArray, args, config: AnalyzerConfig):
    """Exact arrays stay exact unless --tolerance is given"""
    if args.tolerance is not None:
        return args.tolerance
    return None if array.is_rational else config.tolerance


def _load(args, config: AnalyzerConfig):
    array = load_array(args.array)
    return array, _array_tolerance(array, args, config)


def cmd_validate(args, config) -> Report:
    array, tol = _load(args, config)
    violations = validate(array, tol)
    return Report("validate", {"array": args.array},
                  {"valid": not violations, "representation": array.representation,
                   "violations": [v.describe() for v in violations]})


def cmd_marginals(args, config) -> Report:
    array, tol = _load(args, config)
    m = marginals(array, tol)
    ns = no_signaling_check(array, tol)
    rows = [["party", "outcome", "x", "y", "p"]]
    rows += [["alice", o, x, y, m.alice_p(o, x, y)] for x, y in CONTEXTS for o in (0, 1)]
    rows += [["bob", o, x, y, m.bob_p(o, x, y)] for x, y in CONTEXTS for o in (0, 1)]
    return Report("marginals", {"array": args.array}, {
        "alice": [{"a": o, "x": x, "y": y, "p": m.alice_p(o, x, y)} for x, y in CONTEXTS for o in (0, 1)],
        "bob": [{"b": o, "x": x, "y": y, "p": m.bob_p(o, x, y)} for x, y in CONTEXTS for o in (0, 1)],
        "no_signaling": {"passes": ns.passes, "max_residual": ns.max_residual},
        "product_form": {f"{Setting(x).name}{Setting(y).name}": ok
                         for (x, y), ok in product_form_check(array, tol).items()},
    }, rows=rows)


def cmd_chsh(args, config) -> Report:
    array, tol = _load(args, config)
    values = chsh_values(array, tol)
    best, variant = chsh_max(array, tol)
    rows = [["variant", "value"]] + [[v, k] for v, k in enumerate(values)]
    return Report("chsh", {"array": args.array},
                  {"values": values, "max": best, "max_variant": variant}, rows=rows)


def cmd_membership(args, config) -> Report:
    array, tol = _load(args, config)
    result = polytopes.membership(array, args.polytope, tol, config.boundary_band_factor)
    return Report("membership", {"array": args.array, "polytope": args.polytope}, result.to_dict())


def cmd_decompose(args, config) -> Report:
    array, tol = _load(args, config)
    weights = polytopes.decompose(array, args.polytope, tol)
    rows = [["vertex", "weight"]] + [[vid, w] for vid, w in weights]
    return Report("decompose", {"array": args.array, "polytope": args.polytope},
                  {"weights": [[vid, w] for vid, w in weights]}, rows=rows)


def cmd_vertices(args, config) -> Report:
    catalog = polytopes.vertex_catalog(args.kind)
    rows = [["index", "local", "f_YY", "f_YB", "f_BY", "f_BB", "g_YY", "g_YB", "g_BY", "g_BB"]]
    rows += [[v["index"], v["local"], *v["alice"], *v["bob"]] for v in catalog["vertices"]]
    results = dict(catalog)
    if args.pr_boxes:
        results["pr_boxes"] = [{"label": box.label, "alpha": box.alpha, "beta": box.beta,
                                "gamma": box.gamma, "array": array_to_dict(box.array)}
                               for box in polytopes.pr_boxes()]
    return Report("vertices", {"kind": args.kind, "pr_boxes": args.pr_boxes}, results, rows=rows)


def cmd_dimension(args, config) -> Report:
    if args.array:
        arrays = [load_array(path) for path in args.array]
        label = {"arrays": args.array}
    elif args.set == "all":
        arrays = [v.to_array() for v in polytopes.enumerate_deterministic("all")]
        label = {"set": "all"}
    else:
        arrays = [arr for _, arr in polytopes.polytope_vertices(args.set)]
        label = {"set": args.set}
    dim = polytopes.affine_dimension(arrays)
    return Report("dimension", label, {"points": len(arrays), "affine_dimension": dim,
                                       "is_simplex": dim == len(set(arrays)) - 1})


def cmd_klyachko(args, config) -> Report:
    inputs = {"mode": args.mode}
    if args.mode == "quantum":
        frame = quantum.klyachko_frame()
        result = quantum.klyachko_sum(frame, quantum.north_pole())
        rows = [["vertex", "probability"]] + [[k, p] for k, p in enumerate(result.probabilities)]
        return Report("klyachko", inputs, {
            "frame": frame.to_dict(), "checks": frame.check(),
            "probabilities": result.probabilities, "sum": result.total,
        }, rows=rows)
    if args.mode == "classical-bruteforce":
        result = quantum.noncontextual_max()
        rows = [["v0", "v1", "v2", "v3", "v4", "sum"]] + [[*v, sum(v)] for v in result.feasible]
        return Report("klyachko", inputs, {
            "maximum": result.maximum, "witness": result.witness,
            "feasible_count": len(result.feasible), "assignments_checked": 32,
        }, rows=rows)
    trials = config.trials
    seed = config.seed
    estimate = banana_sim.estimate_klyachko_sum(trials, seed)
    inputs.update(trials=trials)
    return Report("klyachko", inputs, {
        "exact": banana_sim.klyachko_banana_value(),
        "estimate": estimate.total,
        "per_banana": estimate.per_banana,
        "bound_chain": quantum.klyachko_bound_chain(),
    }, seed=seed)


def cmd_pbr(args, config) -> Report:
    basis = quantum.pbr_basis()
    verdict = quantum.pbr_contradiction()
    outcomes = verdict["outcomes"]
    rows = [["preparation", "p0", "p1", "p2", "p3", "blocked"]]
    rows += [["".join(o.preparation), *o.probabilities, o.blocked] for o in outcomes]
    return Report("pbr", {}, {
        "basis": [s.to_dict() for s in basis],
        "orthonormal": quantum.pbr_basis_is_orthonormal(basis),
        "preparations": [{"state": "".join(o.preparation), "probabilities": o.probabilities,
                          "blocked": o.blocked} for o in outcomes],
        "every_outcome_blocked": verdict["every_outcome_blocked"],
        "normalized": verdict["normalized"],
    }, rows=rows)


def _lhv_source(args) -> banana_sim.LhvSource:
    if args.lhv_vertices:
        try:
            indices = [int(v) for v in args.lhv_vertices.split(",") if v.strip()]
        except ValueError:
            raise SamplingError(f"--lhv-vertices must be comma-separated integers, got {args.lhv_vertices!r}")
    else:
        indices = [v.index for v in polytopes.enumerate_deterministic("local")]
    return banana_sim.LhvSource(banana_sim.lhv_model_from_vertices(indices))


def cmd_sample(args, config) -> Report:
    trials = config.trials
    seed = config.seed
    inputs = {"source": args.source, "trials": trials}
    if args.source == "klyachko":
        estimate = banana_sim.estimate_klyachko_sum(trials, seed)
        rows = [["banana", "p_intense"]] + [[k, p] for k, p in enumerate(estimate.per_banana)]
        return Report("sample", inputs, {"per_banana": estimate.per_banana, "sum": estimate.total,
                                         "exact": KLYACHKO_BANANA_VALUE}, seed=seed, rows=rows)

    if args.source == "epr":
        source = banana_sim.EprPairSource()
    elif args.source == "pure":
        source = banana_sim.PureProductSource(banana_sim.PureBananaState[args.alice_state],
                                              banana_sim.PureBananaState[args.bob_state])
        inputs.update(alice_state=args.alice_state, bob_state=args.bob_state)
    else:
        source = _lhv_source(args)
        inputs.update(lhv_vertices=args.lhv_vertices or "all-local")
    empirical = banana_sim.empirical_array(source, trials, seed, config.sample_block_size,
                                           config.max_workers)
    array = empirical.array
    ns = no_signaling_check(array, 1.0)
    best, variant = chsh_max(array)
    rows = list(csv.reader(io.StringIO(array_to_csv(array))))
    return Report("sample", inputs, {
        "empirical": empirical.to_dict(),
        "no_signaling_residual": ns.max_residual,
        "chsh_max": best, "chsh_variant": variant,
    }, seed=seed, rows=rows)


def cmd_tsirelson(args, config) -> Report:
    settings = quantum.tsirelson_settings()
    alice, bob = settings.measurements()
    array = quantum.born_array(quantum.singlet(), alice, bob)
    value, variant = chsh_max(array)
    steps = config.tsirelson_grid_steps
    grid = quantum.tsirelson_grid_search(steps)
    seed = config.seed
    sweep = quantum.random_chsh_sweep(args.sweep, seed)
    return Report("tsirelson", {"grid_steps": steps, "sweep": args.sweep}, {
        "settings": settings.to_dict(),
        "born_chsh_max": value, "born_chsh_variant": variant,
        "bound": TSIRELSON_BOUND,
        "grid": grid.to_dict(),
        "sweep_max": sweep.maximum,
    }, seed=seed)


def cmd_infer_clone(args, config) -> Report:
    if (args.j is None) != (args.k is None):
        raise SamplingError("give both --j and --k, or neither for the full table")
    pairs = [(args.j, args.k)] if args.j is not None else [(j, k) for j in (0, 1) for k in (0, 1)]
    inferences = [{"j": j, "k": k, "alice_peeled": banana_sim.infer_peeling_from_clone(j, k)}
                  for j, k in pairs]
    counterfactuals = [
        {"alice_peeling": Setting(x), "alice_taste": a,
         "bob_assignments": [[int(j), int(k)] for j, k in
                             sorted(banana_sim.epr_counterfactual_assignments(Setting(x), a))]}
        for x in (0, 1) for a in (0, 1)
    ]
    rows = [["j", "k", "alice_peeled"]] + [[i["j"], i["k"], i["alice_peeled"].name] for i in inferences]
    return Report("infer-clone", {"j": args.j, "k": args.k},
                  {"inferences": inferences, "counterfactuals": counterfactuals}, rows=rows)


def cmd_classify(args, config) -> Report:
    array, tol = _load(args, config)
    c = polytopes.classify(array, tol)
    results = {"tier": c.tier, "chsh_max": c.chsh_max, "chsh_variant": c.chsh_variant,
               "tsirelson_compatible": c.tsirelson_compatible}
    if c.distance is not None:
        results["distance"] = c.distance
    return Report("classify", {"array": args.array}, results)


def cmd_tables(args, config) -> Report:
    return Report("tables", {}, [{"table": n, "title": TABLE_TITLES[n], "array": array_to_dict(table(n))}
                                 for n in sorted(TABLE_TITLES)])


# --- parser -----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (stochastic commands)")
    common.add_argument("--trials", type=int, default=None, help="trials per context or per edge")
    common.add_argument("--tolerance", type=float, default=None, help="float tolerance (default 1e-9)")
    common.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    common.add_argument("--output", default=None, help="write the report to PATH instead of stdout")
    common.add_argument("--config", default=None, help="configuration JSON file")
    common.add_argument("-v", "--verbose", action="store_true", help="debug diagnostics on stderr")

    parser = argparse.ArgumentParser(prog="bananaworld", description="Bananaworld correlation analyzer")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    for name, handler, text in (("validate", cmd_validate, "check probability invariants"),
                                ("marginals", cmd_marginals, "marginals and no-signaling residuals"),
                                ("chsh", cmd_chsh, "CHSH value of every variant"),
                                ("classify", cmd_classify, "local / nonlocal / signaling tier")):
        add(name, handler, text).add_argument("--array", required=True)

    for name, handler, text in (("membership", cmd_membership, "polytope membership with certificate"),
                                ("decompose", cmd_decompose, "convex weights over polytope vertices")):
        p = add(name, handler, text)
        p.add_argument("--array", required=True)
        p.add_argument("--polytope", choices=polytopes.POLYTOPES, default=polytopes.LOCAL)

    p = add("vertices", cmd_vertices, "deterministic vertex catalog")
    p.add_argument("--kind", choices=polytopes.VERTEX_KINDS, default=polytopes.ALL)
    p.add_argument("--pr-boxes", action="store_true", help="append the eight PR boxes")

    p = add("dimension", cmd_dimension, "affine dimension of a vertex set or array files")
    p.add_argument("--set", choices=("all",) + polytopes.POLYTOPES, default=polytopes.LOCAL)
    p.add_argument("--array", nargs="+", default=None)

    p = add("klyachko", cmd_klyachko, "Klyachko pentagram values")
    p.add_argument("--mode", choices=KLYACHKO_MODES, default="quantum")

    add("pbr", cmd_pbr, "PBR four-state argument")

    p = add("sample", cmd_sample, "seeded banana simulation")
    p.add_argument("--source", choices=SOURCES, required=True)
    p.add_argument("--alice-state", choices=[s.name for s in banana_sim.PureBananaState], default="Y0")
    p.add_argument("--bob-state", choices=[s.name for s in banana_sim.PureBananaState], default="Y0")
    p.add_argument("--lhv-vertices", default=None, help="comma-separated local vertex indices")

    p = add("tsirelson", cmd_tsirelson, "Tsirelson settings, grid search and random sweep")
    p.add_argument("--grid-steps", type=int, default=None)
    p.add_argument("--sweep", type=int, default=10000)

    p = add("infer-clone", cmd_infer_clone, "peeling inference from a cloned banana")
    p.add_argument("--j", type=int, choices=(0, 1), default=None)
    p.add_argument("--k", type=int, choices=(0, 1), default=None)

    add("tables", cmd_tables, "print the four reference tables")
    return parser


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    """Parse argv, run one command and print its report; returns the exit code"""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    _setup_logging(args.verbose)

    try:
        config = load_config(args.config)
        if args.trials is not None and args.trials < 1:
            raise SamplingError(f"--trials must be at least 1, got {args.trials}")
        if args.seed is not None:
            banana_sim.RandomSource(args.seed)
        config = config.with_overrides(trials=args.trials, seed=args.seed, tolerance=args.tolerance,
                                       tsirelson_grid_steps=getattr(args, "grid_steps", None))
        report = args.handler(args, config)
    except BananaworldError as e:
        logger.error(f"[CLI] {args.command} failed: {e}")
        stdout.write(json.dumps({"error": e.to_dict()}, indent=2) + "\n")
        return EXIT_DOMAIN_ERROR

    text = report.render(args.fmt)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"[CLI] report written to {args.output}")
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
