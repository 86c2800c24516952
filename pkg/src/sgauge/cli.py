"""Command-line front end for the verification studies.

Usage:
    sgauge <study-id> [--config PATH] [--group u1|su2|su3] [--field ID]
           [--ns 2,3,4,6,8] [--seed N] [--out DIR] [--assert-order X]

Study ids: converge-action, converge-derivative, converge-holonomy,
converge-transport, origin-dependence, gauge-check, noether-check,
eval-action.  A JSON config file supplies the same keys with flat names
(study, group, field, ns, seed, out, assert_order); command-line flags
override file values.  Each run writes <study>.csv and
<study>.summary.json into the output directory and prints an aligned
table (whose content equals the CSV) to standard output.

Exit codes: 0 success, 1 usage or configuration error, 2 acceptance
threshold failed (fitted order below --assert-order, gauge violation
above 1e-10, or conservation residual above 1e-6).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import harness, noether
from .action import ACTION_KINDS, global_action
from .gauge import GaugeField, ScalarField
from .lie import GROUPS
from .mesh import build_unit_cube_mesh

STUDIES = (
    "converge-action",
    "converge-derivative",
    "converge-holonomy",
    "converge-transport",
    "origin-dependence",
    "gauge-check",
    "noether-check",
    "eval-action",
)

_DEFAULT_NS = {
    "converge-action": (2, 3, 4, 6, 8),
    "converge-derivative": (2, 3, 4, 6),
    "converge-holonomy": (2, 3, 4, 6, 8),
    "converge-transport": (2, 3, 4, 6, 8),
    "origin-dependence": (2, 3, 4, 6, 8),
    "gauge-check": (2,),
    "noether-check": (1,),
    "eval-action": (2,),
}

GAUGE_TOLERANCE = 1e-10
NOETHER_TOLERANCE = 1e-6
NOETHER_REDUCTION = 8.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="sgauge", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("study", choices=STUDIES)
    p.add_argument("--config", help="JSON config file with flat keys")
    p.add_argument("--group", choices=sorted(GROUPS))
    p.add_argument("--field", help="built-in field id, default <group>-trig")
    p.add_argument("--ns", help="comma-separated ascending refinement levels")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--assert-order", type=float, dest="assert_order",
                   help="exit 2 when the fitted slope is below this value")
    return p


def _load_config(args) -> dict:
    cfg = {
        "study": args.study,
        "group": "su2",
        "field": None,
        "ns": None,
        "seed": 7,
        "out": ".",
        "assert_order": None,
    }
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise RuntimeError(f"cannot read config {args.config}: {exc}")
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise RuntimeError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in ("group", "field", "seed", "out", "assert_order"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if args.ns is not None:
        try:
            cfg["ns"] = [int(tok) for tok in args.ns.split(",")]
        except ValueError:
            raise RuntimeError(f"cannot parse --ns {args.ns!r}")
    if cfg["study"] != args.study and args.config:
        cfg["study"] = args.study
    if cfg["group"] not in GROUPS:
        raise RuntimeError(f"unknown group {cfg['group']!r}")
    if cfg["ns"] is None:
        cfg["ns"] = list(_DEFAULT_NS[cfg["study"]])
    ns = cfg["ns"]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
        raise RuntimeError(f"ns must be nonempty ascending positive, got {ns}")
    if cfg["field"] is None:
        cfg["field"] = f"{cfg['group']}-trig"
    cfg["seed"] = int(cfg["seed"])
    return cfg


def _format_cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12e}"


def _emit(cfg, columns, summary):
    """Write <study>.csv + <study>.summary.json and print the aligned table."""
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    names = [name for name, _ in columns]
    rows = list(zip(*(vals for _, vals in columns))) if columns else []
    csv_path = os.path.join(out_dir, f"{cfg['study']}.csv")
    with open(csv_path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")
    json_path = os.path.join(out_dir, f"{cfg['study']}.summary.json")
    with open(json_path, "w") as fh:
        fh.write(json.dumps(summary, sort_keys=True) + "\n")
    cells = [names] + [[_format_cell(v) for v in row] for row in rows]
    widths = [max(len(r[c]) for r in cells) for c in range(len(names))]
    for r in cells:
        print("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    print(json.dumps(summary, sort_keys=True))


def _run_convergence(cfg) -> int:
    smooth = harness.builtin_field(cfg["field"])
    runner = {
        "converge-action": harness.consistency_action_study,
        "converge-holonomy": harness.holonomy_error_study,
        "converge-transport": harness.transport_conjugation_study,
        "origin-dependence": harness.origin_dependence_study,
    }
    if cfg["study"] == "converge-derivative":
        report = harness.consistency_derivative_study(
            smooth, cfg["ns"], seed=cfg["seed"])
    else:
        report = runner[cfg["study"]](smooth, cfg["ns"], seed=cfg["seed"])
    summary = report.summary()
    if cfg["assert_order"] is not None:
        summary["assert_order"] = cfg["assert_order"]
        summary["passed"] = bool(report.slope >= cfg["assert_order"])
    _emit(cfg, report.columns(), summary)
    if cfg["assert_order"] is not None and report.slope < cfg["assert_order"]:
        return 2
    return 0


def _run_gauge_check(cfg) -> int:
    result = harness.gauge_invariance_check(
        GROUPS[cfg["group"]], n=cfg["ns"][0], seed=cfg["seed"])
    columns = [("pair", list(range(result["pairs"]))),
               ("violation", result["violations"])]
    summary = {k: result[k] for k in
               ("study", "group", "kind", "n", "pairs", "seed", "max_violation")}
    summary["tolerance"] = GAUGE_TOLERANCE
    summary["passed"] = bool(result["max_violation"] <= GAUGE_TOLERANCE)
    _emit(cfg, columns, summary)
    return 0 if summary["passed"] else 2


def _run_noether_check(cfg) -> int:
    group = GROUPS[cfg["group"]]
    complex = build_unit_cube_mesh(cfg["ns"][0])
    field = GaugeField.random(complex, group, 0.4, seed=[cfg["seed"], 0])
    phi = ScalarField.random(complex, group, 1.0, seed=[cfg["seed"], 1])
    generator = group.from_coefficients(
        np.random.default_rng([cfg["seed"], 2]).uniform(-1, 1, group.dim))
    report = noether.noether_gauge_check(complex, field, vertex=0,
                                         generator=generator, phi=phi)
    # exactness certificate: plain 4th-order residual must drop ~16x per halving
    big = noether.noether_gauge_check(complex, field, vertex=0,
                                      generator=8.0 * generator, phi=phi,
                                      fd_step=1e-3, richardson=False)
    half = noether.noether_gauge_check(complex, field, vertex=0,
                                       generator=8.0 * generator, phi=phi,
                                       fd_step=5e-4, richardson=False)
    reduction = big.max_residual / max(half.max_residual, 1e-300)
    rows = list(report.rows())
    columns = [
        ("vertex", [r[0] for r in rows]),
        ("w", [r[1] for r in rows]),
        ("flux", [r[2] for r in rows]),
        ("residual", [r[3] for r in rows]),
    ]
    passed = (report.max_residual <= NOETHER_TOLERANCE
              and reduction >= NOETHER_REDUCTION)
    summary = {
        "study": "noether-check",
        "group": cfg["group"],
        "n": cfg["ns"][0],
        "seed": cfg["seed"],
        "max_residual": report.max_residual,
        "fd_halving_reduction": reduction,
        "tolerance": NOETHER_TOLERANCE,
        "passed": bool(passed),
    }
    _emit(cfg, columns, summary)
    return 0 if passed else 2


def _run_eval_action(cfg) -> int:
    group = GROUPS[cfg["group"]]
    complex = build_unit_cube_mesh(cfg["ns"][0])
    smooth = harness.builtin_field(cfg["field"])
    field = harness.interpolate_field(smooth, complex)
    phi = ScalarField.random(complex, group, 1.0, seed=[cfg["seed"], 1])
    kinds, totals, residues = [], [], []
    for kind in ACTION_KINDS:
        needs_phi = kind.startswith("scalar")
        value = global_action(kind, complex, field,
                              phi=phi if needs_phi else None)
        kinds.append(kind)
        totals.append(value.total)
        residues.append(value.imaginary_residue)
    columns = [("kind", kinds), ("total", totals),
               ("imaginary_residue", residues)]
    summary = {"study": "eval-action", "group": cfg["group"],
               "field": cfg["field"], "n": cfg["ns"][0], "seed": cfg["seed"]}
    _emit(cfg, columns, summary)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except RuntimeError as exc:
        print(f"sgauge: error: {exc}", file=sys.stderr)
        return 1
    try:
        if cfg["study"] == "gauge-check":
            return _run_gauge_check(cfg)
        if cfg["study"] == "noether-check":
            return _run_noether_check(cfg)
        if cfg["study"] == "eval-action":
            return _run_eval_action(cfg)
        return _run_convergence(cfg)
    except OSError as exc:
        print(f"sgauge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
