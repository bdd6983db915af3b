"""Command-line interface: ``chsh-seq {run,simulate,optimize,sweep}``.

Exit codes: 0 success, 2 input error, 3 internal consistency failure.
Report bodies carry no timestamps so identical invocations produce identical
bytes; progress and timing go to stderr with ``-v``.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
import time
from typing import Any, Sequence

import numpy as np

from . import __version__, _expr, _kernels
from .chsh import (
    CLASSIFICATION_TOL,
    CLASSICAL_BOUND,
    MIXED_SEQUENTIAL_BOUND,
    PAIR_NAMES,
    TSIRELSON_BOUND,
    BellScenario,
    chsh_operator,
    chsh_value,
    max_chsh_over_states,
    norm_decomposition,
)
from .errors import ChshSeqError, InternalConsistencyError, ParameterError, ScenarioError
from .linalg import operator_norm
from .montecarlo import Z_GATE, compare, empirical_chsh
from .observables import from_spin_direction, lift
from .optimizer import DEFAULT_BUDGET, DEFAULT_RESTARTS, Constraint, SearchSpace, search
from .scenario import load_scenario, parse_scenario, scenario_to_doc
from .sequential import basis_state, mixed_joint_distribution, singlet_state

log = logging.getLogger("chsh_seq")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3

ANGLE_NAMES = ("a", "a_prime", "b", "b_prime")
DEFAULT_ANGLES = {"a": "0", "a_prime": "pi/2", "b": "pi/4", "b_prime": "3*pi/4"}
FAMILIES = ("spin_angles", "qubit_angles")
SWEEP_COLUMNS = (
    "family", "a", "a_prime", "b", "b_prime",
    "E_ab", "E_ab_prime", "E_a_prime_b_prime", "E_a_prime_b",
    "chsh", "max_marginal_deviation", "classification",
)


class InputError(Exception):
    """Bad command-line input that argparse could not catch."""


def _header(command: str) -> dict[str, Any]:
    return {"tool": "chsh-seq", "version": __version__, "command": command, "backend": _kernels.BACKEND}


def _bounds() -> dict[str, float]:
    return {"classical": CLASSICAL_BOUND, "tsirelson": TSIRELSON_BOUND, "mixed_sequential": MIXED_SEQUENTIAL_BOUND}


def analyze(scenario: BellScenario, tol: float) -> dict[str, Any]:
    """The full analytic pipeline for one scenario, as a JSON-ready dict."""
    report = chsh_value(scenario, tol)
    obs = scenario.observables
    c_hat = chsh_operator(*obs)
    lam_max, _ = max_chsh_over_states(*obs)
    return {
        "chsh": report.as_dict(),
        "operator_norm": operator_norm(c_hat),
        "max_over_states": lam_max,
        "norm_decomposition": {
            "symmetrized": norm_decomposition(*obs, symmetrized=True).as_dict(),
            "unsymmetrized": norm_decomposition(*obs, symmetrized=False).as_dict(),
        },
        "bounds": _bounds(),
    }


def cmd_run(args) -> dict[str, Any]:
    scenario, description, doc = load_scenario(args.scenario)
    out = _header("run")
    out.update({"tolerance": args.tolerance, "description": description, "scenario": doc})
    out.update(analyze(scenario, args.tolerance))
    return out


def cmd_simulate(args) -> dict[str, Any]:
    if args.samples < 1:
        raise InputError(f"--samples must be >= 1, got {args.samples}")
    scenario, description, doc = load_scenario(args.scenario)
    emp = empirical_chsh(scenario, args.samples, args.seed)
    pairs = []
    for name, (x, y), stats in zip(PAIR_NAMES, scenario.pairs(), emp.stats):
        analytic = mixed_joint_distribution(scenario.psi, x, y)
        max_err, z = compare(stats, analytic)
        pairs.append({
            "pair": name,
            "analytic": analytic.as_dict(),
            "empirical": stats.as_dict(),
            "z": dict(zip(("++", "+-", "-+", "--"), z.ravel().tolist())),
            "max_abs_error": max_err,
            "max_abs_z": float(np.max(np.abs(z))),
            "within_z_gate": bool(np.max(np.abs(z)) <= Z_GATE),
        })
    out = _header("simulate")
    out.update({
        "tolerance": args.tolerance,
        "samples": args.samples,
        "seed": args.seed,
        "description": description,
        "scenario": doc,
    })
    out.update(analyze(scenario, args.tolerance))
    analytic_value = out["chsh"]["chsh_value"]
    out["simulation"] = {
        "pairs": pairs,
        "z_gate": Z_GATE,
        "empirical_chsh": emp.value,
        "standard_error": emp.standard_error,
        "deviation_in_standard_errors": abs(emp.value - analytic_value) / emp.standard_error if emp.standard_error > 0 else 0.0,
    }
    return out


def cmd_optimize(args) -> dict[str, Any]:
    try:
        constraint = Constraint(args.constraint)
    except ValueError:
        raise InputError(f"unknown constraint {args.constraint!r}; choose from {[c.value for c in Constraint]}") from None
    if args.budget < 1 or args.restarts < 1:
        raise InputError("--budget and --restarts must be >= 1")
    try:
        space = SearchSpace(args.dim, constraint)
    except (ParameterError, ChshSeqError) as exc:
        raise InputError(str(exc)) from None
    result = search(space, budget=args.budget, restarts=args.restarts, seed=args.seed)
    description = (
        f"best scenario from optimize: dim={args.dim} constraint={constraint.value} "
        f"seed={args.seed} budget={args.budget} restarts={args.restarts}"
    )
    doc = scenario_to_doc(result.best_scenario, description)
    # analyze the re-parsed document so the report describes exactly what it embeds
    scenario, _ = parse_scenario(json.loads(json.dumps(doc)))
    out = _header("optimize")
    out.update({"tolerance": args.tolerance, "search": result.as_dict(), "scenario": doc})
    out.update(analyze(scenario, args.tolerance))
    return out


def parse_grid(text: str) -> list[dict[str, float]]:
    """Expand ``name=start:stop:steps`` / ``name=expr`` terms into grid points.

    Terms are separated by ``;`` or ``,``. Ranges are inclusive linspaces and
    combine as a Cartesian product; expressions may use ``pi`` and the other
    angle names. Unspecified angles default to the Tsirelson settings.
    """
    terms: dict[str, str] = {}
    for raw in text.replace(",", ";").split(";"):
        raw = raw.strip()
        if not raw:
            continue
        if "=" not in raw:
            raise InputError(f"grid term {raw!r} must look like name=value or name=start:stop:steps")
        name, value = (s.strip() for s in raw.split("=", 1))
        if name not in ANGLE_NAMES:
            raise InputError(f"unknown grid variable {name!r}; expected one of {ANGLE_NAMES}")
        terms[name] = value
    for name in ANGLE_NAMES:
        terms.setdefault(name, DEFAULT_ANGLES[name])

    axes: dict[str, np.ndarray] = {}
    exprs: dict[str, str] = {}
    for name, value in terms.items():
        parts = value.split(":")
        if len(parts) == 3:
            try:
                start, stop = _expr.evaluate(parts[0]), _expr.evaluate(parts[1])
                steps = int(parts[2])
            except ValueError as exc:
                raise InputError(f"bad range for {name}: {exc}") from None
            if steps < 1:
                raise InputError(f"grid axis {name} is empty (steps = {steps})")
            axes[name] = np.linspace(start, stop, steps)
        elif len(parts) == 1:
            exprs[name] = value
        else:
            raise InputError(f"grid value for {name} must be an expression or start:stop:steps")

    points = []
    for combo in itertools.product(*axes.values()):
        point = dict(zip(axes.keys(), (float(c) for c in combo)))
        pending = dict(exprs)
        while pending:
            progressed = False
            for name, text in list(pending.items()):
                try:
                    needed = _expr.free_names(text)
                except SyntaxError:
                    raise InputError(f"cannot parse expression {text!r} for {name}") from None
                if needed <= point.keys():
                    try:
                        point[name] = _expr.evaluate(text, point)
                    except ValueError as exc:
                        raise InputError(f"bad value for {name}: {exc}") from None
                    del pending[name]
                    progressed = True
            if not progressed:
                raise InputError(f"grid expressions have unresolved or circular references: {sorted(pending)}")
        points.append(point)
    if not points:
        raise InputError("grid is empty")
    return points


def family_scenario(family: str, angles: dict[str, float]) -> BellScenario:
    """Spin observables in the x-z plane at the given polar angles."""
    obs = {k: from_spin_direction(angles[k], 0.0, k) for k in ANGLE_NAMES}
    if family == "spin_angles":
        return BellScenario(
            singlet_state(),
            lift(obs["a"], "left", 2),
            lift(obs["a_prime"], "left", 2),
            lift(obs["b"], "right", 2),
            lift(obs["b_prime"], "right", 2),
        )
    if family == "qubit_angles":
        return BellScenario(basis_state(2, 0), obs["a"], obs["a_prime"], obs["b"], obs["b_prime"])
    raise InputError(f"unknown family {family!r}; choose from {FAMILIES}")


def sweep_rows(family: str, points: Sequence[dict[str, float]], tol: float) -> list[dict[str, Any]]:
    rows = []
    for p in points:
        rep = chsh_value(family_scenario(family, p), tol)
        e = rep.correlations
        rows.append({
            "family": family,
            **{k: p[k] for k in ANGLE_NAMES},
            "E_ab": e[0], "E_ab_prime": e[1], "E_a_prime_b_prime": e[2], "E_a_prime_b": e[3],
            "chsh": rep.chsh_value,
            "max_marginal_deviation": rep.marginal_report.max_abs_deviation,
            "classification": rep.classification.value,
        })
    return rows


def rows_to_csv(rows: Sequence[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def cmd_sweep(args):
    if args.family not in FAMILIES:
        raise InputError(f"unknown family {args.family!r}; choose from {FAMILIES}")
    rows = sweep_rows(args.family, parse_grid(args.grid), args.tolerance)
    if args.format == "json":
        out = _header("sweep")
        out.update({"family": args.family, "grid": args.grid, "tolerance": args.tolerance, "rows": rows})
        return out
    return rows_to_csv(rows)


def dumps(report: dict[str, Any]) -> str:
    # float repr is the shortest string that round-trips to the same double
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chsh-seq",
        description="Bell-CHSH analysis of uniformly mixed sequential measurements.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress and timing on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="json"):
        p.add_argument("--output", "-o", help="write the report here instead of stdout")
        p.add_argument("--tolerance", type=float, default=CLASSIFICATION_TOL,
                       help="classification tolerance at each bound (default %(default)g)")
        p.add_argument("--format", choices=("json", "csv"), default=fmt_default)

    p = sub.add_parser("run", help="analytic CHSH, marginal-law and norm analysis of a scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON path, or @name for a bundled one")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo simulation of the four mixed sequential pairs")
    p.add_argument("--scenario", required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("optimize", help="search observable quadruples for the largest CHSH value")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--constraint", default="free", help=f"one of {[c.value for c in Constraint]}")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="evaluations per restart")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("sweep", help="CHSH and marginal deviations over a grid of spin angles")
    p.add_argument("--family", default="spin_angles", help=f"one of {FAMILIES}")
    p.add_argument("--grid", required=True,
                   help="e.g. 'b=0:pi:101; a=0; a_prime=pi/2; b_prime=b+pi/2'")
    common(p, fmt_default="csv")
    return parser


COMMANDS = {"run": cmd_run, "simulate": cmd_simulate, "optimize": cmd_optimize, "sweep": cmd_sweep}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    if args.command != "sweep" and args.format == "csv":
        parser.error("--format csv is only supported by sweep")
    if not (args.tolerance >= 0 and math.isfinite(args.tolerance)):
        parser.error("--tolerance must be a non-negative finite number")

    t0 = time.perf_counter()
    log.info("chsh-seq %s: %s started (backend %s)", __version__, args.command, _kernels.BACKEND)
    try:
        result = COMMANDS[args.command](args)
    except (ScenarioError, InputError) as exc:
        print(f"chsh-seq: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalConsistencyError as exc:
        print(f"chsh-seq: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ChshSeqError as exc:
        print(f"chsh-seq: numerical failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    text = result if isinstance(result, str) else dumps(result)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - t0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
