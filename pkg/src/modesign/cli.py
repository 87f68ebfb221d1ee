"""Batch command-line front end.

Reads a JSON problem file describing the design space, models, criteria, and
problem kind; orchestrates presolves, the main solve, and certification; and
writes design.json, design.csv, certificate.json, and dispersion.csv into
the output directory.  Exit status: 0 certified, 2 not certified,
3 infeasible, 1 error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .certify import (
    Certificate,
    InfeasibleDesignError,
    certify_constrained,
    certify_maximin,
    verify_single,
    write_certificate_json,
    write_dispersion_csv,
    _atomic_write,
)
from .criteria import CriterionSpec, efficiency_from_value
from .model_grid import (
    Design,
    DesignGrid,
    FiniteFactor,
    IntervalFactor,
    RegressionModel,
    build_grid,
    information_matrix,
    integral_L_matrix,
)
from .criteria import criterion_value
from .solve import (
    MultiObjectiveProblem,
    SolveResult,
    presolve,
    solve_constrained,
    solve_maximin,
    solve_single,
)

EXIT_CERTIFIED = 0
EXIT_ERROR = 1
EXIT_NOT_CERTIFIED = 2
EXIT_INFEASIBLE = 3


class ProblemFileError(ValueError):
    pass


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except ProblemFileError as exc:
        print(f"problem file error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modesign",
        description="multi-objective optimal regression designs with "
                    "LP-verified optimality certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "presolves, main solve, certificate, and reports"),
        ("single", "solve one single-objective criterion"),
        ("certify", "certify an externally supplied design"),
        ("dispersion", "dispersion report for an externally supplied design"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("problem_file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--delta", type=float, default=None,
                       help="certification slack (default from file, else 1e-4)")
        p.add_argument("--tol", type=float, default=None,
                       help="solver KKT residual target")
        p.add_argument("--max-iter", type=int, default=None,
                       help="total Newton step budget")
        p.add_argument("--quiet", action="store_true")
        if name == "single":
            p.add_argument("--criterion", type=int, default=1,
                           help="1-based criterion index")
        if name in ("certify", "dispersion"):
            p.add_argument("--design", required=True,
                           help="CSV of index,weight pairs")
    return parser


def run(args) -> int:
    doc = _load_json(args.problem_file)
    problem = build_problem(doc, args)
    os.makedirs(args.out, exist_ok=True)
    threads = _thread_cap(problem.n_criteria)

    if args.command == "solve":
        return _cmd_solve(problem, args, threads)
    if args.command == "single":
        return _cmd_single(problem, args)
    design = _read_design_csv(args.design, problem.grid.n)
    if args.command == "certify":
        return _cmd_certify(problem, design, args, threads)
    return _cmd_dispersion(problem, design, args, threads)


# ---------------------------------------------------------------------------
# commands


def _cmd_solve(problem: MultiObjectiveProblem, args, threads: int) -> int:
    if problem.kind == "single":
        return _cmd_single(problem, args, index=problem.single_index)
    presolve(problem, max_workers=threads)
    result = solve_constrained(problem) if problem.kind == "constrained" \
        else solve_maximin(problem)
    if result.status == "Infeasible":
        _write_design(problem, result, None, args.out)
        _say(args, "no feasible design satisfies the efficiency floors")
        return EXIT_INFEASIBLE
    cert = _certify(problem, result.design.weights, result.t_star)
    _write_all(problem, result, cert, args.out)
    _print_summary(problem, result, cert, args)
    return EXIT_CERTIFIED if cert.certified else EXIT_NOT_CERTIFIED


def _cmd_single(problem: MultiObjectiveProblem, args, index: int | None = None) -> int:
    if index is None:
        index = args.criterion - 1
    if not 0 <= index < problem.n_criteria:
        raise ProblemFileError(f"criterion index {index + 1} out of range")
    result = solve_single(problem, index)
    cert = verify_single(problem.specs[index], problem.grid,
                         result.design.weights, problem.delta)
    _write_all(problem, result, cert, args.out, single_index=index)
    _print_summary(problem, result, cert, args)
    return EXIT_CERTIFIED if cert.certified else EXIT_NOT_CERTIFIED


def _cmd_certify(problem, design: Design, args, threads: int) -> int:
    cert = _certify_external(problem, design, threads)
    write_certificate_json(os.path.join(args.out, "certificate.json"), cert)
    write_dispersion_csv(os.path.join(args.out, "dispersion.csv"),
                         problem.grid, cert)
    _say(args, f"verdict: {cert.verdict}")
    return EXIT_CERTIFIED if cert.certified else EXIT_NOT_CERTIFIED


def _cmd_dispersion(problem, design: Design, args, threads: int) -> int:
    cert = _certify_external(problem, design, threads)
    write_dispersion_csv(os.path.join(args.out, "dispersion.csv"),
                         problem.grid, cert)
    _say(args, "wrote dispersion.csv")
    return EXIT_CERTIFIED


def _certify_external(problem, design: Design, threads: int) -> Certificate:
    if problem.kind == "single":
        return verify_single(problem.specs[problem.single_index], problem.grid,
                             design.weights, problem.delta)
    presolve(problem, max_workers=threads)
    try:
        return _certify(problem, design.weights, None)
    except InfeasibleDesignError as exc:
        raise ValueError(f"cannot certify: {exc}") from exc


def _certify(problem, weights, t_star):
    if problem.kind == "constrained":
        return certify_constrained(problem, weights)
    if t_star is None:
        effs = _efficiencies(problem, weights)
        t_star = 1.0 / min(e for e in effs if e is not None)
    return certify_maximin(problem, weights, t_star)


# ---------------------------------------------------------------------------
# problem file parsing


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ProblemFileError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ProblemFileError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        )


def build_problem(doc: dict, args=None) -> MultiObjectiveProblem:
    """Construct the in-memory problem from a parsed problem file."""
    grid = build_grid(_parse_factors(_expect(doc, "design_space", list)))
    models = _parse_models(_expect(doc, "models", list))
    specs = tuple(
        _parse_criterion(entry, models, i)
        for i, entry in enumerate(_expect(doc, "criteria", list))
    )
    kind, single_index, floors = _parse_problem(_expect(doc, "problem", dict), len(specs))
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ProblemFileError("options: expected an object")

    delta = _opt(args, "delta", options.get("delta", 1e-4))
    tol = _opt(args, "tol", options.get("solver_tol", 1e-7))
    max_iter = _opt(args, "max_iter", options.get("max_iterations", 500))
    return MultiObjectiveProblem(
        grid=grid, specs=specs, kind=kind, single_index=single_index,
        floors=floors, delta=float(delta), solver_tol=float(tol),
        max_iterations=int(max_iter),
        support_threshold=float(options.get("support_threshold", 1e-4)),
    )


def _opt(args, name, fallback):
    if args is not None and getattr(args, name, None) is not None:
        return getattr(args, name)
    return fallback


def _expect(doc, key, typ):
    if key not in doc:
        raise ProblemFileError(f"missing required field {key!r}")
    if not isinstance(doc[key], typ):
        raise ProblemFileError(f"field {key!r} has the wrong type")
    return doc[key]


def _parse_factors(entries):
    factors = []
    for i, e in enumerate(entries):
        kind = e.get("type")
        if kind == "interval":
            factors.append(IntervalFactor(float(e["lo"]), float(e["hi"]),
                                          int(e["points"])))
        elif kind == "finite":
            factors.append(FiniteFactor(tuple(float(v) for v in e["values"])))
        else:
            raise ProblemFileError(f"design_space[{i}].type must be "
                                   f"'interval' or 'finite', got {kind!r}")
    return factors


def _parse_models(entries) -> dict[str, RegressionModel]:
    from . import model_grid as mg

    out = {}
    for i, e in enumerate(entries):
        name = e.get("name")
        if not name:
            raise ProblemFileError(f"models[{i}]: missing name")
        kind = e.get("kind")
        try:
            if kind == "compartment4":
                model = mg.compartment_model(e["theta_star"])
            elif kind == "emax3":
                model = mg.emax_model(e["theta_star"])
            elif kind == "logistic4":
                model = mg.logistic_model(e["theta_star"])
            elif kind == "poly-interaction":
                model = mg.interaction_model()
            elif kind == "linear":
                model = mg.linear_model(monomials=e["monomials"])
            else:
                raise ProblemFileError(f"models[{i}]: unknown kind {kind!r}")
        except KeyError as exc:
            raise ProblemFileError(f"models[{i}]: missing field {exc}")
        if name in out:
            raise ProblemFileError(f"models[{i}]: duplicate name {name!r}")
        out[name] = model
    return out


def _parse_criterion(entry, models, i) -> CriterionSpec:
    kind = entry.get("kind")
    if kind not in ("D", "A", "c", "L", "E"):
        raise ProblemFileError(f"criteria[{i}].kind must be one of D/A/c/L/E")
    ref = entry.get("model")
    if ref not in models:
        raise ProblemFileError(f"criteria[{i}].model: unresolved reference {ref!r}")
    model = models[ref]
    c_vec = None
    L_mat = None
    if kind == "c":
        if "c" not in entry:
            raise ProblemFileError(f"criteria[{i}]: c criterion needs field 'c'")
        c_vec = np.asarray(entry["c"], dtype=float)
    if kind == "L":
        L_mat = _parse_L(entry.get("L"), model, i)
    return CriterionSpec(kind=kind, model=model, c_vector=c_vec, L_matrix=L_mat)


def _parse_L(src, model, i):
    if not isinstance(src, dict):
        raise ProblemFileError(f"criteria[{i}]: L criterion needs an 'L' object")
    if "matrix" in src:
        return np.asarray(src["matrix"], dtype=float)
    if "diag" in src:
        return np.diag(np.asarray(src["diag"], dtype=float))
    if "integral" in src:
        spec = src["integral"]
        return integral_L_matrix(model, spec["interval"], int(spec.get("nodes", 200)))
    raise ProblemFileError(
        f"criteria[{i}].L: expected one of 'matrix', 'diag', 'integral'"
    )


def _parse_problem(entry, n_criteria):
    kind = entry.get("type")
    if kind == "single":
        k = int(entry.get("criterion", 1)) - 1
        return "single", k, ()
    if kind == "constrained":
        floors = tuple(float(v) for v in entry.get("floors", ()))
        return "constrained", 0, floors
    if kind == "maximin":
        return "maximin", 0, ()
    raise ProblemFileError(
        f"problem.type must be 'single', 'constrained', or 'maximin', got {kind!r}"
    )


def _thread_cap(n_criteria: int) -> int:
    raw = os.environ.get("MODESIGN_THREADS", "1")
    try:
        return max(1, min(n_criteria, int(raw)))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# design I/O and reports


def _read_design_csv(path, n) -> Design:
    weights = np.zeros(n)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if lineno == 1 and not _is_number(parts[0]):
                    continue  # header
                if len(parts) < 2:
                    raise ValueError(f"line {lineno}: expected index,weight")
                idx = int(parts[0])
                if not 0 <= idx < n:
                    raise ValueError(f"line {lineno}: index {idx} outside grid")
                weights[idx] += float(parts[1])
    except OSError as exc:
        raise ValueError(f"cannot read design file: {exc}")
    total = weights.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"design weights sum to {total!r}, not 1")
    return Design(weights / total)


def _efficiencies(problem, weights):
    effs = []
    for k, spec in enumerate(problem.specs):
        if problem.min_phi[k] is None:
            effs.append(None)
            continue
        M = information_matrix(problem.grid, spec.model, weights)
        effs.append(efficiency_from_value(spec, criterion_value(spec, M, k),
                                          problem.min_phi[k]))
    return effs


def merge_clusters(grid: DesignGrid, design: Design) -> list[dict]:
    """Support points grouped when they are adjacent on the continuous axis
    (gap at most 1.5 grid spacings) with identical finite-factor levels."""
    support = design.support()
    spacing = grid.interval_spacing()
    cont_cols = [d for d, f in enumerate(grid.factors)
                 if isinstance(f, IntervalFactor)]
    clusters = []
    current = []

    def flush():
        if not current:
            return
        idx = list(current)
        wts = design.weights[idx]
        total = float(wts.sum())
        loc = (grid.points[idx] * (wts / total)[:, None]).sum(axis=0)
        clusters.append({
            "indices": [int(i) for i in idx],
            "location": [float(v) for v in loc],
            "weight": total,
            "clustered": len(idx) > 1,
        })
        current.clear()

    if spacing is None or len(cont_cols) != 1:
        for i in support:
            current.append(int(i))
            flush()
        return clusters

    col = cont_cols[0]
    other = [d for d in range(grid.p) if d != col]
    for i in support:
        if current:
            prev = current[-1]
            same_block = all(grid.points[i, d] == grid.points[prev, d]
                             for d in other)
            close = abs(grid.points[i, col] - grid.points[prev, col]) <= 1.5 * spacing
            if not (same_block and close):
                flush()
        current.append(int(i))
    flush()
    return clusters


def _write_design(problem, result: SolveResult, cert, out_dir,
                  single_index: int | None = None):
    design = result.design
    effs = _efficiencies(problem, design.weights) \
        if result.status != "Infeasible" else None
    support = [
        {
            "index": int(i),
            "point": [float(v) for v in problem.grid.points[i]],
            "weight": float(design.weights[i]),
        }
        for i in design.support()
    ]
    doc = {
        "kind": problem.kind if single_index is None else "single",
        "status": result.status,
        "objective": result.objective,
        "t_star": result.t_star,
        "min_phi": [problem.min_phi[k] for k in range(problem.n_criteria)],
        "efficiencies": effs,
        "delta": problem.delta,
        "support": support,
        "clusters": merge_clusters(problem.grid, design),
        "iterations": result.iterations,
        "kkt_residual": result.kkt_residual if np.isfinite(result.kkt_residual) else None,
    }
    _atomic_write(os.path.join(out_dir, "design.json"),
                  json.dumps(doc, indent=2) + "\n")
    lines = ["index,weight"]
    for i in np.flatnonzero(design.weights > 0):
        lines.append(f"{int(i)},{format(design.weights[i], '.17g')}")
    _atomic_write(os.path.join(out_dir, "design.csv"), "\n".join(lines) + "\n")


def _write_all(problem, result, cert, out_dir, single_index=None):
    _write_design(problem, result, cert, out_dir, single_index)
    write_certificate_json(os.path.join(out_dir, "certificate.json"), cert)
    write_dispersion_csv(os.path.join(out_dir, "dispersion.csv"),
                         problem.grid, cert)


def _print_summary(problem, result, cert, args):
    if args.quiet:
        return
    print(f"status: {result.status}")
    if result.t_star is not None:
        print(f"t* = {result.t_star:.4f}  (worst efficiency {1.0 / result.t_star:.4f})")
    effs = _efficiencies(problem, result.design.weights)
    shown = ", ".join("-" if e is None else f"{e:.4f}" for e in effs)
    print(f"efficiencies: {shown}")
    print("design (points with weight >= threshold):")
    for row in merge_clusters(problem.grid, result.design):
        loc = ", ".join(f"{v:.4f}" for v in row["location"])
        tag = "  [merged]" if row["clustered"] else ""
        print(f"  ({loc})  ({row['weight']:.4f}){tag}")
    print(f"certificate: {cert.verdict}")


def _say(args, msg):
    if not args.quiet:
        print(msg)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


if __name__ == "__main__":
    sys.exit(main())
