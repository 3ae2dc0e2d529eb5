"""Command-line driver: run one study, or sweep a matrix of them.

``wcmo --case tc1 --degree 2 --mode uniform --max-iters 4`` runs a single
study and writes, under ``--out``:

* ``convergence.csv`` with columns iter,dof,h_min,est1,est2,bnd1,bnd2,ref,exact
* ``meshes/iter_<k>.txt`` leaf-cell lists
* ``manifest.json`` with the resolved configuration

``wcmo sweep --cases tc1,tc3 --degrees 1,2 --modes uniform`` runs every
(case, degree, mode) combination sequentially, writing one CSV per
combination plus a combined ``index.json``; per-run failures are recorded
in the index and the remaining runs proceed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .adapt import MarkingParams, semr_run
from .cases import CASES, get_case, synth_permeability
from .coefficients import GriddedLogField

CSV_HEADER = ["iter", "dof", "h_min", "est1", "est2", "bnd1", "bnd2",
              "ref", "exact"]


def _add_run_knobs(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--mode", choices=["adaptive", "uniform"],
                    default="adaptive")
    ap.add_argument("--max-iters", type=int, default=10)
    ap.add_argument("--dof-budget", type=int, default=None)
    ap.add_argument("--zeta", type=float, default=0.5,
                    help="marking keeps a (1 - zeta) indicator fraction")
    ap.add_argument("--tol", type=float, default=0.0,
                    help="stop when the estimate drops below this value")
    ap.add_argument("--rel-tol", type=float, default=1e-10,
                    help="linear-solver residual check tolerance")
    ap.add_argument("--objective", default=None,
                    help="override objective kind (advanced)")
    ap.add_argument("--perm-file", default=None,
                    help="gridded log-permeability file (tc3/tc4)")
    ap.add_argument("--perm-seed", type=int, default=None,
                    help="synthesize a heterogeneous permeability field")
    ap.add_argument("--reference", type=int, default=0, metavar="LEVELS",
                    help="also compute a reference estimate this many "
                         "uniform levels finer")
    ap.add_argument("--out", default="out", help="output directory")


def build_run_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wcmo",
        description="Worst-case multi-objective error estimation benchmarks.")
    ap.add_argument("--case", required=True, choices=sorted(CASES))
    ap.add_argument("--degree", type=int, default=1, metavar="P",
                    help="polynomial degree, 1..4")
    _add_run_knobs(ap)
    return ap


def build_sweep_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wcmo sweep",
        description="Run a matrix of (case, degree, mode) studies.")
    ap.add_argument("--cases", required=True,
                    help="comma-separated case ids")
    ap.add_argument("--degrees", required=True,
                    help="comma-separated polynomial degrees")
    ap.add_argument("--modes", default="adaptive",
                    help="comma-separated modes (adaptive,uniform)")
    _add_run_knobs(ap)
    return ap


def _fmt(v) -> str:
    return "" if v is None else f"{v:.17e}"


def write_history(history, csv_path: Path, mesh_dir: Path | None) -> None:
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for rep in history.reports:
            w.writerow([rep.iteration, rep.dof, _fmt(rep.h_min),
                        _fmt(rep.est1), _fmt(rep.est2), _fmt(rep.bnd1),
                        _fmt(rep.bnd2), _fmt(rep.reference), _fmt(rep.exact)])
    if mesh_dir is not None:
        mesh_dir.mkdir(parents=True, exist_ok=True)
        for rep, mesh in zip(history.reports, history.meshes):
            (mesh_dir / f"iter_{rep.iteration}.txt").write_text(
                mesh.serialize())


def _apply_threads() -> None:
    threads = os.environ.get("WCMO_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _validate_common(args) -> str | None:
    if not 0.0 <= args.zeta < 1.0:
        return "--zeta must lie in [0, 1)"
    if args.max_iters < 1:
        return "--max-iters must be positive"
    if args.perm_file is not None and args.perm_seed is not None:
        return "--perm-file and --perm-seed are mutually exclusive"
    return None


def _resolve_case(case_id: str, args):
    """Case spec with any permeability override applied, or (None, error)."""
    case = get_case(case_id)
    if args.perm_file is not None or args.perm_seed is not None:
        if case.objective.kind != "boundary_flux":
            return None, f"case {case_id} takes no permeability field"
        if args.perm_file is not None:
            eps = GriddedLogField.load(args.perm_file)
        else:
            eps = synth_permeability(args.perm_seed)
        case = case.with_eps(eps)
    if args.objective is not None and args.objective != case.objective.kind:
        return None, (f"case {case_id} supports only objective "
                      f"{case.objective.kind!r}")
    return case, None


def _run_one(case, degree: int, args):
    return semr_run(
        case, degree, mode=args.mode, max_iters=args.max_iters,
        dof_budget=args.dof_budget, params=MarkingParams(zeta=args.zeta),
        tol=args.tol, rel_tol=args.rel_tol,
        reference_levels=args.reference)


def _manifest(args, case_id: str, degree: int, mode: str) -> dict:
    return {
        "case": case_id, "degree": degree, "mode": mode,
        "max_iters": args.max_iters, "dof_budget": args.dof_budget,
        "zeta": args.zeta, "tol": args.tol, "rel_tol": args.rel_tol,
        "reference": args.reference, "perm_file": args.perm_file,
        "perm_seed": args.perm_seed,
    }


def main_run(argv) -> int:
    ap = build_run_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not 1 <= args.degree <= 4:
        print("error: --degree must be in 1..4", file=sys.stderr)
        return 2
    err = _validate_common(args)
    if err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    _apply_threads()
    case, err = _resolve_case(args.case, args)
    if err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    history = _run_one(case, args.degree, args)
    out_dir = Path(args.out)
    write_history(history, out_dir / "convergence.csv", out_dir / "meshes")
    manifest = _manifest(args, args.case, args.degree, args.mode)
    manifest.update(iterations=len(history.reports), failed=history.failed,
                    failure=history.failure)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if history.failed:
        print(f"run ended early: {history.failure}", file=sys.stderr)
        return 1
    return 0


def main_sweep(argv) -> int:
    ap = build_sweep_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    cases = [c for c in args.cases.split(",") if c]
    degree_items = [d for d in args.degrees.split(",") if d]
    modes = [m for m in args.modes.split(",") if m]
    if not cases or not degree_items or not modes:
        print("error: --cases, --degrees, and --modes must be nonempty",
              file=sys.stderr)
        return 2
    try:
        degrees = [int(d) for d in degree_items]
    except ValueError:
        print("error: --degrees must be integers", file=sys.stderr)
        return 2
    for cid in cases:
        if cid not in CASES:
            print(f"error: unknown case {cid!r}", file=sys.stderr)
            return 2
    if any(not 1 <= d <= 4 for d in degrees):
        print("error: --degrees must be in 1..4", file=sys.stderr)
        return 2
    if any(m not in ("adaptive", "uniform") for m in modes):
        print("error: --modes must be adaptive or uniform", file=sys.stderr)
        return 2
    err = _validate_common(args)
    if err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    _apply_threads()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = []
    status = 0
    for cid in cases:
        for mode in modes:
            for degree in degrees:
                args.mode = mode
                name = f"{cid}_p{degree}_{mode}.csv"
                entry = _manifest(args, cid, degree, mode)
                entry["csv"] = name
                case, err = _resolve_case(cid, args)
                if err is None:
                    try:
                        history = _run_one(case, degree, args)
                    except Exception as exc:  # keep sweeping on failures
                        err = str(exc)
                if err is None:
                    write_history(history, out_dir / name, None)
                    entry["iterations"] = len(history.reports)
                    entry["failed"] = history.failed
                    entry["failure"] = history.failure
                    if history.failed:
                        status = 1
                else:
                    entry["failed"] = True
                    entry["failure"] = err
                    status = 1
                index.append(entry)
    (out_dir / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    return status


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if argv and argv[0] == "sweep":
        return main_sweep(argv[1:])
    if argv and argv[0] == "run":
        argv = argv[1:]
    return main_run(argv)


if __name__ == "__main__":
    raise SystemExit(main())
