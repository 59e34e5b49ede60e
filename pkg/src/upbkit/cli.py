"""upbkit command line: construct, verify, discriminate, render-grid.

Exit codes: 0 when every requested check passes, 1 when a check is not
certified, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from .constructions import build_334, build_layered, grid, render_grid, shifts_upb
from .entanglement import check_ppt, upb_to_state
from .io import dumps_report, make_report, read_stateset, stateset_to_dict, write_stateset
from .linalg import Bipartition, ToleranceConfig
from .protocol import (
    PROTOCOL_LEDGER,
    SYMMETRIES,
    TELEPORTATION_LEDGER,
    build_appendix_d_tree,
    discriminate_all,
    resource_cost,
)
from .verify import (
    SeesawConfig,
    bipartite_cuts,
    check_completeness,
    check_orthogonality,
    complement_projector,
    op_constraints,
    seesaw_product_overlap,
    solve_triviality,
)

CHECKS = ("ortho", "complete", "unext", "nonlocal", "ppt")
DEFAULT_SEED = 42
SEED_ENV = "UPBKIT_SEED"
UNEXT_MARGIN = 1e-3  # best product overlap must stay at or below 1 - this


class UsageError(Exception):
    pass


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 3,3,4, got {text!r}") from None
    if len(dims) != 3:
        raise argparse.ArgumentTypeError("exactly three local dimensions are required")
    return dims


def _checks(text: str) -> list[str]:
    items = [c.strip() for c in text.split(",") if c.strip()]
    if items == ["all"]:
        return list(CHECKS)
    bad = [c for c in items if c not in CHECKS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"unknown checks {bad}; choose from {', '.join(CHECKS)} or all")
    return items


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _tol(args) -> ToleranceConfig:
    if args.tol is None:
        return ToleranceConfig()
    return ToleranceConfig(args.tol, args.tol, args.tol)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------


def cmd_construct(args) -> int:
    if args.family == "shifts":
        upb = shifts_upb()
        expected = 4
    else:
        upb = build_334() if args.dims == (3, 3, 4) and args.layer == 0 else build_layered(args.dims, args.layer)
        dA, dB, dC = args.dims
        expected = dA * dB * dC - 8 * (args.layer + 1)
    msg = f"{len(upb)} states in {'x'.join(map(str, upb.dims))} (expected {expected}: {'ok' if len(upb) == expected else 'MISMATCH'})"
    if args.out:
        write_stateset(upb, args.out)
        print(msg)
    else:
        import json

        sys.stdout.write(json.dumps(stateset_to_dict(upb), indent=1) + "\n")
        print(msg, file=sys.stderr)
    return 0 if len(upb) == expected else 1


def _nonlocal_result(upb, cuts, tol) -> dict:
    systems = [op_constraints(upb, c, tol) for c in (cuts or bipartite_cuts(len(upb.dims)))]
    reports = [solve_triviality(cs, tol) for cs in systems]
    cert = all(r.certified_trivial for r in reports)
    return {
        "passed": cert,
        "verdict": "certified strongly nonlocal" if cert else "inconclusive",
        "cuts": [
            {
                "cut": r.cut,
                "certified_trivial": r.certified_trivial,
                "solution_dim": r.solution_dim,
                "contains_identity": r.contains_identity,
                "identity_residual": r.identity_residual,
                "n_constraints": r.n_constraints,
                "rank_margin": r.rank_margin,
                "provenance": [[a.to_json(), b.to_json()] for a, b in cs.provenance],
            }
            for r, cs in zip(reports, systems)
        ],
    }


def _unext_result(upb, seesaw: SeesawConfig, tol) -> dict:
    res = seesaw_product_overlap(complement_projector(upb, tol), upb.dims, seesaw, tol)
    return {
        "passed": res.best_overlap <= 1 - UNEXT_MARGIN,
        "best_overlap": res.best_overlap,
        "distance": res.distance,
        "threshold": 1 - UNEXT_MARGIN,
        "restarts": res.restarts,
        "iterations": res.iterations,
        "converged": res.converged,
        "monotone": res.monotone,
        "evidence": f"no product state found; max overlap {res.best_overlap:.6f} after {res.restarts} restarts"
        if res.best_overlap <= 1 - UNEXT_MARGIN
        else f"product state found with overlap {res.best_overlap:.12f}",
        "witness": [[[z.real, z.imag] for z in v] for v in res.witness.locals],
    }


def _ppt_result(upb, seesaw: SeesawConfig, tol) -> dict:
    rep = check_ppt(upb_to_state(upb, tol), seesaw, tol)
    ev = rep.range_evidence
    return {
        "passed": rep.ppt,
        "min_eigenvalues": rep.min_eigenvalues,
        "rank": rep.rank,
        "range_best_overlap": ev.best_overlap if ev else None,
        "entanglement_evidence": rep.entangled_evidence,
        "evidence": f"min partial-transpose eigenvalue {min(rep.min_eigenvalues.values()):.3g}, rank {rep.rank}"
        + (f", best product overlap with range {ev.best_overlap:.6f}" if ev else ""),
    }


def cmd_verify(args) -> int:
    tol = _tol(args)
    seed = args.seed if args.seed is not None else default_seed()
    seesaw = SeesawConfig(restarts=args.restarts, seed=seed)
    try:
        upb = read_stateset(args.input)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    cuts = [Bipartition.parse(args.cut, len(upb.dims))] if args.cut else None
    results, timings = {}, {}
    for check in args.checks:
        t0 = time.perf_counter()
        try:
            if check == "ortho":
                r = check_orthogonality(upb, tol)
                results[check] = {"passed": r.passed, "max_overlap": r.max_overlap, "worst_pair": r.worst_pair}
            elif check == "complete":
                r = check_completeness(upb, tol=tol)
                results[check] = {"passed": r.passed, "total": r.total, "expected": r.expected, "rank": r.rank, "detail": r.detail}
            elif check == "unext":
                results[check] = _unext_result(upb, seesaw, tol)
            elif check == "nonlocal":
                results[check] = _nonlocal_result(upb, cuts, tol)
            elif check == "ppt":
                results[check] = _ppt_result(upb, seesaw, tol)
        except ValueError as exc:
            results[check] = {"passed": False, "error": str(exc)}
        timings[check] = time.perf_counter() - t0
    report = make_report(["verify"] + list(args.argv), tol, seed, results, timings)
    _emit(dumps_report(report), args.out)
    for check, r in results.items():
        extra = r.get("verdict") or r.get("evidence") or r.get("error") or ""
        print(f"{check:9s} {'PASS' if r['passed'] else 'FAIL'} {extra}", file=sys.stderr)
    return 0 if all(r["passed"] for r in results.values()) else 1


def cmd_discriminate(args) -> int:
    tol = _tol(args)
    seed = args.seed if args.seed is not None else default_seed()
    t0 = time.perf_counter()
    tree = build_appendix_d_tree(args.symmetry, tol=tol)
    t1 = time.perf_counter()
    traces = discriminate_all(tree)
    t2 = time.perf_counter()
    results = {
        "mode": tree.mode,
        "symmetry": tree.symmetry,
        "branches": [
            {"branch": list(b.branch), "generated": b.generated, "valid": b.valid, "problems": b.problems}
            for b in tree.branches
        ],
        "max_completeness_residual": max(n.completeness_residual for n in tree.nodes.values()),
        "inputs": [
            {
                "input": t.input,
                "success": t.success,
                "verdict": t.verdict,
                "total_probability": t.total_probability,
                "covered_probability": t.covered_probability,
                "paths": [
                    {"outcomes": list(p.outcome_path), "probability": p.probability, "verdict": p.verdict}
                    for p in t.paths
                ],
            }
            for t in traces
        ],
        "successes": sum(t.success for t in traces),
        "ledger_ebits": resource_cost(PROTOCOL_LEDGER),
        "teleportation_baseline_ebits": resource_cost(TELEPORTATION_LEDGER),
    }
    results["passed"] = results["successes"] == len(traces)
    report = make_report(["discriminate"] + list(args.argv), tol, seed, results, {"build": t1 - t0, "run": t2 - t1})
    _emit(dumps_report(report), args.out)
    if args.transcript:
        for t in traces:
            print(t.transcript(), file=sys.stderr)
    print(
        f"{results['successes']}/{len(traces)} identified ({tree.mode}); "
        f"ledger {results['ledger_ebits']:.4f} ebits vs teleportation {results['teleportation_baseline_ebits']:.4f}",
        file=sys.stderr,
    )
    return 0 if results["passed"] else 1


def cmd_render_grid(args) -> int:
    cut = Bipartition.parse(args.cut, 3)
    text = render_grid(grid(args.dims, args.layer, cut)) + "\n"
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="upbkit", description="Strongly nonlocal UPBs in tripartite systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tol", type=float, default=None, help="set zero/rank/eig tolerances (default 1e-9)")
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    c = sub.add_parser("construct", help="build a UPB and write it as JSON")
    c.add_argument("--dims", type=_dims, default=(3, 3, 4))
    c.add_argument("--layer", type=int, default=0)
    c.add_argument("--family", choices=("layered", "shifts"), default="layered")
    common(c)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="run checks on a state-set file")
    v.add_argument("input")
    v.add_argument("--checks", type=_checks, default=list(CHECKS))
    v.add_argument("--cut", default=None, help="restrict the nonlocality check to one cut, e.g. A|BC")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--restarts", type=int, default=200)
    common(v)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("discriminate", help="simulate the two-ebit protocol on all 28 states")
    d.add_argument("--seed", type=int, default=None)
    d.add_argument("--transcript", action="store_true")
    d.add_argument("--symmetry", choices=SYMMETRIES, default="ancilla-flip")
    common(d)
    d.set_defaults(func=cmd_discriminate)

    g = sub.add_parser("render-grid", help="ASCII tiling picture")
    g.add_argument("--dims", type=_dims, default=(3, 3, 4))
    g.add_argument("--layer", type=int, default=0)
    g.add_argument("--cut", default="A|BC")
    common(g)
    g.set_defaults(func=cmd_render_grid)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    args.argv = argv[1:]
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"upbkit {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
