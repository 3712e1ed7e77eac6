"""Command-line front end: problem files, generators, and result reports.

Problem files are JSON. The system block holds A, B, C either as single
matrices (time-invariant, with "T") or as per-step lists. Safe sets combine
an optional bounding box with obstacle polytopes whose complements become
disjunctive clauses. Control bounds are per-step boxes tiled over the
horizon, or explicit rows over the stacked control.

Exit codes: 0 solved/success, 1 shown unsolvable, 2 inconclusive, 3 usage
or input errors, 4 resource limits (cover caps, solver budgets).
"""

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .geometry import CoverTooLarge, PolytopicSet, gramian_sequence, negate_polytope
from .lra import SolverStuck, to_smtlib
from .model import ControlSequence, LTVSystem, simulate_batch, transition_from_zero
from .synthesis import (
    ArasProblem,
    BudgetCapExceeded,
    build_synthesis_formula,
    max_feasible_budget,
    synthesize,
    synthesize_attack,
    synthesize_attack_table,
    table_synthesize,
    validate_control,
)

EXIT_SOLVED = 0
EXIT_UNSOLVABLE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3
EXIT_RESOURCE = 4


class SpecError(ValueError):
    """Problem-file validation failure, with the offending field in the message."""


def _field(d, key, where, types=None):
    if key not in d:
        raise SpecError(f"missing field '{where}.{key}'")
    val = d[key]
    if types is not None and not isinstance(val, types):
        raise SpecError(f"field '{where}.{key}' has type {type(val).__name__}")
    return val


def _load_system(d):
    sysd = _field(d, "system", "$", dict)
    A = _field(sysd, "A", "system")
    B = _field(sysd, "B", "system")
    C = _field(sysd, "C", "system")
    first = np.asarray(A, dtype=float)
    if first.ndim == 2:
        T = _field(sysd, "T", "system", int)
        return LTVSystem.time_invariant(A, B, C, T)
    if first.ndim == 3:
        return LTVSystem(A=tuple(A), B=tuple(B), C=tuple(C))
    raise SpecError("field 'system.A' must be a matrix or a list of matrices")


def _box_clauses(boxd, dim, where):
    lo = np.asarray(_field(boxd, "lo", where), dtype=float).reshape(-1)
    hi = np.asarray(_field(boxd, "hi", where), dtype=float).reshape(-1)
    if lo.shape != (dim,) or hi.shape != (dim,):
        raise SpecError(f"'{where}' bounds must have dimension {dim}")
    return PolytopicSet.box(lo, hi).clauses


def _rows_clauses(rowsd, dim, where):
    A = np.atleast_2d(np.asarray(_field(rowsd, "A", where), dtype=float))
    b = np.asarray(_field(rowsd, "b", where), dtype=float).reshape(-1)
    if A.shape[1] != dim or A.shape[0] != b.shape[0]:
        raise SpecError(f"'{where}' rows must be ({len(b)}, {dim})")
    return PolytopicSet.from_rows(A, b).clauses


def _load_region(d, key, dim, allow_obstacles=False):
    """Region = optional box, optional rows, optional obstacle complements."""
    rd = _field(d, key, "$", dict)
    clauses = ()
    if "box" in rd:
        clauses += _box_clauses(rd["box"], dim, f"{key}.box")
    if "rows" in rd:
        clauses += _rows_clauses(rd["rows"], dim, f"{key}.rows")
    obstacles = []
    if allow_obstacles and "obstacles" in rd:
        if not isinstance(rd["obstacles"], list):
            raise SpecError(f"field '{key}.obstacles' must be a list")
        for i, od in enumerate(rd["obstacles"]):
            where = f"{key}.obstacles[{i}]"
            if "box" in od:
                lo = np.asarray(_field(od["box"], "lo", where), dtype=float)
                hi = np.asarray(_field(od["box"], "hi", where), dtype=float)
                obs = PolytopicSet.box(lo, hi)
                A = np.array([cl[0].c for cl in obs.clauses])
                b = np.array([cl[0].rhs for cl in obs.clauses])
            else:
                A = np.atleast_2d(np.asarray(_field(od, "A", where), dtype=float))
                b = np.asarray(_field(od, "b", where), dtype=float).reshape(-1)
            if A.shape[1] != dim:
                raise SpecError(f"'{where}' has {A.shape[1]} columns, expected {dim}")
            obstacles.append((A, b))
            clauses += (negate_polytope(A, b),)
    if not clauses and not allow_obstacles:
        raise SpecError(f"region '{key}' is empty; give a box or rows")
    return PolytopicSet(dim=dim, clauses=clauses), obstacles


def _load_ctr(d, sys):
    cd = _field(d, "ctr", "$", dict)
    width = sys.m * sys.T
    if "rows" in cd:
        return PolytopicSet(dim=width, clauses=_rows_clauses(cd["rows"], width, "ctr.rows"))
    lo = np.asarray(_field(cd, "lo", "ctr"), dtype=float).reshape(-1)
    hi = np.asarray(_field(cd, "hi", "ctr"), dtype=float).reshape(-1)
    if lo.shape == (sys.m,):
        lo = np.tile(lo, sys.T)
        hi = np.tile(hi, sys.T)
    if lo.shape != (width,) or hi.shape != (width,):
        raise SpecError(f"'ctr' bounds must have dimension {sys.m} or {width}")
    return PolytopicSet.box(lo, hi)


def load_problem(path):
    """Parse a problem file into an ArasProblem; SpecError names bad fields."""
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"not valid JSON: {exc}") from None
    return problem_from_dict(d)


def problem_from_dict(d):
    sys_ = _load_system(d)
    theta = np.asarray(_field(d, "theta", "$"), dtype=float).reshape(-1)
    if theta.shape != (sys_.n,):
        raise SpecError(f"'theta' has dimension {theta.shape[0]}, expected {sys_.n}")
    delta = float(_field(d, "delta", "$", (int, float)))
    budget = float(_field(d, "budget", "$", (int, float)))
    safe, _ = _load_region(d, "safe", sys_.n, allow_obstacles=True)
    goal, _ = _load_region(d, "goal", sys_.n)
    ctr = _load_ctr(d, sys_)
    try:
        return ArasProblem(
            sys=sys_, theta=theta, delta=delta, budget=budget, safe=safe, goal=goal, ctr=ctr
        )
    except ValueError as exc:
        raise SpecError(str(exc)) from None


# ---------------------------------------------------------------------------
# Instance generators


def gen_vehicle(T=40, n_obstacles=3, seed=0, budget=None, delta=0.05):
    """Planar vehicle benchmark: double integrator with actuated disturbances.

    States (px, py, vx, vy); controls and adversary both accelerate. The
    start drifts toward the goal at constant speed, obstacles hug the flight
    corridor just outside the disturbed tube, and the safe box, goal box,
    and default budget are sized from the adversary's actual leverage so the
    default instance is solvable at any horizon.
    """
    if T < 4:
        raise ValueError("vehicle benchmark needs T >= 4")
    rng = np.random.default_rng(seed)
    A = [[1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]]
    Bm = [[0, 0], [0, 0], [1, 0], [0, 1]]
    if budget is None:
        # position leverage of a unit budget grows like T^3/3
        budget = round(4.0 / (T**3 / 3.0), 12)
    v = 0.25
    dist = v * T
    theta = [0.0, 0.0, v, 0.0]

    # worst-case position push and start-ball drift, over the whole horizon
    w = 0.0
    for s in range(T):
        w += (T - 1 - s) ** 2
    sup = (budget * w) ** 0.5
    drift = delta * (1.0 + T**2) ** 0.5
    tube = sup + drift

    m = tube + 3.0
    goal_half = tube + 0.5
    obstacles = []
    for k in range(n_obstacles):
        side = 1.0 if k % 2 == 0 else -1.0
        ox = float(rng.uniform(0.15, 0.85)) * dist
        oy = side * (tube + float(rng.uniform(0.3, 2.0)))
        wsz = 0.5
        ylo, yhi = min(oy, oy + side * wsz), max(oy, oy + side * wsz)
        A_obs = [[1, 0, 0, 0], [-1, 0, 0, 0], [0, 1, 0, 0], [0, -1, 0, 0]]
        b_obs = [ox + wsz, -(ox - wsz), yhi, -ylo]
        obstacles.append({"A": A_obs, "b": b_obs})
    # position-only bounds so the safe set has 4 + 4*n_obstacles atoms
    bounds = {
        "A": [[1, 0, 0, 0], [-1, 0, 0, 0], [0, 1, 0, 0], [0, -1, 0, 0]],
        "b": [dist + m, m, m, m],
    }
    goal_rows = {
        "A": [[1, 0, 0, 0], [-1, 0, 0, 0], [0, 1, 0, 0], [0, -1, 0, 0]],
        "b": [dist + goal_half, goal_half - dist, goal_half, goal_half],
    }
    return {
        "system": {"A": A, "B": Bm, "C": Bm, "T": T},
        "theta": theta,
        "delta": delta,
        "budget": budget,
        "safe": {"rows": bounds, "obstacles": obstacles},
        "goal": {"rows": goal_rows},
        "ctr": {"lo": [-0.2, -0.2], "hi": [0.2, 0.2]},
        "vuln_grid": {"axes": [1], "lo": [0.0], "hi": [m - 0.6], "counts": [6]},
        "unsafe": obstacles[0] if obstacles else None,
        "adv": {"lo": [-0.5, -0.5], "hi": [0.5, 0.5]},
        "ctr_budget": round(0.04 * T * budget, 12),
    }


def gen_helicopter_like(T=9, n_obstacles=6, seed=7):
    """16-state stable rotorcraft-style benchmark with 4 actuated inputs.

    A seeded stable dense system; three inputs range over [-1, 1] and the
    fourth over [0, 1]. The goal is a box around where a fixed reference
    input lands, obstacles sit outside the disturbed tube around that
    reference trajectory, and the budget is sized from the leverage so the
    default instance is solvable.
    """
    n, m = 16, 4
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((n, n))
    A = 0.9 * R / max(abs(np.linalg.eigvals(R)))
    B = rng.standard_normal((n, m)) / np.sqrt(n)

    sys_ = LTVSystem.time_invariant(A, B, B, T)
    grams = gramian_sequence(sys_)
    alphas = transition_from_zero(sys_)
    top = max(float(np.linalg.eigvalsh(W).max()) for W in grams)
    budget = round(0.09 / top, 12)
    drift_scale = max(float(np.linalg.norm(al, 2)) for al in alphas)
    delta = round(0.1 / drift_scale, 12)

    lo_u = [-1.0, -1.0, -1.0, 0.0]
    hi_u = [1.0, 1.0, 1.0, 1.0]
    u_ref = np.concatenate(
        [rng.uniform(-0.3, 0.3, size=3), rng.uniform(0.35, 0.65, size=1)]
    )
    theta = 0.1 * rng.standard_normal(n)

    traj = [theta]
    for t in range(T):
        traj.append(A @ traj[-1] + B @ u_ref)
    traj = np.array(traj)

    tube = (budget * top) ** 0.5 + delta * drift_scale  # <= 0.4 by construction
    goal_half = tube + 0.5
    center = traj[-1]
    goal_lo = [float(center[i] - goal_half) for i in range(3)]
    goal_hi = [float(center[i] + goal_half) for i in range(3)]
    goal_rows_A = []
    goal_rows_b = []
    for i in range(3):
        e = [0.0] * n
        e[i] = 1.0
        goal_rows_A.append(list(e))
        goal_rows_b.append(goal_hi[i])
        e2 = [0.0] * n
        e2[i] = -1.0
        goal_rows_A.append(e2)
        goal_rows_b.append(-goal_lo[i])

    obstacles = []
    for k in range(n_obstacles):
        coords = [k % n, (k + 1) % n, (k + 2) % n]
        i = coords[0]
        beyond = float(traj[:, i].max()) + tube + 0.4
        A_obs, b_obs = [], []
        for j, cidx in enumerate(coords):
            e = [0.0] * n
            e[cidx] = 1.0
            lo_c = beyond if j == 0 else float(traj[:, cidx].min()) - 1.0
            hi_c = lo_c + 0.6
            A_obs.append(list(e))
            b_obs.append(hi_c)
            e2 = [0.0] * n
            e2[cidx] = -1.0
            A_obs.append(e2)
            b_obs.append(-lo_c)
        obstacles.append({"A": A_obs, "b": b_obs})

    return {
        "system": {"A": A.tolist(), "B": B.tolist(), "C": B.tolist(), "T": T},
        "theta": theta.tolist(),
        "delta": delta,
        "budget": budget,
        "safe": {"obstacles": obstacles},
        "goal": {"rows": {"A": goal_rows_A, "b": goal_rows_b}},
        "ctr": {"lo": lo_u, "hi": hi_u},
    }


# ---------------------------------------------------------------------------
# Subcommands


def _write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _stats_dict(stats):
    return {"nodes": stats.nodes, "lp_calls": stats.lp_calls, "pivots": stats.pivots}


def cmd_synth(args):
    prob = load_problem(args.spec)
    out = Path(args.out)
    started = time.monotonic()
    outcome = synthesize(prob)
    elapsed = time.monotonic() - started
    payload = {
        "status": outcome.status,
        "formula_size": outcome.formula_size,
        "control": [u.tolist() for u in outcome.control.u] if outcome.control else None,
    }
    _write_json(out / "control.json", payload)
    report = dict(payload)
    report["wall_time_s"] = elapsed
    report["stats"] = _stats_dict(outcome.stats)
    if outcome.is_sat:
        check = validate_control(prob, outcome.control, seed=args.seed)
        report["validation"] = {
            "ok": check.ok,
            "runs": check.runs,
            "worst_slack": check.worst_slack,
        }
    _write_json(out / "report.json", report)
    if args.emit_smtlib:
        formula, _ = build_synthesis_formula(prob)
        smt = to_smtlib(formula, prob.sys.m * prob.sys.T, prefix="u")
        (out / "formula.smt2").write_text(smt)
    return EXIT_SOLVED if outcome.is_sat else EXIT_UNSOLVABLE


def cmd_table_synth(args):
    prob = load_problem(args.spec)
    out = Path(args.out)
    started = time.monotonic()
    result = table_synthesize(prob, eps_min=args.eps, threads=args.threads)
    elapsed = time.monotonic() - started
    payload = {
        "status": result.status,
        "witness": result.witness.tolist() if result.witness is not None else None,
        "cells_processed": result.cells_processed,
        "entries": [
            {
                "center": e.cell.center.tolist(),
                "radius": e.cell.radius,
                "control": [u.tolist() for u in e.control.u],
            }
            for e in (result.table.entries if result.table else [])
        ],
        "unresolved": [
            {"center": c.center.tolist(), "radius": c.radius} for c in result.unresolved
        ],
    }
    _write_json(out / "table.json", payload)
    report = {
        "status": result.status,
        "cells_processed": result.cells_processed,
        "entries": len(payload["entries"]),
        "unresolved": len(payload["unresolved"]),
        "wall_time_s": elapsed,
    }
    _write_json(out / "report.json", report)
    if result.status == "success":
        return EXIT_SOLVED
    if result.status == "failed":
        return EXIT_UNSOLVABLE
    return EXIT_INCONCLUSIVE


def cmd_vuln(args):
    with open(args.spec) as fh:
        raw = json.load(fh)
    prob = problem_from_dict(raw)
    grid = raw.get("vuln_grid")
    out = Path(args.out)
    started = time.monotonic()
    rows = []
    if grid is None:
        value = max_feasible_budget(prob, tol=args.tol)
        rows.append((list(prob.theta), value))
    else:
        axes = [int(a) for a in _field(grid, "axes", "vuln_grid", list)]
        lo = np.asarray(_field(grid, "lo", "vuln_grid"), dtype=float)
        hi = np.asarray(_field(grid, "hi", "vuln_grid"), dtype=float)
        counts = [int(c) for c in _field(grid, "counts", "vuln_grid", list)]
        if not (len(axes) == lo.size == hi.size == len(counts)):
            raise SpecError("'vuln_grid' axes, lo, hi, counts must have equal length")
        marks = [np.linspace(lo[i], hi[i], counts[i]) for i in range(len(axes))]
        mesh = np.stack(np.meshgrid(*marks, indexing="ij"), axis=-1).reshape(-1, len(axes))
        for coords in mesh:
            theta = np.array(prob.theta)
            theta[axes] = coords
            value = max_feasible_budget(prob.with_init(theta, prob.delta), tol=args.tol)
            rows.append((theta.tolist(), value))
    elapsed = time.monotonic() - started
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "vuln.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"theta{i}" for i in range(prob.sys.n)] + ["max_budget"])
        for theta, value in rows:
            writer.writerow([f"{v:.10g}" for v in theta] + [f"{value:.10g}"])
    _write_json(out / "report.json", {"points": len(rows), "tol": args.tol, "wall_time_s": elapsed})
    return EXIT_SOLVED


def _attack_pieces(raw, prob):
    sys_ = prob.sys
    if raw.get("unsafe"):
        regions = [raw["unsafe"]]
    else:
        sd = raw.get("safe", {})
        regions = list(sd.get("obstacles", []))
    if not regions:
        raise SpecError("attack needs an 'unsafe' region or safe-set obstacles")
    unsafe_sets = []
    for i, od in enumerate(regions):
        where = f"unsafe[{i}]"
        if "box" in od:
            lo = np.asarray(_field(od["box"], "lo", where), dtype=float)
            hi = np.asarray(_field(od["box"], "hi", where), dtype=float)
            unsafe_sets.append(PolytopicSet.box(lo, hi))
        else:
            A = np.atleast_2d(np.asarray(_field(od, "A", where), dtype=float))
            b = np.asarray(_field(od, "b", where), dtype=float).reshape(-1)
            unsafe_sets.append(PolytopicSet.from_rows(A, b))
    ad = raw.get("adv")
    if ad is None:
        raise SpecError("attack needs an 'adv' input range")
    lo = np.asarray(_field(ad, "lo", "adv"), dtype=float).reshape(-1)
    hi = np.asarray(_field(ad, "hi", "adv"), dtype=float).reshape(-1)
    if lo.shape == (sys_.l,):
        lo = np.tile(lo, sys_.T)
        hi = np.tile(hi, sys_.T)
    adv = PolytopicSet.box(lo, hi)
    if "ctr_budget" not in raw:
        raise SpecError("attack needs 'ctr_budget'")
    return unsafe_sets, adv, float(raw["ctr_budget"])


def cmd_attack(args):
    with open(args.spec) as fh:
        raw = json.load(fh)
    prob = problem_from_dict(raw)
    unsafe_sets, adv, ctr_budget = _attack_pieces(raw, prob)
    out = Path(args.out)
    started = time.monotonic()
    if args.grid:
        gd = raw.get("attack_grid")
        if gd is None:
            raise SpecError("--grid needs an 'attack_grid' block in the problem file")
        lo = np.asarray(_field(gd, "lo", "attack_grid"), dtype=float)
        hi = np.asarray(_field(gd, "hi", "attack_grid"), dtype=float)
        eps = float(_field(gd, "eps", "attack_grid", (int, float)))
        tables = [
            synthesize_attack_table(prob.sys, lo, hi, eps, us, adv, ctr_budget)
            for us in unsafe_sets
        ]
        elapsed = time.monotonic() - started
        payload = {
            "mode": "grid",
            "cells_examined": tables[0].cells_examined if tables else 0,
            "entries": [
                {
                    "unsafe_index": i,
                    "center": e.cell.center.tolist(),
                    "radius": e.cell.radius,
                    "certified_step": e.certified_step,
                    "adversary": [a.tolist() for a in e.adversary.a],
                }
                for i, tab in enumerate(tables)
                for e in tab.entries
            ],
        }
        _write_json(out / "attack.json", payload)
        _write_json(
            out / "report.json",
            {"entries": len(payload["entries"]), "wall_time_s": elapsed},
        )
        return EXIT_SOLVED if payload["entries"] else EXIT_UNSOLVABLE
    found = None
    for i, us in enumerate(unsafe_sets):
        outcome = synthesize_attack(prob.sys, prob.theta, us, adv, ctr_budget)
        if outcome.is_sat:
            found = (i, outcome)
            break
    elapsed = time.monotonic() - started
    if found is None:
        _write_json(out / "attack.json", {"mode": "point", "status": "failed"})
        _write_json(out / "report.json", {"status": "failed", "wall_time_s": elapsed})
        return EXIT_UNSOLVABLE
    idx, outcome = found
    payload = {
        "mode": "point",
        "status": "sat",
        "unsafe_index": idx,
        "certified_step": outcome.certified_step,
        "adversary": [a.tolist() for a in outcome.adversary.a],
        "formula_size": outcome.formula_size,
    }
    _write_json(out / "attack.json", payload)
    report = dict(payload)
    report["wall_time_s"] = elapsed
    report["stats"] = _stats_dict(outcome.stats)
    _write_json(out / "report.json", report)
    return EXIT_SOLVED


def cmd_simulate(args):
    prob = load_problem(args.spec)
    sys_ = prob.sys
    with open(args.control) as fh:
        cd = json.load(fh)
    if cd.get("control") is None:
        raise SpecError("control file has no control to simulate")
    control = ControlSequence(u=tuple(np.asarray(u, dtype=float) for u in cd["control"]))
    rng = np.random.default_rng(args.seed)
    N = args.samples
    adim = sys_.l * sys_.T
    dirs = rng.standard_normal((N, sys_.n))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
    X0 = prob.theta + dirs * (prob.delta * rng.random(N) ** (1.0 / sys_.n))[:, None]
    adirs = rng.standard_normal((N, adim))
    adirs /= np.maximum(np.linalg.norm(adirs, axis=1, keepdims=True), 1e-300)
    radii = np.sqrt(prob.budget) * rng.random(N) ** (1.0 / adim)
    A = adirs * radii[:, None]
    states = simulate_batch(sys_, X0, control, A)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trajectories.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "t"] + [f"x{i + 1}" for i in range(sys_.n)])
        for k in range(N):
            for t in range(sys_.T + 1):
                writer.writerow([k, t] + [f"{v:.10g}" for v in states[k, t]])
    safe_ok = all(
        bool(prob.safe.contains_batch(states[:, t], tol=1e-9).all())
        for t in range(sys_.T + 1)
    )
    goal_ok = bool(prob.goal.contains_batch(states[:, sys_.T], tol=1e-9).all())
    _write_json(
        out / "report.json",
        {"samples": N, "all_safe": safe_ok, "all_goal": goal_ok},
    )
    return EXIT_SOLVED


def cmd_gen(args):
    if args.kind == "vehicle":
        spec = gen_vehicle(T=args.T or 40, n_obstacles=args.obstacles, seed=args.seed)
    else:
        spec = gen_helicopter_like(T=args.T or 9, n_obstacles=args.obstacles, seed=args.seed)
    spec = {k: v for k, v in spec.items() if v is not None}
    _write_json(args.out, spec)
    return EXIT_SOLVED


# ---------------------------------------------------------------------------
# Entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SpecError(message)


def _build_parser():
    parser = _Parser(prog="reachavoid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--spec", required=True, help="problem JSON file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("synth", help="one control for the whole initial ball")
    common(p)
    p.add_argument("--emit-smtlib", action="store_true", help="also write formula.smt2")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("table-synth", help="lookup table over the initial ball")
    common(p)
    p.add_argument("--eps", type=float, default=None, help="refinement floor")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_table_synth)

    p = sub.add_parser("vuln", help="maximum tolerable adversary budget")
    common(p)
    p.add_argument("--tol", type=float, default=1e-4, help="budget bisection tolerance")
    p.set_defaults(func=cmd_vuln)

    p = sub.add_parser("attack", help="adversary input defeating all controls")
    common(p)
    p.add_argument("--grid", action="store_true", help="per-cell attacks over attack_grid")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("simulate", help="sample trajectories under a control")
    common(p)
    p.add_argument("--control", required=True, help="control JSON from synth")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="write a benchmark problem file")
    p.add_argument("--kind", choices=["vehicle", "helicopter"], required=True)
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--obstacles", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) == "gen" and args.obstacles is None:
            args.obstacles = 3 if args.kind == "vehicle" else 6
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CoverTooLarge, SolverStuck, BudgetCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
