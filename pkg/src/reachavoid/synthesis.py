"""Controller synthesis, lookup tables, vulnerability search, attack synthesis.

The core problem: steer a linear time-varying plant from an uncertain start
(a ball around a nominal point) into a goal polytope at the final step while
staying inside a safe polytope at every step, with one open-loop control that
must work for every adversary input sequence of bounded total squared norm.

The reduction is exact for this problem class: adversary reach and initial
uncertainty enter as ellipsoidal strengthenings of the safe and goal sets,
after which the existence of a winning control is one linear-arithmetic
satisfiability question over the stacked control vector.
"""

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import lra
from .geometry import (
    DEFAULT_CELL_CAP,
    Ball,
    CoverTooLarge,
    Ellipsoid,
    LinAtom,
    PolytopicSet,
    cover_box,
    epsilon_cover,
    gramian_sequence,
    strengthen,
    worst_case_adversary,
)
from .lra import And, Atom, Or, SolveStats, lp_feasible, lp_minimize
from .model import (
    AdversarySequence,
    ControlSequence,
    LTVSystem,
    simulate_batch,
    transition_from_zero,
)


class BudgetCapExceeded(RuntimeError):
    """Raised when the vulnerability search stays feasible past its budget cap."""


@dataclass(frozen=True)
class ArasProblem:
    """One synthesis instance: plant, initial ball, budget, and the three sets.

    safe and goal constrain the state (dimension n); ctr constrains the
    stacked control vector (dimension m*T).
    """

    sys: LTVSystem
    theta: np.ndarray
    delta: float
    budget: float
    safe: PolytopicSet
    goal: PolytopicSet
    ctr: PolytopicSet

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).reshape(-1).copy()
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "budget", float(self.budget))
        n, width = self.sys.n, self.sys.m * self.sys.T
        if theta.shape != (n,):
            raise ValueError(f"theta has dimension {theta.shape[0]}, expected {n}")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if self.budget < 0:
            raise ValueError(f"budget must be nonnegative, got {self.budget}")
        if self.safe.dim != n or self.goal.dim != n:
            raise ValueError("safe and goal must constrain the state")
        if self.ctr.dim != width:
            raise ValueError(
                f"ctr has dimension {self.ctr.dim}, expected stacked control {width}"
            )

    def with_init(self, theta, delta):
        return replace(self, theta=np.asarray(theta, dtype=float), delta=float(delta))

    def with_budget(self, budget):
        return replace(self, budget=float(budget))


@dataclass
class SynthesisOutcome:
    status: str  # "sat" | "failed" | "inconclusive"
    control: ControlSequence | None
    formula_size: int
    stats: SolveStats = field(default_factory=SolveStats)
    reason: str = ""

    @property
    def is_sat(self):
        return self.status == "sat"


@dataclass
class ValidationReport:
    ok: bool
    runs: int
    worst_slack: float


def _clause_node(clause):
    if len(clause) == 1:
        return Atom(clause[0])
    return Or(tuple(Atom(a) for a in clause))


def _polytope_slack(S: PolytopicSet, X):
    """Signed membership margin of each row of X: >= 0 inside, minimized over clauses."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    total = np.full(X.shape[0], np.inf)
    for cl in S.clauses:
        best = np.full(X.shape[0], -np.inf)
        for a in cl:
            np.maximum(best, a.rhs - X @ a.c, out=best)
        np.minimum(total, best, out=total)
    return total


def _strengthened_sets(prob: ArasProblem):
    """Safe set shrunk per step, and the goal shrunk at the horizon.

    Shrinking is by the summed supports of the adversary leverage ellipsoid
    and the propagated initial ball, so a nominal trajectory inside the
    shrunk sets guarantees every realized trajectory stays inside the
    originals, and nothing smaller does.
    """
    sys = prob.sys
    grams = gramian_sequence(sys)
    alphas = transition_from_zero(sys)
    lev = prob.delta * prob.delta
    safes, pairs = [], []
    for t in range(sys.T + 1):
        pair = (Ellipsoid(grams[t], prob.budget), Ellipsoid(alphas[t] @ alphas[t].T, lev))
        pairs.append(pair)
        safes.append(strengthen(prob.safe, pair))
    goal = strengthen(prob.goal, pairs[-1])
    return safes, goal, alphas


def _control_maps(sys: LTVSystem):
    """Padded control-to-state maps M_t (n x mT) for t = 1..T, index 0 unused."""
    width = sys.m * sys.T
    maps = [np.zeros((sys.n, width))]
    G = np.zeros((sys.n, 0))
    for t in range(sys.T):
        G = np.hstack([sys.A[t] @ G, sys.B[t]])
        M = np.zeros((sys.n, width))
        M[:, : G.shape[1]] = G
        maps.append(M)
    return maps


def _adversary_maps(sys: LTVSystem):
    """Padded adversary-to-state maps H_t (n x lT) for t = 0..T."""
    width = sys.l * sys.T
    maps = [np.zeros((sys.n, width))]
    H = np.zeros((sys.n, 0))
    for t in range(sys.T):
        H = np.hstack([sys.A[t] @ H, sys.C[t]])
        M = np.zeros((sys.n, width))
        M[:, : H.shape[1]] = H
        maps.append(M)
    return maps


def build_synthesis_formula(prob: ArasProblem):
    """Constraint formula over the stacked control, plus the time-0 check.

    The formula asserts control admissibility, the strengthened safe set at
    steps 1..T, and the strengthened goal at T, all expressed through the
    nominal trajectory from the ball center. Safety at step 0 involves no
    control, so it is returned as a precomputed boolean instead of an atom;
    the formula's atom count is therefore T*|safe| + |goal| + |ctr|.
    """
    sys = prob.sys
    safes, goal, alphas = _strengthened_sets(prob)
    maps = _control_maps(sys)
    conj = [_clause_node(cl) for cl in prob.ctr.clauses]
    for t in range(1, sys.T + 1):
        offset = alphas[t] @ prob.theta
        for cl in safes[t].clauses:
            conj.append(_clause_node(tuple(a.substitute(maps[t], offset) for a in cl)))
    offset = alphas[sys.T] @ prob.theta
    for cl in goal.clauses:
        conj.append(_clause_node(tuple(a.substitute(maps[sys.T], offset) for a in cl)))
    return And(conj), safes[0].contains(prob.theta)


def synthesize(prob: ArasProblem, max_iters=lra.DEFAULT_MAX_ITERS) -> SynthesisOutcome:
    """One winning open-loop control, or Failed when none exists.

    Sound and complete for this problem class up to the solver's LP decision
    band; the outcome is a deterministic function of the problem.
    """
    formula, start_safe = build_synthesis_formula(prob)
    size = lra.atom_count(formula)
    if not start_safe:
        return SynthesisOutcome(
            "failed", None, size, reason="no control can prevent a violation at step 0"
        )
    res = lra.solve(formula, prob.sys.m * prob.sys.T, max_iters)
    if res.is_sat:
        control = ControlSequence.from_stacked(res.point, prob.sys.m)
        return SynthesisOutcome("sat", control, size, res.stats)
    return SynthesisOutcome("failed", None, size, res.stats)


def _ball_samples(rng, center, radius, count, dim, boundary=False):
    dirs = rng.standard_normal((count, dim))
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    dirs /= norms
    if boundary:
        radii = np.full(count, radius)
    else:
        radii = radius * rng.random(count) ** (1.0 / dim)
    return center + dirs * radii[:, None]


def validate_control(
    prob: ArasProblem, control: ControlSequence, n_samples=200, seed=0, tol=1e-6
) -> ValidationReport:
    """Monte Carlo plus targeted worst-case check of a synthesized control.

    Simulates random and boundary initial points against random, boundary,
    and per-constraint worst-case adversaries, and requires safety at every
    step, goal membership at the end, and control admissibility, all with
    slack tolerance tol.
    """
    sys = prob.sys
    rng = np.random.default_rng(seed)
    adim = sys.l * sys.T
    root = math.sqrt(prob.budget)

    X0 = [
        _ball_samples(rng, prob.theta, prob.delta, n_samples, sys.n),
        _ball_samples(rng, prob.theta, prob.delta, n_samples, sys.n, boundary=True),
    ]
    A = [
        _ball_samples(rng, np.zeros(adim), root, n_samples, adim),
        _ball_samples(rng, np.zeros(adim), root, n_samples, adim, boundary=True),
    ]

    # One targeted run per (step, constraint direction): the adversary that
    # pushes hardest along the atom normal, paired with the matching worst
    # initial offset.
    alphas = transition_from_zero(sys)
    tx, ta = [], []
    atoms_by_t = [(t, a) for t in range(1, sys.T + 1) for cl in prob.safe.clauses for a in cl]
    atoms_by_t += [(sys.T, a) for cl in prob.goal.clauses for a in cl]
    for t, atom in atoms_by_t:
        ta.append(worst_case_adversary(sys, prob.budget, t, atom.c).stacked())
        pull = alphas[t].T @ atom.c
        norm = np.linalg.norm(pull)
        offset = prob.delta * pull / norm if norm > 0 else np.zeros(sys.n)
        tx.append(prob.theta + offset)
    if tx:
        X0.append(np.array(tx))
        A.append(np.array(ta))

    X0 = np.vstack(X0)
    A = np.vstack(A)
    states = simulate_batch(sys, X0, control, A)

    worst = float(_polytope_slack(prob.ctr, control.stacked())[0])
    for t in range(sys.T + 1):
        worst = min(worst, float(_polytope_slack(prob.safe, states[:, t]).min()))
    worst = min(worst, float(_polytope_slack(prob.goal, states[:, sys.T]).min()))
    return ValidationReport(ok=worst >= -tol, runs=X0.shape[0], worst_slack=worst)


@dataclass(frozen=True)
class GeneralizedProblem:
    """Synthesis instance with convex initial, adversary, and control sets.

    init is over the state; adv and ctr are over stacked input vectors.
    Each may be a Ball or a bounded conjunctive PolytopicSet. Solved by
    finite eps-covers, so Sat answers are sound for every point of the sets
    while Unsat answers are only Inconclusive.
    """

    sys: LTVSystem
    init: object
    adv: object
    ctr: object
    safe: PolytopicSet
    goal: PolytopicSet
    eps: float
    cell_cap: int = DEFAULT_CELL_CAP

    def __post_init__(self):
        n, mw, lw = self.sys.n, self.sys.m * self.sys.T, self.sys.l * self.sys.T
        for name, obj, dim in (("init", self.init, n), ("adv", self.adv, lw), ("ctr", self.ctr, mw)):
            if not isinstance(obj, (Ball, PolytopicSet)):
                raise TypeError(f"{name} must be a Ball or PolytopicSet")
            if obj.dim != dim:
                raise ValueError(f"{name} has dimension {obj.dim}, expected {dim}")
        if self.safe.dim != n or self.goal.dim != n:
            raise ValueError("safe and goal must constrain the state")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


def cover_polytope(S: PolytopicSet, eps: float, cap: int = DEFAULT_CELL_CAP):
    """eps-ball cover of a bounded conjunctive polytope, centers inside it.

    Scans an axis grid of the bounding box with cell diameter eps and keeps
    one interior point per nonempty cell, so every point of S is within eps
    of some kept center.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    for cl in S.clauses:
        if len(cl) != 1:
            raise ValueError("cover requires a conjunctive polytope (single-atom clauses)")
    atoms = [cl[0] for cl in S.clauses]
    n = S.dim
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        low = lp_minimize(atoms, e, n)
        if low is None:
            return []
        high = lp_minimize(atoms, -e, n)
        lo[i], hi[i] = low[1], -high[1]
    pitch = eps / math.sqrt(n)
    counts = np.maximum(np.ceil((hi - lo) / pitch).astype(int), 1)
    total = int(np.prod(counts.astype(object)))
    if total > cap:
        raise CoverTooLarge(f"cover would scan {total} cells (cap {cap})")
    widths = (hi - lo) / counts
    axes = [np.arange(counts[i]) for i in range(n)]
    centers = []
    for idx in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n):
        cell_lo = lo + idx * widths
        cell_hi = cell_lo + widths
        box = PolytopicSet.box(cell_lo, cell_hi)
        point = lp_feasible(atoms + [cl[0] for cl in box.clauses], n)
        if point is not None:
            centers.append(point)
    return [Ball(c, eps) for c in centers]


def _cover_convex(S, eps, cap):
    if isinstance(S, Ball):
        return epsilon_cover(S, eps, cap)
    return cover_polytope(S, eps, cap)


def _inner_polytope(C):
    """Polytopic subset of a convex control set; balls become inscribed boxes."""
    if isinstance(C, PolytopicSet):
        return C
    half = C.radius / math.sqrt(C.dim)
    return PolytopicSet.box(C.center - half, C.center + half)


def synthesize_generalized(gp: GeneralizedProblem, max_iters=lra.DEFAULT_MAX_ITERS) -> SynthesisOutcome:
    """Sound one-sided synthesis for convex initial, adversary, and control sets.

    Covers the initial and adversary sets with eps-balls, strengthens the
    safe and goal sets by the leverage of the eps-sized residuals, and
    requires the constraints at every cover-center pair. A Sat control is
    valid for the whole sets; anything else is Inconclusive because the
    covers and the inner control polytope are conservative.
    """
    sys = gp.sys
    width = sys.m * sys.T
    thetas = _cover_convex(gp.init, gp.eps, gp.cell_cap)
    if not thetas:
        raise ValueError("initial set is empty")
    advs = _cover_convex(gp.adv, gp.eps, gp.cell_cap)
    if not advs:
        raise ValueError("adversary set is empty")
    ctr_poly = _inner_polytope(gp.ctr)

    grams = gramian_sequence(sys)
    alphas = transition_from_zero(sys)
    lev = gp.eps * gp.eps
    pairs = [
        (Ellipsoid(grams[t], lev), Ellipsoid(alphas[t] @ alphas[t].T, lev))
        for t in range(sys.T + 1)
    ]
    safes = [strengthen(gp.safe, pairs[t]) for t in range(sys.T + 1)]
    goal = strengthen(gp.goal, pairs[-1])
    cmaps = _control_maps(sys)
    amaps = _adversary_maps(sys)

    size_guess = len(thetas) * len(advs) * (sys.T * gp.safe.atom_count + gp.goal.atom_count)
    if size_guess > 10 * max(gp.cell_cap, 1):
        raise CoverTooLarge(f"product formula would hold {size_guess} atoms")

    for th in thetas:
        if not safes[0].contains(th.center):
            return SynthesisOutcome(
                "inconclusive",
                None,
                0,
                reason="a cover center is not provably safe at step 0",
            )

    conj = [_clause_node(cl) for cl in ctr_poly.clauses]
    for th in thetas:
        for av in advs:
            for t in range(1, sys.T + 1):
                offset = alphas[t] @ th.center + amaps[t] @ av.center
                for cl in safes[t].clauses:
                    conj.append(_clause_node(tuple(a.substitute(cmaps[t], offset) for a in cl)))
            offset = alphas[sys.T] @ th.center + amaps[sys.T] @ av.center
            for cl in goal.clauses:
                conj.append(_clause_node(tuple(a.substitute(cmaps[sys.T], offset) for a in cl)))
    formula = And(conj)
    size = lra.atom_count(formula)
    res = lra.solve(formula, width, max_iters)
    if res.is_sat:
        control = ControlSequence.from_stacked(res.point, sys.m)
        return SynthesisOutcome("sat", control, size, res.stats)
    return SynthesisOutcome(
        "inconclusive", None, size, res.stats, reason="cover-based relaxation unsatisfiable"
    )


@dataclass
class TableEntry:
    cell: Ball
    control: ControlSequence


@dataclass
class LookupTable:
    """Cell-indexed controls: the entry's control wins from anywhere in its cell."""

    entries: list

    def control_for(self, x0, tol=1e-9):
        for entry in self.entries:
            if entry.cell.contains(x0, tol):
                return entry
        return None

    def __len__(self):
        return len(self.entries)


@dataclass
class TableResult:
    status: str  # "success" | "failed" | "inconclusive"
    table: LookupTable | None
    witness: np.ndarray | None
    unresolved: list
    cells_processed: int


def table_synthesize(
    prob: ArasProblem,
    eps_min=None,
    threads=1,
    cell_cap=DEFAULT_CELL_CAP,
    max_iters=lra.DEFAULT_MAX_ITERS,
) -> TableResult:
    """Adaptive cell decomposition of the initial ball into winning controls.

    Starts from one cell the size of the initial ball's diameter; a cell
    either gets a control valid on all of it, is split in half when its
    center alone is controllable, or condemns the whole problem when even
    the center is not. Cells reaching eps_min unresolved leave the result
    Inconclusive. Processing is deterministic breadth-first; threads > 1
    solves each wave in parallel with identical results.
    """
    init = Ball(prob.theta, prob.delta)
    if eps_min is None:
        eps_min = init.diameter / 2**10
    if init.radius > 0 and eps_min <= 0:
        raise ValueError("eps_min must be positive for a full-dimensional initial ball")

    def examine(cell):
        whole = synthesize(prob.with_init(cell.center, cell.radius), max_iters)
        if whole.is_sat:
            return "sat", whole.control
        if cell.radius == 0.0:
            return "failed", None
        center = synthesize(prob.with_init(cell.center, 0.0), max_iters)
        if not center.is_sat:
            return "failed", None
        return "refine", None

    queue = deque([Ball(prob.theta, init.diameter)] if init.radius > 0 else [init])
    entries = []
    unresolved = []
    processed = 0
    while queue:
        wave = list(queue)
        queue.clear()
        if processed + len(wave) > cell_cap:
            raise CoverTooLarge(f"table would process more than {cell_cap} cells")
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(examine, wave))
        else:
            results = [examine(c) for c in wave]
        for cell, (kind, control) in zip(wave, results):
            processed += 1
            if kind == "sat":
                entries.append(TableEntry(cell, control))
            elif kind == "failed":
                return TableResult("failed", None, cell.center, [], processed)
            else:
                half = cell.radius / 2.0
                if half < eps_min:
                    unresolved.append(cell)
                    continue
                for child in epsilon_cover(Ball(cell.center, cell.radius), half):
                    gap = np.linalg.norm(child.center - init.center) - init.radius
                    if gap > half:
                        continue
                    queue.append(Ball(init.project(child.center), half))
    status = "inconclusive" if unresolved else "success"
    return TableResult(status, LookupTable(entries), None, unresolved, processed)


def max_feasible_budget(
    prob: ArasProblem, tol=1e-4, cap=2.0**60, max_iters=lra.DEFAULT_MAX_ITERS
) -> float:
    """Largest adversary budget (within tol) the instance can still absorb.

    Feasibility is monotone decreasing in the budget, so doubling finds an
    upper bracket and bisection closes it: the returned value is feasible
    and the value tol above it is not. Returns 0 when even a powerless
    adversary defeats the instance; raises BudgetCapExceeded past cap.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    def feasible(b):
        return synthesize(prob.with_budget(b), max_iters).is_sat

    if not feasible(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while feasible(hi):
        lo = hi
        hi *= 2.0
        if hi > cap:
            raise BudgetCapExceeded(f"still feasible at budget {lo}; cap {cap} exceeded")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class AttackOutcome:
    status: str  # "sat" | "failed"
    adversary: AdversarySequence | None
    certified_step: int | None
    formula_size: int
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def is_sat(self):
        return self.status == "sat"


def _ctr_strengthened_unsafe(sys, unsafe, ctr_budget, extra_eps=0.0):
    """Unsafe set shrunk by everything the defense can muster, per step t < T.

    Shrinks by the controller leverage ellipsoid (energy budget ctr_budget)
    and, when extra_eps > 0, by the propagated image of an extra_eps start
    ball so one attack covers a whole cell of starting states.
    """
    grams = gramian_sequence(sys, sys.B)
    alphas = transition_from_zero(sys)
    out = []
    for t in range(sys.T):
        parts = [Ellipsoid(grams[t], ctr_budget)]
        if extra_eps > 0:
            parts.append(Ellipsoid(alphas[t] @ alphas[t].T, extra_eps * extra_eps))
        out.append(strengthen(unsafe, parts))
    return out


def _attack_solve(sys, x0, unsafe_steps, adv, max_iters):
    """Shared core: adversary CNF and one OR over certifiable violation steps."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    conj = [_clause_node(cl) for cl in adv.clauses]
    width = sys.l * sys.T

    if unsafe_steps[0].contains(x0):
        res = lra.solve(And(conj), width, max_iters)
        if res.is_sat:
            return "sat", res.point, 0, lra.atom_count(And(conj)), res.stats
        return "failed", None, None, lra.atom_count(And(conj)), res.stats

    alphas = transition_from_zero(sys)
    amaps = _adversary_maps(sys)
    branches = []
    for t in range(1, sys.T):
        offset = alphas[t] @ x0
        nodes = [
            _clause_node(tuple(a.substitute(amaps[t], offset) for a in cl))
            for cl in unsafe_steps[t].clauses
        ]
        branches.append((t, And(nodes)))
    if not branches:
        return "failed", None, None, lra.atom_count(And(conj)), SolveStats()
    formula = And(conj + [Or(tuple(node for _, node in branches))])
    res = lra.solve(formula, width, max_iters)
    size = lra.atom_count(formula)
    if not res.is_sat:
        return "failed", None, None, size, res.stats
    step = next(t for t, node in branches if lra.evaluate(node, res.point))
    return "sat", res.point, step, size, res.stats


def synthesize_attack(
    sys: LTVSystem,
    x0,
    unsafe: PolytopicSet,
    adv: PolytopicSet,
    ctr_budget: float,
    max_iters=lra.DEFAULT_MAX_ITERS,
) -> AttackOutcome:
    """Open-loop adversary sequence that defeats every energy-bounded control.

    Finds a in the polytopic adversary set and a step t < T such that the
    state at t lies in unsafe for every control with total squared norm at
    most ctr_budget, no matter how the control reacts. Sound: Sat outcomes
    carry the certified step; Failed makes no claim either way.
    """
    if unsafe.dim != sys.n:
        raise ValueError("unsafe must constrain the state")
    if adv.dim != sys.l * sys.T:
        raise ValueError(
            f"adv has dimension {adv.dim}, expected stacked adversary {sys.l * sys.T}"
        )
    if ctr_budget < 0:
        raise ValueError(f"ctr_budget must be nonnegative, got {ctr_budget}")
    unsafe_steps = _ctr_strengthened_unsafe(sys, unsafe, ctr_budget)
    status, point, step, size, stats = _attack_solve(sys, x0, unsafe_steps, adv, max_iters)
    if status != "sat":
        return AttackOutcome("failed", None, None, size, stats)
    return AttackOutcome("sat", AdversarySequence.from_stacked(point, sys.l), step, size, stats)


@dataclass
class AttackEntry:
    cell: Ball
    adversary: AdversarySequence
    certified_step: int


@dataclass
class AttackTable:
    """Grid-indexed attacks: each entry defeats every start in its cell."""

    entries: list
    cells_examined: int

    def attack_for(self, x0, tol=1e-9):
        for entry in self.entries:
            if entry.cell.contains(x0, tol):
                return entry
        return None

    def __len__(self):
        return len(self.entries)


def synthesize_attack_table(
    sys: LTVSystem,
    lo,
    hi,
    eps: float,
    unsafe: PolytopicSet,
    adv: PolytopicSet,
    ctr_budget: float,
    cell_cap=DEFAULT_CELL_CAP,
    max_iters=lra.DEFAULT_MAX_ITERS,
) -> AttackTable:
    """Per-cell attacks over a box of starting states, sharing strengthenings.

    Covers [lo, hi] with an eps grid and solves one attack per cell against
    the unsafe set additionally shrunk by the cell radius, so a recorded
    attack is valid for every start in its cell. Cells without a certified
    attack are simply absent.
    """
    cells = cover_box(lo, hi, eps, cell_cap)
    unsafe_steps = _ctr_strengthened_unsafe(sys, unsafe, ctr_budget, extra_eps=eps)
    entries = []
    for cell in cells:
        status, point, step, _, _ = _attack_solve(sys, cell.center, unsafe_steps, adv, max_iters)
        if status == "sat":
            entries.append(
                AttackEntry(cell, AdversarySequence.from_stacked(point, sys.l), step)
            )
    return AttackTable(entries, len(cells))


def validate_attack(
    sys: LTVSystem,
    x0,
    adversary: AdversarySequence,
    unsafe: PolytopicSet,
    ctr_budget: float,
    step: int,
    n_samples=1000,
    seed=0,
    tol=1e-6,
) -> ValidationReport:
    """Samples energy-bounded controls and checks the certified violation.

    Half the controls are drawn inside the energy ball, half on its
    boundary; the attack passes when the state at the certified step stays
    in unsafe for every sampled control, with slack tolerance tol.
    """
    rng = np.random.default_rng(seed)
    width = sys.m * sys.T
    root = math.sqrt(ctr_budget)
    half = n_samples // 2
    U = np.vstack(
        [
            _ball_samples(rng, np.zeros(width), root, n_samples - half, width),
            _ball_samples(rng, np.zeros(width), root, half, width, boundary=True),
        ]
    )
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    X0 = np.broadcast_to(x0, (n_samples, sys.n))
    A = np.broadcast_to(adversary.stacked(), (n_samples, sys.l * sys.T))
    states = simulate_batch(sys, X0, U, A)
    worst = float(_polytope_slack(unsafe, states[:, step]).min())
    return ValidationReport(ok=worst >= -tol, runs=n_samples, worst_slack=worst)
