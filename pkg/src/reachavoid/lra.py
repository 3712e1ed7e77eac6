"""Self-contained satisfiability solver for quantifier-free linear real arithmetic.

Formulas are And/Or trees over half-space atoms c'x <= rhs. Satisfiability
is decided by depth-first search over disjunction branches with a dense
two-phase simplex as the theory check, backjumping over branch levels that
a verified infeasible row subset does not involve. The simplex maximizes
the minimum constraint margin (capped at 1) over unit-normalized rows, so
satisfying points land strictly inside their region whenever the region
has volume.

Decision band: a Sat point satisfies every chosen atom with slack >= -1e-7
after row normalization, and Unsat means no point satisfies all constraints
of any branch with slack >= +1e-7. Results are deterministic functions of
the input formula.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import LinAtom

DEFAULT_MAX_ITERS = 10**6

# Reduced-cost / pivot-element tolerances for the simplex.
_RC_TOL = 1e-9
_PIV_TOL = 1e-9
# Dantzig pivoting switches to Bland's rule after this many pivots without
# objective improvement, which restores the termination guarantee.
_STALL_LIMIT = 40


class SolverStuck(Exception):
    """Raised when the combined node/pivot budget is exhausted."""


class Unbounded(Exception):
    """Raised when a linear program has an improving ray."""


@dataclass(frozen=True)
class Atom:
    """Leaf node wrapping a half-space constraint."""

    atom: LinAtom


@dataclass(frozen=True)
class And:
    children: tuple

    def __init__(self, children):
        object.__setattr__(self, "children", tuple(children))


@dataclass(frozen=True)
class Or:
    children: tuple

    def __init__(self, children):
        object.__setattr__(self, "children", tuple(children))


@dataclass
class SolveStats:
    nodes: int = 0
    lp_calls: int = 0
    pivots: int = 0


@dataclass
class SolveResult:
    status: str
    point: np.ndarray | None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def is_sat(self):
        return self.status == "sat"


def evaluate(formula, x, slack=1e-9) -> bool:
    """Truth value of the formula at x, with per-atom slack."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if isinstance(formula, Atom):
        return float(formula.atom.c @ x) <= formula.atom.rhs + slack
    if isinstance(formula, And):
        return all(evaluate(ch, x, slack) for ch in formula.children)
    if isinstance(formula, Or):
        return any(evaluate(ch, x, slack) for ch in formula.children)
    raise TypeError(f"not a formula node: {type(formula).__name__}")


def _flatten(node, atoms, ors):
    """Split a node into conjunct atoms and deferred Or nodes, preserving order."""
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Atom):
            atoms.append(cur.atom)
        elif isinstance(cur, And):
            stack.extend(reversed(cur.children))
        elif isinstance(cur, Or):
            ors.append(cur)
        else:
            raise TypeError(f"not a formula node: {type(cur).__name__}")


def _split_atoms(raw):
    """Separate zero-direction atoms (constants) from real rows.

    Returns (rows, const_false): zero rows with rhs >= 0 are dropped, one
    with rhs < 0 makes the conjunction false outright.
    """
    rows, const_false = [], False
    for a in raw:
        if np.any(a.c):
            rows.append(a)
        elif a.rhs < 0:
            const_false = True
    return rows, const_false


def _phase(A, b, basis, cost, stats, max_iters, blocked=None):
    """Dense full-tableau simplex: min cost'z s.t. Az = b, z >= 0.

    Mutates A, b, basis in place. `blocked` columns never enter the basis.
    Returns the objective value; raises SolverStuck on budget exhaustion or
    a numerically unbounded column.
    """
    reduced = np.empty(A.shape[1])
    best = np.inf
    stall = 0
    bland = False
    while True:
        np.matmul(cost[basis], A, out=reduced)
        np.subtract(cost, reduced, out=reduced)
        if blocked is not None:
            reduced[blocked] = 0.0
        if bland:
            neg = np.nonzero(reduced < -_RC_TOL)[0]
            if neg.size == 0:
                return float(cost[basis] @ b)
            enter = int(neg[0])
        else:
            enter = int(np.argmin(reduced))
            if reduced[enter] >= -_RC_TOL:
                return float(cost[basis] @ b)
        col = A[:, enter]
        pos = np.nonzero(col > _PIV_TOL)[0]
        if pos.size == 0:
            raise Unbounded(f"improving column {enter} has no blocking row")
        theta = b[pos] / col[pos]
        tmin = theta.min()
        ties = pos[theta <= tmin + 1e-12]
        leave = int(ties[np.argmin(basis[ties])])
        piv = col[leave]
        A[leave] /= piv
        b[leave] /= piv
        factor = col.copy()
        factor[leave] = 0.0
        A -= np.outer(factor, A[leave])
        b -= factor * b[leave]
        np.maximum(b, 0.0, out=b)
        basis[leave] = enter
        stats.pivots += 1
        if stats.pivots + stats.nodes > max_iters:
            raise SolverStuck(f"pivot/node budget {max_iters} exhausted")
        obj = float(cost[basis] @ b)
        if obj < best - 1e-12:
            best = obj
            stall = 0
        else:
            stall += 1
            if stall > _STALL_LIMIT:
                bland = True


def _margin_lp(C, d, stats, max_iters):
    """max t s.t. Cx + t <= d, t <= 1, rows of C unit-normalized by the caller.

    Returns (x, t, y). The system is always feasible in (x, t), so t's sign
    decides feasibility of Cx <= d up to the solver band. y holds the final
    dual weights of the rows; when t < 0 its support hints at a jointly
    infeasible row subset (a Farkas certificate, up to floating error).
    """
    m, n = C.shape
    rows = m + 1
    ncols = 2 * n + 2 + rows
    A = np.zeros((rows, ncols))
    b = np.empty(rows)
    A[:m, :n] = C
    A[:m, n:2 * n] = -C
    A[:m, 2 * n] = 1.0
    A[:m, 2 * n + 1] = -1.0
    b[:m] = d
    A[m, 2 * n] = 1.0
    A[m, 2 * n + 1] = -1.0
    b[m] = 1.0
    A[np.arange(rows), 2 * n + 2 + np.arange(rows)] = 1.0

    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    nart = int(neg.sum())
    basis = 2 * n + 2 + np.arange(rows)
    if nart:
        art = np.zeros((rows, nart))
        where = np.nonzero(neg)[0]
        art[where, np.arange(nart)] = 1.0
        A = np.hstack([A, art])
        basis[where] = ncols + np.arange(nart)
        cost1 = np.zeros(A.shape[1])
        cost1[ncols:] = 1.0
        resid = _phase(A, b, basis, cost1, stats, max_iters)
        if resid > 1e-7:
            raise SolverStuck(f"phase-1 residual {resid} on a feasible margin system")
    cost2 = np.zeros(A.shape[1])
    cost2[2 * n] = -1.0
    cost2[2 * n + 1] = 1.0
    blocked = np.arange(ncols, A.shape[1]) if nart else None
    obj = _phase(A, b, basis, cost2, stats, max_iters, blocked=blocked)
    z = np.zeros(A.shape[1])
    z[basis] = b
    x = z[:n] - z[n:2 * n]
    red = cost2 - cost2[basis] @ A
    y = np.abs(red[2 * n + 2:2 * n + 2 + m])
    return x, -obj, y


def _margin_point(rows, stats, max_iters):
    """(point, margin, duals) for a nonempty list of nonzero-direction rows."""
    C = np.array([a.c for a in rows], dtype=float)
    d = np.array([a.rhs for a in rows], dtype=float)
    norms = np.linalg.norm(C, axis=1)
    C /= norms[:, None]
    d /= norms
    stats.lp_calls += 1
    return _margin_lp(C, d, stats, max_iters)


def _verified_conflict(rows, y, stats, max_iters):
    """Indices of a jointly infeasible proper subset of rows, or None.

    The dual support is only a hint: the subset must fail the same margin
    test on its own before it is allowed to prune the search.
    """
    support = np.nonzero(y > 1e-11)[0]
    if 0 < support.size < len(rows):
        sub = [rows[int(i)] for i in support]
        if _margin_point(sub, stats, max_iters)[1] < 0.0:
            return support
    return None


def lp_feasible(atoms, dim, stats=None, max_iters=DEFAULT_MAX_ITERS):
    """Point satisfying every atom, or None if the conjunction is infeasible.

    The returned point maximizes the minimum row margin (capped at 1), so
    it sits as deep inside the region as the cap allows.
    """
    if stats is None:
        stats = SolveStats()
    rows, const_false = _split_atoms(atoms)
    if const_false:
        return None
    if not rows:
        return np.zeros(dim)
    x, t, _ = _margin_point(rows, stats, max_iters)
    if t < 0.0:
        return None
    return x


def lp_minimize(atoms, obj, dim, stats=None, max_iters=DEFAULT_MAX_ITERS):
    """min obj'x subject to the atoms; returns (x, value) or None if infeasible.

    Raises Unbounded when the objective has no finite minimum over the region.
    """
    if stats is None:
        stats = SolveStats()
    obj = np.asarray(obj, dtype=float).reshape(-1)
    rows, const_false = _split_atoms(atoms)
    if const_false:
        return None
    m = len(rows)
    if m == 0:
        if np.any(obj):
            raise Unbounded("no constraints bound the objective")
        return np.zeros(dim), 0.0
    C = np.array([a.c for a in rows], dtype=float)
    d = np.array([a.rhs for a in rows], dtype=float)
    norms = np.linalg.norm(C, axis=1)
    C /= norms[:, None]
    d /= norms
    stats.lp_calls += 1

    ncols = 2 * dim + m
    A = np.zeros((m, ncols))
    b = d.copy()
    A[:, :dim] = C
    A[:, dim:2 * dim] = -C
    A[np.arange(m), 2 * dim + np.arange(m)] = 1.0
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    nart = int(neg.sum())
    basis = 2 * dim + np.arange(m)
    if nart:
        art = np.zeros((m, nart))
        where = np.nonzero(neg)[0]
        art[where, np.arange(nart)] = 1.0
        A = np.hstack([A, art])
        basis[where] = ncols + np.arange(nart)
        cost1 = np.zeros(A.shape[1])
        cost1[ncols:] = 1.0
        resid = _phase(A, b, basis, cost1, stats, max_iters)
        if resid > 1e-7:
            return None
    cost2 = np.zeros(A.shape[1])
    cost2[:dim] = obj
    cost2[dim:2 * dim] = -obj
    blocked = np.arange(ncols, A.shape[1]) if nart else None
    value = _phase(A, b, basis, cost2, stats, max_iters, blocked=blocked)
    z = np.zeros(A.shape[1])
    z[basis] = b
    return z[:dim] - z[dim:2 * dim], float(value)


class _Frame:
    """One branching level: committed row count, the Or under trial, the rest."""

    __slots__ = ("base", "rest", "items", "order", "k", "point", "conflicts", "structural")

    def __init__(self, base, rest, or_node, point):
        self.base = base
        self.rest = rest
        self.items = []
        for child in or_node.children:
            catoms, cors = [], []
            _flatten(child, catoms, cors)
            rows, const_false = _split_atoms(catoms)
            self.items.append((rows, cors, const_false))
        sat_first, other = [], []
        for i, (rows, _, const_false) in enumerate(self.items):
            if not const_false and all(float(a.c @ point) <= a.rhs for a in rows):
                sat_first.append(i)
            else:
                other.append(i)
        self.order = sat_first + other
        self.k = 0
        self.point = point
        # depths of earlier frames implicated in this frame's failed children
        self.conflicts = set()
        # whether the child currently under trial added its own Or nodes
        self.structural = False


def solve(formula, dim, max_iters=DEFAULT_MAX_ITERS) -> SolveResult:
    """Decide satisfiability over R^dim; Sat results carry a model point.

    Branches disjunctions depth-first, smallest first, trying children the
    current model already satisfies before paying for an LP. Infeasible
    conjunctions yield a verified conflict subset of rows, and exhausted
    branch levels backjump to the deepest level the conflict involves,
    skipping siblings that cannot cure it. Exhausting the node/pivot budget
    raises SolverStuck rather than guessing.
    """
    stats = SolveStats()
    raw, ors = [], []
    _flatten(formula, raw, ors)
    rows, const_false = _split_atoms(raw)
    if const_false:
        return SolveResult("unsat", None, stats)
    point = lp_feasible(rows, dim, stats, max_iters)
    if point is None:
        return SolveResult("unsat", None, stats)
    pending = sorted(ors, key=lambda o: len(o.children))
    if not pending:
        return SolveResult("sat", point, stats)

    depths = [-1] * len(rows)
    frames = [_Frame(len(rows), pending[1:], pending[0], point)]
    while frames:
        f = frames[-1]
        depth = len(frames) - 1
        if f.k >= len(f.order):
            # every child failed; hand the blame to the deepest involved level
            conflict = f.conflicts
            frames.pop()
            while frames:
                g = frames[-1]
                gdepth = len(frames) - 1
                if gdepth in conflict or g.structural:
                    g.conflicts |= conflict - {gdepth}
                    break
                # g's other children cannot cure a conflict that ignores g
                frames.pop()
            continue
        child_rows, child_ors, const_false = f.items[f.order[f.k]]
        f.k += 1
        f.structural = bool(child_ors)
        stats.nodes += 1
        if stats.nodes + stats.pivots > max_iters:
            raise SolverStuck(f"pivot/node budget {max_iters} exhausted")
        if const_false:
            continue
        del rows[f.base:]
        del depths[f.base:]
        rows.extend(child_rows)
        depths.extend([depth] * len(child_rows))
        if all(float(a.c @ f.point) <= a.rhs for a in child_rows):
            pt = f.point
        else:
            pt, t, duals = _margin_point(rows, stats, max_iters)
            if t < 0.0:
                support = _verified_conflict(rows, duals, stats, max_iters)
                if support is not None:
                    f.conflicts |= {depths[int(i)] for i in support} - {-1, depth}
                else:
                    f.conflicts |= set(range(depth))
                continue
        new_pending = sorted(f.rest + child_ors, key=lambda o: len(o.children))
        if not new_pending:
            return SolveResult("sat", pt, stats)
        frames.append(_Frame(len(rows), new_pending[1:], new_pending[0], pt))
    return SolveResult("unsat", None, stats)


def _smt_num(v):
    """Exact SMT-LIB Real literal for a float."""
    p, q = float(v).as_integer_ratio()
    mag = f"{abs(p)}.0" if q == 1 else f"(/ {abs(p)}.0 {q}.0)"
    return f"(- {mag})" if p < 0 else mag


def _smt_expr(node, names):
    if isinstance(node, Atom):
        terms = [f"(* {_smt_num(c)} {names[i]})" for i, c in enumerate(node.atom.c) if c != 0.0]
        if not terms:
            lhs = "0.0"
        elif len(terms) == 1:
            lhs = terms[0]
        else:
            lhs = f"(+ {' '.join(terms)})"
        return f"(<= {lhs} {_smt_num(node.atom.rhs)})"
    if isinstance(node, And):
        if not node.children:
            return "true"
        return f"(and {' '.join(_smt_expr(ch, names) for ch in node.children)})"
    if isinstance(node, Or):
        if not node.children:
            return "false"
        return f"(or {' '.join(_smt_expr(ch, names) for ch in node.children)})"
    raise TypeError(f"not a formula node: {type(node).__name__}")


def to_smtlib(formula, dim, prefix="x") -> str:
    """QF_LRA script with one Real per coordinate and a single assert."""
    names = [f"{prefix}{i}" for i in range(dim)]
    lines = ["(set-logic QF_LRA)"]
    lines += [f"(declare-const {nm} Real)" for nm in names]
    lines.append(f"(assert {_smt_expr(formula, names)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def atom_count(formula) -> int:
    """Number of atom leaves in the tree."""
    if isinstance(formula, Atom):
        return 1
    if isinstance(formula, (And, Or)):
        return sum(atom_count(ch) for ch in formula.children)
    raise TypeError(f"not a formula node: {type(formula).__name__}")
