"""Ellipsoids, polytopic CNF sets, support functions, strengthening, covers.

An Ellipsoid is the center-free quadratic-form set {x : x' W^+ x <= level}
restricted to the column range of its shape matrix W, so rank-deficient
shapes (flat ellipsoids, including the single point {0}) are first-class.
A PolytopicSet is a conjunction of clauses, each clause a disjunction of
linear atoms c'x <= rhs.

Everything here is an immutable value; all operations are pure functions.
"""

from dataclasses import dataclass

import numpy as np

from .model import AdversarySequence, LTVSystem, transition_from_zero

# Relative cutoff below which eigenvalues are treated as exactly zero when
# forming pseudo-inverses (applies to Gramians and transition products alike).
PINV_RCOND = 1e-10

# Default slack for polytopic membership tests.
CONTAINS_SLACK = 1e-9

DEFAULT_CELL_CAP = 100_000


class CoverTooLarge(Exception):
    """Raised when a requested cover would exceed the cell cap."""


class Ellipsoid:
    """Quadratic-form set {x : x' shape^+ x <= level, x in range(shape)}."""

    def __init__(self, shape, level):
        shape = np.asarray(shape, dtype=float)
        if shape.ndim != 2 or shape.shape[0] != shape.shape[1]:
            raise ValueError(f"shape matrix must be square, got {shape.shape}")
        level = float(level)
        if level < 0:
            raise ValueError(f"level must be nonnegative, got {level}")
        scale = max(1.0, float(np.abs(shape).max(initial=0.0)))
        if np.abs(shape - shape.T).max(initial=0.0) > 1e-10 * scale:
            raise ValueError("shape matrix is not symmetric")
        sym = 0.5 * (shape + shape.T)
        evals, evecs = np.linalg.eigh(sym)
        top = float(evals.max(initial=0.0))
        if evals.min(initial=0.0) < -1e-10 * max(1.0, top):
            raise ValueError(f"shape matrix has negative eigenvalue {evals.min()}")
        evals = np.clip(evals, 0.0, None)
        evals[evals < PINV_RCOND * max(top, 1e-300)] = 0.0

        self.shape = sym
        self.shape.setflags(write=False)
        self.level = level
        self.dim = sym.shape[0]
        self._evals = evals
        self._evecs = evecs
        self._mask = evals > 0.0

    @property
    def rank(self):
        return int(self._mask.sum())

    def support(self, c) -> float:
        """max_{x in E} c'x = sqrt(level * c' shape c)."""
        c = np.asarray(c, dtype=float).reshape(-1)
        if c.shape != (self.dim,):
            raise ValueError(f"direction has dimension {c.shape[0]}, expected {self.dim}")
        q = float(c @ self.shape @ c)
        return float(np.sqrt(self.level * max(q, 0.0)))

    def quad(self, x):
        """Pseudo-inverse quadratic form and out-of-range residual of x.

        Returns (value, residual) where value = x' shape^+ x computed on the
        range component and residual is the norm of the null-space component.
        """
        x = np.asarray(x, dtype=float).reshape(-1)
        coeffs = self._evecs.T @ x
        value = float(np.sum(coeffs[self._mask] ** 2 / self._evals[self._mask]))
        residual = float(np.linalg.norm(coeffs[~self._mask]))
        return value, residual

    def quad_batch(self, X):
        """Vectorized :meth:`quad` for rows of X. Returns (values, residuals)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        coeffs = X @ self._evecs
        values = (coeffs[:, self._mask] ** 2 / self._evals[self._mask]).sum(axis=1)
        residuals = np.linalg.norm(coeffs[:, ~self._mask], axis=1)
        return values, residuals

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        value, residual = self.quad(x)
        if residual > 1e-8 * np.linalg.norm(x):
            return False
        return value <= self.level * (1.0 + 1e-9)

    def point_map(self):
        """Matrix M with E = {M z : ||z|| <= 1}; M has one column per rank direction."""
        root = np.sqrt(self.level * self._evals[self._mask])
        return self._evecs[:, self._mask] * root

    def __repr__(self):
        return f"Ellipsoid(dim={self.dim}, rank={self.rank}, level={self.level})"


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1).copy()
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise ValueError(f"radius must be nonnegative, got {self.radius}")

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains(self, x, tol=0.0) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        return float(np.linalg.norm(x - self.center)) <= self.radius + tol

    def project(self, x):
        """Closest point of the ball to x."""
        x = np.asarray(x, dtype=float).reshape(-1)
        d = x - self.center
        norm = float(np.linalg.norm(d))
        if norm <= self.radius:
            return x
        return self.center + d * (self.radius / norm)


@dataclass(frozen=True)
class LinAtom:
    """Half-space atom c'x <= rhs. A zero c marks a constant truth/falsity atom."""

    c: np.ndarray
    rhs: float

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1).copy()
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "rhs", float(self.rhs))

    @property
    def dim(self):
        return self.c.shape[0]

    def value(self, x):
        return float(self.c @ np.asarray(x, dtype=float).reshape(-1))

    def satisfied(self, x, slack=CONTAINS_SLACK) -> bool:
        return self.value(x) <= self.rhs + slack

    def tightened(self, delta):
        return LinAtom(self.c, self.rhs - float(delta))

    def substitute(self, M, offset):
        """Atom over y for the same constraint at x = M y + offset."""
        return LinAtom(M.T @ self.c, self.rhs - float(self.c @ offset))


@dataclass(frozen=True)
class PolytopicSet:
    """CNF over linear atoms: conjunction of clauses, clause = disjunction of atoms.

    An empty clause list is the universal set.
    """

    dim: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple(cl) for cl in self.clauses)
        for i, cl in enumerate(clauses):
            if not cl:
                raise ValueError(f"clause {i} is empty")
            for atom in cl:
                if atom.dim != self.dim:
                    raise ValueError(
                        f"atom dimension {atom.dim} does not match set dimension {self.dim}"
                    )
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def universal(cls, dim):
        return cls(dim=dim, clauses=())

    @classmethod
    def from_rows(cls, A, b):
        """Conjunction of one-atom clauses, one per row of Ax <= b."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"{A.shape[0]} rows but {b.shape[0]} offsets")
        return cls(dim=A.shape[1], clauses=tuple((LinAtom(row, rb),) for row, rb in zip(A, b)))

    @classmethod
    def box(cls, lo, hi):
        """Axis-aligned box lo <= x <= hi as unit clauses."""
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have equal dimension")
        n = lo.shape[0]
        rows, rhs = [], []
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            rows += [e, -e]
            rhs += [hi[i], -lo[i]]
        return cls.from_rows(np.array(rows), np.array(rhs))

    @property
    def atom_count(self):
        return sum(len(cl) for cl in self.clauses)

    def intersect(self, other):
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return PolytopicSet(dim=self.dim, clauses=self.clauses + other.clauses)

    def add_clause(self, clause):
        return PolytopicSet(dim=self.dim, clauses=self.clauses + (tuple(clause),))

    def contains(self, x, tol=CONTAINS_SLACK) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.dim,):
            raise ValueError(f"point dimension {x.shape[0]} does not match set dimension {self.dim}")
        return all(any(a.value(x) <= a.rhs + tol for a in cl) for cl in self.clauses)

    def contains_batch(self, X, tol=CONTAINS_SLACK):
        """Membership for each row of X, vectorized per atom."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ok = np.ones(X.shape[0], dtype=bool)
        for cl in self.clauses:
            hit = np.zeros(X.shape[0], dtype=bool)
            for a in cl:
                hit |= X @ a.c <= a.rhs + tol
            ok &= hit
        return ok


def polytopic_contains(S: PolytopicSet, x) -> bool:
    """CNF membership: every clause has a satisfied atom (1e-9 slack)."""
    return S.contains(x)


def negate_polytope(A, b):
    """Complement of the open polytope {x : Ax < b} as one disjunctive clause.

    Returns the clause (-A_i x <= -b_i over rows i), i.e. "some face is met
    or exceeded"; closed-set semantics throughout.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] < 1:
        raise ValueError("polytope needs at least one row")
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"{A.shape[0]} rows but {b.shape[0]} offsets")
    return tuple(LinAtom(-row, -rb) for row, rb in zip(A, b))


def gramian_sequence(sys: LTVSystem, mats=None):
    """Input-to-state Gramians W_t for t = 0..T via the step recurrence.

    W_t = sum_{s<t} alpha(t,s+1) M_s M_s' alpha(t,s+1)' where M defaults to
    the adversary matrices C. Pass sys.B to get the controller Gramians.
    """
    if mats is None:
        mats = sys.C
    W = np.zeros((sys.n, sys.n))
    out = [W]
    for t in range(sys.T):
        W = sys.A[t] @ W @ sys.A[t].T + mats[t] @ mats[t].T
        out.append(0.5 * (W + W.T))
    return out


def adv_leverage(sys: LTVSystem, budget: float, t: int) -> Ellipsoid:
    """Displacement set the budget-limited adversary can induce by time t.

    Ellipsoid with the adversary Gramian as shape and the squared-norm
    budget as level; the zero shape at t = 0 is the point set {0}.
    """
    if not (0 <= t <= sys.T):
        raise IndexError(f"need 0 <= t <= T={sys.T}, got {t}")
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    return Ellipsoid(gramian_sequence(sys)[t], budget)


def worst_case_adversary(sys: LTVSystem, budget: float, t: int, q) -> AdversarySequence:
    """Budget-saturating input sequence whose time-t displacement maximizes q'x.

    Spends the whole squared-norm budget to land exactly on the boundary of
    the leverage ellipsoid in direction W_t q. Directions outside the range
    of W_t get the zero sequence.
    """
    if not (0 <= t <= sys.T):
        raise IndexError(f"need 0 <= t <= T={sys.T}, got {t}")
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape != (sys.n,):
        raise ValueError(f"direction has dimension {q.shape[0]}, expected {sys.n}")
    W = gramian_sequence(sys)[t]
    qwq = float(q @ W @ q)
    lam = np.sqrt(budget / qwq) if qwq > 1e-300 else 0.0
    blocks = [np.zeros(sys.l) for _ in range(sys.T)]
    acc = np.eye(sys.n)
    for s in range(t - 1, -1, -1):
        blocks[s] = lam * (sys.C[s].T @ (acc.T @ q))
        acc = acc @ sys.A[s]
    return AdversarySequence(tuple(blocks))


def init_factor(sys: LTVSystem, delta: float, t: int) -> Ellipsoid:
    """Image of the radius-delta initial uncertainty ball at time t.

    Exactly {alpha(t,0) e : ||e|| <= delta}: shape alpha(t,0) alpha(t,0)'
    with level delta^2, under range-restricted pseudo-inverse semantics.
    """
    if not (0 <= t <= sys.T):
        raise IndexError(f"need 0 <= t <= T={sys.T}, got {t}")
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    alpha = transition_from_zero(sys)[t]
    return Ellipsoid(alpha @ alpha.T, delta * delta)


def strengthen(S: PolytopicSet, parts) -> PolytopicSet:
    """Largest S' with S' + E_1 + ... + E_k inside S, computed per atom.

    Each atom's rhs shrinks by the summed support functions of the parts
    (supports add under Minkowski sum). Clause structure is unchanged; an
    atom may become infeasible, which downstream solving reports naturally.
    """
    parts = list(parts)
    for e in parts:
        if e.dim != S.dim:
            raise ValueError(f"ellipsoid dimension {e.dim} does not match set dimension {S.dim}")
    clauses = tuple(
        tuple(a.tightened(sum(e.support(a.c) for e in parts)) for a in cl)
        for cl in S.clauses
    )
    return PolytopicSet(dim=S.dim, clauses=clauses)


def epsilon_cover(ball: Ball, eps: float, cap: int = DEFAULT_CELL_CAP):
    """Finite list of eps-balls, centers inside `ball`, whose union covers it.

    Axis-aligned grid of pitch 2*eps/sqrt(n) (so cell half-diagonals are at
    most eps); grid centers outside the ball are projected onto it, which
    preserves coverage because projection onto a convex set is non-expansive.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if eps >= ball.radius:
        return [Ball(ball.center, eps)]
    n = ball.dim
    pitch = 2.0 * eps / np.sqrt(n)
    k = int(np.ceil(2.0 * ball.radius / pitch))
    if k**n > cap:
        raise CoverTooLarge(f"cover would need up to {k**n} cells (cap {cap})")
    axis = (np.arange(k) - (k - 1) / 2.0) * pitch
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    grid = grid + ball.center
    dist = np.linalg.norm(grid - ball.center, axis=1)
    keep = grid[dist <= ball.radius + eps]
    return [Ball(ball.project(g), eps) for g in keep]


def cover_box(lo, hi, eps: float, cap: int = DEFAULT_CELL_CAP):
    """Uniform list of eps-balls covering the axis-aligned box [lo, hi]."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    lo = np.asarray(lo, dtype=float).reshape(-1)
    hi = np.asarray(hi, dtype=float).reshape(-1)
    if lo.shape != hi.shape or np.any(hi < lo):
        raise ValueError("invalid box bounds")
    n = lo.shape[0]
    pitch = 2.0 * eps / np.sqrt(n)
    counts = np.maximum(np.ceil((hi - lo) / pitch).astype(int), 1)
    total = int(np.prod(counts.astype(object)))
    if total > cap:
        raise CoverTooLarge(f"cover would need {total} cells (cap {cap})")
    axes = [lo[i] + (hi[i] - lo[i]) * (np.arange(counts[i]) + 0.5) / counts[i] for i in range(n)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    return [Ball(g, eps) for g in grid]
