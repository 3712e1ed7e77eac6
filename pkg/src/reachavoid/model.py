"""Discrete-time linear time-varying plant model.

The plant evolves as x_{t+1} = A_t x_t + B_t u_t + C_t a_t where u is the
controller input and a is the adversary input. All types here are immutable
value objects; every operation is a pure function, so instances can be shared
freely across threads.
"""

from dataclasses import dataclass, field

import numpy as np


def _as_matrix_seq(mats, rows, cols, name):
    out = []
    for t, m in enumerate(mats):
        arr = np.asarray(m, dtype=float)
        if arr.shape != (rows, cols):
            raise ValueError(
                f"{name}[{t}] has shape {arr.shape}, expected {(rows, cols)}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        out.append(arr)
    return tuple(out)


@dataclass(frozen=True)
class LTVSystem:
    """Time-indexed system matrices (A_t, B_t, C_t) over a finite horizon.

    A, B, C are sequences of exactly T matrices with shapes (n, n), (n, m)
    and (n, l). Use :meth:`time_invariant` for constant-matrix systems.
    """

    A: tuple
    B: tuple
    C: tuple

    def __post_init__(self):
        if len(self.A) < 1:
            raise ValueError("horizon must be at least 1")
        n = np.asarray(self.A[0]).shape[0]
        if n < 1:
            raise ValueError("state dimension must be at least 1")
        m = np.asarray(self.B[0]).shape[1] if len(self.B) else 0
        l = np.asarray(self.C[0]).shape[1] if len(self.C) else 0
        if not (len(self.A) == len(self.B) == len(self.C)):
            raise ValueError(
                f"A, B, C must all have T entries, got "
                f"{len(self.A)}, {len(self.B)}, {len(self.C)}"
            )
        object.__setattr__(self, "A", _as_matrix_seq(self.A, n, n, "A"))
        object.__setattr__(self, "B", _as_matrix_seq(self.B, n, m, "B"))
        object.__setattr__(self, "C", _as_matrix_seq(self.C, n, l, "C"))

    @classmethod
    def time_invariant(cls, A, B, C, T):
        """System with the same (A, B, C) repeated for T steps."""
        if T < 1:
            raise ValueError("horizon must be at least 1")
        return cls(A=(A,) * T, B=(B,) * T, C=(C,) * T)

    @property
    def n(self):
        return self.A[0].shape[0]

    @property
    def m(self):
        return self.B[0].shape[1]

    @property
    def l(self):
        return self.C[0].shape[1]

    @property
    def T(self):
        return len(self.A)


def _vector_seq(vecs, length, dim, name):
    vecs = tuple(np.asarray(v, dtype=float).reshape(-1) for v in vecs)
    if len(vecs) != length:
        raise ValueError(f"{name} must have {length} entries, got {len(vecs)}")
    for t, v in enumerate(vecs):
        if v.shape != (dim,):
            raise ValueError(f"{name}[{t}] has dimension {v.shape[0]}, expected {dim}")
        v.setflags(write=False)
    return vecs


@dataclass(frozen=True)
class ControlSequence:
    """Controller inputs u_0, ..., u_{T-1}, each of dimension m."""

    u: tuple

    def __post_init__(self):
        vecs = tuple(np.asarray(v, dtype=float).reshape(-1) for v in self.u)
        if not vecs:
            raise ValueError("control sequence must be nonempty")
        dim = vecs[0].shape[0]
        object.__setattr__(self, "u", _vector_seq(vecs, len(vecs), dim, "u"))

    @property
    def T(self):
        return len(self.u)

    @property
    def m(self):
        return self.u[0].shape[0]

    def stacked(self):
        """Single vector (u_0, ..., u_{T-1}) of dimension m*T."""
        return np.concatenate(self.u)

    @classmethod
    def from_stacked(cls, vec, m):
        vec = np.asarray(vec, dtype=float).reshape(-1)
        if m < 1 or vec.size % m:
            raise ValueError(f"stacked vector of size {vec.size} is not a multiple of m={m}")
        return cls(u=tuple(vec[i : i + m] for i in range(0, vec.size, m)))


@dataclass(frozen=True)
class AdversarySequence:
    """Adversary inputs a_0, ..., a_{T-1} with cached total squared norm."""

    a: tuple
    squared_norm: float = field(default=None)

    def __post_init__(self):
        vecs = tuple(np.asarray(v, dtype=float).reshape(-1) for v in self.a)
        if not vecs:
            raise ValueError("adversary sequence must be nonempty")
        dim = vecs[0].shape[0]
        object.__setattr__(self, "a", _vector_seq(vecs, len(vecs), dim, "a"))
        total = float(sum(float(v @ v) for v in self.a))
        if self.squared_norm is None:
            object.__setattr__(self, "squared_norm", total)
        elif abs(self.squared_norm - total) > 1e-12 * max(1.0, total):
            raise ValueError(
                f"cached squared norm {self.squared_norm} disagrees with recomputed {total}"
            )

    @property
    def T(self):
        return len(self.a)

    @property
    def l(self):
        return self.a[0].shape[0]

    def stacked(self):
        return np.concatenate(self.a)

    @classmethod
    def zero(cls, l, T):
        return cls(a=tuple(np.zeros(l) for _ in range(T)))

    @classmethod
    def from_stacked(cls, vec, l):
        vec = np.asarray(vec, dtype=float).reshape(-1)
        if l < 1 or vec.size % l:
            raise ValueError(f"stacked vector of size {vec.size} is not a multiple of l={l}")
        return cls(a=tuple(vec[i : i + l] for i in range(0, vec.size, l)))


@dataclass(frozen=True)
class Trajectory:
    """States x_0, ..., x_T visited by one run of the plant."""

    states: tuple

    def __post_init__(self):
        vecs = tuple(np.asarray(v, dtype=float).reshape(-1) for v in self.states)
        if len(vecs) < 2:
            raise ValueError("trajectory needs at least x_0 and x_1")
        dim = vecs[0].shape[0]
        object.__setattr__(self, "states", _vector_seq(vecs, len(vecs), dim, "states"))

    def __getitem__(self, t):
        return self.states[t]

    def __len__(self):
        return len(self.states)

    @property
    def final(self):
        return self.states[-1]


def transition_matrix(sys: LTVSystem, t1: int, t0: int) -> np.ndarray:
    """State transition matrix from t0 to t1: A_{t1-1} ... A_{t0}, identity at t1 == t0."""
    if not (0 <= t0 <= t1 <= sys.T):
        raise IndexError(f"need 0 <= t0 <= t1 <= T={sys.T}, got t0={t0}, t1={t1}")
    out = np.eye(sys.n)
    for s in range(t0, t1):
        out = sys.A[s] @ out
    return out


def transition_from_zero(sys: LTVSystem):
    """All transition matrices from time 0: list of T+1 matrices, entry t is the 0-to-t matrix."""
    out = [np.eye(sys.n)]
    for s in range(sys.T):
        out.append(sys.A[s] @ out[-1])
    return out


def simulate(sys: LTVSystem, x0, u: ControlSequence, a: AdversarySequence) -> Trajectory:
    """Run the step recursion from x0 under controls u and adversary inputs a."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (sys.n,):
        raise ValueError(f"x0 has dimension {x0.shape[0]}, expected {sys.n}")
    if u.T != sys.T or u.m != sys.m:
        raise ValueError(f"control sequence shape ({u.T}, {u.m}) does not match system ({sys.T}, {sys.m})")
    if a.T != sys.T or a.l != sys.l:
        raise ValueError(f"adversary sequence shape ({a.T}, {a.l}) does not match system ({sys.T}, {sys.l})")
    states = [x0]
    x = x0
    for t in range(sys.T):
        x = sys.A[t] @ x + sys.B[t] @ u.u[t] + sys.C[t] @ a.a[t]
        states.append(x)
    return Trajectory(states=tuple(states))


def simulate_batch(sys: LTVSystem, X0, U, A_stacked):
    """Vectorized simulation of N runs at once.

    X0 is (N, n); U is either a ControlSequence shared by all runs or an
    (N, m*T) array; A_stacked is (N, l*T). Returns an (N, T+1, n) array.
    """
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    N = X0.shape[0]
    A_stacked = np.atleast_2d(np.asarray(A_stacked, dtype=float))
    if isinstance(U, ControlSequence):
        U_rows = np.broadcast_to(U.stacked(), (N, sys.m * sys.T))
    else:
        U_rows = np.atleast_2d(np.asarray(U, dtype=float))
    out = np.empty((N, sys.T + 1, sys.n))
    out[:, 0, :] = X0
    X = X0
    for t in range(sys.T):
        u_t = U_rows[:, t * sys.m : (t + 1) * sys.m]
        a_t = A_stacked[:, t * sys.l : (t + 1) * sys.l]
        X = X @ sys.A[t].T + u_t @ sys.B[t].T + a_t @ sys.C[t].T
        out[:, t + 1, :] = X
    return out


def _input_to_state_map(sys, t, mats, width):
    if not (0 <= t <= sys.T):
        raise IndexError(f"need 0 <= t <= T={sys.T}, got {t}")
    G = np.zeros((sys.n, width * sys.T))
    # column block for input at step s is alpha(t, s+1) @ mats[s]
    acc = np.eye(sys.n)  # alpha(t, s+1), built backwards from s = t-1
    for s in range(t - 1, -1, -1):
        G[:, s * width : (s + 1) * width] = acc @ mats[s]
        acc = acc @ sys.A[s]
    return G, acc  # acc ends as alpha(t, 0)


def control_to_state_map(sys: LTVSystem, t: int):
    """Affine map from (x0, stacked u) to the adversary-free state at time t.

    Returns (G, offset_map) with state = offset_map @ x0 + G @ stacked(u).
    Columns of G for input steps s >= t are zero.
    """
    return _input_to_state_map(sys, t, sys.B, sys.m)


def adversary_to_state_map(sys: LTVSystem, t: int):
    """Affine map from (x0, stacked a) to the control-free state at time t.

    Returns (H, offset_map) with state = offset_map @ x0 + H @ stacked(a).
    """
    return _input_to_state_map(sys, t, sys.C, sys.l)
