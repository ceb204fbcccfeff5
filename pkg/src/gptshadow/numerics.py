"""Dense linear algebra with an explicit tolerance policy, and a small LP engine.

Everything here works on plain ``numpy`` float arrays.  Rank decisions come
from Gaussian elimination with full pivoting, and LP feasibility questions are
answered by a dense two-phase simplex method (Bland's rule) that always returns
a certificate: a nonnegative witness when the system is feasible, or a Farkas
vector when it is not.  Both kinds of certificate can be re-checked with
:func:`check_witness` and :func:`check_farkas`, which share no code with the
solver.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, NotSurjective, NumericalFailure

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "as_vector",
    "rank_factorize",
    "numerical_rank",
    "right_inverse",
    "kernel_basis",
    "LpProblem",
    "LpOutcome",
    "LpVerdict",
    "lp_solve",
    "check_witness",
    "check_farkas",
    "Membership",
    "in_conv_hull",
]

# Internal simplex pivoting threshold; independent of the user tolerance.
_PIVOT_EPS = 1e-9  # smaller pivots are treated as round-off
_MAX_PIVOTS = 100_000


@dataclass(frozen=True)
class Tolerance:
    """Comparison rule ``|x - y| <= abs_eps + rel_eps * max(|x|, |y|)``."""

    abs_eps: float = 1e-9
    rel_eps: float = 1e-9

    def __post_init__(self):
        if not (self.abs_eps >= 0 and self.rel_eps >= 0):
            raise ValueError("tolerances must be nonnegative")

    @classmethod
    def coerce(cls, tol: Union["Tolerance", float, None]) -> "Tolerance":
        if tol is None:
            return DEFAULT_TOL
        if isinstance(tol, Tolerance):
            return tol
        return cls(float(tol), float(tol))

    def bound(self, scale=0.0):
        """Admissible deviation for quantities of magnitude ``scale``."""
        return self.abs_eps + self.rel_eps * np.abs(scale)

    def close(self, x, y) -> bool:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape:
            return False
        scale = np.maximum(np.abs(x), np.abs(y))
        return bool(np.all(np.abs(x - y) <= self.bound(scale)))

    def is_zero(self, x) -> bool:
        return bool(np.all(np.abs(np.asarray(x, dtype=float)) <= self.abs_eps))


DEFAULT_TOL = Tolerance()


def as_matrix(M, name="matrix") -> np.ndarray:
    A = np.array(M, dtype=float)
    if A.ndim == 1 and A.size == 0:
        A = A.reshape(0, 0)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_vector(v, name="vector") -> np.ndarray:
    x = np.array(v, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


@dataclass(frozen=True)
class _Elimination:
    lu: np.ndarray  # packed unit-lower L and upper U of the permuted matrix
    rows: np.ndarray  # row permutation: lu row r is original row rows[r]
    cols: np.ndarray
    rank: int
    threshold: float


def _eliminate(M: np.ndarray, tol: Tolerance) -> _Elimination:
    A = M.copy()
    m, n = A.shape
    rows = np.arange(m)
    cols = np.arange(n)
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    threshold = float(tol.bound(scale))
    k = 0
    while k < min(m, n):
        sub = np.abs(A[k:, k:])
        # argmax picks the first maximum in row-major order: deterministic ties
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, j] <= threshold:
            break
        i += k
        j += k
        if i != k:
            A[[k, i], :] = A[[i, k], :]
            rows[[k, i]] = rows[[i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            cols[[k, j]] = cols[[j, k]]
        A[k + 1 :, k] /= A[k, k]
        A[k + 1 :, k + 1 :] -= np.outer(A[k + 1 :, k], A[k, k + 1 :])
        k += 1
    return _Elimination(A, rows, cols, k, threshold)


def rank_factorize(D, tol=None):
    """Exact low-rank factorization ``D = E @ S`` of minimal inner dimension.

    The factorization is a skeleton decomposition: ``S`` consists of ``k``
    linearly independent rows of ``D`` (chosen by full pivoting) and ``E`` is
    the unique matrix with ``E @ S = D`` on those rows.  Consequently ``E`` has
    an identity block on the pivot rows.

    Parameters
    ----------
    D : array_like, shape (m, n)
    tol : Tolerance, optional

    Returns
    -------
    E : ndarray, shape (m, k)
    S : ndarray, shape (k, n)
    k : int
        Numerical rank of ``D``.
    """
    tol = Tolerance.coerce(tol)
    D = as_matrix(D, "D")
    m, n = D.shape
    elim = _eliminate(D, tol)
    k = elim.rank
    if k == 0:
        return np.zeros((m, 0)), np.zeros((0, n)), 0
    I = np.sort(elim.rows[:k])
    J = np.sort(elim.cols[:k])
    S = D[I, :].copy()
    core = D[np.ix_(I, J)]
    E = np.linalg.solve(core.T, D[:, J].T).T
    E[I, :] = np.eye(k)
    return E, S, k


def numerical_rank(M, tol=None) -> int:
    tol = Tolerance.coerce(tol)
    M = as_matrix(M)
    if M.size == 0:
        return 0
    return _eliminate(M, tol).rank


def right_inverse(L, tol=None) -> np.ndarray:
    """Minimum-norm right inverse ``R`` with ``L @ R = I``.

    Raises NotSurjective when ``L`` does not have full row rank.
    """
    tol = Tolerance.coerce(tol)
    L = as_matrix(L, "L")
    d = L.shape[0]
    r = numerical_rank(L, tol)
    if r < d:
        raise NotSurjective(f"matrix of shape {L.shape} has rank {r} < {d} rows")
    R = L.T @ np.linalg.solve(L @ L.T, np.eye(d))
    if not np.all(np.abs(L @ R - np.eye(d)) <= tol.bound(1.0) * max(1, d)):
        raise NumericalFailure("right inverse failed its post-check")
    return R


def kernel_basis(M, tol=None) -> list:
    """Basis of the right null space ``{v : M v = 0}``.

    Vectors are read off the echelon form, one per non-pivot column, so they
    are linearly independent by construction; each is scaled to unit
    max-norm.
    """
    tol = Tolerance.coerce(tol)
    M = as_matrix(M)
    m, n = M.shape
    if n == 0:
        return []
    if m == 0:
        return [np.eye(n)[i] for i in range(n)]
    elim = _eliminate(M, tol)
    k = elim.rank
    U = np.triu(elim.lu[:k, :])
    U11, U12 = U[:, :k], U[:, k:]
    coeffs = -np.linalg.solve(U11, U12) if k else np.zeros((0, n - k))
    basis = []
    for t in range(n - k):
        v = np.zeros(n)
        v[elim.cols[:k]] = coeffs[:, t]
        v[elim.cols[k + t]] = 1.0
        basis.append(v / np.max(np.abs(v)))
    return basis


# ----------------------------------------------------------------------------
# Linear programming
# ----------------------------------------------------------------------------


class LpVerdict(str, enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class LpProblem:
    """``minimize c.x  subject to  A x = b, x >= 0``.

    ``c`` may be omitted for a pure feasibility question.
    """

    A: np.ndarray
    b: np.ndarray
    c: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim == 1 and A.size == 0:
            A = A.reshape(0, 0)
        if A.ndim != 2:
            raise DimensionMismatch("constraint matrix must be 2-D")
        b = np.array(self.b, dtype=float).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise DimensionMismatch(
                f"{A.shape[0]} equality rows but {b.shape[0]} right-hand sides"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.c is not None:
            c = np.array(self.c, dtype=float).reshape(-1)
            if c.shape[0] != A.shape[1]:
                raise DimensionMismatch("objective length differs from variable count")
            object.__setattr__(self, "c", c)
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")

    @classmethod
    def from_rows(cls, rows: Sequence, objective=None) -> "LpProblem":
        """Build from ``[(coefficients, rhs), ...]``."""
        if not rows:
            n = 0 if objective is None else len(objective)
            return cls(np.zeros((0, n)), np.zeros(0), objective)
        A = np.array([np.asarray(r, dtype=float) for r, _ in rows])
        b = np.array([float(v) for _, v in rows])
        return cls(A, b, objective)

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class LpOutcome:
    verdict: LpVerdict
    witness: Optional[np.ndarray] = None
    farkas: Optional[np.ndarray] = None
    objective: Optional[float] = None
    unbounded: bool = False
    pivots: int = field(default=0, compare=False)

    @property
    def feasible(self) -> bool:
        return self.verdict is LpVerdict.FEASIBLE


def check_witness(A, b, x, tol=None) -> bool:
    """True iff ``x >= 0`` and ``A x = b`` row by row, within tolerance."""
    tol = Tolerance.coerce(tol)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (A.shape[1],) or not np.all(np.isfinite(x)):
        return False
    if np.any(x < -tol.abs_eps):
        return False
    lhs = A @ x
    scale = np.maximum(np.abs(A) @ np.abs(x), np.abs(b))
    return bool(np.all(np.abs(lhs - b) <= tol.bound(scale)))


def check_farkas(A, b, y, tol=None) -> bool:
    """True iff ``y`` proves ``{A x = b, x >= 0}`` empty.

    Convention: ``y^T A <= 0`` entrywise and ``y^T b > 0``.  Any ``x >= 0``
    would give ``0 >= y^T A x = y^T b > 0``.
    """
    tol = Tolerance.coerce(tol)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape != (A.shape[0],) or not np.all(np.isfinite(y)):
        return False
    ynorm = np.max(np.abs(y)) if y.size else 0.0
    if ynorm == 0:
        return False
    y = y / ynorm
    yA = y @ A
    slack = tol.bound(np.abs(y) @ np.abs(A))
    if np.any(yA > slack):
        return False
    return bool(y @ b > tol.abs_eps)


class _Tableau:
    """Dense simplex tableau; the last row holds reduced costs."""

    def __init__(self, A, b):
        m, n = A.shape
        self.m, self.n = m, n
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = A
        T[:m, n : n + m] = np.eye(m)
        T[:m, -1] = b
        self.T = T
        self.basis = list(range(n, n + m))
        self.active_rows = list(range(m))
        self.pivots = 0

    def pivot(self, i, j):
        T = self.T
        T[i, :] /= T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        T -= np.outer(col, T[i, :])
        self.basis[i] = j
        self.pivots += 1
        if self.pivots > _MAX_PIVOTS:
            raise NumericalFailure("simplex pivot limit exceeded")

    def run(self, allowed: np.ndarray) -> bool:
        """Bland's rule until optimal (True) or unbounded (False)."""
        T = self.T
        while True:
            costs = T[-1, :-1]
            candidates = np.flatnonzero((costs < -_PIVOT_EPS) & allowed)
            if candidates.size == 0:
                return True
            j = int(candidates[0])
            best = None
            for i in self.active_rows:
                a = T[i, j]
                if a > _PIVOT_EPS:
                    ratio = T[i, -1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            # ratio ties within noise: Bland picks the smallest basic index
            ratio_min = best[0][0]
            ties = [
                i
                for i in self.active_rows
                if T[i, j] > _PIVOT_EPS and T[i, -1] / T[i, j] <= ratio_min + 1e-14
            ]
            i = min(ties, key=lambda r: self.basis[r])
            self.pivot(i, j)


def lp_solve(p: LpProblem, tol=None) -> LpOutcome:
    """Two-phase dense simplex method with Bland's anti-cycling rule.

    Linearly dependent equality rows are removed first (clashing ones give
    an immediate certificate).  Phase one minimizes the sum of artificial
    variables.  A positive optimum
    yields the Farkas vector from the phase-one duals; otherwise artificials
    are pivoted out and phase two optimizes ``p.c`` (if given).  The returned
    certificate is always re-verified; a failed check raises
    NumericalFailure instead of returning an unsound answer.
    """
    tol = Tolerance.coerce(tol)
    A, b = p.A, p.b
    m, n = A.shape
    keep, y = _presolve_rows(A, b, tol)
    if y is not None:
        if not check_farkas(A, b, y, tol):
            raise NumericalFailure("inconsistent equality rows gave an invalid certificate")
        return LpOutcome(LpVerdict.INFEASIBLE, farkas=y + 0.0)  # no negative zeros
    out = _two_phase(A[keep], b[keep], p.c, tol)
    if out.verdict is LpVerdict.INFEASIBLE:
        y = np.zeros(m)
        y[keep] = out.farkas
        if not check_farkas(A, b, y, tol):
            raise NumericalFailure("Farkas certificate failed on the full system")
        return LpOutcome(LpVerdict.INFEASIBLE, farkas=y + 0.0, pivots=out.pivots)
    if not check_witness(A, b, out.witness, tol):
        raise NumericalFailure("feasible witness failed verification")
    return out


def _presolve_rows(A, b, tol):
    """Independent equality rows, or a Farkas vector when the rows clash.

    Dependent rows make phase one end on nearly singular bases whose duals
    are useless, so they are removed first.  Returns ``(keep, None)`` or
    ``(None, y)``.
    """
    m = A.shape[0]
    if m == 0:
        return [], None
    el = _eliminate(A, tol)
    keep = sorted(int(r) for r in el.rows[: el.rank])
    drop = [i for i in range(m) if i not in keep]
    if not drop:
        return keep, None
    if not keep:
        C = np.zeros((0, m))
    else:
        C, *_ = np.linalg.lstsq(A[keep].T, A.T, rcond=None)  # A = C^T A[keep]
    resid = b - C.T @ b[keep] if keep else b.copy()
    scale = np.abs(b) + (np.abs(C.T) @ np.abs(b[keep]) if keep else 0.0)
    bad = np.abs(resid) > tol.bound(np.maximum(scale, 1.0))
    if np.any(bad):
        i = int(np.argmax(np.abs(resid) * bad))
        y = np.zeros(m)
        y[i] = 1.0
        if keep:
            y[keep] -= C[:, i]
        y *= np.sign(resid[i])
        return None, y / np.max(np.abs(y))
    return keep, None


def _two_phase(A, b, c, tol) -> LpOutcome:
    m, n = A.shape
    flip = np.where(b < 0, -1.0, 1.0)
    Af = A * flip[:, None]
    bf = b * flip
    tab = _Tableau(Af, bf)
    T = tab.T
    # phase one: reduced costs of x are -sum of rows, artificials start at 0
    T[-1, :n] = -Af.sum(axis=0)
    T[-1, -1] = -bf.sum()
    allowed = np.zeros(n + m, dtype=bool)
    allowed[: n + m] = True
    tab.run(allowed)
    infeasibility = -T[-1, -1]
    feas_threshold = tol.bound(max(1.0, float(np.max(np.abs(b))) if m else 1.0))

    if infeasibility > feas_threshold:
        y = _phase_one_duals(Af, tab, n, m) * flip
        y = y / np.max(np.abs(y))
        if not check_farkas(A, b, y, tol):
            raise NumericalFailure(
                f"Farkas certificate failed verification (phase-one value {infeasibility:.3e})"
            )
        return LpOutcome(LpVerdict.INFEASIBLE, farkas=y, pivots=tab.pivots)

    _drive_out_artificials(tab, n)
    allowed = np.zeros(n + m, dtype=bool)
    allowed[:n] = True
    unbounded = False
    if c is not None:
        cost = np.zeros(n + m + 1)
        cost[:n] = c
        row = cost.copy()
        for i in tab.active_rows:
            row -= cost[tab.basis[i]] * T[i, :]
        T[-1, :] = row
        unbounded = not tab.run(allowed)
    x = np.zeros(n)
    for i in tab.active_rows:
        if tab.basis[i] < n:
            x[tab.basis[i]] = T[i, -1]
    x = _refine(A, b, x, [tab.basis[i] for i in tab.active_rows if tab.basis[i] < n])
    obj = float(c @ x) if c is not None else None
    return LpOutcome(
        LpVerdict.FEASIBLE, witness=x, objective=obj, unbounded=unbounded, pivots=tab.pivots
    )


def _phase_one_duals(Af, tab, n, m):
    basis = [tab.basis[i] for i in range(m)]
    Bcols = np.zeros((m, m))
    cB = np.zeros(m)
    for r, j in enumerate(basis):
        if j < n:
            Bcols[:, r] = Af[:, j]
        else:
            Bcols[j - n, r] = 1.0
            cB[r] = 1.0
    try:
        y = np.linalg.solve(Bcols.T, cB)
    except np.linalg.LinAlgError:
        y = 1.0 - tab.T[-1, n : n + m]
    else:
        if not np.all(np.isfinite(y)):
            y = 1.0 - tab.T[-1, n : n + m]
    return y


def _drive_out_artificials(tab, n):
    T = tab.T
    for i in list(tab.active_rows):
        if tab.basis[i] < n:
            continue
        row = np.abs(T[i, :n])
        j = int(np.argmax(row)) if n else 0
        if n and row[j] > _PIVOT_EPS:
            tab.pivot(i, j)
        else:
            tab.active_rows.remove(i)  # redundant equality


def _refine(A, b, x, basic):
    """One least-squares polish of the basic values against the raw data."""
    if not basic:
        return x
    sol, *_ = np.linalg.lstsq(A[:, basic], b, rcond=None)
    if not np.all(np.isfinite(sol)):
        return x
    y = x.copy()
    y[basic] = sol
    old = np.max(np.abs(A @ x - b), initial=0.0)
    new = np.max(np.abs(A @ y - b), initial=0.0)
    if new <= old and np.min(y, initial=0.0) >= min(np.min(x, initial=0.0), -1e-15):
        return y
    return x


# ----------------------------------------------------------------------------
# Hull membership
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Membership:
    """Outcome of a hull-membership query; truthy when the point is inside."""

    inside: bool
    weights: Optional[np.ndarray] = None
    farkas: Optional[np.ndarray] = None

    def __bool__(self):
        return self.inside


_MODES = ("convex", "subconvex", "conic")


def in_conv_hull(x, generators, tol=None, mode="convex") -> Membership:
    """Decide whether ``x`` lies in the hull of ``generators``.

    Parameters
    ----------
    x : array_like, shape (d,)
    generators : sequence of d-vectors (possibly empty)
    mode : {"convex", "subconvex", "conic"}
        ``convex``: weights sum to one.  ``subconvex``: weights sum to at most
        one, i.e. the hull of the generators together with the origin.
        ``conic``: any nonnegative weights.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    tol = Tolerance.coerce(tol)
    x = as_vector(x, "x")
    G = np.array([np.asarray(g, dtype=float) for g in generators])
    if G.size == 0:
        G = G.reshape(0, x.shape[0])
    if G.ndim != 2 or G.shape[1] != x.shape[0]:
        raise DimensionMismatch("generators and point differ in dimension")
    N = G.shape[0]
    if N == 0:
        inside = mode != "convex" and tol.is_zero(x)
        return Membership(inside, np.zeros(0) if inside else None)
    A = G.T
    b = x
    if mode == "convex":
        A = np.vstack([A, np.ones((1, N))])
        b = np.append(x, 1.0)
    elif mode == "subconvex":
        A = np.vstack([np.hstack([A, np.zeros((A.shape[0], 1))]), np.ones((1, N + 1))])
        b = np.append(x, 1.0)
    out = lp_solve(LpProblem(A, b), tol)
    if out.feasible:
        return Membership(True, out.witness[:N])
    return Membership(False, farkas=out.farkas)
