"""Fragments, GPT systems and data tables.

A :class:`Fragment` stores only normalized extremal states (subnormalized
states are implied by mixing with the origin), a list of effect generators
that always includes the unit and the zero effect, and an explicit bilinear
probability rule ``p(s, e) = e @ B @ s``.  Keeping ``B`` separate lets states
and effects live in spaces of different dimension.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, NotTomographic, ValidationFailed
from .numerics import (
    DEFAULT_TOL,
    LpProblem,
    Tolerance,
    as_matrix,
    in_conv_hull,
    lp_solve,
    numerical_rank,
)

__all__ = [
    "Fragment",
    "GptSystem",
    "DataTable",
    "Severity",
    "Strictness",
    "Finding",
    "ValidationReport",
    "validate",
    "data_table",
    "is_tomographic",
    "prune_extremal",
    "dedupe",
    "to_evaluation_form",
    "UNIT_LABEL",
    "ZERO_LABEL",
]

UNIT_LABEL = "#unit"
ZERO_LABEL = "#zero"


def dedupe(vectors, tol=None, pinned=()) -> Tuple[np.ndarray, np.ndarray]:
    """Drop repeated rows (within tol), keeping first occurrences.

    Returns the reduced array and, for every input row, the index of the row
    that represents it in the output.
    """
    tol = Tolerance.coerce(tol)
    V = np.asarray(vectors, dtype=float)
    kept: List[int] = []
    where = np.empty(len(V), dtype=int)
    for i, v in enumerate(V):
        for r, j in enumerate(kept):
            if tol.close(v, V[j]):
                where[i] = r
                break
        else:
            where[i] = len(kept)
            kept.append(i)
    return V[kept].reshape(len(kept), V.shape[1] if V.ndim == 2 else 0), where


def _vectors(rows, name) -> np.ndarray:
    rows = list(rows)
    if not rows:
        raise DimensionMismatch(f"{name} list is empty")
    lengths = {len(np.atleast_1d(r)) for r in rows}
    if len(lengths) != 1:
        raise DimensionMismatch(f"{name} have inconsistent lengths {sorted(lengths)}")
    return as_matrix([np.atleast_1d(np.asarray(r, dtype=float)) for r in rows], name)


@dataclass(frozen=True, eq=False)
class Fragment:
    """Finite description of a GPT fragment.

    Parameters
    ----------
    name : str
    states : array_like, shape (n, d_s)
        Normalized extremal states, one per row.
    effects : array_like, shape (m, d_e)
        Effect generators, one per row; must include the unit and zero effect.
    unit_index, zero_index : int
        Positions of ``u`` and ``0`` within ``effects``.
    prob_rule : array_like, shape (d_e, d_s), optional
        Defaults to the identity when ``d_s == d_e``.

    Repeated generators are merged on construction (first one wins) and the
    unit/zero indices are remapped accordingly.
    """

    name: str
    states: np.ndarray
    effects: np.ndarray
    unit_index: int
    zero_index: int
    prob_rule: Optional[np.ndarray] = None
    state_labels: Optional[Tuple[str, ...]] = None
    effect_labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        S = _vectors(self.states, "states")
        E = _vectors(self.effects, "effects")
        d_s, d_e = S.shape[1], E.shape[1]
        if self.prob_rule is None:
            if d_s != d_e:
                raise DimensionMismatch(
                    f"prob_rule is required when state_dim {d_s} != effect_dim {d_e}"
                )
            B = np.eye(d_s)
        else:
            B = as_matrix(self.prob_rule, "prob_rule")
            if B.shape != (d_e, d_s):
                raise DimensionMismatch(
                    f"prob_rule has shape {B.shape}, expected ({d_e}, {d_s})"
                )
        m = E.shape[0]
        for label, idx in (("unit_index", self.unit_index), ("zero_index", self.zero_index)):
            if not (isinstance(idx, (int, np.integer)) and 0 <= idx < m):
                raise DimensionMismatch(f"{label} {idx!r} out of range for {m} effects")
        slabels = self.state_labels
        elabels = self.effect_labels
        if slabels is not None and len(slabels) != S.shape[0]:
            raise DimensionMismatch("state_labels length differs from state count")
        if elabels is not None and len(elabels) != m:
            raise DimensionMismatch("effect_labels length differs from effect count")

        S2, smap = dedupe(S)
        E2, emap = dedupe(E)
        if slabels is not None:
            slabels = tuple(slabels[i] for i in _first_indices(smap))
        if elabels is not None:
            elabels = tuple(elabels[i] for i in _first_indices(emap))
        for arr in (S2, E2, B):
            arr.setflags(write=False)
        object.__setattr__(self, "states", S2)
        object.__setattr__(self, "effects", E2)
        object.__setattr__(self, "prob_rule", B)
        object.__setattr__(self, "unit_index", int(emap[self.unit_index]))
        object.__setattr__(self, "zero_index", int(emap[self.zero_index]))
        object.__setattr__(self, "state_labels", slabels)
        object.__setattr__(self, "effect_labels", elabels)

    # shapes -----------------------------------------------------------------
    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    @property
    def n_effects(self) -> int:
        return self.effects.shape[0]

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def effect_dim(self) -> int:
        return self.effects.shape[1]

    @property
    def unit(self) -> np.ndarray:
        return self.effects[self.unit_index]

    @property
    def zero(self) -> np.ndarray:
        return self.effects[self.zero_index]

    def state_matrix(self) -> np.ndarray:
        """d_s x n matrix whose columns are the states."""
        return self.states.T.copy()

    def effect_matrix(self) -> np.ndarray:
        """d_e x m matrix whose columns are the effects."""
        return self.effects.T.copy()

    def prob(self, s, e) -> float:
        return float(np.asarray(e, float) @ self.prob_rule @ np.asarray(s, float))

    def table(self) -> np.ndarray:
        """Raw probability matrix, ``[j, i] = p(s_i, e_j)``."""
        return self.effects @ self.prob_rule @ self.states.T

    def state_names(self) -> List[str]:
        if self.state_labels is not None:
            return list(self.state_labels)
        return [f"s{i}" for i in range(self.n_states)]

    def effect_names(self) -> List[str]:
        if self.effect_labels is not None:
            names = list(self.effect_labels)
        else:
            names = [f"e{j}" for j in range(self.n_effects)]
        names[self.unit_index] = UNIT_LABEL
        names[self.zero_index] = ZERO_LABEL
        return names

    def with_name(self, name: str) -> "Fragment":
        return Fragment(
            name,
            self.states,
            self.effects,
            self.unit_index,
            self.zero_index,
            self.prob_rule,
            self.state_labels,
            self.effect_labels,
        )

    # serialization ----------------------------------------------------------
    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "state_dim": self.state_dim,
            "effect_dim": self.effect_dim,
            "states": self.states.tolist(),
            "effects": self.effects.tolist(),
            "unit_index": self.unit_index,
            "zero_index": self.zero_index,
            "prob_rule": self.prob_rule.tolist(),
        }
        if self.state_labels is not None:
            d["state_labels"] = list(self.state_labels)
        if self.effect_labels is not None:
            d["effect_labels"] = list(self.effect_labels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Fragment":
        try:
            states = d["states"]
            effects = d["effects"]
            unit_index = d["unit_index"]
            zero_index = d["zero_index"]
        except KeyError as exc:
            raise DimensionMismatch(f"fragment document lacks key {exc}") from None
        frag = cls(
            str(d.get("name", "fragment")),
            states,
            effects,
            unit_index,
            zero_index,
            d.get("prob_rule"),
            tuple(d["state_labels"]) if "state_labels" in d else None,
            tuple(d["effect_labels"]) if "effect_labels" in d else None,
        )
        # declared dimensions, when present, must agree with the vectors
        if "state_dim" in d and int(d["state_dim"]) != frag.state_dim:
            raise DimensionMismatch(
                f"state_dim {d['state_dim']} but states have length {frag.state_dim}"
            )
        if "effect_dim" in d and int(d["effect_dim"]) != frag.effect_dim:
            raise DimensionMismatch(
                f"effect_dim {d['effect_dim']} but effects have length {frag.effect_dim}"
            )
        return frag

    def __repr__(self):
        return (
            f"Fragment({self.name!r}, n_states={self.n_states}, n_effects={self.n_effects}, "
            f"d_s={self.state_dim}, d_e={self.effect_dim})"
        )


def _first_indices(where) -> List[int]:
    seen = {}
    for i, r in enumerate(where):
        seen.setdefault(int(r), i)
    return [seen[r] for r in sorted(seen)]


class GptSystem:
    """A fragment whose probability rule is tomographic for its own spans."""

    def __init__(self, inner: Fragment, tol=None):
        if not is_tomographic(inner, tol):
            raise NotTomographic(f"{inner.name} is not tomographic")
        self.inner = inner

    def __getattr__(self, item):
        # delegate read access to the wrapped fragment
        if item == "inner":
            raise AttributeError(item)
        return getattr(self.inner, item)

    def __repr__(self):
        return f"GptSystem({self.inner!r})"


def as_fragment(x) -> Fragment:
    return x.inner if isinstance(x, GptSystem) else x


@dataclass(frozen=True, eq=False)
class DataTable:
    """Probability table with ``entries[j, i] = p(s_i, e_j)``."""

    entries: np.ndarray
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]

    def __post_init__(self):
        D = as_matrix(self.entries, "table")
        m, n = D.shape
        rows = tuple(str(r) for r in self.row_labels)
        cols = tuple(str(c) for c in self.col_labels)
        if len(rows) != m or len(cols) != n:
            raise DimensionMismatch("label counts do not match the table shape")
        D.setflags(write=False)
        object.__setattr__(self, "entries", D)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @property
    def shape(self):
        return self.entries.shape

    def row_index(self, label: str) -> Optional[int]:
        try:
            return self.row_labels.index(label)
        except ValueError:
            return None

    def unit_row(self, tol=None) -> Optional[int]:
        """Index of the unit row: the ``#unit`` label, else any all-ones row."""
        tol = Tolerance.coerce(tol)
        i = self.row_index(UNIT_LABEL)
        if i is not None and tol.close(self.entries[i], np.ones(self.shape[1])):
            return i
        for j, row in enumerate(self.entries):
            if tol.close(row, np.ones(self.shape[1])):
                return j
        return None

    def zero_row(self, tol=None) -> Optional[int]:
        tol = Tolerance.coerce(tol)
        i = self.row_index(ZERO_LABEL)
        if i is not None and tol.is_zero(self.entries[i]):
            return i
        for j, row in enumerate(self.entries):
            if tol.is_zero(row):
                return j
        return None


class Severity(str, enum.Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"


class Strictness(str, enum.Enum):
    STRICT = "Strict"
    LENIENT = "Lenient"


@dataclass(frozen=True)
class Finding:
    check: str
    severity: Severity
    message: str

    def to_dict(self):
        return {"check": self.check, "severity": self.severity.value, "message": self.message}


@dataclass
class ValidationReport:
    findings: List[Finding] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(f.severity is Severity.ERROR for f in self.findings)

    def __bool__(self):
        return self.passed

    def add(self, check, severity, message):
        self.findings.append(Finding(check, Severity(severity), message))

    def errors(self) -> List[Finding]:
        return [f for f in self.findings if f.severity is Severity.ERROR]

    def failed_checks(self) -> List[str]:
        return sorted({f.check for f in self.errors()})

    def to_dict(self):
        return {"passed": self.passed, "findings": [f.to_dict() for f in self.findings]}

    def raise_if_failed(self, what="validation"):
        if not self.passed:
            msgs = "; ".join(f"{f.check}: {f.message}" for f in self.errors()[:5])
            raise ValidationFailed(f"{what} failed: {msgs}", self)


def _zero_in_affine_span(states: np.ndarray, tol: Tolerance) -> bool:
    """Is there a real lambda with sum(lambda) = 1 and states^T lambda = 0?"""
    n, d = states.shape
    A = np.vstack([np.hstack([states.T, -states.T]), np.hstack([np.ones(n), -np.ones(n)])])
    b = np.append(np.zeros(d), 1.0)
    return lp_solve(LpProblem(A, b), tol).feasible


def validate(f: Fragment, tol=None, strictness=Strictness.STRICT) -> ValidationReport:
    """Check the defining conditions of a fragment.

    Checks: probabilities in [0, 1] on all generator pairs, normalization of
    every stored state, the origin lying outside the affine span of the
    states, a genuine zero effect, and closure of the effect set under
    ``e -> u - e``.  In Lenient mode a closure failure is only a warning.
    """
    tol = Tolerance.coerce(tol)
    strictness = Strictness(strictness)
    rep = ValidationReport()
    if f.prob_rule.shape != (f.effect_dim, f.state_dim):
        raise DimensionMismatch("prob_rule shape inconsistent with generator lengths")
    D = f.table()
    lo_bad = np.argwhere(D < -tol.bound(1.0))
    hi_bad = np.argwhere(D > 1.0 + tol.bound(1.0))
    for j, i in list(lo_bad) + list(hi_bad):
        rep.add(
            "probability-range",
            Severity.ERROR,
            f"p(s{i}, e{j}) = {D[j, i]:.6g} outside [0, 1]",
        )
    urow = D[f.unit_index]
    for i in np.flatnonzero(np.abs(urow - 1.0) > tol.bound(1.0)):
        rep.add("normalization", Severity.ERROR, f"p(s{i}, u) = {urow[i]:.6g} != 1")
    if _zero_in_affine_span(f.states, tol):
        rep.add("zero-affine-span", Severity.ERROR, "the origin lies in the affine span of the states")
    if not tol.is_zero(f.zero):
        rep.add("zero-effect", Severity.ERROR, "effect at zero_index is not the zero vector")
    if f.unit_index == f.zero_index:
        rep.add("unit-effect", Severity.ERROR, "unit and zero effect share an index")
    sev = Severity.ERROR if strictness is Strictness.STRICT else Severity.WARNING
    u = f.unit
    for j, e in enumerate(f.effects):
        if not in_conv_hull(u - e, f.effects, tol):
            rep.add("complement-closure", sev, f"u - e{j} is not in the effect hull")
    return rep


def data_table(f) -> DataTable:
    """Probability table of a fragment with ``#unit``/``#zero`` row labels."""
    f = as_fragment(f)
    return DataTable(f.table(), tuple(f.effect_names()), tuple(f.state_names()))


def is_tomographic(f, tol=None) -> bool:
    """rank(D) == rank(state matrix) == rank(effect matrix)."""
    f = as_fragment(f)
    tol = Tolerance.coerce(tol)
    r = numerical_rank(f.table(), tol)
    return r == numerical_rank(f.state_matrix(), tol) == numerical_rank(f.effect_matrix(), tol)


def prune_extremal(vectors, tol=None, keep: Iterable[int] = ()) -> List[int]:
    """Indices of the vectors that are not convex mixtures of the others.

    Duplicates collapse onto their first occurrence.  Indices in ``keep`` are
    always retained.  The result is in increasing order.
    """
    tol = Tolerance.coerce(tol)
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2:
        raise DimensionMismatch("prune_extremal expects a list of equal-length vectors")
    keep = set(int(k) for k in keep)
    alive: List[int] = []
    for i, v in enumerate(V):
        if i in keep or not any(tol.close(v, V[j]) for j in alive):
            alive.append(i)
    out = list(alive)
    for i in alive:
        if i in keep:
            continue
        others = [j for j in out if j != i]
        if others and in_conv_hull(V[i], V[others], tol):
            out.remove(i)
    return out


def to_evaluation_form(f) -> Fragment:
    """Same fragment with effects replaced by ``B^T e``, so that ``B = I``."""
    f = as_fragment(f)
    E = f.effects @ f.prob_rule
    return Fragment(
        f.name,
        f.states,
        E,
        f.unit_index,
        f.zero_index,
        None,
        f.state_labels,
        f.effect_labels,
    )
