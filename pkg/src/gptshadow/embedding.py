"""Embeddings between fragments, simplex embeddability and equivalence.

Simplex embeddability is decided by a linear program on span coordinates.
Write ``P`` for the probability rule as a bilinear form on the state span and
the effect span.  A simplex embedding exists iff

    P = A @ sigma @ B,   sigma >= 0,

where the rows of ``B`` are the facet functionals of the state cone and the
columns of ``A`` are the facet functionals of the effect cone (effects
together with their complements), scaled so that each takes the value one on
the unit effect.  Any feasible ``sigma`` gives explicit maps into a simplex
whose vertices are indexed by the columns of ``A``; they are always
re-verified before a positive answer is returned.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterator, List, Optional

import numpy as np
from scipy.spatial import ConvexHull

from .errors import (
    DimensionMismatch,
    InconsistentTable,
    NotTomographic,
    NumericalFailure,
    WitnessVerificationFailed,
)
from .fragment import (
    Fragment,
    GptSystem,
    Severity,
    ValidationReport,
    as_fragment,
    is_tomographic,
    prune_extremal,
)
from .numerics import (
    LpOutcome,
    LpProblem,
    Tolerance,
    check_farkas,
    check_witness,
    in_conv_hull,
    lp_solve,
    numerical_rank,
)

__all__ = [
    "MapPair",
    "Verdict",
    "SimplexCertificate",
    "verify_embedding",
    "verify_simplex_embedding",
    "simplex_embed",
    "fragment_simplex_embed",
    "check_equivalence",
    "iter_equivalences",
    "is_surjective_on_generators",
    "span_basis",
    "cone_facets",
]


@dataclass(frozen=True, eq=False)
class MapPair:
    """State map ``iota`` and effect map ``kappa``; both act on column vectors."""

    iota: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "iota", np.atleast_2d(np.asarray(self.iota, dtype=float)))
        object.__setattr__(self, "kappa", np.atleast_2d(np.asarray(self.kappa, dtype=float)))

    def then(self, other: "MapPair") -> "MapPair":
        """Apply ``self`` first, then ``other``."""
        return MapPair(other.iota @ self.iota, other.kappa @ self.kappa)

    def inverse(self) -> "MapPair":
        return MapPair(np.linalg.pinv(self.iota), np.linalg.pinv(self.kappa))

    @classmethod
    def identity(cls, d_s, d_e=None) -> "MapPair":
        return cls(np.eye(d_s), np.eye(d_s if d_e is None else d_e))

    def to_dict(self):
        return {"iota": self.iota.tolist(), "kappa": self.kappa.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["iota"], d["kappa"])
        except KeyError as exc:
            raise DimensionMismatch(f"map document lacks key {exc}") from None


def _check_shapes(src: Fragment, dst_ds, dst_de, maps: MapPair):
    if maps.iota.shape != (dst_ds, src.state_dim):
        raise DimensionMismatch(
            f"iota has shape {maps.iota.shape}, expected ({dst_ds}, {src.state_dim})"
        )
    if maps.kappa.shape != (dst_de, src.effect_dim):
        raise DimensionMismatch(
            f"kappa has shape {maps.kappa.shape}, expected ({dst_de}, {src.effect_dim})"
        )


def _check_probabilities(rep, src, P_img, tol):
    D = src.table()
    bad = np.argwhere(np.abs(P_img - D) > tol.bound(np.maximum(np.abs(P_img), np.abs(D))))
    for j, i in bad:
        rep.add(
            "probability",
            Severity.ERROR,
            f"p(s{i}, e{j}) = {D[j, i]:.6g} but image pair gives {P_img[j, i]:.6g}",
        )


def verify_embedding(src, dst, maps: MapPair, tol=None) -> ValidationReport:
    """Check that ``maps`` embeds ``src`` into ``dst``.

    Four families of checks: images of states lie in ``Conv[0 u states]``,
    images of effects lie in the effect hull, the unit goes to the unit, and
    every generator pair keeps its probability.
    """
    src = as_fragment(src)
    dst = as_fragment(dst)
    tol = Tolerance.coerce(tol)
    _check_shapes(src, dst.state_dim, dst.effect_dim, maps)
    rep = ValidationReport()
    S_img = src.states @ maps.iota.T
    E_img = src.effects @ maps.kappa.T
    for i, x in enumerate(S_img):
        if not in_conv_hull(x, dst.states, tol, mode="subconvex"):
            rep.add("state-image", Severity.ERROR, f"iota(s{i}) is outside the target state space")
    for j, y in enumerate(E_img):
        if not in_conv_hull(y, dst.effects, tol):
            rep.add("effect-image", Severity.ERROR, f"kappa(e{j}) is outside the target effect space")
    if not tol.close(E_img[src.unit_index], dst.unit):
        rep.add("unit", Severity.ERROR, "kappa(u) differs from the target unit")
    _check_probabilities(rep, src, E_img @ dst.prob_rule @ S_img.T, tol)
    return rep


def verify_simplex_embedding(src, maps: MapPair, n: int, tol=None) -> ValidationReport:
    """Embedding check against the simplicial GPT of dimension ``n``.

    Same four checks as :func:`verify_embedding`, but membership in the
    simplex and in the unit hypercube is tested directly by coordinates, so
    the ``2**n`` hypercube vertices are never listed.
    """
    src = as_fragment(src)
    tol = Tolerance.coerce(tol)
    _check_shapes(src, n, n, maps)
    rep = ValidationReport()
    slack = tol.bound(1.0)
    S_img = src.states @ maps.iota.T
    E_img = src.effects @ maps.kappa.T
    for i, x in enumerate(S_img):
        if np.any(x < -slack) or x.sum() > 1 + slack * max(1, n):
            rep.add("state-image", Severity.ERROR, f"iota(s{i}) is outside the simplex")
    for j, y in enumerate(E_img):
        if np.any(y < -slack) or np.any(y > 1 + slack):
            rep.add("effect-image", Severity.ERROR, f"kappa(e{j}) is outside the unit cube")
    if not tol.close(E_img[src.unit_index], np.ones(n)):
        rep.add("unit", Severity.ERROR, "kappa(u) is not the all-ones vector")
    _check_probabilities(rep, src, E_img @ S_img.T, tol)
    return rep


# ----------------------------------------------------------------------------
# Cone geometry
# ----------------------------------------------------------------------------


def span_basis(vectors, tol=None) -> np.ndarray:
    """Orthonormal basis (as columns) of the span of the given rows.

    Returns the identity when the rows already span the ambient space, so
    full-dimensional inputs keep their own coordinates.
    """
    tol = Tolerance.coerce(tol)
    V = np.asarray(vectors, dtype=float)
    d = V.shape[1]
    r = numerical_rank(V, tol)
    if r == d:
        return np.eye(d)
    _, _, Vt = np.linalg.svd(V)
    return Vt[:r].T


def cone_facets(points, normal, tol=None) -> np.ndarray:
    """Facet functionals of the cone generated by ``points``.

    ``normal`` must be strictly positive on every generator; the cone is cut
    by the hyperplane ``normal . v = 1`` and the facets of that slice are
    lifted back to linear functionals ``f`` with ``f . v >= 0`` on the cone.
    The cone must be full-dimensional.  Rows are scaled to unit max-norm,
    deduplicated and sorted.
    """
    tol = Tolerance.coerce(tol)
    X = np.asarray(points, dtype=float)
    w = np.asarray(normal, dtype=float)
    k = w.shape[0]
    t = X @ w
    if np.any(t <= tol.bound(np.abs(X).sum(axis=1))):
        raise NumericalFailure("slicing functional is not positive on every generator")
    if k == 1:
        return (w / np.max(np.abs(w)))[None, :]
    Y = X / t[:, None]
    _, _, Vt = np.linalg.svd(w[None, :])
    W = Vt[1:].T  # orthonormal basis of the kernel of w
    c0 = w / (w @ w)
    Z = (Y - c0) @ W
    if k == 2:
        z = Z[:, 0]
        eqs = np.array([[-1.0, z.min()], [1.0, -z.max()]])
    else:
        eqs = ConvexHull(Z).equations
    F = -(eqs[:, :-1] @ W.T) - eqs[:, -1:] * w[None, :]
    F /= np.max(np.abs(F), axis=1, keepdims=True)
    F = np.round(F, 12) + 0.0
    F = np.unique(F, axis=0)
    # merge near-duplicates that survived rounding
    keep: List[int] = []
    for i, f in enumerate(F):
        if not any(np.max(np.abs(f - F[j])) < 1e-8 for j in keep):
            keep.append(i)
    F = F[keep]
    vals = X @ F.T
    if np.any(vals < -1e-7 * np.maximum(1.0, np.abs(X).sum(axis=1))[:, None]):
        raise NumericalFailure("facet enumeration produced an invalid inequality")
    return F


def _interior_functional(gens, hint, tol) -> np.ndarray:
    """A functional strictly positive on every generator of a pointed cone."""
    if hint is not None and np.min(gens @ hint) > 1e-6 * np.max(np.abs(hint)):
        return hint
    N, k = gens.shape
    # c = c+ - c-,  gens c - slack = 1
    A = np.hstack([gens, -gens, -np.eye(N)])
    out = lp_solve(LpProblem(A, np.ones(N)), tol)
    if not out.feasible:
        raise NumericalFailure("effect cone is not pointed")
    x = out.witness
    return x[:k] - x[k : 2 * k]


class Verdict(str, enum.Enum):
    EMBEDDABLE = "Embeddable"
    NOT_EMBEDDABLE = "NotEmbeddable"
    INDETERMINATE = "IndeterminateByShadow"


@dataclass(frozen=True, eq=False)
class SimplexCertificate:
    """Outcome of a simplex-embeddability decision.

    Attributes
    ----------
    verdict : Verdict
    sigma : ndarray or None
        Nonnegative coefficients with ``A @ sigma @ B = P``.
    witness_maps : MapPair or None
        Maps into the simplicial GPT of dimension ``dimension``.
    farkas : ndarray or None
        Certificate of infeasibility for ``lp``; reshaped to ``P.shape`` it
        is a linear functional ``Y`` with ``a . Y b <= 0`` for every facet
        pair and ``<Y, P> > 0``.
    """

    verdict: Verdict
    lp: LpProblem
    A: np.ndarray
    B: np.ndarray
    P: np.ndarray
    sigma: Optional[np.ndarray] = None
    witness_maps: Optional[MapPair] = None
    farkas: Optional[np.ndarray] = None
    dimension: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def embeddable(self) -> bool:
        return self.verdict is Verdict.EMBEDDABLE

    def recheck(self, tol=None) -> bool:
        """Re-verify the stored certificate against the stored LP."""
        if self.embeddable:
            return check_witness(self.lp.A, self.lp.b, self.sigma.ravel(), tol)
        return check_farkas(self.lp.A, self.lp.b, self.farkas, tol)

    def simplicial_target(self) -> Fragment:
        """The explicit simplicial GPT the witness maps into (small sizes only)."""
        from .constructions import simplex

        return simplex(self.dimension)

    def to_dict(self):
        d = {"verdict": self.verdict.value, "lp_variables": self.lp.n_vars}
        if self.embeddable:
            d["dimension"] = self.dimension
            d["sigma"] = self.sigma.tolist()
            d["witness_maps"] = self.witness_maps.to_dict()
        else:
            d["farkas"] = self.farkas.tolist()
        return d


def fragment_simplex_embed(f, tol=None) -> SimplexCertificate:
    """Decide simplex embeddability of any valid fragment.

    Works on the spans the fragment actually occupies, so tomographicity is
    not required.
    """
    f = as_fragment(f)
    tol = Tolerance.coerce(tol)
    Qs = span_basis(f.states, tol)
    Qe = span_basis(f.effects, tol)
    Cs = f.states @ Qs
    Ce = f.effects @ Qe
    cu = Ce[f.unit_index]
    P = Qe.T @ f.prob_rule @ Qs
    w_state = P.T @ cu  # unit functional in state coordinates
    Bf = cone_facets(Cs, w_state, tol)

    gens = np.vstack([Ce, cu[None, :] - Ce])
    gens = gens[np.max(np.abs(gens), axis=1) > tol.abs_eps]
    w_eff = _interior_functional(gens, P @ Cs.mean(axis=0), tol)
    Af = cone_facets(gens, w_eff, tol)
    A = (Af / (Af @ cu)[:, None]).T  # columns take value one on u

    ke, re = A.shape
    rs, ks = Bf.shape
    rows = np.array([np.kron(A[p], Bf[:, q]) for p in range(ke) for q in range(ks)])
    lp = LpProblem(rows, P.ravel())
    out: LpOutcome = lp_solve(lp, tol)
    if not out.feasible:
        return SimplexCertificate(Verdict.NOT_EMBEDDABLE, lp, A, Bf, P, farkas=out.farkas)

    sigma = out.witness.reshape(re, rs)
    used = sigma.sum(axis=1) > 1e-12
    iota = (sigma @ Bf @ Qs.T)[used]
    kappa = (A.T @ Qe.T)[used]
    maps = MapPair(iota, kappa)
    t = int(used.sum())
    rep = verify_simplex_embedding(f, maps, t, tol)
    if not rep.passed:
        raise WitnessVerificationFailed(
            "LP reported feasibility but the constructed maps failed: "
            + "; ".join(x.message for x in rep.errors()[:3])
        )
    return SimplexCertificate(
        Verdict.EMBEDDABLE, lp, A, Bf, P, sigma=sigma, witness_maps=maps, dimension=t
    )


def simplex_embed(G, tol=None) -> SimplexCertificate:
    """Simplex embeddability of a tomographic GPT.

    Raises
    ------
    NotTomographic
        Non-tomographic fragments go through ``classify_fragment``.
    """
    f = as_fragment(G)
    if not is_tomographic(f, tol):
        raise NotTomographic(f"{f.name} is not tomographic")
    return fragment_simplex_embed(f, tol)


# ----------------------------------------------------------------------------
# Equivalence
# ----------------------------------------------------------------------------


def _pruned(f: Fragment, tol) -> Fragment:
    ks = prune_extremal(f.states, tol)
    ke = prune_extremal(f.effects, tol, keep=(f.unit_index, f.zero_index))
    if len(ks) == f.n_states and len(ke) == f.n_effects:
        return f
    return Fragment(
        f.name,
        f.states[ks],
        f.effects[ke],
        ke.index(f.unit_index),
        ke.index(f.zero_index),
        f.prob_rule,
    )


def _value_codes(D1, D2, tol):
    vals = np.concatenate([D1.ravel(), D2.ravel()])
    order = np.argsort(vals, kind="stable")
    codes = np.empty(vals.shape[0], dtype=int)
    code = -1
    prev = None
    for idx in order:
        v = vals[idx]
        if prev is None or v - prev > tol.bound(max(abs(v), abs(prev))):
            code += 1
        codes[idx] = code
        prev = v
    return codes[: D1.size].reshape(D1.shape), codes[D1.size :].reshape(D2.shape)


def is_surjective_on_generators(G, maps: MapPair, tol=None) -> bool:
    """Does ``iota`` permute the extremal states (and ``kappa`` the effects)?"""
    f = as_fragment(G)
    tol = Tolerance.coerce(tol)

    def onto(images, targets):
        hit = set()
        for x in images:
            for j, y in enumerate(targets):
                if tol.close(x, y):
                    hit.add(j)
                    break
            else:
                return False
        return len(hit) == len(targets)

    return onto(f.states @ maps.iota.T, f.states) and onto(f.effects @ maps.kappa.T, f.effects)


def iter_equivalences(G1, G2, tol=None, prune=True) -> Iterator[MapPair]:
    """All verified equivalence witnesses, one per table-matching permutation.

    Columns (states) of the first table are assigned to columns of the second
    in index order; a partial assignment survives only if the multisets of
    partial row patterns agree, with the unit and zero rows pinned.
    """
    tol = Tolerance.coerce(tol)
    f1 = as_fragment(G1)
    f2 = as_fragment(G2)
    if prune:
        f1 = _pruned(f1, tol)
        f2 = _pruned(f2, tol)
    D1, D2 = f1.table(), f2.table()
    if D1.shape != D2.shape:
        return
    m, n = D1.shape
    C1, C2 = _value_codes(D1, D2, tol)
    colsig1 = [tuple(sorted(C1[:, i])) for i in range(n)]
    colsig2 = [tuple(sorted(C2[:, i])) for i in range(n)]
    if Counter(colsig1) != Counter(colsig2):
        return
    if Counter(tuple(sorted(r)) for r in C1) != Counter(tuple(sorted(r)) for r in C2):
        return
    pins1 = (f1.unit_index, f1.zero_index)
    pins2 = (f2.unit_index, f2.zero_index)
    free1 = [j for j in range(m) if j not in pins1]
    free2 = [j for j in range(m) if j not in pins2]
    if tuple(sorted(C1[pins1[0]])) != tuple(sorted(C2[pins2[0]])):
        return

    S1, E1 = f1.state_matrix(), f1.effect_matrix()
    rs1, re1 = numerical_rank(S1, tol), numerical_rank(E1, tol)
    if rs1 != numerical_rank(f2.state_matrix(), tol) or re1 != numerical_rank(
        f2.effect_matrix(), tol
    ):
        return

    assign: List[int] = []
    used = [False] * n

    def consistent(t):
        cols1 = list(range(t))
        k1 = C1[:, cols1]
        k2 = C2[:, assign]
        for a, b in zip(pins1, pins2):
            if not np.array_equal(k1[a], k2[b]):
                return False
        return Counter(tuple(k1[j]) for j in free1) == Counter(tuple(k2[j]) for j in free2)

    def build():
        pi = list(assign)
        rows2 = defaultdict(list)
        for j in free2:
            rows2[tuple(C2[j, pi])].append(j)
        rho = [0] * m
        rho[pins1[0]], rho[pins1[1]] = pins2
        for j in free1:
            rho[j] = rows2[tuple(C1[j, :])].pop(0)
        try:
            iota = _fit(S1, f2.state_matrix()[:, pi], tol)
            kappa = _fit(E1, f2.effect_matrix()[:, rho], tol)
        except InconsistentTable:
            return None
        maps = MapPair(iota, kappa)
        if numerical_rank(iota @ S1, tol) != rs1 or numerical_rank(kappa @ E1, tol) != re1:
            return None
        if not verify_embedding(f1, f2, maps, tol).passed:
            return None
        if not verify_embedding(f2, f1, maps.inverse(), tol).passed:
            return None
        return maps

    def search(t):
        if t == n:
            maps = build()
            if maps is not None:
                yield maps
            return
        for c in range(n):
            if used[c] or colsig2[c] != colsig1[t]:
                continue
            used[c] = True
            assign.append(c)
            if consistent(t + 1):
                yield from search(t + 1)
            assign.pop()
            used[c] = False

    yield from search(0)


def _fit(X, Y, tol):
    from .shadow import solve_linear_map

    return solve_linear_map(X, Y, tol, "equivalence map")


def check_equivalence(G1, G2, tol=None, prune=True) -> Optional[MapPair]:
    """An invertible embedding of ``G1`` onto ``G2``, or None."""
    for maps in iter_equivalences(G1, G2, tol, prune):
        return maps
    return None
