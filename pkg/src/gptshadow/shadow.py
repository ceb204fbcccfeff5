"""Shadows of fragments and theory-agnostic tomography.

The shadow identifies states (effects) that no available effect (state)
distinguishes.  Concretely it is read off a minimal-rank factorization of the
data table ``D = E @ S``: the state-side map ``sigma`` sends ``s_i`` to column
``i`` of ``S`` and the effect-side map ``tau`` sends ``e_j`` to row ``j`` of
``E``.  Both maps are recovered as honest linear maps on the ambient spaces by
a least-squares solve followed by a residual check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import InconsistentTable, MissingUnitRow, NotTomographic
from .fragment import (
    UNIT_LABEL,
    ZERO_LABEL,
    DataTable,
    Fragment,
    GptSystem,
    Strictness,
    as_fragment,
    data_table,
    is_tomographic,
    prune_extremal,
    validate,
)
from .numerics import Tolerance, numerical_rank, rank_factorize

__all__ = [
    "ShadowResult",
    "TomographyResult",
    "quotient_shadow",
    "tomography",
    "shadow_of_table_equals_quotient",
    "verify_shadow_maps",
    "solve_linear_map",
]


@dataclass(frozen=True, eq=False)
class ShadowResult:
    """A shadow together with its shadow maps.

    Attributes
    ----------
    shadow : GptSystem
        Lives in ``R^k`` with the evaluation rule ``B = I`` (for shadows
        produced by :func:`quotient_shadow`).
    sigma : ndarray, shape (k_s, d_s)
        State-side map, ``s -> sigma @ s``.
    tau : ndarray, shape (k_e, d_e)
        Effect-side map, ``e -> tau @ e``.
    state_images, effect_images : ndarray
        Images of every generator (one per row) before pruning.
    """

    shadow: GptSystem
    sigma: np.ndarray
    tau: np.ndarray
    k: int
    state_images: np.ndarray
    effect_images: np.ndarray
    states_faithful: bool
    effects_faithful: bool

    @property
    def faithful(self) -> bool:
        return self.states_faithful and self.effects_faithful


@dataclass(frozen=True, eq=False)
class TomographyResult:
    gpt: GptSystem
    E: np.ndarray
    S: np.ndarray
    k: int


def solve_linear_map(X, Y, tol=None, what="map") -> np.ndarray:
    """Least-squares ``M`` with ``M @ X = Y``; raises if the fit is not exact."""
    tol = Tolerance.coerce(tol)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    M = Y @ np.linalg.pinv(X)
    resid = np.max(np.abs(M @ X - Y), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(Y), initial=0.0)))
    if resid > 10 * tol.bound(scale) * max(1, X.shape[0]):
        raise InconsistentTable(f"no linear {what} reproduces the table (residual {resid:.3e})")
    return M


def _shadow_fragment(name, S_img, E_img, unit_index, zero_index, B, tol) -> Fragment:
    keep_s = prune_extremal(S_img, tol)
    keep_e = prune_extremal(E_img, tol, keep=(unit_index, zero_index))
    # pruning keeps order, so the pinned indices move to their rank in keep_e
    return Fragment(
        name,
        S_img[keep_s],
        E_img[keep_e],
        keep_e.index(unit_index),
        keep_e.index(zero_index),
        B,
    )


def quotient_shadow(f, tol=None) -> ShadowResult:
    """Shadow of a fragment by quotienting the kernels of its probability rule.

    Raises
    ------
    ValidationFailed
        If the fragment fails Lenient validation.
    """
    f = as_fragment(f)
    tol = Tolerance.coerce(tol)
    validate(f, tol, Strictness.LENIENT).raise_if_failed(f"validation of {f.name}")
    D = f.table()
    E, S, k = rank_factorize(D, tol)
    sigma = solve_linear_map(f.state_matrix(), S, tol, "state map")
    tau = solve_linear_map(f.effect_matrix(), E.T, tol, "effect map")
    S_img = S.T.copy()
    E_img = E.copy()
    frag = _shadow_fragment(
        f"shadow({f.name})", S_img, E_img, f.unit_index, f.zero_index, None, tol
    )
    return ShadowResult(
        GptSystem(frag, tol),
        sigma,
        tau,
        k,
        S_img,
        E_img,
        numerical_rank(f.state_matrix(), tol) == k,
        numerical_rank(f.effect_matrix(), tol) == k,
    )


def tomography(D: DataTable, tol=None) -> TomographyResult:
    """Reconstruct the minimal GPT compatible with a data table.

    A missing zero row is supplied (it carries no information).  A missing
    unit row is an error since normalization cannot be inferred.
    """
    tol = Tolerance.coerce(tol)
    if not isinstance(D, DataTable):
        M = np.asarray(D, dtype=float)
        D = DataTable(M, tuple(f"e{j}" for j in range(M.shape[0])), tuple(f"s{i}" for i in range(M.shape[1])))
    u = D.unit_row(tol)
    if u is None:
        raise MissingUnitRow("data table has no all-ones row")
    M = np.array(D.entries)
    z = D.zero_row(tol)
    if z is None:
        M = np.vstack([M, np.zeros(M.shape[1])])
        z = M.shape[0] - 1
    E, S, k = rank_factorize(M, tol)
    frag = _shadow_fragment("tomography", S.T.copy(), E.copy(), u, z, None, tol)
    report = validate(frag, tol, Strictness.LENIENT)
    report.raise_if_failed("reconstructed GPT")
    return TomographyResult(GptSystem(frag, tol), E, S, k)


def shadow_of_table_equals_quotient(f, tol=None) -> bool:
    """Tomography of the serialized table agrees with the quotient shadow."""
    from .embedding import check_equivalence

    f = as_fragment(f)
    tol = Tolerance.coerce(tol)
    t = tomography(data_table(f), tol)
    q = quotient_shadow(f, tol)
    return check_equivalence(t.gpt, q.shadow, tol) is not None


def verify_shadow_maps(f, sigma, tau, tol=None, name=None) -> ShadowResult:
    """Build the shadow induced by user-supplied shadow maps.

    The maps are accepted iff some bilinear rule ``B'`` on the image spaces
    reproduces every table entry and the image fragment is tomographic.
    ``B'`` is taken as the minimum-norm solution, which is the unique rule
    on the image spans.

    Raises
    ------
    InconsistentTable
        If no rule reproduces the table.
    NotTomographic
        If the images still carry unresolved kernels.
    """
    f = as_fragment(f)
    tol = Tolerance.coerce(tol)
    sigma = np.asarray(sigma, dtype=float)
    tau = np.asarray(tau, dtype=float)
    Sg = sigma @ f.state_matrix()  # k_s x n
    Te = tau @ f.effect_matrix()  # k_e x m
    D = f.table()
    B = np.linalg.pinv(Te.T) @ D @ np.linalg.pinv(Sg)
    resid = np.max(np.abs(Te.T @ B @ Sg - D))
    if resid > 10 * tol.bound(1.0) * max(D.shape):
        raise InconsistentTable(f"shadow maps do not preserve probabilities (residual {resid:.3e})")
    frag = _shadow_fragment(
        name or f"shadow({f.name})", Sg.T.copy(), Te.T.copy(), f.unit_index, f.zero_index, B, tol
    )
    if not is_tomographic(frag, tol):
        raise NotTomographic("image of the supplied shadow maps is not tomographic")
    return ShadowResult(
        GptSystem(frag, tol),
        sigma,
        tau,
        numerical_rank(D, tol),
        Sg.T.copy(),
        Te.T.copy(),
        numerical_rank(Sg, tol) == numerical_rank(f.state_matrix(), tol),
        numerical_rank(Te, tol) == numerical_rank(f.effect_matrix(), tol),
    )
