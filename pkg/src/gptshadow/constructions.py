"""Named GPTs and fragments, the Holevo construction and hyperdecoherence."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from .embedding import MapPair, verify_embedding
from .errors import (
    BadParams,
    DimensionMismatch,
    NotDiscardPreserving,
    NotIdempotent,
    NotPhysical,
    UnknownName,
    WitnessVerificationFailed,
)
from .fragment import Fragment, GptSystem, as_fragment, prune_extremal
from .numerics import Tolerance, as_matrix, in_conv_hull, right_inverse

__all__ = [
    "HolevoBundle",
    "HyperdecBundle",
    "holevo",
    "hyperdecohere",
    "zoo",
    "ZOO_NAMES",
    "random_fragment",
    "simplex",
    "classical_bit",
    "gbit",
    "stabilizer_qubit",
    "rebit_polygon",
    "bloch_z_fragment",
    "two_disk",
    "holevo_gbit",
    "z_dephasing",
    "two_disk_projections",
]


@dataclass(frozen=True, eq=False)
class HolevoBundle:
    fragment: Fragment
    L: np.ndarray
    L_r_inv: np.ndarray


@dataclass(frozen=True, eq=False)
class HyperdecBundle:
    decohered: GptSystem
    H: np.ndarray
    witness: MapPair


def holevo(G, tol=None) -> HolevoBundle:
    """Simplicial fragment whose shadow is ``G``.

    Every extremal state of ``G`` becomes a vertex of a simplex, and every
    effect ``e`` becomes the functional on the vertices listing its
    probabilities, ``xi_e = L^T B^T e`` where the columns of ``L`` are the
    states.

    Raises
    ------
    NotSurjective
        If the states of ``G`` do not span its state space.
    """
    f = as_fragment(G)
    tol = Tolerance.coerce(tol)
    L = f.state_matrix()
    R = right_inverse(L, tol)
    n = f.n_states
    xi = f.effects @ f.prob_rule @ L
    labels = f.effect_labels or tuple(f"e{j}" for j in range(f.n_effects))
    frag = Fragment(
        f"holevo({f.name})",
        np.eye(n),
        xi,
        f.unit_index,
        f.zero_index,
        None,
        tuple(f"mu{i}" for i in range(n)),
        tuple(f"xi_{x}" for x in labels),
    )
    return HolevoBundle(frag, L, R)


def hyperdecohere(G, H, tol=None) -> HyperdecBundle:
    """Image of ``G`` under an idempotent, discard-preserving physical map.

    States become ``H s``; effects become ``e o H``, which for a probability
    rule ``B`` is the vector ``B^-T H^T B^T e``.

    Raises
    ------
    NotIdempotent, NotDiscardPreserving, NotPhysical
    """
    f = as_fragment(G)
    tol = Tolerance.coerce(tol)
    H = as_matrix(H, "H")
    d = f.state_dim
    if H.shape != (d, d):
        raise DimensionMismatch(f"H has shape {H.shape}, expected ({d}, {d})")
    B = f.prob_rule
    if B.shape[0] != B.shape[1]:
        raise DimensionMismatch("hyperdecoherence needs a square probability rule")
    dev = np.max(np.abs(H @ H - H))
    if dev > tol.bound(np.max(np.abs(H))):
        raise NotIdempotent(f"||H H - H|| = {dev:.3e}")
    ub = f.unit @ B
    for i, s in enumerate(f.states):
        if abs(ub @ H @ s - ub @ s) > tol.bound(1.0):
            raise NotDiscardPreserving(f"H changes the normalization of s{i}")
    K = np.linalg.solve(B.T, H.T @ B.T)  # effect-side action
    S_img = f.states @ H.T
    E_img = f.effects @ K.T
    for i, x in enumerate(S_img):
        if not in_conv_hull(x, f.states, tol, mode="subconvex"):
            raise NotPhysical(f"H s{i} is not a state of {f.name}")
    for j, y in enumerate(E_img):
        if not in_conv_hull(y, f.effects, tol):
            raise NotPhysical(f"e{j} o H is not an effect of {f.name}")
    ks = prune_extremal(S_img, tol)
    ke = prune_extremal(E_img, tol, keep=(f.unit_index, f.zero_index))
    frag = Fragment(
        f"hyperdec({f.name})",
        S_img[ks],
        E_img[ke],
        ke.index(f.unit_index),
        ke.index(f.zero_index),
        B,
    )
    dec = GptSystem(frag, tol)
    witness = MapPair.identity(d, f.effect_dim)
    rep = verify_embedding(dec, f, witness, tol)
    if not rep.passed:
        raise WitnessVerificationFailed("identity inclusion of the decohered GPT failed")
    return HyperdecBundle(dec, H, witness)


# ----------------------------------------------------------------------------
# Zoo
# ----------------------------------------------------------------------------


def simplex(n: int) -> Fragment:
    """Classical GPT with ``n`` perfectly distinguishable states.

    Effects are all 0/1 vectors: singletons first, then larger subsets by
    size, then the unit and the zero effect.
    """
    n = _count(n, "n")
    eff = []
    for size in range(1, n):
        for sub in itertools.combinations(range(n), size):
            v = np.zeros(n)
            v[list(sub)] = 1.0
            eff.append(v)
    eff.append(np.ones(n))
    eff.append(np.zeros(n))
    return Fragment(f"simplex({n})", np.eye(n), eff, len(eff) - 2, len(eff) - 1)


def classical_bit() -> Fragment:
    return simplex(2).with_name("classical_bit")


def gbit() -> Fragment:
    states = [[1, 1, 0], [1, -1, 0], [1, 0, 1], [1, 0, -1]]
    effects = [
        [0.5, 0.5, 0.5],
        [0.5, 0.5, -0.5],
        [0.5, -0.5, 0.5],
        [0.5, -0.5, -0.5],
        [1, 0, 0],
        [0, 0, 0],
    ]
    return Fragment(
        "gbit",
        states,
        effects,
        4,
        5,
        None,
        ("s1", "s2", "s3", "s4"),
        ("e13", "e14", "e23", "e24", "u", "0"),
    )


def _axes():
    return [np.array(v, float) for v in ([1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1])]


def stabilizer_qubit() -> Fragment:
    """Octahedron of the six Pauli eigenstates in (1, x, y, z) coordinates."""
    states = [np.concatenate([[1.0], a]) for a in _axes()]
    effects = [0.5 * s for s in states] + [np.array([1.0, 0, 0, 0]), np.zeros(4)]
    return Fragment("stabilizer_qubit", states, effects, 6, 7)


def rebit_polygon(N: int = 8) -> Fragment:
    """Regular N-gon of real qubit states in (1, x, z) coordinates.

    Effects are the half-vectors of both the vertex directions and their
    antipodes, so the effect set is closed under complements for any N.
    """
    N = _count(N, "N", 3)
    th = 2 * np.pi * np.arange(N) / N
    states = np.column_stack([np.ones(N), np.cos(th), np.sin(th)])
    dirs = np.vstack([states, np.column_stack([np.ones(N), -np.cos(th), -np.sin(th)])])
    effects = np.vstack([0.5 * dirs, [[1.0, 0, 0], [0, 0, 0]]])
    return Fragment(f"rebit_polygon({N})", states, effects, 2 * N, 2 * N + 1)


def _icosahedron_polar():
    r = 2 / math.sqrt(5)
    h = 1 / math.sqrt(5)
    pts = [(0.0, 0.0, 1.0)]
    for k in range(5):
        a = 2 * math.pi * k / 5
        pts.append((r * math.cos(a), r * math.sin(a), h))
    for k in range(5):
        a = 2 * math.pi * k / 5 + math.pi / 5
        pts.append((r * math.cos(a), r * math.sin(a), -h))
    pts.append((0.0, 0.0, -1.0))
    return np.array(pts)


def _sphere_points(N):
    if N == 12:
        return _icosahedron_polar()
    k = np.arange(N)
    z = 1 - 2 * k / (N - 1)
    rad = np.sqrt(np.clip(1 - z * z, 0, None))
    phi = k * math.pi * (3 - math.sqrt(5))
    return np.column_stack([rad * np.cos(phi), rad * np.sin(phi), z])


def bloch_z_fragment(N: int = 12) -> Fragment:
    """Polytope approximation of the Bloch ball measured only along Z.

    States live in (1, x, y, z) coordinates; the available effects are
    written in the two-dimensional (1, z) representation, linked to the
    states by ``B = [[1, 0, 0, 0], [0, 0, 0, 1]]``.  N = 12 gives an
    icosahedron with vertices at the poles; other N use a spiral point set
    that also contains both poles.
    """
    N = _count(N, "N", 2)
    pts = _sphere_points(N)
    states = np.column_stack([np.ones(N), pts])
    effects = [[0.5, 0.5], [0.5, -0.5], [1.0, 0.0], [0.0, 0.0]]
    B = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
    return Fragment(f"bloch_z_fragment({N})", states, effects, 2, 3, B)


def _tilted(angle_deg):
    a = math.radians(angle_deg)
    Js = np.array([[1.0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]])
    Je = np.array([[1.0, 0, 0], [0, 1, 0], [0, 0, math.cos(a)], [0, 0, math.sin(a)]])
    return Js, Je


def two_disk(N: int = 16, angle: float = 30.0) -> Fragment:
    """Disk of states and a tilted disk of effects on a qubit.

    Both disks are N-gons through the x axis of the Bloch ball.  Each set is
    written in the coordinates of its own plane, (1, x, w); the tilt angle
    (degrees) enters only through ``B = J_e^T J_s`` where ``J_s`` and ``J_e``
    place the planes in (1, x, y, z).
    """
    N = _count(N, "N", 3)
    angle = float(angle)
    if not (0.0 <= angle < 90.0):
        raise BadParams("angle must lie in [0, 90) degrees so the disks are not orthogonal")
    th = 2 * np.pi * np.arange(N) / N
    disk = np.column_stack([np.ones(N), np.cos(th), np.sin(th)])
    anti = np.column_stack([np.ones(N), -np.cos(th), -np.sin(th)])
    effects = np.vstack([0.5 * disk, 0.5 * anti, [[1.0, 0, 0], [0, 0, 0]]])
    Js, Je = _tilted(angle)
    return Fragment(
        f"two_disk({N},{angle:g})", disk, effects, 2 * N, 2 * N + 1, Je.T @ Js
    )


def two_disk_projections(angle: float = 30.0):
    """The two projection-style shadow map pairs of the two-disk fragment.

    Returns ``((sigma_a, tau_a), (sigma_b, tau_b))``.  In (a) the effect
    disk is projected onto the state plane; in (b) the state disk is
    projected onto the effect plane.
    """
    Js, Je = _tilted(angle)
    proj_e_to_s = Js.T @ Je  # effect-plane coordinates -> state-plane coordinates
    proj_s_to_e = Je.T @ Js
    return (np.eye(3), proj_e_to_s), (proj_s_to_e, np.eye(3))


def holevo_gbit() -> Fragment:
    return holevo(gbit()).fragment.with_name("holevo_gbit")


def z_dephasing() -> np.ndarray:
    """Projection keeping the unit and Z components of (1, x, y, z)."""
    return np.diag([1.0, 0.0, 0.0, 1.0])


def _count(x, name, lo=1) -> int:
    try:
        v = int(x)
    except (TypeError, ValueError):
        raise BadParams(f"{name} must be an integer, got {x!r}") from None
    if v != x and not (isinstance(x, str) and str(v) == x.strip()):
        raise BadParams(f"{name} must be an integer, got {x!r}")
    if v < lo:
        raise BadParams(f"{name} must be at least {lo}, got {v}")
    return v


def random_fragment(seed: int, n_ambient: int = 3, n_states: int = 4, n_effects: int = 3) -> Fragment:
    """Seeded random fragment of the simplicial GPT on ``n_ambient`` points.

    States are Dirichlet samples from the probability simplex; effects are
    uniform in the unit cube, closed under complement, with ``u`` and ``0``
    appended.  Non-extremal samples are pruned.
    """
    n_ambient = _count(n_ambient, "n_ambient")
    n_states = _count(n_states, "n_states")
    n_effects = _count(n_effects, "n_effects")
    rng = np.random.default_rng(int(seed))
    S = rng.dirichlet(np.ones(n_ambient), size=n_states)
    E = np.clip(rng.uniform(0.0, 1.0, size=(n_effects, n_ambient)), 0.0, 1.0)
    E = np.vstack([E, 1.0 - E, np.ones((1, n_ambient)), np.zeros((1, n_ambient))])
    m = E.shape[0]
    ks = prune_extremal(S)
    ke = prune_extremal(E, keep=(m - 2, m - 1))
    return Fragment(
        f"random({seed},{n_ambient},{n_states},{n_effects})",
        S[ks],
        E[ke],
        ke.index(m - 2),
        ke.index(m - 1),
    )


_ZOO: Dict[str, Callable[..., Fragment]] = {
    "simplex": simplex,
    "classical_bit": classical_bit,
    "gbit": gbit,
    "stabilizer_qubit": stabilizer_qubit,
    "rebit_polygon": rebit_polygon,
    "bloch_z_fragment": bloch_z_fragment,
    "two_disk": two_disk,
    "holevo_gbit": holevo_gbit,
    "random": random_fragment,
}
ZOO_NAMES = tuple(_ZOO)


def zoo(name: str, **params) -> Fragment:
    """Look up a named construction; ``params`` are passed through.

    Raises
    ------
    UnknownName
        For names outside :data:`ZOO_NAMES`.
    BadParams
        For unexpected or out-of-range parameters.
    """
    try:
        ctor = _ZOO[name]
    except KeyError:
        raise UnknownName(f"unknown zoo entry {name!r}; known: {', '.join(ZOO_NAMES)}") from None
    try:
        return ctor(**params)
    except TypeError as exc:
        raise BadParams(f"{name}: {exc}") from None
