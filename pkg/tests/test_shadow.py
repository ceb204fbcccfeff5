import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gptshadow.constructions import (
    bloch_z_fragment,
    classical_bit,
    gbit,
    holevo,
    holevo_gbit,
    hyperdecohere,
    random_fragment,
    stabilizer_qubit,
    two_disk,
    two_disk_projections,
    z_dephasing,
)
from gptshadow.embedding import check_equivalence
from gptshadow.errors import InconsistentTable, MissingUnitRow, ValidationFailed
from gptshadow.fragment import DataTable, Fragment, data_table, is_tomographic
from gptshadow.numerics import Tolerance, numerical_rank
from gptshadow.shadow import (
    quotient_shadow,
    shadow_of_table_equals_quotient,
    tomography,
    verify_shadow_maps,
)

TOL = Tolerance()


def span_kernel_dim(M, X):
    """dim of the kernel of M restricted to the column span of X."""
    r = numerical_rank(X)
    return r - numerical_rank(M @ X)


def random_pair(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    return random_fragment(seed, n, int(rng.integers(1, 7)), int(rng.integers(1, 5)))


class TestQuotientShadow:
    def test_classical_bit(self):
        sh = quotient_shadow(classical_bit())
        assert sh.k == 2 and sh.faithful
        assert np.linalg.matrix_rank(sh.sigma) == 2 and np.linalg.matrix_rank(sh.tau) == 2
        assert check_equivalence(sh.shadow, classical_bit()) is not None

    def test_holevo_gbit(self):
        sh = quotient_shadow(holevo_gbit())
        assert sh.k == 3 and not sh.states_faithful and sh.effects_faithful
        assert check_equivalence(sh.shadow, gbit()) is not None

    def test_bloch_z_is_a_bit(self):
        sh = quotient_shadow(bloch_z_fragment(12))
        assert sh.shadow.n_states == 2
        assert check_equivalence(sh.shadow, classical_bit()) is not None

    @pytest.mark.parametrize("N", [2, 3, 7, 12, 20])
    def test_bloch_z_any_n(self, N):
        assert quotient_shadow(bloch_z_fragment(N)).shadow.n_states == 2

    def test_invalid_input(self):
        f = Fragment("bad", [[1, 0], [0, 1]], [[2, 0], [1, 1], [0, 0]], 1, 2)
        with pytest.raises(ValidationFailed):
            quotient_shadow(f)

    def test_printed_shadow_maps(self):
        # states pushed through L, effects through the transposed right inverse
        hb = holevo(gbit())
        sh = verify_shadow_maps(hb.fragment, hb.L, hb.L_r_inv.T)
        np.testing.assert_allclose(sh.shadow.states, gbit().states, atol=1e-12)
        np.testing.assert_allclose(sh.shadow.effects, gbit().effects, atol=1e-12)
        np.testing.assert_allclose(sh.shadow.prob_rule, np.eye(3), atol=1e-12)

    def test_bad_shadow_maps(self):
        hb = holevo(gbit())
        lossy = hb.L.copy()
        lossy[2] = 0.0  # forgets the s3/s4 distinction that the effects see
        with pytest.raises(InconsistentTable):
            verify_shadow_maps(hb.fragment, lossy, hb.L_r_inv.T)


class TestTomography:
    def test_bit_table(self):
        t = DataTable([[1, 0], [0, 1], [1, 1], [0, 0]], ("a", "b", "#unit", "#zero"), ("x", "y"))
        r = tomography(t)
        assert r.k == 2
        assert check_equivalence(r.gpt, classical_bit()) is not None

    def test_gbit_table(self):
        r = tomography(data_table(gbit()))
        assert r.k == 3
        np.testing.assert_allclose(r.E @ r.S, data_table(gbit()).entries, atol=1e-12)
        assert check_equivalence(r.gpt, gbit()) is not None

    def test_indistinguishable_states(self):
        t = DataTable([[1, 1, 1], [0, 0, 0]], ("#unit", "#zero"), ("a", "b", "c"))
        r = tomography(t)
        assert r.k == 1 and r.gpt.n_states == 1

    def test_missing_unit(self):
        t = DataTable([[1, 0], [0, 0]], ("a", "#zero"), ("x", "y"))
        with pytest.raises(MissingUnitRow):
            tomography(t)

    def test_missing_zero_supplied(self):
        t = DataTable([[1, 0], [0, 1], [1, 1]], ("a", "b", "#unit"), ("x", "y"))
        r = tomography(t)
        assert r.gpt.n_effects == 4


class TestTomographyEqualsShadow:
    def test_classical_bit(self):
        assert shadow_of_table_equals_quotient(classical_bit())

    def test_holevo_gbit(self):
        assert shadow_of_table_equals_quotient(holevo_gbit())

    def test_random_batch(self):
        assert all(shadow_of_table_equals_quotient(random_pair(s)) for s in range(50))


class TestLaws:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_kernel_law(self, seed):
        f = random_pair(seed)
        sh = quotient_shadow(f)
        rD = numerical_rank(f.table())
        S, E = f.state_matrix(), f.effect_matrix()
        assert span_kernel_dim(sh.sigma, S) == numerical_rank(S) - rD
        assert span_kernel_dim(sh.tau, E) == numerical_rank(E) - rD

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_probability_preservation(self, seed):
        f = random_pair(seed)
        sh = quotient_shadow(f)
        img = sh.effect_images @ sh.state_images.T
        assert np.max(np.abs(img - f.table())) <= 10 * TOL.bound(1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_idempotence(self, seed):
        s1 = quotient_shadow(random_pair(seed)).shadow
        s2 = quotient_shadow(s1).shadow
        assert check_equivalence(s1, s2) is not None

    def test_faithfulness_law(self):
        tomo = nontomo = 0
        for seed in range(100):
            # full-span states versus too few states for the ambient space
            f = random_fragment(seed, 3, 6, 4) if seed % 2 else random_fragment(seed, 4, 2, 3)
            sh = quotient_shadow(f)
            t = is_tomographic(f)
            tomo += t
            nontomo += not t
            injective = (
                span_kernel_dim(sh.sigma, f.state_matrix()) == 0
                and span_kernel_dim(sh.tau, f.effect_matrix()) == 0
            )
            assert injective == t == sh.faithful
        assert tomo > 20 and nontomo > 20

    def test_shadow_uniqueness_two_disk(self):
        f = two_disk(16, 30)
        (sa, ta), (sb, tb) = two_disk_projections(30)
        a = verify_shadow_maps(f, sa, ta).shadow
        b = verify_shadow_maps(f, sb, tb).shadow
        q = quotient_shadow(f).shadow
        for x, y in [(a, b), (a, q), (b, q)]:
            assert check_equivalence(x, y) is not None

    def test_probability_rule_uniqueness(self):
        # decohered octahedron: states span only two of four directions
        g = hyperdecohere(stabilizer_qubit(), z_dephasing()).decohered.inner
        y = np.array([0.0, 1.0, -2.0, 0.0])  # annihilates every state
        assert np.allclose(g.states @ y, 0)
        for x in (np.array([1.0, 0, 0, 0]), np.array([0.3, -1.0, 0.5, 2.0])):
            h = Fragment("perturbed", g.states, g.effects, g.unit_index, g.zero_index,
                         g.prob_rule + np.outer(x, y))
            np.testing.assert_allclose(h.table(), g.table(), atol=1e-12)
            # the canonical rule on the spans is the same for both
            Ps = g.states.T @ np.linalg.pinv(g.states.T)
            Pe = g.effects.T @ np.linalg.pinv(g.effects.T)
            np.testing.assert_allclose(Pe.T @ h.prob_rule @ Ps, Pe.T @ g.prob_rule @ Ps, atol=1e-12)
            ident = np.eye(4)
            rh = verify_shadow_maps(h, ident, ident).shadow.prob_rule
            rg = verify_shadow_maps(g, ident, ident).shadow.prob_rule
            np.testing.assert_allclose(rh, rg, atol=1e-12)
