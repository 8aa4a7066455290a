import numpy as np
import pytest

from conftest import random_complex
from nchodge.algebra import circle, circle_algebra, commutant
from nchodge.linalg import fro, kron, matrix_unit, orthonormalize, subspace_contains_all, subspace_equal
from nchodge.standard_model import (
    CASE_PATTERNS,
    DELTA_KEYS,
    KO6_SIGNS,
    PARAM_KEYS,
    CaseVerdictConflict,
    SMDiracParams,
    big_algebra,
    case_verdicts,
    cc_params,
    classify_cases,
    commutant_span_reference,
    conjugate_by_u,
    displayed_ud0u,
    hodge_closed,
    j_linear_part,
    second_order_closed,
    second_order_products,
    sm_algebra_element,
    sm_algebra_generators,
    sm_build,
    sm_d0,
    sm_grading,
    sm_params,
    sm_real_structure,
    sm_rep,
    u_matrix,
)
from nchodge.triple import decompose, hodge, second_order, validate

E = matrix_unit
I4 = np.eye(4)


def generic(rng, zero=(), n=1, upsilon=0.0):
    entries = {k: random_complex(rng, n, n) for k in PARAM_KEYS if k != "upsilon_r"}
    for k in zero:
        entries[k] = 0.0
    return sm_params(n, upsilon_r=upsilon, **entries)


def flip_middle(s):
    return np.array([[s[1, 1], s[0, 1]], [s[1, 0], s[0, 0]]])


class TestParams:
    def test_scalars_promoted(self):
        p = sm_params(3, alpha13=2.0)
        np.testing.assert_array_equal(p["alpha13"], 2 * np.eye(3))
        assert fro(p["beta24"]) == 0

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            sm_params(1, gamma11=1.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            sm_params(2, alpha13=np.eye(3))

    def test_generations_positive(self):
        with pytest.raises(ValueError):
            SMDiracParams.zeros(0)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            sm_params(1, alpha13=np.inf)

    def test_from_scalars(self):
        p = SMDiracParams.from_scalars(alpha=[[1, 2], [3, 4]], delta={"21": 5j})
        assert p.scalar("alpha14") == 2 and p.scalar("delta21") == 5j
        np.testing.assert_array_equal(p.alpha, [[1, 2], [3, 4]])

    def test_replace(self):
        p = sm_params(1, alpha13=1).replace(alpha13=0, beta13=2)
        assert p.scalar("alpha13") == 0 and p.scalar("beta13") == 2

    def test_cc_params(self):
        p = cc_params(1, 2j, 3, 4)
        assert p.scalar("alpha13") == 1 and p.scalar("alpha24") == -2j
        assert p.scalar("beta13") == 3 and p.scalar("beta24") == 4
        p3 = cc_params(np.diag([1, 2, 3]), 1, 1, 1)
        assert p3.generations == 3
        with pytest.raises(ValueError):
            cc_params(np.eye(2), np.eye(3), 1, 1)


class TestRepresentation:
    def test_identity(self):
        np.testing.assert_array_equal(sm_rep(I4, np.eye(2), I4), np.eye(32))

    def test_products(self, rng):
        xs = [(random_complex(rng, 4, 4), random_complex(rng, 2, 2), random_complex(rng, 4, 4)) for _ in range(2)]
        (a1, s1, b1), (a2, s2, b2) = xs
        np.testing.assert_allclose(sm_rep(a1, s1, b1) @ sm_rep(a2, s2, b2),
                                   sm_rep(a1 @ a2, s1 @ s2, b1 @ b2), atol=1e-10)

    def test_circle_formula(self, rng):
        j = sm_real_structure()
        for _ in range(5):
            a, s, b = random_complex(rng, 4, 4), random_complex(rng, 2, 2), random_complex(rng, 4, 4)
            np.testing.assert_allclose(circle(sm_rep(a, s, b), j), sm_rep(b.T, flip_middle(s), a.T), atol=1e-12)

    def test_shapes_checked(self):
        with pytest.raises(ValueError):
            sm_rep(np.eye(3), np.eye(2), I4)

    def test_j_signs(self):
        j = sm_real_structure(2)
        np.testing.assert_array_equal(j.c @ j.c, np.eye(64))
        g = sm_grading(2)
        assert fro(j.conjugate(g) + g) == 0
        assert KO6_SIGNS.epsilon_double_prime == -1

    def test_j_permutation(self):
        c = j_linear_part(1)
        assert set(np.unique(c)) == {0.0, 1.0}
        np.testing.assert_array_equal(c.sum(axis=0), np.ones(32))


class TestAlgebra:
    def test_unit(self):
        np.testing.assert_array_equal(sm_algebra_element(1, np.eye(2), np.eye(3)), np.eye(32))

    def test_lambda_only(self):
        got = sm_algebra_element(1j, np.zeros((2, 2)), np.zeros((3, 3)))
        want = kron(np.diag([1j, -1j, 0, 0]), E(1, 1, 2), I4) + kron(np.diag([1j, 0, 0, 0]), E(2, 2, 2), I4)
        np.testing.assert_array_equal(got, want)

    def test_quaternion_checked(self):
        with pytest.raises(ValueError, match="quaternion"):
            sm_algebra_element(0, np.diag([1, 2]), np.zeros((3, 3)))

    def test_complex_algebra(self):
        t = sm_build(SMDiracParams.zeros()).triple
        a = t.structure()
        assert a.dim == 15
        assert sorted(a.block_table()) == [(1, 4), (1, 8), (2, 4), (3, 4)]

    def test_commutant(self):
        c = commutant(sm_algebra_generators())
        assert c.dim == 112
        assert subspace_equal(c.space, orthonormalize(commutant_span_reference()))

    def test_u_properties(self):
        u = u_matrix()
        np.testing.assert_array_equal(u @ u, np.eye(32))
        np.testing.assert_array_equal(u, u.conj().T)
        for g in sm_algebra_generators():
            assert fro(u @ g - g @ u) == 0
        assert fro(sm_real_structure().conjugate(u) - u) == 0


class TestBuild:
    def test_zero(self):
        sm = sm_build(SMDiracParams.zeros())
        assert fro(sm.triple.dirac) == 0
        rep = validate(sm.triple)
        assert rep.ok and rep.warnings

    def test_generic_valid(self, rng):
        for n in (1, 2):
            assert validate(sm_build(generic(rng, n=n, upsilon=0.3)).triple).ok

    def test_upsilon_symmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            sm_build(sm_params(2, upsilon_r=[[0, 1], [0, 0]]))

    def test_dirac_shape(self, rng):
        d = sm_build(generic(rng)).triple.dirac
        np.testing.assert_allclose(d, d.conj().T)
        j = sm_real_structure()
        np.testing.assert_allclose(j.conjugate(d), d, atol=1e-12)

    def test_d1_is_j_d0(self, rng):
        p = generic(rng)
        dec = decompose(sm_build(p).triple)
        np.testing.assert_allclose(dec.d0, sm_d0(p), atol=1e-12)

    def test_dr_commutes_with_algebra(self, rng):
        dec = decompose(sm_build(generic(rng, upsilon=2.0)).triple)
        for g in sm_algebra_generators():
            assert fro(dec.dr @ g - g @ dec.dr) < 1e-12

    def test_cc_second_order(self):
        assert second_order(sm_build(cc_params(1, 2, 3, 4)).triple).holds


class TestClassify:
    def test_zero(self):
        assert classify_cases(SMDiracParams.zeros()) == {1, 2, 3, 4}

    def test_case2_only(self, rng):
        zero = [k for k in DELTA_KEYS if k != "delta21"] + ["alpha13", "alpha14"]
        p = generic(rng, zero)
        assert classify_cases(p) == {2}

    def test_generic(self, rng):
        assert classify_cases(generic(rng)) == frozenset()

    def test_patterns(self, rng):
        for case, keys in CASE_PATTERNS.items():
            assert case in classify_cases(generic(rng, keys))

    def test_cc(self):
        assert classify_cases(cc_params(1, 1, 1, 1)) == {1}

    def test_second_order_closed_one_generation(self, rng):
        assert second_order_closed(generic(rng, DELTA_KEYS))
        assert not second_order_closed(generic(rng))

    def test_three_generations_cc(self, rng):
        mats = [random_complex(rng, 3, 3) for _ in range(4)]
        p = cc_params(*mats)
        assert second_order_closed(p)
        assert second_order(sm_build(p).triple).holds

    def test_two_generation_cancellation(self):
        p = sm_params(2, delta21=E(1, 1, 2), alpha13=E(2, 2, 2), alpha23=1.0, alpha24=2.0,
                      beta23=1.0, beta24=3.0, delta22=1.0, delta23=0.5, delta24=0.25)
        assert not classify_cases(p)
        assert second_order_closed(p)
        assert second_order(sm_build(p).triple).holds

    def test_products_listed(self):
        prods = second_order_products(SMDiracParams.zeros(2))
        assert len(prods) == 2 + 3 + 12


class TestHodgeClosed:
    def test_cc(self):
        assert hodge_closed(cc_params(1, 1, 1, 1)) is False
        assert hodge_closed(cc_params(1, 2, 3, 4)) is True
        assert hodge_closed(cc_params(0, 1, 1, 1)) is False

    def test_case1_identity(self):
        p = SMDiracParams.from_scalars(alpha=np.eye(2), beta=np.eye(2))
        assert hodge_closed(p) is False

    def test_case1_moduli_differ(self):
        p = SMDiracParams.from_scalars(alpha=np.eye(2), beta=np.diag([2, 1]))
        assert hodge_closed(p) is True

    def test_case4_example(self):
        p = SMDiracParams.from_scalars(alpha=[[0, 0], [1, 0]], beta=[[0, 0], [1, 0]],
                                       delta={"21": 1, "22": 1})
        assert 4 in classify_cases(p)
        assert hodge_closed(p) is True
        assert hodge(sm_build(p).triple).holds

    def test_no_case(self, rng):
        assert hodge_closed(generic(rng)) is None

    def test_several_generations(self):
        with pytest.raises(ValueError):
            hodge_closed(cc_params(np.eye(2), np.eye(2), np.eye(2), np.eye(2)))

    def test_case3_two_vectors(self, rng):
        zero = list(CASE_PATTERNS[3]) + ["alpha13", "alpha14", "delta12", "delta13", "delta14"]
        p = generic(rng, zero)
        assert case_verdicts(p)[3] is False
        assert hodge(sm_build(p).triple).holds is False

    def test_conflict_type(self):
        assert issubclass(CaseVerdictConflict, AssertionError)


class TestBigAlgebras:
    @pytest.mark.parametrize("case, dim, table", [
        (1, 42, [(1, 4), (3, 4), (4, 1), (4, 3)]),
        (3, 68, [(1, 7), (3, 3), (3, 3), (7, 1)]),
    ])
    def test_structure(self, case, dim, table):
        b = big_algebra(case)
        assert b.dim == dim
        assert sorted(b.block_table()) == table
        assert sum(m * k for m, k in table) == 32

    def test_opposite_is_commutant(self):
        j = sm_real_structure()
        for case in (1, 3):
            b = big_algebra(case)
            assert subspace_equal(commutant(b).space, circle_algebra(b, j).space)

    def test_cases_share(self):
        assert big_algebra(2) is big_algebra(1)
        assert big_algebra(4) is big_algebra(3)

    def test_bad_case(self):
        with pytest.raises(ValueError):
            big_algebra(5)

    def test_contains_algebra(self):
        gens = np.stack(sm_algebra_generators())
        for case in (1, 3):
            assert subspace_contains_all(big_algebra(case).space, gens)


class TestConjugateByU:
    def test_involution(self, rng):
        sm = sm_build(generic(rng, CASE_PATTERNS[2]))
        twice = conjugate_by_u(conjugate_by_u(sm))
        np.testing.assert_allclose(twice.triple.dirac, sm.triple.dirac, atol=1e-12)

    def test_displayed_shape(self, rng):
        p = generic(rng, CASE_PATTERNS[2])
        u = u_matrix()
        np.testing.assert_allclose(u @ sm_d0(p) @ u, displayed_ud0u(p), atol=1e-12)

    def test_hodge_unchanged(self, rng):
        for case in (2, 4):
            p = generic(rng, CASE_PATTERNS[case])
            sm = sm_build(p)
            assert hodge(conjugate_by_u(sm).triple).holds == hodge(sm.triple).holds
