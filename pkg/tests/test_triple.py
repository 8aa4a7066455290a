import numpy as np
import pytest

from conftest import random_complex, random_unitary
from nchodge.algebra import AntilinearMap, circle
from nchodge.linalg import fro, matrix_unit, subspace_contains_all
from nchodge.standard_model import cc_params, sm_build, sm_params
from nchodge.toys import m2_triple, scalar_c2_triple, transpose_permutation
from nchodge.triple import (
    RealSpectralTriple,
    SignTriple,
    clifford,
    commutes_with_algebra,
    decompose,
    first_order_via_decomposition,
    hodge,
    omega1,
    second_order,
    validate,
)

E = matrix_unit


@pytest.fixture(scope="module")
def cc1234():
    return sm_build(cc_params(1, 2, 3, 4, 0.5)).triple


@pytest.fixture(scope="module")
def generic_sm():
    rng = np.random.default_rng(5)
    keys = ("alpha13", "alpha14", "alpha23", "alpha24", "beta13", "beta14", "beta23", "beta24",
            "delta12", "delta13", "delta14", "delta21", "delta22", "delta23", "delta24")
    entries = {k: complex(*rng.standard_normal(2)) for k in keys}
    return sm_build(sm_params(1, upsilon_r=0.7, **entries)).triple


class TestSigns:
    def test_values_checked(self):
        with pytest.raises(ValueError):
            SignTriple(2, 1)
        with pytest.raises(ValueError):
            SignTriple(1, 1, 0)


class TestConstruction:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            RealSpectralTriple((np.eye(3),), np.eye(2), AntilinearMap(np.eye(2)), SignTriple(1, 1))

    def test_grading_needs_sign(self):
        with pytest.raises(ValueError, match="epsilon_double_prime"):
            RealSpectralTriple((np.eye(2),), np.zeros((2, 2)), AntilinearMap(np.eye(2)), SignTriple(1, 1),
                               np.diag([1.0, -1.0]))

    def test_j_dimension(self):
        with pytest.raises(ValueError):
            RealSpectralTriple((np.eye(2),), np.eye(2), AntilinearMap(np.eye(3)), SignTriple(1, 1))


class TestValidate:
    def test_sm_triple(self, generic_sm):
        rep = validate(generic_sm)
        assert rep.ok, rep.failures()
        assert rep["reality"].passed and rep["first order"].passed

    def test_m2_sum(self):
        rep = validate(m2_triple(mode="sum"))
        assert rep.ok

    def test_m2_product_fails_first_order_only(self):
        rep = validate(m2_triple(mode="product"))
        assert [c.name for c in rep.failures()] == ["first order"]

    def test_non_self_adjoint_dirac(self):
        t = m2_triple()
        bad = t.with_dirac(t.dirac + E(1, 2, 4))
        rep = validate(bad)
        assert not rep["dirac self-adjointness"].passed
        assert rep["dirac self-adjointness"].residual > 0.5

    def test_wrong_epsilon(self):
        t = m2_triple()
        flipped = RealSpectralTriple(t.algebra_generators, t.dirac, t.j, SignTriple(-1, 1))
        assert not validate(flipped)["J squared (epsilon)"].passed

    def test_degenerate_warning(self):
        t = m2_triple()
        rep = validate(t.with_dirac(np.zeros((4, 4))))
        assert rep.ok and rep.warnings

    def test_unknown_check(self):
        with pytest.raises(KeyError):
            validate(m2_triple())["nope"]


class TestOmegaAndClifford:
    def test_commuting_dirac(self):
        t = m2_triple().with_dirac(np.kron(np.eye(2), np.diag([1.0, 2.0])))
        assert omega1(t).dim == 0
        assert clifford(t).dim == t.complex_algebra().dim

    def test_upsilon_only(self):
        t = sm_build(sm_params(1, upsilon_r=1.0)).triple
        assert omega1(t).dim == 0

    def test_cc_golden(self, cc1234):
        assert omega1(cc1234).dim == 8
        assert clifford(cc1234).dim == 42

    def test_forms_are_in_omega(self, cc1234, rng):
        a = cc1234.complex_algebra().basis
        x = a[3] @ (cc1234.dirac @ a[7] - a[7] @ cc1234.dirac)
        assert subspace_contains_all(omega1(cc1234), x[None])


class TestDecompose:
    def test_sm_parts(self, cc1234):
        dec = decompose(cc1234)
        assert fro(dec.d2) < 1e-12
        np.testing.assert_allclose(dec.d0 + dec.d1 + dec.d2 + dec.dr, cc1234.dirac, atol=1e-12)
        dr_expected = np.kron(np.kron(E(1, 1, 4), 0.5 * E(2, 1, 2) + 0.5 * E(1, 2, 2)), E(1, 1, 4))
        np.testing.assert_allclose(dec.dr, dr_expected, atol=1e-12)

    def test_d0_plus_d2_is_a_form(self, generic_sm):
        dec = decompose(generic_sm)
        assert subspace_contains_all(omega1(generic_sm), (dec.d0 + dec.d2)[None])

    def test_block_adjoints(self, generic_sm):
        blocks = decompose(generic_sm).blocks
        for (i, j, k, l), blk in blocks.items():
            np.testing.assert_allclose(blk.conj().T, blocks[(k, l, i, j)], atol=1e-12)

    def test_upsilon_only(self):
        dec = decompose(sm_build(sm_params(1, upsilon_r=1.0)).triple)
        assert max(fro(dec.d0), fro(dec.d1), fro(dec.d2)) < 1e-12
        assert fro(dec.dr) > 1

    def test_partition_of_unity(self, generic_sm):
        dec = decompose(generic_sm)
        np.testing.assert_allclose(sum(dec.projections_p), np.eye(32), atol=1e-10)
        np.testing.assert_allclose(sum(dec.projections_q), np.eye(32), atol=1e-10)


class TestOrderConditions:
    def test_sm_first_order(self, generic_sm):
        r = first_order_via_decomposition(generic_sm)
        assert r.holds and r.direct and r.witness is None

    def test_m2_product_witness(self):
        r = first_order_via_decomposition(m2_triple(mode="product"))
        assert not r.holds
        assert r.witness == "D_R violates 1st order"

    def test_zero_dirac(self):
        t = m2_triple().with_dirac(np.zeros((4, 4)))
        assert first_order_via_decomposition(t).holds
        assert second_order(t).holds

    def test_all_delta_zero(self, cc1234):
        assert second_order(cc1234).holds

    def test_generic_delta_fails(self, generic_sm):
        r = second_order(generic_sm)
        assert not r.holds
        # D_R is in A' for the SM triple, so the [D0, D1] route ran and agreed
        assert r.dr_in_commutant and r.via_d0_d1 is False

    def test_m2_sum(self):
        t = m2_triple(mode="sum")
        r = second_order(t)
        assert r.holds and not r.dr_in_commutant
        dr_in, _ = commutes_with_algebra(t, decompose(t).dr)
        assert not dr_in

    def test_m2_central_d(self):
        t = m2_triple(d=np.eye(2), mode="product")
        assert first_order_via_decomposition(t).holds


class TestHodge:
    def test_cc(self, cc1234):
        h = hodge(cc1234)
        assert h.holds and h.clifford_dim == h.commutant_dim == h.opposite_dim == 42
        assert h.projector_distance < 1e-8

    def test_cc_equal_moduli(self):
        h = hodge(sm_build(cc_params(1, 1, 1, 1)).triple)
        assert not h.holds
        assert (h.clifford_dim, h.commutant_dim) == (26, 48)

    def test_second_order_implies_inclusion(self, cc1234, generic_sm):
        for t in (cc1234, sm_build(cc_params(1, 1, 1, 1)).triple, m2_triple(mode="sum")):
            assert second_order(t).holds
            assert hodge(t).second_order_inclusion
        assert not second_order(generic_sm).holds

    def test_unitary_invariance(self, rng):
        t = sm_build(cc_params(1, 2, 3, 4)).triple
        u = random_unitary(rng, 32)
        tu = t.conjugated_by(u)
        assert validate(tu).ok
        assert hodge(tu).holds == hodge(t).holds
        t2 = sm_build(cc_params(1, 1, 1, 1)).triple
        assert hodge(t2.conjugated_by(u)).holds is False

    def test_scalar_c2_regression(self):
        """Scalars on C^2 with D = sigma_x: Cl = C, so Cl' = M_2 is larger than Cl° = C."""
        t = scalar_c2_triple()
        assert validate(t).ok
        h = hodge(t)
        assert h.as_dict() == {
            "holds": False, "clifford_dim": 1, "commutant_dim": 4, "opposite_dim": 1,
            "projector_distance": None, "second_order_inclusion": True, "degenerate": True,
        }

    def test_m2_sum(self):
        assert hodge(m2_triple(mode="sum")).holds


class TestToys:
    def test_transpose_permutation(self, rng):
        x = random_complex(rng, 3, 3)
        np.testing.assert_allclose(transpose_permutation(3) @ x.reshape(-1), x.T.reshape(-1))

    def test_j_is_adjoint(self, rng):
        t = m2_triple()
        x = random_complex(rng, 2, 2)
        np.testing.assert_allclose(t.j.apply(x.reshape(-1)), x.conj().T.reshape(-1))

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            m2_triple(mode="other")

    def test_non_hermitian_d(self):
        with pytest.raises(ValueError):
            m2_triple(d=E(1, 2, 2))

    def test_opposite_is_right_multiplication(self, rng):
        t = m2_triple()
        a = random_complex(rng, 2, 2)
        y = random_complex(rng, 2, 2)
        circ = circle(np.kron(a, np.eye(2)), t.j)
        np.testing.assert_allclose(circ @ y.reshape(-1), (y @ a).reshape(-1), atol=1e-12)
