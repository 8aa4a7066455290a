import numpy as np
import pytest

from conftest import random_complex
from nchodge.linalg import (
    DEFAULT_TOL,
    MatrixSubspace,
    Tolerance,
    anticomm,
    as_square,
    comm,
    conj,
    dagger,
    extend_basis,
    fro,
    kron,
    matrix_unit,
    nullspace,
    orthonormalize,
    projector_distance,
    rank,
    subspace_contains,
    subspace_contains_all,
    subspace_equal,
    subspace_intersection,
    transpose,
)

E = matrix_unit
I2 = np.eye(2)


def span(*mats):
    return orthonormalize(list(mats))


class TestTolerance:
    def test_defaults(self):
        assert DEFAULT_TOL.rel == 1e-10
        assert DEFAULT_TOL.abs_floor == 1e-12

    def test_threshold_takes_larger_term(self):
        t = Tolerance(1e-6, 1e-3)
        assert t.threshold(1.0) == 1e-3
        assert t.threshold(1e4) == pytest.approx(1e-2)

    @pytest.mark.parametrize("rel, floor", [(0.0, 1e-12), (-1e-3, 0.0), (1e-10, -1.0)])
    def test_rejects_bad_values(self, rel, floor):
        with pytest.raises(ValueError):
            Tolerance(rel, floor)

    def test_hashable(self):
        assert hash(Tolerance()) == hash(Tolerance())


class TestInputValidation:
    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            as_square(np.zeros((2, 3)))

    def test_nan_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            as_square([[np.nan]])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            as_square(np.zeros((0, 0)))

    def test_comm_needs_matching_squares(self):
        with pytest.raises(ValueError):
            comm(np.eye(2), np.eye(3))


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(kron(I2, I2), np.eye(4))

    def test_single_entry(self):
        np.testing.assert_array_equal(kron(E(1, 1, 2), E(1, 1, 2)), E(1, 1, 4))

    def test_block_structure(self):
        d = np.diag([2.0, 3.0])
        expected = np.block([[np.zeros((2, 2)), d], [d, np.zeros((2, 2))]])
        np.testing.assert_array_equal(kron([[0, 1], [1, 0]], [[2, 0], [0, 3]]), expected)

    def test_three_factors(self, rng):
        a, b, c = (random_complex(rng, 2, 2) for _ in range(3))
        np.testing.assert_allclose(kron(a, b, c), np.kron(np.kron(a, b), c))


class TestElementaryOps:
    def test_dagger_scalar(self):
        np.testing.assert_array_equal(dagger([[1j]]), [[-1j]])

    def test_conj_and_transpose(self):
        a = np.array([[1, 2j], [3, 4 + 1j]])
        np.testing.assert_array_equal(conj(a), np.conj(a))
        np.testing.assert_array_equal(transpose(a), a.T)

    def test_self_commutator(self, rng):
        a = random_complex(rng, 3, 3)
        assert fro(comm(a, a)) == 0.0

    def test_commutator_of_units(self):
        np.testing.assert_array_equal(comm(E(1, 2, 2), E(2, 1, 2)), np.diag([1.0, -1.0]))

    def test_anticommutator(self):
        sx = np.array([[0, 1], [1, 0]])
        sz = np.diag([1, -1])
        assert fro(anticomm(sx, sz)) == 0.0

    def test_matrix_unit_one_based(self):
        m = E(2, 3, 3)
        assert m[1, 2] == 1 and fro(m) == 1


class TestNullspace:
    def test_invertible(self):
        assert nullspace(np.eye(3)).shape == (3, 0)

    def test_zero_map(self):
        k = nullspace(np.zeros((2, 2)))
        assert k.shape == (2, 2)
        np.testing.assert_allclose(k.conj().T @ k, I2, atol=1e-14)

    def test_kernel_of_unit(self):
        k = nullspace(E(1, 1, 2))
        assert k.shape == (2, 1)
        np.testing.assert_allclose(np.abs(k[:, 0]), [0, 1])

    def test_wide_matrix(self, rng):
        m = random_complex(rng, 2, 5)
        k = nullspace(m)
        assert k.shape == (5, 3)
        assert np.linalg.norm(m @ k) < 1e-12

    def test_deterministic_phase(self, rng):
        m = random_complex(rng, 3, 6)
        k1, k2 = nullspace(m), nullspace(m.copy())
        np.testing.assert_array_equal(k1, k2)

    def test_scale_override(self):
        m = np.diag([1.0, 1e-6])
        assert nullspace(m).shape[1] == 0
        assert nullspace(m, Tolerance(1e-3)).shape[1] == 1
        # an explicit scale replaces sigma_max
        assert nullspace(m, Tolerance(1e-3), scale=1e-2).shape[1] == 1

    def test_rank(self):
        assert rank(np.diag([1.0, 1e-13, 0.0])) == 1
        assert rank(np.zeros((2, 2))) == 0


class TestOrthonormalize:
    def test_collinear(self):
        assert span(I2, 2 * I2).dim == 1

    def test_standard_basis(self):
        s = span(E(1, 1, 2), E(1, 2, 2), E(2, 1, 2), E(2, 2, 2))
        assert s.dim == 4
        assert subspace_equal(s, MatrixSubspace.full(2))

    def test_diagonal(self):
        s = span(E(1, 1, 2) + E(2, 2, 2), E(1, 1, 2) - E(2, 2, 2), E(1, 1, 2))
        assert s.dim == 2
        assert subspace_equal(s, span(E(1, 1, 2), E(2, 2, 2)))

    def test_gram_is_identity(self, rng):
        s = orthonormalize([random_complex(rng, 3, 3) for _ in range(5)])
        np.testing.assert_allclose(s.gram(), np.eye(5), atol=1e-12)

    def test_empty_needs_dim(self):
        with pytest.raises(ValueError):
            orthonormalize([])
        assert orthonormalize([], ambient_dim=3).dim == 0

    def test_zero_input(self):
        assert span(np.zeros((2, 2))).dim == 0

    def test_mismatched_shapes(self):
        with pytest.raises(ValueError):
            orthonormalize([np.eye(2), np.eye(3)])


class TestSubspaces:
    def test_contains(self):
        s = span(I2)
        assert subspace_contains(s, 5 * I2)
        assert not subspace_contains(s, E(1, 2, 2))
        assert subspace_contains(s, np.zeros((2, 2)))

    def test_contains_all(self):
        s = span(E(1, 1, 2), E(2, 2, 2))
        assert subspace_contains_all(s, np.stack([I2, np.diag([3, -1j])]))
        assert not subspace_contains_all(s, np.stack([I2, E(1, 2, 2)]))
        assert subspace_contains_all(MatrixSubspace.zero(2), np.zeros((1, 2, 2)))

    def test_equal_different_bases(self):
        assert subspace_equal(span(E(1, 1, 2) + E(2, 2, 2), E(1, 1, 2) - E(2, 2, 2)),
                              span(E(1, 1, 2), E(2, 2, 2)))

    def test_unequal_dims(self):
        assert not subspace_equal(span(I2), span(E(1, 1, 2), E(2, 2, 2)))

    def test_projector_distance(self):
        a, b = span(E(1, 1, 2)), span(E(2, 2, 2))
        assert projector_distance(a, a) < 1e-14
        assert projector_distance(a, b) == pytest.approx(np.sqrt(2))

    def test_projector(self):
        s = span(E(1, 1, 2), E(1, 2, 2))
        p = s.projector()
        np.testing.assert_allclose(p @ p, p, atol=1e-14)
        np.testing.assert_allclose(s.project(I2), E(1, 1, 2), atol=1e-14)

    def test_coordinates_roundtrip(self, rng):
        s = orthonormalize([random_complex(rng, 3, 3) for _ in range(4)])
        c = random_complex(rng, 4)
        np.testing.assert_allclose(s.coordinates(s.combine(c)), c, atol=1e-12)

    def test_intersection(self):
        a = span(E(1, 1, 2), E(1, 2, 2))
        b = span(E(1, 1, 2), E(2, 2, 2))
        assert subspace_equal(subspace_intersection(a, b), span(E(1, 1, 2)))
        assert subspace_intersection(a, MatrixSubspace.zero(2)).dim == 0

    def test_basis_shape_checked(self):
        with pytest.raises(ValueError):
            MatrixSubspace(2, np.zeros((1, 3, 3)))


class TestExtendBasis:
    def test_adds_only_new_directions(self, rng):
        base = orthonormalize([random_complex(rng, 3, 3) for _ in range(3)])
        q = base.columns
        new = random_complex(rng, 9)
        cands = np.stack([q[:, 0] * 2, new, q[:, 1] + q[:, 2], new * 1j], axis=1)
        out, accepted = extend_basis(q, cands)
        assert out.shape[1] == 4
        np.testing.assert_allclose(out.conj().T @ out, np.eye(4), atol=1e-12)
        assert len(accepted) == 1

    def test_matches_rank_in_chunks(self, rng):
        low = random_complex(rng, 16, 5) @ random_complex(rng, 5, 200)
        out, _ = extend_basis(np.zeros((16, 0), dtype=complex), low, chunk=7)
        assert out.shape[1] == 5
