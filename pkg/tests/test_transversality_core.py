"""
Tests for the transversality moduli and the two hyperplane/chain lemmas.
"""
import numpy as np
import pytest

from transversality_core import (
    LinearMapR, Subspace, WeightedModuleParams, mi, ms, ms_batch, complex_split, restrict,
    weighted_mt, hyperplane_sandwich, chained_ms_bound, standard_complex_structure, operator_norm,
    transversality_module, complex_split_batch, operator_norm_batch,
)
from exceptions import EmptyDomainError, DimensionMismatchError, MissingComplexStructureError


def _complex_to_real(M):
    """Real matrix of a complex (r x n) matrix in (x, y) ordering."""
    M = np.atleast_2d(M)
    return np.block([[M.real, -M.imag], [M.imag, M.real]])


def _complex_map(M):
    r, n = np.atleast_2d(M).shape
    return LinearMapR(_complex_to_real(M), j_src=standard_complex_structure(n),
                      j_dst=standard_complex_structure(r))


def _random_hyperplane(rng, dim):
    normal = rng.standard_normal((dim, 1))
    return Subspace.from_spanning(normal).complement()


# ----------------------------------------------------------------------------
# mi / ms
# ----------------------------------------------------------------------------

def test_mi_identity_and_diagonal():
    assert mi(LinearMapR(np.eye(3))) == pytest.approx(1.0)
    assert mi(LinearMapR(np.diag([3.0, 1.0]))) == pytest.approx(1.0)


def test_mi_matches_sampled_sphere(rng):
    A = rng.standard_normal((4, 4))
    v = rng.standard_normal((4, 100_000))
    v /= np.linalg.norm(v, axis=0)
    sampled = np.min(np.linalg.norm(A @ v, axis=0))
    assert mi(LinearMapR(A)) <= sampled + 1e-12
    assert sampled - mi(LinearMapR(A)) < 0.05 * np.linalg.norm(A, 2)


def test_mi_matches_dense_circle(rng):
    A = rng.standard_normal((2, 2))
    angles = np.linspace(0.0, np.pi, 20_001)
    v = np.vstack([np.cos(angles), np.sin(angles)])
    sampled = np.min(np.linalg.norm(A @ v, axis=0))
    assert abs(sampled - mi(LinearMapR(A))) < 1e-3


def test_mi_empty_domain():
    with pytest.raises(EmptyDomainError, match="empty domain"):
        mi(LinearMapR(np.zeros((2, 0))))


def test_ms_examples(rng):
    assert ms(LinearMapR(np.array([[2.0, 0.0]]))) == pytest.approx(2.0)
    assert ms(LinearMapR(rng.standard_normal((3, 2)))) == 0.0
    A = rng.standard_normal((2, 5))
    assert ms(LinearMapR(A)) == pytest.approx(np.linalg.svd(A, compute_uv=False)[-1], abs=1e-10)


def test_ms_zero_target_is_empty_domain():
    with pytest.raises(EmptyDomainError):
        ms(LinearMapR(np.zeros((0, 3))))


def test_ms_oracle_equivalence_on_random_matrices(rng):
    """MS equals the sampled-sphere minimum of the adjoint and the SVD oracle."""
    for _ in range(1000):
        t = int(rng.integers(1, 5))
        s = int(rng.integers(t, 9))
        A = rng.standard_normal((t, s))
        value = ms(LinearMapR(A))
        assert value == pytest.approx(np.linalg.svd(A, compute_uv=False)[-1], abs=1e-10)
        if t == 1:
            assert value == pytest.approx(np.linalg.norm(A), abs=1e-10)
        elif t == 2 and s <= 3:
            angles = np.linspace(0.0, np.pi, 20_001)
            lam = np.vstack([np.cos(angles), np.sin(angles)])
            sampled = np.min(np.linalg.norm(A.T @ lam, axis=0))
            assert abs(sampled - value) < 1e-3


def test_ms_batch_agrees_with_scalar(rng):
    stack = rng.standard_normal((50, 2, 3))
    batch = ms_batch(stack)
    for i in range(50):
        assert batch[i] == pytest.approx(ms(LinearMapR(stack[i])), abs=1e-12)
    assert np.all(ms_batch(rng.standard_normal((5, 3, 2))) == 0.0)


def test_ms_is_one_lipschitz(rng):
    for _ in range(300):
        A = rng.standard_normal((2, 4))
        B = A + 0.3 * rng.standard_normal((2, 4))
        gap = abs(ms(LinearMapR(A)) - ms(LinearMapR(B)))
        assert gap <= operator_norm(LinearMapR(A - B)) + 1e-10


# ----------------------------------------------------------------------------
# complex_split / restrict
# ----------------------------------------------------------------------------

class TestComplexSplit:

    def test_c_linear_map_has_no_antilinear_part(self, rng):
        u = _complex_map(rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
        u10, u01 = complex_split(u)
        assert np.max(np.abs(u01.matrix)) < 1e-12
        assert np.allclose(u10.matrix, u.matrix)

    def test_conjugation_is_antilinear(self):
        J = standard_complex_structure(1)
        u = LinearMapR(np.diag([1.0, -1.0]), j_src=J, j_dst=J)
        u10, u01 = complex_split(u)
        assert np.max(np.abs(u10.matrix)) < 1e-15
        assert np.allclose(u01.matrix, u.matrix)

    def test_random_real_map_decomposes(self, rng):
        J = standard_complex_structure(2)
        u = LinearMapR(rng.standard_normal((4, 4)), j_src=J, j_dst=J)
        u10, u01 = complex_split(u)
        assert np.linalg.norm(u10.matrix @ J - J @ u10.matrix) < 1e-12
        assert np.linalg.norm(u01.matrix @ J + J @ u01.matrix) < 1e-12
        assert np.max(np.abs(u10.matrix + u01.matrix - u.matrix)) < 1e-12

    def test_batch_matches_single_split(self, rng):
        J = standard_complex_structure(2)
        stack = rng.standard_normal((5, 4, 4))
        linear, antilinear = complex_split_batch(stack, J, J)
        for matrix, lin, anti in zip(stack, linear, antilinear):
            u10, u01 = complex_split(LinearMapR(matrix, j_src=J, j_dst=J))
            assert np.allclose(lin, u10.matrix) and np.allclose(anti, u01.matrix)
        norms = operator_norm_batch(antilinear)
        assert norms == pytest.approx([operator_norm(LinearMapR(a)) for a in antilinear])

    def test_missing_structure(self, rng):
        with pytest.raises(MissingComplexStructureError):
            complex_split(LinearMapR(rng.standard_normal((2, 2))))

    def test_invalid_structure_rejected(self):
        with pytest.raises(ValueError):
            LinearMapR(np.eye(2), j_src=np.eye(2))
        with pytest.raises(ValueError):
            LinearMapR(np.eye(3), j_src=np.eye(3))


class TestRestrict:

    def test_identity_restricted_to_frame(self, rng):
        frame = Subspace.from_spanning(rng.standard_normal((4, 2)))
        assert np.allclose(restrict(LinearMapR(np.eye(4)), frame).matrix, frame.frame)

    def test_full_space_is_noop(self, rng):
        A = rng.standard_normal((2, 3))
        assert np.allclose(restrict(LinearMapR(A), Subspace.full(3)).matrix, A)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            restrict(LinearMapR(np.eye(3)), Subspace.full(2))

    def test_restriction_monotone(self, rng):
        for _ in range(200):
            u = LinearMapR(rng.standard_normal((2, 5)))
            H = Subspace.from_spanning(rng.standard_normal((5, 4)))
            K = Subspace.from_spanning(H.frame @ rng.standard_normal((4, 3)))
            assert ms(restrict(u, K)) <= ms(restrict(u, H)) + 1e-10


def test_complex_part_of_hyperplane_is_j_invariant(rng):
    J = standard_complex_structure(3)
    H = _random_hyperplane(rng, 6)
    K = H.complex_part(J)
    assert K.dim == 4
    assert H.contains(K)
    assert K.contains(Subspace.from_spanning(J @ K.frame))


# ----------------------------------------------------------------------------
# weighted module
# ----------------------------------------------------------------------------

def test_weighted_mt_examples():
    identity = LinearMapR(np.eye(2))
    assert weighted_mt(0.0, identity, WeightedModuleParams(1.0, 1.0)) == pytest.approx(1.0)
    assert weighted_mt(2.0, LinearMapR(np.zeros((2, 2)))) == pytest.approx(2.0)
    derivative = LinearMapR(0.6 * np.eye(2))
    assert weighted_mt(0.1, derivative, WeightedModuleParams.for_tensor_power(4)) == pytest.approx(0.3)


def test_transversality_module_is_unit_weighted(rng):
    derivative = LinearMapR(rng.standard_normal((2, 3)))
    for value in (0.0, 0.5, 3.0):
        assert transversality_module(value, derivative) == weighted_mt(value, derivative, WeightedModuleParams(1.0, 1.0))
        assert transversality_module(value, derivative) == pytest.approx(max(value, ms(derivative)))


def test_weighted_mt_rejects_negative_value():
    with pytest.raises(ValueError):
        weighted_mt(-1.0, LinearMapR(np.eye(2)))


def test_weights_must_be_positive():
    with pytest.raises(ValueError):
        WeightedModuleParams(0.0, 1.0)


# ----------------------------------------------------------------------------
# hyperplane sandwich
# ----------------------------------------------------------------------------

class TestHyperplaneSandwich:

    def test_c_linear_equality(self, rng):
        for _ in range(1000):
            u = _complex_map(rng.standard_normal((1, 2)) + 1j * rng.standard_normal((1, 2)))
            ms_k, ms_h, antinorm = hyperplane_sandwich(u, _random_hyperplane(rng, 4))
            assert abs(ms_k - ms_h) < 1e-9
            assert antinorm < 1e-12

    def test_zero_map(self):
        J = standard_complex_structure(2)
        u = LinearMapR(np.zeros((2, 4)), j_src=J, j_dst=standard_complex_structure(1))
        H = Subspace(np.eye(4)[:, 1:])
        assert hyperplane_sandwich(u, H) == (0.0, 0.0, 0.0)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_random_real_maps(self, rng, n):
        J = standard_complex_structure(n)
        Jt = standard_complex_structure(1)
        for _ in range(1000):
            u = LinearMapR(rng.standard_normal((2, 2 * n)), j_src=J, j_dst=Jt)
            ms_k, ms_h, antinorm = hyperplane_sandwich(u, _random_hyperplane(rng, 2 * n))
            assert ms_h - 2 * antinorm <= ms_k + 1e-9
            assert ms_k <= ms_h + 1e-9

    def test_rejects_non_hyperplane(self, rng):
        J = standard_complex_structure(2)
        u = LinearMapR(rng.standard_normal((2, 4)), j_src=J, j_dst=standard_complex_structure(1))
        with pytest.raises(ValueError, match="codimension 1"):
            hyperplane_sandwich(u, Subspace(np.eye(4)[:, :2]))


# ----------------------------------------------------------------------------
# chained bound
# ----------------------------------------------------------------------------

class TestChainedBound:

    def test_coordinate_pair(self):
        residual = chained_ms_bound(LinearMapR([[1.0, 0.0]]), LinearMapR([[0.0, 1.0]]))
        assert residual == pytest.approx(-2.0)
        assert residual <= 0.0

    def test_zero_second_map(self, rng):
        u1 = LinearMapR(rng.standard_normal((1, 3)))
        u2 = LinearMapR(np.zeros((2, 3)))
        assert chained_ms_bound(u1, u2) <= 1e-12

    def test_trivial_kernel(self, rng):
        u1 = LinearMapR(rng.standard_normal((3, 3)))
        assert chained_ms_bound(u1, LinearMapR(rng.standard_normal((1, 3)))) <= 1e-9

    def test_zero_dimensional_target_sentinel(self, rng):
        assert chained_ms_bound(LinearMapR(rng.standard_normal((1, 2))), LinearMapR(np.zeros((0, 2)))) == -np.inf

    def test_random_sweep(self, rng):
        for _ in range(1000):
            s = int(rng.integers(1, 7))
            t1 = int(rng.integers(1, s + 1))
            t2 = int(rng.integers(1, 4))
            u1 = LinearMapR(rng.standard_normal((t1, s)))
            u2 = LinearMapR(rng.standard_normal((t2, s)))
            assert chained_ms_bound(u1, u2) <= 1e-9

    def test_source_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            chained_ms_bound(LinearMapR(np.eye(2)), LinearMapR(np.eye(3)))
