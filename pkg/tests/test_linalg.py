import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepdist import (
    DensityMatrix,
    DimensionError,
    ValidationError,
    assert_valid_density,
    bell,
    contract_party,
    css_max_entangled,
    eig_hermitian,
    hs_inner,
    hsd_sq,
    kron,
    maximally_mixed,
    partial_transpose,
    pure_density,
)
from conftest import random_density, random_hermitian, random_unitary, rng_for

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)

WERNER = css_max_entangled(2).mat  # (1/6)[[2,0,0,1],[0,1,0,0],[0,0,1,0],[1,0,0,2]]


class TestHsInner:
    def test_identity_halves(self):
        assert hs_inner(I2 / 2, I2 / 2) == pytest.approx(0.5, abs=1e-15)

    def test_orthogonal_projectors(self):
        assert hs_inner(P0, P1) == pytest.approx(0.0, abs=1e-15)

    def test_bell_against_its_css(self):
        # oracle: direct 4x4 trace arithmetic
        direct = np.trace(bell().mat @ WERNER).real
        assert direct == pytest.approx(0.5, abs=1e-14)
        assert hs_inner(bell(), WERNER) == pytest.approx(direct, abs=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            hs_inner(I2, np.eye(4))

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValidationError):
            hs_inner(np.array([[0, 1], [0, 0]], dtype=complex), I2)


class TestHsdSq:
    def test_identical(self, rng):
        rho = random_density((2, 2), rng)
        assert hsd_sq(rho, rho) == 0.0

    def test_orthogonal_projectors(self):
        assert hsd_sq(P0, P1) == pytest.approx(2.0, abs=1e-15)

    def test_bell_to_css_is_third(self):
        d = 2
        assert hsd_sq(bell(), WERNER) == pytest.approx((d - 1) / (d + 1), abs=1e-14)

    def test_dims_mismatch(self):
        with pytest.raises(DimensionError):
            hsd_sq(maximally_mixed((2, 3)), maximally_mixed((3, 2)))


class TestKron:
    def test_identities(self):
        assert np.array_equal(kron(I2, I2), np.eye(4))

    def test_projector_placement(self):
        out = kron(P0, P1)
        expected = np.zeros((4, 4), dtype=complex)
        expected[1, 1] = 1.0
        assert np.array_equal(out, expected)

    def test_flip_both_qubits(self):
        v00 = np.zeros(4)
        v00[0] = 1.0
        assert np.array_equal(kron(SX, SX) @ v00, np.eye(4)[3])

    def test_three_factors(self):
        assert kron(I2, I2, I2).shape == (8, 8)


class TestEigHermitian:
    def test_identity(self):
        vals, _ = eig_hermitian(I2)
        assert np.allclose(vals, [1.0, 1.0])

    def test_pauli_z(self):
        vals, vecs = eig_hermitian(SZ)
        assert np.allclose(vals, [-1.0, 1.0])
        assert abs(vecs[1, 0]) == pytest.approx(1.0)  # lowest eigenvector is |1>
        assert abs(vecs[0, 1]) == pytest.approx(1.0)

    def test_werner_spectrum(self):
        vals, _ = eig_hermitian(WERNER)
        assert np.allclose(vals, [1 / 6, 1 / 6, 1 / 6, 1 / 2], atol=1e-12)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValidationError):
            eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))

    @given(st.integers(0, 2**32 - 1), st.integers(2, 8))
    @settings(max_examples=25, deadline=None)
    def test_reconstruction(self, seed, d):
        mat = random_hermitian(d, rng_for(seed))
        vals, vecs = eig_hermitian(mat)
        assert np.all(np.diff(vals) >= 0)
        rebuilt = (vecs * vals) @ vecs.conj().T
        assert np.linalg.norm(rebuilt - mat) <= 1e-9
        residual = mat @ vecs - vecs * vals
        assert np.linalg.norm(residual) <= 1e-9


class TestContractParty:
    def test_identity(self):
        out = contract_party(np.eye(4, dtype=complex), 1, np.array([1, 0]), (2, 2))
        assert np.allclose(out, I2)

    def test_projector(self):
        m = kron(P0, P1)
        out = contract_party(m, 1, np.array([0, 1]), (2, 2))
        assert np.allclose(out, P0)

    def test_bell_difference_block(self):
        m = bell().mat - WERNER
        out = contract_party(m, 1, np.array([1, 0]), (2, 2))
        assert np.allclose(out, np.diag([1 / 6, -1 / 6]), atol=1e-14)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_quadratic_form_consistency(self, seed):
        rng = rng_for(seed)
        m = random_hermitian(6, rng)
        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        a /= np.linalg.norm(a)
        b = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        b /= np.linalg.norm(b)
        mb = contract_party(m, 1, b, (2, 3))
        full = np.kron(a, b)
        assert np.vdot(a, mb @ a).real == pytest.approx(np.vdot(full, m @ full).real, abs=1e-12)
        assert np.abs(mb - mb.conj().T).max() <= 1e-12

    def test_bad_party(self):
        with pytest.raises(DimensionError):
            contract_party(np.eye(4, dtype=complex), 2, np.array([1, 0]), (2, 2))

    def test_bad_vector_length(self):
        with pytest.raises(DimensionError):
            contract_party(np.eye(6, dtype=complex), 0, np.array([1, 0, 0]), (2, 3))


class TestPartialTranspose:
    def test_product_with_real_factor_unchanged(self, rng):
        a = random_density((2,), rng)
        b = np.diag([0.25, 0.75]).astype(complex)
        rho = DensityMatrix((2, 2), np.kron(a.mat, b))
        assert np.array_equal(partial_transpose(rho, 1), rho.mat)

    def test_bell_partial_transpose_spectrum(self):
        out = partial_transpose(bell(), 1)
        assert np.linalg.eigvalsh(out)[0] == pytest.approx(-0.5, abs=1e-12)

    def test_werner_at_boundary(self):
        out = partial_transpose(css_max_entangled(2), 1)
        assert np.linalg.eigvalsh(out)[0] == pytest.approx(0.0, abs=1e-12)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 3), (2, 2, 2)]))
    @settings(max_examples=25, deadline=None)
    def test_involution_exact(self, seed, dims):
        rho = random_density(dims, rng_for(seed))
        party = seed % len(dims)
        once = partial_transpose(rho.mat, party, dims)
        twice = partial_transpose(once, party, dims)
        assert np.array_equal(twice, rho.mat)

    def test_bad_party(self):
        with pytest.raises(DimensionError):
            partial_transpose(bell(), 5)


class TestInvariantsAndProperties:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_unitary_invariance_of_distance(self, seed):
        rng = rng_for(seed)
        a = random_hermitian(4, rng)
        b = random_hermitian(4, rng)
        u = random_unitary(4, rng)
        moved = hsd_sq(u @ a @ u.conj().T, u @ b @ u.conj().T)
        assert abs(moved - hsd_sq(a, b)) <= 1e-10

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_inner_product_expansion(self, seed):
        rng = rng_for(seed)
        a = random_hermitian(4, rng)
        b = random_hermitian(4, rng)
        expanded = hs_inner(a, a) - 2 * hs_inner(a, b) + hs_inner(b, b)
        assert hsd_sq(a, b) == pytest.approx(expanded, abs=1e-12 * max(1.0, abs(expanded)))
        assert hs_inner(a, b) == pytest.approx(hs_inner(b, a), abs=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=15, deadline=None)
    def test_inner_bilinearity(self, seed):
        rng = rng_for(seed)
        a, b, c = (random_hermitian(3, rng) for _ in range(3))
        s = float(rng.standard_normal())
        lhs = hs_inner(a, s * b + c)
        assert lhs == pytest.approx(s * hs_inner(a, b) + hs_inner(a, c), abs=1e-11)


class TestDensityMatrix:
    def test_valid(self):
        assert_valid_density(maximally_mixed((2, 2)))

    def test_non_hermitian_rejected(self):
        mat = np.eye(4, dtype=complex) / 4
        mat[0, 1] = 0.1
        with pytest.raises(ValidationError):
            DensityMatrix((2, 2), mat)

    def test_bad_trace_rejected(self):
        with pytest.raises(ValidationError):
            DensityMatrix((2, 2), np.eye(4, dtype=complex))

    def test_not_psd_rejected(self):
        mat = np.diag([0.6, 0.6, -0.1, -0.1]).astype(complex)
        with pytest.raises(ValidationError):
            assert_valid_density(DensityMatrix((2, 2), mat))

    def test_shape_dims_mismatch(self):
        with pytest.raises(DimensionError):
            DensityMatrix((2, 3), np.eye(4, dtype=complex) / 4)

    def test_tiny_dims_rejected(self):
        with pytest.raises(DimensionError):
            DensityMatrix((1, 4), np.eye(4, dtype=complex) / 4)

    def test_pure_density(self):
        v = np.array([1, 0, 0, 0], dtype=complex)
        rho = pure_density(v, (2, 2))
        assert rho.mat[0, 0] == 1.0
        assert np.trace(rho.mat) == 1.0
