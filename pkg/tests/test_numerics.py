import numpy as np
import pytest

from iasim import numerics
from iasim.errors import NumericalFailureError, SingularMatrixError, UnsupportedOrderError
from iasim.numerics import (
    COND_SENTINEL,
    condition_estimate,
    hadamard_trunk,
    invert,
    random_orthonormal,
    singular_value_spread,
    svd,
)


def random_complex(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


class TestHadamardTrunk:
    def test_order_two(self):
        m = hadamard_trunk(2, 2)
        expected = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        np.testing.assert_allclose(m, expected, atol=1e-15)

    def test_order_four_trunk(self):
        m = hadamard_trunk(4, 3)
        h4 = np.array(
            [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=complex
        )
        np.testing.assert_allclose(m, h4[:, :3] / 2.0, atol=1e-15)
        np.testing.assert_allclose(m.conj().T @ m, np.eye(3), atol=1e-12)

    def test_order_eight_orthonormal(self):
        m = hadamard_trunk(8, 5)
        np.testing.assert_allclose(m.conj().T @ m, np.eye(5), atol=1e-12)

    @pytest.mark.parametrize("k", [2, 4, 8, 16])
    def test_orthonormal_all_orders(self, k):
        for n_s in range(1, k + 1):
            m = hadamard_trunk(k, n_s)
            assert m.shape == (k, n_s)
            np.testing.assert_allclose(m.conj().T @ m, np.eye(n_s), atol=1e-12)

    @pytest.mark.parametrize("k", [3, 5, 6, 7, 12])
    def test_non_power_of_two_rejected(self, k):
        with pytest.raises(UnsupportedOrderError):
            hadamard_trunk(k, 1)

    def test_bad_trunk_width(self):
        with pytest.raises(ValueError):
            hadamard_trunk(4, 5)
        with pytest.raises(ValueError):
            hadamard_trunk(4, 0)


def check_svd(a, res, rtol=1e-10):
    m, n = a.shape
    k = min(m, n)
    assert res.u.shape == (m, m)
    assert res.v.shape == (n, n)
    assert res.s.shape == (k,)
    assert np.all(res.s >= 0.0)
    assert np.all(np.diff(res.s) <= 1e-12 * max(res.s[0], 1.0))
    np.testing.assert_allclose(res.u.conj().T @ res.u, np.eye(m), atol=1e-10)
    np.testing.assert_allclose(res.v.conj().T @ res.v, np.eye(n), atol=1e-10)
    sigma = np.zeros((m, n))
    sigma[:k, :k] = np.diag(res.s)
    scale = max(np.linalg.norm(a), 1e-30)
    assert np.linalg.norm(res.u @ sigma @ res.v.conj().T - a) <= rtol * scale


class TestSvd:
    def test_identity(self):
        res = svd(np.eye(3))
        np.testing.assert_allclose(res.s, np.ones(3), atol=1e-14)
        check_svd(np.eye(3, dtype=complex), res)

    def test_diagonal(self):
        a = np.diag([3.0, 2.0]).astype(complex)
        res = svd(a)
        np.testing.assert_allclose(res.s, [3.0, 2.0], atol=1e-14)
        # diagonal input: factors are diagonal with unit-modulus entries
        for f in (res.u, res.v):
            off = f - np.diag(np.diag(f))
            assert np.abs(off).max() < 1e-12
            np.testing.assert_allclose(np.abs(np.diag(f)), 1.0, atol=1e-12)
        check_svd(a, res)

    def test_reconstruction_random_4x3(self):
        rng = np.random.default_rng(7)
        a = random_complex(rng, 4, 3)
        check_svd(a, svd(a))

    @pytest.mark.parametrize("shape", [(2, 2), (3, 5), (5, 3), (8, 8), (16, 4), (4, 16), (1, 6), (6, 1)])
    def test_reconstruction_shapes(self, shape):
        rng = np.random.default_rng(hash(shape) % 2**32)
        a = random_complex(rng, *shape)
        check_svd(a, svd(a))

    def test_property_sweep_small_matrices(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            m = int(rng.integers(1, 9))
            n = int(rng.integers(1, 9))
            a = random_complex(rng, m, n)
            check_svd(a, svd(a))

    def test_singular_values_match_lapack(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a = random_complex(rng, int(rng.integers(2, 7)), int(rng.integers(2, 7)))
            np.testing.assert_allclose(svd(a).s, np.linalg.svd(a, compute_uv=False), atol=1e-10)

    def test_hermitian_transpose_same_spectrum(self):
        rng = np.random.default_rng(5)
        a = random_complex(rng, 5, 3)
        np.testing.assert_allclose(svd(a).s, svd(a.conj().T).s, atol=1e-10)

    def test_rank_deficient(self):
        rng = np.random.default_rng(3)
        col = random_complex(rng, 5, 1)
        a = np.hstack([col, 2.0 * col, random_complex(rng, 5, 1)])
        res = svd(a)
        assert res.s[-1] <= 1e-12 * res.s[0]
        check_svd(a, res)

    def test_zero_matrix(self):
        res = svd(np.zeros((4, 3), dtype=complex))
        np.testing.assert_allclose(res.s, np.zeros(3))
        np.testing.assert_allclose(res.u.conj().T @ res.u, np.eye(4), atol=1e-12)

    def test_phase_convention_deterministic(self):
        rng = np.random.default_rng(9)
        a = random_complex(rng, 4, 3)
        r1, r2 = svd(a), svd(a.copy())
        np.testing.assert_array_equal(r1.u, r2.u)
        np.testing.assert_array_equal(r1.v, r2.v)
        # largest-magnitude entry of every left singular vector is real-positive
        for i in range(4):
            k = np.argmax(np.abs(r1.u[:, i]))
            entry = r1.u[k, i]
            assert abs(entry.imag) <= 1e-14 * abs(entry)
            assert entry.real > 0

    def test_phase_convention_absorbs_global_phase(self):
        rng = np.random.default_rng(13)
        a = random_complex(rng, 4, 3)
        r1 = svd(a)
        r2 = svd(np.exp(1j * 0.9) * a)
        np.testing.assert_allclose(r1.u, r2.u, atol=1e-10)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            svd(np.zeros((0, 3)))
        with pytest.raises(ValueError):
            svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            svd(np.array([[np.inf + 0j, 0.0], [0.0, 1.0]]))


class TestInvert:
    def test_identity(self):
        np.testing.assert_allclose(invert(np.eye(4)), np.eye(4), atol=1e-14)

    def test_diagonal(self):
        np.testing.assert_allclose(
            invert(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]), atol=1e-14
        )

    def test_residual_random(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            a = random_complex(rng, n, n)
            if np.linalg.cond(a) > 1e6:
                continue
            inv = invert(a)
            assert np.linalg.norm(a @ inv - np.eye(n)) <= 1e-9

    def test_singular_raises(self):
        a = np.array([[1.0, 2.0], [2.0, 4.0]], dtype=complex)
        with pytest.raises(SingularMatrixError):
            invert(a)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            invert(np.ones((2, 3)))


class TestConditionEstimate:
    def test_identity(self):
        assert condition_estimate(np.eye(3)) == pytest.approx(1.0, abs=1e-12)

    def test_diagonal_ratio(self):
        assert condition_estimate(np.diag([10.0, 0.1])) == pytest.approx(100.0, rel=1e-10)

    def test_equal_columns_sentinel(self):
        col = np.array([[1.0 + 1.0j], [2.0 - 0.5j]])
        a = np.hstack([col, col])
        assert condition_estimate(a) == COND_SENTINEL

    def test_spread_rectangular(self):
        rng = np.random.default_rng(31)
        a = random_complex(rng, 2, 4)
        s = np.linalg.svd(a, compute_uv=False)
        assert singular_value_spread(a) == pytest.approx(s[0] / s[-1], rel=1e-9)


class TestRandomOrthonormal:
    def test_columns_orthonormal(self):
        rng = np.random.default_rng(17)
        q = random_orthonormal(rng, 6, 4)
        np.testing.assert_allclose(q.conj().T @ q, np.eye(4), atol=1e-12)

    def test_bad_shape(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            random_orthonormal(rng, 3, 4)


def test_nonconvergence_error_carries_sweeps(monkeypatch):
    monkeypatch.setattr(numerics, "MAX_SWEEPS", 0)
    rng = np.random.default_rng(1)
    with pytest.raises(NumericalFailureError) as exc:
        svd(random_complex(rng, 3, 3))
    assert exc.value.sweeps == 0
