"""Linear-algebra kernel: products, replica tensor, matrix exponential."""

import numpy as np
import pytest
import scipy.linalg

from mipd.errors import MatrixExpOverflow
from mipd.linalg import inf_norm, mat_exp, mat_mul, tensor2


def random_complex(rng, n):
    return rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))


def test_identity_product():
    rng = np.random.default_rng(1)
    for n in (2, 4):
        x = random_complex(rng, n)
        assert np.array_equal(mat_mul(np.eye(n, dtype=complex), x), x)


def test_diagonal_product():
    eta = 0.3 - 0.7j
    d = np.diag([1.0, eta])
    assert np.abs(mat_mul(d, d) - np.diag([1.0, eta**2])).max() < 1e-15


def test_associativity():
    rng = np.random.default_rng(2)
    for _ in range(50):
        a, b, c = (random_complex(rng, 4) / 2 for _ in range(3))
        lhs = mat_mul(mat_mul(a, b), c)
        rhs = mat_mul(a, mat_mul(b, c))
        assert np.abs(lhs - rhs).max() < 1e-13


def test_rejects_nonfinite():
    bad = np.array([[1.0, np.nan], [0.0, 1.0]], dtype=complex)
    with pytest.raises(ValueError):
        mat_mul(bad, np.eye(2))


def test_tensor2_identity_and_projector():
    eye = np.eye(2, dtype=complex)
    assert np.array_equal(tensor2(eye, eye), np.eye(4))
    proj = np.diag([1.0, 0.0]).astype(complex)
    assert np.array_equal(tensor2(proj, proj), np.diag([1.0, 0, 0, 0]))


def test_tensor2_entries_match_scalar_loop():
    # Independent index-bookkeeping oracle: fill the 4x4 entry by entry.
    rng = np.random.default_rng(3)
    a, b = random_complex(rng, 2), random_complex(rng, 2)
    got = tensor2(a, b)
    for i1 in range(2):
        for i2 in range(2):
            for j1 in range(2):
                for j2 in range(2):
                    expected = a[i1, j1] * b[i2, j2]
                    assert abs(got[2 * i1 + i2, 2 * j1 + j2] - expected) < 1e-15
    # the (ud, du) entry called out explicitly
    assert abs(got[1, 2] - a[0, 1] * b[1, 0]) < 1e-15


def test_tensor2_mixed_product_property():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b, c, d = (random_complex(rng, 2) for _ in range(4))
        lhs = tensor2(a, b) @ tensor2(c, d)
        rhs = tensor2(a @ c, b @ d)
        assert np.abs(lhs - rhs).max() < 1e-12


def test_exp_zero_and_diagonal():
    assert np.abs(mat_exp(np.zeros((4, 4), dtype=complex)) - np.eye(4)).max() < 1e-15
    m = np.diag([1j * np.pi, 0.0, 0.0, -1j * np.pi])
    assert np.abs(mat_exp(m) - np.diag([-1.0, 1.0, 1.0, -1.0])).max() < 1e-15


def test_exp_euler_product_oracle():
    # (I + m/n)^n -> exp(m); the finite-n error is bounded by 20 ||m||^2 / n.
    rng = np.random.default_rng(5)
    n = 10**6
    for _ in range(5):
        m = random_complex(rng, 4)
        m *= 5.0 / inf_norm(m) * rng.uniform(0.2, 1.0)
        euler = np.linalg.matrix_power(np.eye(4) + m / n, n)
        err = inf_norm(mat_exp(m) - euler)
        assert err <= 20.0 * inf_norm(m) ** 2 / n


def test_exp_against_scipy_including_defective():
    rng = np.random.default_rng(6)
    for _ in range(25):
        m = random_complex(rng, 4) * rng.uniform(0.1, 20.0)
        assert inf_norm(mat_exp(m) - scipy.linalg.expm(m)) <= 1e-12 * max(
            1.0, inf_norm(scipy.linalg.expm(m))
        )
    # exactly defective: a Jordan block, exp known in closed form
    lam = 0.3j - 0.2
    jordan = lam * np.eye(4) + np.diag([1.0, 1.0, 1.0], k=1)
    nil = np.diag([1.0, 1.0, 1.0], k=1)
    series = np.eye(4) + nil + nil @ nil / 2 + nil @ nil @ nil / 6
    exact = np.exp(lam) * series
    assert inf_norm(mat_exp(jordan) - exact) < 1e-13


def test_exp_inverse_property():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = random_complex(rng, 4)
        m *= 10.0 / inf_norm(m) * rng.uniform(0.05, 1.0)
        prod = mat_exp(m) @ mat_exp(-m)
        assert inf_norm(prod - np.eye(4)) < 1e-10


def test_exp_det_equals_exp_trace():
    rng = np.random.default_rng(8)
    for _ in range(20):
        m = random_complex(rng, 4) * rng.uniform(0.1, 3.0)
        det = np.linalg.det(mat_exp(m))
        expected = np.exp(np.trace(m))
        assert abs(det - expected) <= 1e-10 * abs(expected)


def test_exp_overflow_signal():
    with pytest.raises(MatrixExpOverflow):
        mat_exp(np.eye(4, dtype=complex) * 1e5)


def test_exp_batched_matches_loop():
    rng = np.random.default_rng(9)
    stack = np.array([random_complex(rng, 4) * s for s in (0.1, 2.0, 8.0, 30.0)])
    batched = mat_exp(stack)
    for k in range(stack.shape[0]):
        assert np.array_equal(batched[k], mat_exp(stack[k]))
