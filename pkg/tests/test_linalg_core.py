import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg

from symorbit.darwin import random_symplectic
from symorbit.errors import (
    CSingular,
    DegenerateForm,
    NonFinite,
    NonSquare,
    NotSymplectic,
    OddDimension
)
from symorbit.linalg_core import (
    Inertia,
    assemble,
    guarded_solve,
    half_dimension,
    inertia,
    is_symplectic,
    product_form,
    signature,
    split,
    structure_matrix,
    symplectic_inverse
)


def test_inertia_counts():
    assert inertia(np.diag([3.0, -2.0, 0.0])) == Inertia(1, 1, 1)
    assert inertia(np.diag([1.0, 2.0])).signature == 2


def test_inertia_symmetrizes_input():
    M = np.array([[1.0, 2.0], [0.0, 1.0]])
    # symmetric part [[1, 1], [1, 1]] has eigenvalues 0 and 2
    assert inertia(M) == Inertia(1, 0, 1)


def test_inertia_threshold_scales_with_matrix():
    assert inertia(np.diag([1e6, 1e-4])) == Inertia(1, 0, 1)
    assert inertia(np.diag([1e6, 1e-4]), tol=1e-6) == Inertia(2, 0, 0)


def test_signature_rejects_singular_form():
    with pytest.raises(DegenerateForm):
        signature(np.diag([1.0, 0.0]))

    assert signature(np.diag([1.0, -4.0, -2.0])) == -1


def test_shape_and_content_errors():
    with pytest.raises(NonSquare):
        inertia(np.ones((2, 3)))

    with pytest.raises(NonFinite):
        inertia(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    with pytest.raises(OddDimension):
        half_dimension(np.eye(3))


@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.integers(min_value=1, max_value=6))
@settings(deadline=None, max_examples=50)
def test_inertia_invariant_under_congruence(seed, size):
    rng = np.random.default_rng(seed)
    values = rng.choice([-1.0, 1.0], size) * rng.uniform(0.5, 2.0, size)

    Q, _ = np.linalg.qr(rng.standard_normal((size, size)))
    G = Q @ np.diag(rng.uniform(0.5, 2.0, size))

    assert inertia(G.T @ np.diag(values) @ G) == inertia(np.diag(values))


def eigenvalues_below(M, x):
    """Sign changes of the Sturm sequence of the characteristic polynomial of
    the tridiagonal form of M, which count the eigenvalues below x."""
    T = linalg.hessenberg(0.5 * (M + M.T))
    diagonal, off = np.diag(T), np.diag(T, 1)

    count = 0
    ratio = 1.0
    for i, a in enumerate(diagonal):
        ratio = a - x - (off[i - 1] ** 2 / ratio if i else 0.0)
        if ratio == 0.0:
            ratio = np.finfo(float).eps
        if ratio < 0:
            count += 1

    return count


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
@settings(deadline=None, max_examples=100)
def test_inertia_matches_sturm_count(seed):
    rng = np.random.default_rng(seed)
    values = rng.choice([-1.0, 0.0, 1.0], 5) * rng.uniform(0.5, 2.0, 5)
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    M = Q @ np.diag(values) @ Q.T

    margin = 1e-6
    below, above = eigenvalues_below(M, -margin), 5 - eigenvalues_below(M, margin)

    assert inertia(M) == Inertia(above, below, 5 - above - below)


def test_structure_matrix_gives_standard_form(rng):
    n = 3
    z, w = rng.standard_normal(2 * n), rng.standard_normal(2 * n)
    expected = z[:n] @ w[n:] - z[n:] @ w[:n]

    assert z @ structure_matrix(n) @ w == pytest.approx(expected)


def test_product_form_is_minus_omega_times_omega():
    n = 2
    J = structure_matrix(n)
    Omega = product_form(n)

    assert np.array_equal(Omega[:2 * n, :2 * n], -J)
    assert np.array_equal(Omega[2 * n:, 2 * n:], J)
    assert not Omega[:2 * n, 2 * n:].any()


def test_assemble_split_inverse(rng):
    blocks = [rng.standard_normal((2, 2)) for _ in range(4)]
    for original, recovered in zip(blocks, split(assemble(*blocks))):
        assert np.array_equal(original, recovered)


@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.integers(min_value=1, max_value=4))
@settings(deadline=None, max_examples=50)
def test_symplectic_inverse(seed, n):
    W = random_symplectic(n, np.random.default_rng(seed))
    assert is_symplectic(W, tol=1e-9 * max(1.0, np.abs(W).sum(axis=1).max()) ** 2)

    inverse = assemble(*symplectic_inverse(*split(W)))
    assert np.allclose(inverse @ W, np.eye(2 * n), atol=1e-8 * max(1.0, np.abs(W).max()) ** 2)


def test_symplectic_inverse_rejects_non_symplectic():
    with pytest.raises(NotSymplectic):
        symplectic_inverse([[2.0]], [[0.0]], [[0.0]], [[2.0]])


def test_guarded_solve():
    x = guarded_solve(np.array([[2.0, 0.0], [0.0, 4.0]]), np.array([2.0, 2.0]), CSingular)
    assert np.allclose(x, [1.0, 0.5])

    with pytest.raises(CSingular):
        guarded_solve(np.array([[1.0, 1.0], [1.0, 1.0]]), np.ones(2), CSingular, "C")

    with pytest.raises(CSingular):
        guarded_solve(np.diag([1.0, 1e-14]), np.ones(2), CSingular)


def test_is_symplectic_examples():
    theta = 0.3
    rotation = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])

    assert is_symplectic(np.eye(4))
    assert is_symplectic(rotation)
    assert not is_symplectic(np.diag([2.0, 1.0]))

    with pytest.raises(OddDimension):
        is_symplectic(np.eye(3))


def test_symplectic_inverse_of_darwin_form():
    a, b = 2.0, 3.0
    c = (a * a - 1) / b

    inverse = symplectic_inverse([[a]], [[b]], [[c]], [[a]])
    assert [float(X[0, 0]) for X in inverse] == pytest.approx([a, -b, -c, a])
