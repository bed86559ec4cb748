import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symorbit.darwin import (
    ReturnMapBlocks,
    darwin_from_symplectic,
    kernel_witnesses,
    nondegeneracy_check,
    random_return_map,
    random_symplectic,
    require_darwin,
    validate_darwin
)
from symorbit.errors import DimensionMismatch, InvalidBlocks, MalformedInput, NonFinite

from conftest import random_maps

DARWIN_IDENTITIES = ("D = A^T", "B = B^T", "C = C^T", "AB = BA^T", "CA = A^T C", "A^2 - BC = I")


@given(st.integers(min_value=0, max_value=2 ** 63 - 1), st.integers(min_value=1, max_value=4))
@settings(deadline=None, max_examples=100)
def test_generated_maps_have_darwin_structure(seed, n):
    report = validate_darwin(random_return_map(n, seed), tol=1e-8)

    assert report.passed, report.residuals
    for name in DARWIN_IDENTITIES:
        assert report.residuals[name] <= 1e-8


def test_identity_generator_gives_identity():
    blocks = darwin_from_symplectic(np.eye(4))
    assert np.array_equal(blocks.matrix, np.eye(4))


def test_darwin_from_symplectic_is_reversible(rng):
    blocks = darwin_from_symplectic(random_symplectic(3, rng))
    report = validate_darwin(blocks)

    assert report.residuals["reversible"] <= 1e-8
    assert report.residuals["symplectic"] <= 1e-8


def test_rotation_blocks():
    theta = 0.7
    blocks = ReturnMapBlocks.rotation(theta)

    assert blocks.A[0, 0] == pytest.approx(np.cos(theta))
    assert blocks.B[0, 0] == pytest.approx(-np.sin(theta))
    assert blocks.C[0, 0] == pytest.approx(np.sin(theta))
    assert validate_darwin(blocks).passed


def test_validate_names_broken_identity():
    blocks = random_return_map(2, 5)
    B = blocks.B.copy()
    B[0, 1] += 1e-3

    report = validate_darwin(ReturnMapBlocks(blocks.A, B, blocks.C, blocks.D))
    assert not report.passed
    assert "B = B^T" in report.failures
    assert report.worst >= 1e-3 * 0.5

    with pytest.raises(InvalidBlocks):
        require_darwin(ReturnMapBlocks(blocks.A, B, blocks.C, blocks.D), 1e-8)


def test_block_shapes_are_checked():
    with pytest.raises(DimensionMismatch):
        ReturnMapBlocks(np.eye(2), np.eye(2), np.eye(3), np.eye(2))

    with pytest.raises(NonFinite):
        ReturnMapBlocks([[np.inf]], [[0.0]], [[0.0]], [[1.0]])


def test_json_forms():
    blocks = random_return_map(2, 11)
    restored = ReturnMapBlocks.from_json(blocks.to_json())
    assert np.array_equal(restored.matrix, blocks.matrix)

    from_phi = ReturnMapBlocks.from_json({"n": 2, "Phi": blocks.matrix.tolist()})
    assert np.array_equal(from_phi.C, blocks.C)


@pytest.mark.parametrize("document, field", [
    ({"A": [[1]], "B": [[0]], "C": [[0]], "D": [[1]]}, "n"),
    ({"n": 1, "A": [[1]], "B": [[0]], "D": [[1]]}, "C"),
    ({"n": 2, "A": [[1]], "B": [[0]], "C": [[0]], "D": [[1]]}, "A"),
    ({"n": 1, "A": [["x"]], "B": [[0]], "C": [[0]], "D": [[1]]}, "A"),
])
def test_malformed_documents_name_the_field(document, field):
    with pytest.raises(MalformedInput) as e:
        ReturnMapBlocks.from_json(document)

    assert e.value.field == field
    assert field in str(e.value)


def test_nondegeneracy_of_rotation():
    # Phi^6 = I for the rotation by pi/3
    report = nondegeneracy_check(ReturnMapBlocks.rotation(np.pi / 3), 6)

    assert report.degenerate_iterates == [6]
    assert report.is_nondegenerate(3)
    assert report.c_invertible
    assert not report.inconsistent


def test_invertibility_of_c_follows_from_nondegeneracy():
    checked = 0
    for seed, blocks in random_maps(1000):
        report = nondegeneracy_check(blocks, 2)
        if report.is_nondegenerate(1) and report.is_nondegenerate(2):
            checked += 1
            assert report.c_invertible, seed
            assert not report.inconsistent

    assert checked > 900


@pytest.mark.parametrize("a1, kernel", [(1.0, 1), (-1.0, 2)])
def test_kernel_witnesses(a1, kernel):
    theta = 0.9
    # C e1 = 0; A e1 = a1 e1 with a1^2 = 1
    blocks = ReturnMapBlocks(
        np.diag([a1, np.cos(theta)]),
        np.diag([0.5, -np.sin(theta)]),
        np.diag([0.0, np.sin(theta)]),
        np.diag([a1, np.cos(theta)])
    )
    assert validate_darwin(blocks).passed

    w, z = kernel_witnesses(blocks, [1.0, 0.0])
    Phi = blocks.matrix

    assert np.allclose(Phi @ w, w)
    assert np.allclose(Phi @ Phi @ z, z)
    if kernel == 1:
        assert np.linalg.norm(w) > 1
    else:
        assert np.allclose(w, 0)

    report = nondegeneracy_check(blocks, 2)
    assert not report.is_nondegenerate(kernel)


def test_nondegeneracy_examples():
    report = nondegeneracy_check(ReturnMapBlocks.rotation(np.pi / 2), 4)
    assert report.degenerate_iterates == [4]

    report = nondegeneracy_check(ReturnMapBlocks.identity(2), 3)
    assert report.degenerate_iterates == [1, 2, 3]
    assert not report.ok
    assert not report.c_invertible


def test_identity_and_broken_diagonal_blocks():
    report = validate_darwin(ReturnMapBlocks.identity(3))
    assert report.worst == 0.0

    report = validate_darwin(ReturnMapBlocks([[1.0]], [[0.0]], [[0.0]], [[2.0]]))
    assert "D = A^T" in report.failures


def test_one_dimensional_maps_have_darwin_form():
    for seed in range(20):
        blocks = random_return_map(1, seed)
        a, b, c, d = blocks.A[0, 0], blocks.B[0, 0], blocks.C[0, 0], blocks.D[0, 0]

        assert d == pytest.approx(a, abs=1e-10)
        assert a * a - b * c == pytest.approx(1.0, abs=1e-10)


def test_ca_is_symmetric_for_generated_maps():
    for seed, blocks in random_maps(200):
        CA = blocks.C @ blocks.A

        assert np.max(np.abs(CA - CA.T)) <= 1e-8, seed
        assert np.max(np.abs(CA - blocks.A.T @ blocks.C)) <= 1e-8, seed


def test_noncommuting_blocks_pass_validation():
    # A and C do not commute here, so AC - CA^T is far from zero
    blocks = random_return_map(2, 1)
    A, C = blocks.A, blocks.C

    assert np.max(np.abs(A @ C - C @ A.T)) > 1e-3
    assert validate_darwin(blocks, tol=1e-8).passed
    assert require_darwin(blocks, 1e-8).residuals["CA = A^T C"] <= 1e-8
