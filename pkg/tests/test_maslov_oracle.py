import numpy as np
import pytest

from symorbit.darwin import ReturnMapBlocks, nondegeneracy_check, random_return_map
from symorbit.errors import DegenerateEndpoint, NotLagrangian, NotSymplectic, NotTransverse, degeneracy_errors
from symorbit.hormander import HalfInteger, Method, evaluate_index, hormander_index_formula
from symorbit.linalg_core import product_form, structure_matrix
from symorbit.maslov_oracle import (
    LagrangianFrame,
    LagrangianPath,
    SymplecticPath,
    conley_zehnder,
    generate_path,
    graph_frame,
    graph_path,
    hormander_via_paths,
    lagrangian_maslov,
    maslov_index,
    path_difference
)

from conftest import random_maps, rotation_matrix


def rotation_path(theta):
    return SymplecticPath(lambda t: rotation_matrix(theta * t))


def rotating_line(t):
    return rotation_matrix(np.pi * t) @ np.array([[1.0], [0.0]])


def test_graph_of_identity_is_diagonal():
    graph = graph_frame(np.eye(4))
    diagonal = LagrangianFrame.diagonal(2)

    assert np.allclose(graph.frame @ graph.frame.T, diagonal.frame @ diagonal.frame.T)


def test_graph_is_lagrangian_in_product():
    blocks = random_return_map(2, 7)
    graph = graph_frame(blocks.matrix)

    assert np.allclose(graph.frame.T @ product_form(2) @ graph.frame, 0.0, atol=1e-10)

    with pytest.raises(NotSymplectic):
        graph_frame(2 * np.eye(4))


def test_graph_transversality_matches_fixed_points():
    diagonal = LagrangianFrame.diagonal(1)

    pairing = np.hstack([graph_frame(rotation_matrix(0.8)).frame, diagonal.frame])
    assert np.linalg.matrix_rank(pairing) == 4

    pairing = np.hstack([graph_frame(np.eye(2)).frame, diagonal.frame])
    assert np.linalg.matrix_rank(pairing) == 2


def test_frames_must_be_lagrangian():
    with pytest.raises(NotLagrangian):
        # q1 and p1 pair nontrivially
        LagrangianFrame(np.eye(4)[:, [0, 2]])

    with pytest.raises(NotLagrangian):
        LagrangianFrame(np.eye(4)[:, :3])

    with pytest.raises(NotLagrangian):
        LagrangianFrame(np.zeros((4, 2)))

    frame = LagrangianFrame(np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 0.0], [0.0, 0.0]]))
    assert np.allclose(frame.frame.T @ frame.frame, np.eye(2))


def test_constant_transverse_pair_has_index_zero():
    form = structure_matrix(1)
    horizontal = LagrangianPath.constant(LagrangianFrame.horizontal(1))
    vertical = LagrangianPath(lambda t: np.array([[0.0], [1.0]]), form)

    value, crossings = maslov_index(horizontal, vertical)
    assert value == HalfInteger(0)
    assert crossings == []


def test_rotating_line_against_horizontal():
    line = LagrangianPath(rotating_line, structure_matrix(1))
    horizontal = LagrangianPath.constant(LagrangianFrame.horizontal(1))

    value, crossings = maslov_index(line, horizontal)

    assert value == HalfInteger(2)
    assert [record.t for record in crossings] == [0.0, 1.0]
    assert all(record.at_endpoint for record in crossings)
    assert all(record.contribution == HalfInteger(1) for record in crossings)
    assert crossings[0].to_json()["intersection_dim"] == 1

    reversed_value, _ = maslov_index(line.reversed(), horizontal)
    assert reversed_value == HalfInteger(-2)


@pytest.mark.parametrize("theta, doubled", [(1.0, 2), (3.0, 2), (8.0, 6)])
def test_conley_zehnder_of_rotation(theta, doubled):
    assert conley_zehnder(rotation_path(theta)) == HalfInteger(doubled)


def test_conley_zehnder_counts_touching_crossing():
    path = rotation_path(8.0)
    value, crossings = maslov_index(graph_path(path), LagrangianPath.constant(LagrangianFrame.diagonal(1)))

    assert value == HalfInteger(6)
    assert len(crossings) == 2
    assert crossings[1].t == pytest.approx(2 * np.pi / 8.0, abs=1e-8)
    assert crossings[1].intersection_dim == 2
    assert crossings[1].contribution == HalfInteger(4)


def test_constant_path():
    path = SymplecticPath(lambda t: np.eye(2))

    assert lagrangian_maslov(path, LagrangianFrame.horizontal(1)) == HalfInteger(0)
    with pytest.raises(DegenerateEndpoint):
        conley_zehnder(path)


@pytest.mark.parametrize("theta, doubled", [(1.0, 1), (3.0, 1), (4.0, 3), (6.0, 3)])
def test_lagrangian_maslov_of_rotation(theta, doubled):
    L = LagrangianFrame.horizontal(1)
    assert lagrangian_maslov(rotation_path(theta), L) == HalfInteger(doubled)


@pytest.mark.parametrize("theta", [np.pi / 3, 1.0, 2.0])
def test_path_difference_of_rotation_matches_formula(theta):
    L = LagrangianFrame.horizontal(1)
    path = rotation_path(theta)
    expected = hormander_index_formula(ReturnMapBlocks.rotation(theta), 1).s

    assert conley_zehnder(path) - lagrangian_maslov(path, L) == expected


def test_additivity_under_concatenation():
    path = rotation_path(8.0)
    diagonal = LagrangianPath.constant(LagrangianFrame.diagonal(1))

    whole, _ = maslov_index(graph_path(path), diagonal)
    first, _ = maslov_index(graph_path(path.restricted(0.0, 0.5)), diagonal)
    second, _ = maslov_index(graph_path(path.restricted(0.5, 1.0)), diagonal)

    assert first + second == whole


def test_invariance_under_reparametrization():
    theta = 8.0
    slow_start = SymplecticPath(lambda t: rotation_matrix(theta * (t + t * t) / 2))
    L = LagrangianFrame.horizontal(1)

    assert conley_zehnder(slow_start) == conley_zehnder(rotation_path(theta))
    assert lagrangian_maslov(slow_start, L) == lagrangian_maslov(rotation_path(theta), L)


def test_generated_path_is_symplectic_and_joins_endpoints():
    Phi = random_return_map(2, 3).matrix
    path = generate_path(Phi, 42)

    assert path.check()
    assert np.allclose(path(0.0), np.eye(4), atol=1e-12)
    assert np.allclose(path(1.0), Phi, atol=1e-9)

    with pytest.raises(NotSymplectic):
        generate_path(2 * np.eye(4), 0)


def test_paths_on_rotation(rotation):
    result = hormander_via_paths(rotation.matrix, seed=5)

    assert result.s == HalfInteger(1)
    assert result.method is Method.PATH_DIFFERENCE
    assert result.to_json()["inertia"] is None

    with pytest.raises(NotTransverse):
        hormander_via_paths(np.eye(2), seed=5)


def test_path_difference_is_independent_of_seed():
    Phi = random_return_map(1, 9).matrix
    values = {path_difference(Phi, seed) for seed in range(3)}

    assert len(values) == 1


def test_paths_agree_with_formula_on_small_maps():
    for seed, blocks in random_maps(4, sizes=(1, 2)):
        try:
            expected = hormander_index_formula(blocks, 1).s
            result = hormander_via_paths(blocks.matrix, seed)
        except degeneracy_errors:
            continue

        assert result.s == expected, seed


@pytest.mark.slow
def test_paths_agree_with_formula():
    evaluated = 0
    for seed, blocks in random_maps(100, sizes=(1, 2, 3)):
        try:
            expected = hormander_index_formula(blocks, 1).s
            result = hormander_via_paths(blocks.matrix, seed)
        except degeneracy_errors:
            continue

        assert result.s == expected, seed
        evaluated += 1

    assert evaluated >= 90


def test_lagrangian_maslov_is_additive():
    for seed in range(3):
        path = generate_path(random_return_map(1 + seed % 2, seed).matrix, seed)
        split = np.random.default_rng(seed).uniform(0.3, 0.7)
        L = LagrangianFrame.horizontal(path.n)

        whole = lagrangian_maslov(path, L)
        first = lagrangian_maslov(path.restricted(0.0, split), L)
        second = lagrangian_maslov(path.restricted(split, 1.0), L)

        assert first + second == whole, seed


def iterate_values(blocks, k, seed):
    return {evaluate_index(blocks, k, method, 1e-8, seed, None).s for method in Method}


def test_three_methods_agree_on_second_iterate():
    evaluated = 0
    for seed, blocks in random_maps(3, sizes=(2,)):
        report = nondegeneracy_check(blocks, 4)
        if not (report.is_nondegenerate(2) and report.is_nondegenerate(4)):
            continue

        assert len(iterate_values(blocks, 2, seed)) == 1, seed
        evaluated += 1

    assert evaluated >= 2


@pytest.mark.slow
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_three_methods_agree_on_iterates(n):
    k_max = 6
    evaluated = 0
    for seed in range(12):
        blocks = random_return_map(n, seed)
        report = nondegeneracy_check(blocks, 2 * k_max)

        for k in range(1, k_max + 1):
            if not (report.is_nondegenerate(k) and report.is_nondegenerate(2 * k)):
                continue
            try:
                values = iterate_values(blocks, k, seed)
            except degeneracy_errors:
                continue

            assert len(values) == 1, (seed, k, values)
            evaluated += 1

    assert evaluated >= 60


@pytest.mark.slow
def test_three_paths_give_the_same_difference():
    evaluated = 0
    for seed, blocks in random_maps(100):
        Phi = blocks.matrix
        try:
            values = {path_difference(Phi, seed + offset) for offset in (0, 1000, 2000)}
        except degeneracy_errors:
            continue

        assert len(values) == 1, seed
        evaluated += 1

    assert evaluated >= 90
