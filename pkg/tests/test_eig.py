"""Generalized eigensolver: rank reduction, filtering, oracles."""

import math

import numpy as np
import pytest

from steklovem.errors import KTooLarge, TooLarge
from steklovem.eig import (
    dense_reference_solve,
    eigenfunction_field,
    solve_steklov,
)
from steklovem.mesh import GAMMA0, GAMMA1, build_mesh
from steklovem.meshgen import FAMILIES
from steklovem.vem import StabilizationSpec, assemble_global

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
TOP_BND = [(0, 1, GAMMA1), (1, 2, GAMMA1), (2, 3, GAMMA0), (3, 0, GAMMA1)]


def single_square_system():
    mesh = build_mesh(SQUARE, [[0, 1, 2, 3]], TOP_BND)
    return mesh, assemble_global(mesh, StabilizationSpec())


def system_for(family, N, spec=None):
    return assemble_global(FAMILIES[family](N), spec or StabilizationSpec())


# ---------------------------------------------------------------------------
# single-cell sanity


def test_single_cell_one_positive_mode():
    _, system = single_square_system()
    result = solve_steklov(system, 1)
    assert result.zero_mode_detected
    assert len(result.lambdas) == 1
    assert result.lambdas[0] > 0.0
    oracle = dense_reference_solve(system)
    assert result.lambdas[0] == pytest.approx(oracle.lambdas[0], rel=1e-10)


def test_single_cell_k_too_large():
    _, system = single_square_system()
    with pytest.raises(KTooLarge):
        solve_steklov(system, 5)


# ---------------------------------------------------------------------------
# oracle equivalence and structure


@pytest.mark.parametrize("family,N", [("t1", 4), ("t2", 4), ("t3", 4),
                                      ("t6", 8)])
def test_sparse_matches_dense_oracle(family, N):
    system = system_for(family, N)
    k = min(6, len(system.gamma0_dofs) - 1)
    fast = solve_steklov(system, k)
    slow = dense_reference_solve(system)
    np.testing.assert_allclose(fast.lambdas, slow.lambdas[:k], rtol=1e-9)


def test_dense_oracle_counts_rank_of_b():
    system = system_for("t1", 4)
    result = dense_reference_solve(system)
    # one nonzero mu is consumed by the constant mode
    assert len(result.lambdas) == len(system.gamma0_dofs) - 1


def test_dense_oracle_rejects_large_systems():
    system = system_for("t2", 32)
    with pytest.raises(TooLarge):
        dense_reference_solve(system)


def test_lambdas_sorted_positive_and_residuals_small():
    system = system_for("t2", 8)
    result = solve_steklov(system, 6)
    assert np.all(result.lambdas > 0.0)
    assert np.all(np.diff(result.lambdas) > 0.0)
    np.testing.assert_allclose(result.mus, 1.0 / (1.0 + result.lambdas))
    assert np.all(result.residuals <= 1e-8 * (1.0 + result.lambdas))


def test_b_orthogonality():
    system = system_for("t2", 8)
    result = solve_steklov(system, 6)
    U = result.vectors
    M = U.T @ (system.B @ U)
    off = M - np.diag(np.diag(M))
    assert np.abs(off).max() < 1e-8


def test_constant_mode_always_filtered():
    for family, N in [("t1", 4), ("t6", 8)]:
        system = system_for(family, N)
        result = solve_steklov(system, 3)
        assert result.zero_mode_detected
        assert result.lambdas[0] > 1e-3


# ---------------------------------------------------------------------------
# eigenfunction extraction


def test_eigenfunction_sign_and_scale_convention():
    mesh = FAMILIES["t1"](8)
    system = assemble_global(mesh, StabilizationSpec())
    result = solve_steklov(system, 2)
    field = eigenfunction_field(result, mesh, 0)
    assert np.abs(field).max() == pytest.approx(1.0)
    assert field[np.argmax(np.abs(field))] > 0.0
    flipped = result.__class__(lambdas=result.lambdas, mus=result.mus,
                               vectors=-result.vectors,
                               zero_mode_detected=result.zero_mode_detected,
                               residuals=result.residuals)
    np.testing.assert_allclose(eigenfunction_field(flipped, mesh, 0), field)
    assert field.max() - field.min() > 1e-6


def test_first_sloshing_mode_trace_is_cosine():
    mesh = FAMILIES["t1"](32)
    system = assemble_global(mesh, StabilizationSpec())
    result = solve_steklov(system, 1)
    field = eigenfunction_field(result, mesh, 0)
    top = mesh.gamma0_vertices()
    xs = mesh.vertices[top, 0]
    ref = np.cos(math.pi * xs)
    corr = abs(np.corrcoef(field[top], ref)[0, 1])
    assert corr >= 0.999
