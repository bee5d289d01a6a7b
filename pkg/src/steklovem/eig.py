"""Generalized eigensolver for the discrete Steklov problem.

The boundary mass B has rank m = (number of gamma0 vertices), so instead
of a large generalized solve the nonzero spectrum of Ahat^{-1} B is
obtained from an m x m symmetric matrix built from m sparse solves
against a single factorization of Ahat.  The constant mode (lambda = 0)
is filtered; everything else is returned ascending.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import KTooLarge, NotSPD, RankDeficientGamma0Mass, TooLarge
from .mesh import PolygonalMesh
from .vem import GlobalSystem

_ZERO_MODE_TOL = 1e-8
_CONSTANT_OVERLAP = 0.99
_DENSE_LIMIT = 2000


@dataclass
class EigenResult:
    """Positive discrete Steklov eigenvalues with their eigenvectors."""

    lambdas: np.ndarray      # ascending, strictly positive
    mus: np.ndarray          # 1 / (1 + lambda), in (0, 1)
    vectors: np.ndarray      # (n_dofs, k), normalized to v' Ahat v = 1
    zero_mode_detected: bool
    residuals: np.ndarray    # ||A u - lambda B u|| / ||u|| per pair


def _filter_and_pack(system: GlobalSystem, mus, vecs, k,
                     zero_tol=_ZERO_MODE_TOL) -> EigenResult:
    """Drop the constant mode, sort ascending in lambda, normalize."""
    order = np.argsort(-mus)          # descending mu = ascending lambda
    mus = mus[order]
    vecs = vecs[:, order]
    lambdas = 1.0 / mus - 1.0

    ones = np.ones(system.n_dofs)
    b_ones = system.B @ ones
    norm_ones = np.sqrt(float(ones @ b_ones))

    keep = []
    zero_found = False
    for idx in range(len(lambdas)):
        lam = lambdas[idx]
        if not zero_found and lam <= zero_tol:
            u = vecs[:, idx]
            bu = system.B @ u
            norm_u = np.sqrt(max(float(u @ bu), 1e-300))
            overlap = abs(float(ones @ bu)) / (norm_ones * norm_u)
            if overlap > _CONSTANT_OVERLAP:
                zero_found = True
                continue
        keep.append(idx)

    keep = keep[:k]
    lambdas = lambdas[keep]
    vecs = vecs[:, keep]

    scale = np.empty(len(keep))
    residuals = np.empty(len(keep))
    for c in range(len(keep)):
        u = vecs[:, c]
        scale[c] = 1.0 / np.sqrt(float(u @ (system.Ahat @ u)))
        u = u * scale[c]
        vecs[:, c] = u
        r = system.A @ u - lambdas[c] * (system.B @ u)
        residuals[c] = float(np.linalg.norm(r) / np.linalg.norm(u))

    return EigenResult(
        lambdas=lambdas,
        mus=1.0 / (1.0 + lambdas),
        vectors=vecs,
        zero_mode_detected=zero_found,
        residuals=residuals,
    )


def solve_steklov(system: GlobalSystem, k: int) -> EigenResult:
    """First k positive Steklov eigenvalues by rank reduction.

    With M the gamma0 block of B factored M = R' R and
    G = P Ahat^{-1} P' (P the gamma0 selection), the m x m matrix
    C = R G R' carries exactly the nonzero eigenvalues mu of
    Ahat^{-1} B; eigenvectors lift back through the stored solves.
    """
    g = system.gamma0_dofs
    m = len(g)
    if k > m - 1:
        raise KTooLarge(f"k = {k} exceeds the {m - 1} positive modes "
                        f"supported by {m} gamma0 dofs")

    M = system.B[np.ix_(g, g)].toarray()
    try:
        R = sla.cholesky(M, lower=False)
    except sla.LinAlgError as exc:
        raise RankDeficientGamma0Mass(str(exc)) from exc

    try:
        factor = spla.splu(system.Ahat.tocsc())
    except RuntimeError as exc:
        raise NotSPD(f"factorization of Ahat failed: {exc}") from exc

    rhs = np.zeros((system.n_dofs, m))
    rhs[g, np.arange(m)] = 1.0
    X = factor.solve(rhs)             # Ahat^{-1} P', one column per gamma0 dof

    C = R @ X[g, :] @ R.T
    C = 0.5 * (C + C.T)
    mus, S = sla.eigh(C)
    if mus[-1] <= 0.0 or mus[-1] > 1.0 + 1e-6:
        raise NotSPD("reduced spectrum outside (0, 1]; Ahat is not SPD")
    if mus[0] < -1e-10 * mus[-1]:
        raise NotSPD("reduced matrix is indefinite; Ahat is not SPD")

    # keep only the top modes: dofs carried by tiny boundary edges produce
    # mu near rounding level, which the lift below must not divide by
    top = slice(max(0, m - (k + 2)), m)
    mus, S = mus[top], S[:, top]
    if mus[0] <= 0.0:
        raise RankDeficientGamma0Mass(
            f"fewer than {k} numerically positive boundary-mass modes")

    # lift: u = (1/mu) Ahat^{-1} P' R' s
    U = X @ (R.T @ S) / mus[None, :]
    return _filter_and_pack(system, mus, U, k)


def dense_reference_solve(system: GlobalSystem) -> EigenResult:
    """Oracle: full dense symmetric-definite generalized eigensolve.

    Solves B u = mu Ahat u with every matrix densified; only meant to
    validate :func:`solve_steklov` on small systems.
    """
    n = system.n_dofs
    if n > _DENSE_LIMIT:
        raise TooLarge(f"{n} dofs exceeds the dense oracle limit {_DENSE_LIMIT}")
    Bd = system.B.toarray()
    Ad = system.Ahat.toarray()
    try:
        mus, vecs = sla.eigh(Bd, Ad)
    except sla.LinAlgError as exc:
        raise NotSPD(str(exc)) from exc
    pos = mus > 1e-12
    if int(np.sum(pos)) != len(system.gamma0_dofs):
        raise RankDeficientGamma0Mass(
            "rank of B does not match the gamma0 dof count")
    return _filter_and_pack(system, mus[pos], vecs[:, pos],
                            k=int(np.sum(pos)) - 1)


def eigenfunction_field(result: EigenResult, mesh: PolygonalMesh,
                        i: int) -> np.ndarray:
    """Vertex field of the i-th mode, sign-fixed and scaled to max-abs 1."""
    if not 0 <= i < len(result.lambdas):
        raise IndexError(f"mode index {i} out of range")
    u = result.vectors[:, i].copy()
    peak = int(np.argmax(np.abs(u)))
    if u[peak] < 0.0:
        u = -u
    return u / abs(u[peak])
