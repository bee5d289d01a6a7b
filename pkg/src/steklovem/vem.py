"""Local virtual element operators and global sparse assembly.

The lowest-order harmonic virtual space on a polygon carries one dof per
vertex.  Everything is computed from boundary data alone: the gradient of
the energy projection onto affine functions comes from the divergence
theorem (exact, since the trace is piecewise linear), the projection is
anchored by the boundary mean, and the stabilization is the h_K^alpha
weighted product of tangential edge derivatives.  No volume quadrature
appears anywhere, which is what makes the operators insensitive to
arbitrarily small edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .errors import DegenerateElement, ZeroLengthEdge
from .mesh import ElementGeometry, PolygonalMesh


@dataclass(frozen=True)
class StabilizationSpec:
    """Exponent alpha of the h_K^alpha stabilization scaling."""

    alpha: float = 1.0

    def __post_init__(self):
        if not 0.25 <= self.alpha <= 2.0:
            raise ValueError(f"alpha = {self.alpha} outside [0.25, 2]")


@dataclass(frozen=True)
class LocalOperators:
    """Projector, stabilization and stiffness of a single element."""

    G: np.ndarray          # (2, n): dofs -> constant gradient of the projection
    mean_row: np.ndarray   # (n,):   dofs -> boundary mean value
    P: np.ndarray          # (n, n): dofs -> vertex values of the projection
    A_K: np.ndarray        # (n, n): local stiffness
    S_K: np.ndarray        # (n, n): stabilization matrix


@dataclass
class GlobalSystem:
    """Assembled matrices of the discrete eigenproblem."""

    A: sps.csr_matrix       # stiffness, A @ 1 = 0
    B: sps.csr_matrix       # gamma0 boundary mass
    Ahat: sps.csr_matrix    # A + B, symmetric positive definite
    n_dofs: int
    gamma0_dofs: np.ndarray


def local_projector(geom: ElementGeometry) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Energy projection onto affine functions from boundary dofs.

    Returns ``(G, mean_row, P)``.  For a dof vector w, ``G @ w`` is the
    (constant) gradient of the projection; ``mean_row @ w`` the boundary
    mean; ``P @ w`` the projection evaluated at the element vertices,

        (P w)(x) = mean(w) + (G w) . (x - x_bnd),

    with x_bnd the boundary centroid, so the projection keeps the
    boundary mean of w.  Both maps are exact for piecewise-linear traces.
    """
    n = geom.n_vertices
    if geom.area <= 1e-14 * geom.diameter ** 2:
        raise DegenerateElement(f"element area {geom.area} vanishes")

    # trapezoid averages of endpoint dofs against |e| n_e, divided by |K|
    G = np.zeros((2, n))
    mean_row = np.zeros(n)
    for e in range(n):
        i, j = geom.edge_nodes[e]
        w_edge = 0.5 * geom.edge_lengths[e]
        G[:, i] += w_edge * geom.edge_normals[e]
        G[:, j] += w_edge * geom.edge_normals[e]
        mean_row[i] += w_edge
        mean_row[j] += w_edge
    G /= geom.area
    mean_row /= geom.boundary_length

    rel = geom.coords - geom.boundary_centroid
    P = np.ones((n, 1)) @ mean_row[None, :] + rel @ G
    return G, mean_row, P


def stability_matrix(geom: ElementGeometry, spec: StabilizationSpec) -> np.ndarray:
    """Tangential-derivative stabilization, S = h_K^alpha sum_e d_e d_e^T / |e|.

    d_e is the signed incidence vector of edge e; traces are linear per
    edge so the tangential derivative is exactly (w_j - w_i)/|e|.  The
    1/|e| factor grows without bound on small edges by design.
    """
    n = geom.n_vertices
    if np.any(geom.edge_lengths <= 0.0):
        raise ZeroLengthEdge("stabilization needs strictly positive edge lengths")
    S = np.zeros((n, n))
    for e in range(n):
        i, j = geom.edge_nodes[e]
        w = 1.0 / geom.edge_lengths[e]
        S[i, i] += w
        S[j, j] += w
        S[i, j] -= w
        S[j, i] -= w
    return geom.diameter ** spec.alpha * S


def local_operators(geom: ElementGeometry,
                    spec: StabilizationSpec = StabilizationSpec()) -> LocalOperators:
    """Full set of local matrices: consistency plus stabilized remainder."""
    G, mean_row, P = local_projector(geom)
    S = stability_matrix(geom, spec)
    Q = np.eye(geom.n_vertices) - P
    A_K = geom.area * (G.T @ G) + Q.T @ S @ Q
    A_K = 0.5 * (A_K + A_K.T)
    return LocalOperators(G=G, mean_row=mean_row, P=P, A_K=A_K, S_K=S)


def local_stiffness(geom: ElementGeometry,
                    spec: StabilizationSpec = StabilizationSpec()) -> np.ndarray:
    return local_operators(geom, spec).A_K


def boundary_mass_edge(length: float) -> np.ndarray:
    """Exact mass matrix of linear traces on one boundary edge."""
    if length <= 0.0:
        raise ZeroLengthEdge(f"edge length {length} must be positive")
    return (length / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])


def triple_norm(mesh: PolygonalMesh, dofs: np.ndarray,
                spec: StabilizationSpec = StabilizationSpec()) -> float:
    """Discrete energy semi-norm: projected gradient plus stabilized
    deviation from the boundary mean (the mean, not the projection)."""
    dofs = np.asarray(dofs, dtype=float)
    if dofs.shape != (mesh.n_vertices,):
        raise ValueError("dof vector length must equal the vertex count")
    total = 0.0
    for c in range(mesh.n_cells):
        geom = mesh.geometry(c)
        ops = local_operators(geom, spec)
        w = dofs[geom.vertex_ids]
        grad = ops.G @ w
        dev = w - (ops.mean_row @ w)
        total += geom.area * float(grad @ grad) + float(dev @ ops.S_K @ dev)
    return float(np.sqrt(total))


def assemble_global(mesh: PolygonalMesh,
                    spec: StabilizationSpec = StabilizationSpec()) -> GlobalSystem:
    """Scatter local stiffness over cells and edge mass over gamma0 edges."""
    n = mesh.n_vertices

    rows, cols, vals = [], [], []
    for c in range(mesh.n_cells):
        geom = mesh.geometry(c)
        a_k = local_operators(geom, spec).A_K
        ids = geom.vertex_ids
        grid = np.meshgrid(ids, ids, indexing="ij")
        rows.append(grid[0].ravel())
        cols.append(grid[1].ravel())
        vals.append(a_k.ravel())
    A = sps.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()

    b_rows, b_cols, b_vals = [], [], []
    for i, j in mesh.gamma0_edges():
        length = float(np.linalg.norm(mesh.vertices[j] - mesh.vertices[i]))
        m = boundary_mass_edge(length)
        b_rows.extend((i, i, j, j))
        b_cols.extend((i, j, i, j))
        b_vals.extend((m[0, 0], m[0, 1], m[1, 0], m[1, 1]))
    B = sps.coo_matrix((b_vals, (b_rows, b_cols)), shape=(n, n)).tocsr()

    return GlobalSystem(A=A, B=B, Ahat=(A + B).tocsr(), n_dofs=n,
                        gamma0_dofs=mesh.gamma0_vertices())


def export_coo(matrix: sps.spmatrix, path) -> None:
    """Dump a sparse matrix as 'row col value' text lines."""
    coo = matrix.tocoo()
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")
