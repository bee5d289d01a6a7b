"""Lowest-order virtual element solver for the Steklov eigenproblem on
polygonal meshes that tolerate arbitrarily small edges."""

from .analysis import (
    ConvergenceStudy,
    exact_square_eigenvalue,
    extrapolate,
    fit_order,
    run_study,
)
from .eig import EigenResult, dense_reference_solve, eigenfunction_field, solve_steklov
from .mesh import (
    GAMMA0,
    GAMMA1,
    ElementGeometry,
    MeshQualityReport,
    PolygonalMesh,
    build_mesh,
    element_geometry,
    load_mesh_json,
    quality_report,
    save_mesh_json,
    star_shaped_ratio,
)
from .meshgen import (
    FAMILIES,
    gen_lshape_uniform,
    gen_rotated_t,
    gen_square_glued,
    gen_square_perturbed_triangles,
    refine_lshape_corner,
)
from .vem import (
    GlobalSystem,
    LocalOperators,
    StabilizationSpec,
    assemble_global,
    boundary_mass_edge,
    local_operators,
    local_projector,
    local_stiffness,
    stability_matrix,
    triple_norm,
)

__version__ = "0.1.0"
