"""Command-line interface: mesh generation, solving, convergence studies.

Exit codes: 0 success, 1 I/O failure, 2 invalid input or mesh validation
failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, meshgen, vtkio
from .eig import eigenfunction_field, solve_steklov
from .errors import AnalysisError, MeshError, SolverError
from .mesh import load_mesh_json, quality_report, save_mesh_json
from .vem import StabilizationSpec, assemble_global, export_coo

FAMILY_DOMAIN = {"t1": "square", "t2": "square", "t3": "rotated-t",
                 "t4": "rotated-t", "t5": "rotated-t", "t6": "lshape"}


def _generate(args):
    family = args.family
    if family not in meshgen.FAMILIES:
        raise MeshError(f"unknown family {family!r}; choose from "
                        f"{sorted(meshgen.FAMILIES)}")
    if args.domain and FAMILY_DOMAIN[family] != args.domain:
        raise MeshError(f"family {family} belongs to domain "
                        f"{FAMILY_DOMAIN[family]}, not {args.domain}")
    mesh = meshgen.FAMILIES[family](args.N)
    for level in range(1, getattr(args, "refine_level", 0) + 1):
        mesh = meshgen.refine_lshape_corner(mesh, level, args.N)
    return mesh


def _load_or_generate(args):
    if getattr(args, "mesh_file", None):
        return load_mesh_json(args.mesh_file)
    return _generate(args)


def cmd_mesh(args) -> int:
    mesh = _generate(args)
    report = quality_report(mesh)
    print(f"vertices: {mesh.n_vertices}  cells: {mesh.n_cells}")
    print(f"min star ratio: {report.min_star_ratio:.6g}")
    print(f"min edge ratio: {report.global_min_edge_ratio:.6g}")
    if args.output:
        save_mesh_json(mesh, args.output)
        print(f"wrote {args.output}")
    return 0


def cmd_check_mesh(args) -> int:
    mesh = load_mesh_json(args.mesh_file)
    report = quality_report(mesh)
    print(f"valid mesh: {mesh.n_vertices} vertices, {mesh.n_cells} cells")
    print(f"min star ratio: {report.min_star_ratio:.6g}")
    print(f"min edge ratio: {report.global_min_edge_ratio:.6g}")
    if report.empty_kernel_cells:
        print(f"non-star-shaped cells: {report.empty_kernel_cells}")
    return 0


def cmd_solve(args) -> int:
    mesh = _load_or_generate(args)
    spec = StabilizationSpec(alpha=args.alpha)
    try:
        system = assemble_global(mesh, spec)
        if args.export_matrices:
            export_coo(system.A, args.export_matrices + ".A.txt")
            export_coo(system.B, args.export_matrices + ".B.txt")
        result = solve_steklov(system, args.k)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    for i, lam in enumerate(result.lambdas):
        print(f"lambda_{i + 1} = {lam:.10f}   residual {result.residuals[i]:.3e}")
    if args.vtk:
        fields = {f"mode_{i + 1}": eigenfunction_field(result, mesh, i)
                  for i in range(len(result.lambdas))}
        vtkio.write_vtk(mesh, args.vtk, point_data=fields,
                        title="steklov eigenfunctions")
        print(f"wrote {args.vtk}")
    return 0


def cmd_study(args) -> int:
    if len(args.Ns) == 1:
        print("warning: single level, no order fit", file=sys.stderr)
    spec = StabilizationSpec(alpha=args.alpha)
    try:
        study = analysis.run_study(args.family, args.Ns, args.k, spec)
    except (SolverError, AnalysisError) as exc:
        print(f"study failure: {exc}", file=sys.stderr)
        return 3
    md = analysis.study_to_markdown(study)
    print(md, end="")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(analysis.study_to_csv(study))
        print(f"wrote {args.csv}")
    if args.md:
        with open(args.md, "w") as fh:
            fh.write(md)
        print(f"wrote {args.md}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steklovem",
        description="Lowest-order VEM solver for the Steklov (sloshing) "
                    "eigenproblem on polygonal meshes with small edges.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_gen_flags(p):
        p.add_argument("--domain", choices=["square", "rotated-t", "lshape"])
        p.add_argument("--family", required=False,
                       choices=sorted(meshgen.FAMILIES), default=None)
        p.add_argument("--N", type=int, default=8)
        p.add_argument("--refine-level", type=int, default=0,
                       help="corner refinement sweeps (t6 only)")

    p_mesh = sub.add_parser("mesh", help="generate a mesh and write JSON")
    add_gen_flags(p_mesh)
    p_mesh.add_argument("-o", "--output")
    p_mesh.set_defaults(func=cmd_mesh)

    p_check = sub.add_parser("check-mesh", help="validate a JSON mesh file")
    p_check.add_argument("mesh_file")
    p_check.set_defaults(func=cmd_check_mesh)

    p_solve = sub.add_parser("solve", help="solve the eigenproblem")
    add_gen_flags(p_solve)
    p_solve.add_argument("--mesh-file", help="JSON mesh instead of a generator")
    p_solve.add_argument("--alpha", type=float, default=1.0)
    p_solve.add_argument("--k", type=int, default=6)
    p_solve.add_argument("--vtk", help="write eigenfunctions as legacy VTK")
    p_solve.add_argument("--export-matrices",
                         help="path prefix for coordinate-format matrix dumps")
    p_solve.set_defaults(func=cmd_solve)

    p_study = sub.add_parser("study", help="convergence study over levels")
    p_study.add_argument("--family", required=True)
    p_study.add_argument("--Ns", type=int, nargs="+", required=True)
    p_study.add_argument("--alpha", type=float, default=1.0)
    p_study.add_argument("--k", type=int, default=6)
    p_study.add_argument("--csv", help="write full-precision CSV table")
    p_study.add_argument("--md", help="write Markdown table")
    p_study.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "family", None) is None and args.command in ("mesh", "solve") \
            and not getattr(args, "mesh_file", None):
        parser.error(f"{args.command} requires --family")
    try:
        return args.func(args)
    except (MeshError, AnalysisError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
