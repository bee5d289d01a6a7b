"""Convergence studies: references, fitted orders, extrapolation, tables."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import FitDiverged, InsufficientLevels, InvalidN, NonPositiveError
from .eig import solve_steklov
from .meshgen import FAMILIES
from .vem import StabilizationSpec, assemble_global

# regression anchor for the L-shape first eigenvalue (extrapolated from
# fine uniform meshes)
LSHAPE_LAMBDA1_REF = 0.77445049080


def exact_square_eigenvalue(n: int) -> float:
    """n-th sloshing eigenvalue of the unit square: n pi tanh(n pi)."""
    if n < 1:
        raise InvalidN("mode index must be >= 1")
    return n * math.pi * math.tanh(n * math.pi)


def fit_order(hs, errors) -> float:
    """Least-squares slope of log(error) against log(h) over all levels."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(hs) < 2:
        raise InsufficientLevels("order fit needs at least two levels")
    if np.any(errors <= 0.0):
        raise NonPositiveError("order fit needs strictly positive errors")
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)


def pairwise_orders(hs, errors) -> np.ndarray:
    """log(e_i/e_{i+1}) / log(h_i/h_{i+1}) between consecutive levels."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    return np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])


def extrapolate(hs, values) -> tuple[float, float, float]:
    """Fit values ~ limit + C h^alpha and return (limit, C, alpha).

    Initialized from the three finest levels (closed-form alpha plus a
    Richardson limit) and polished by damped Gauss-Newton iteration.
    Falls back to the three-point closed form (raising
    :class:`FitDiverged`) when the model cannot represent the data, e.g.
    a constant sequence.
    """
    hs = np.asarray(hs, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(hs) < 3:
        raise InsufficientLevels("extrapolation needs at least three levels")
    order = np.argsort(-hs)          # coarse to fine
    hs, values = hs[order], values[order]
    diffs = np.diff(values)
    if np.any(diffs > 0.0) and np.any(diffs < 0.0):
        warnings.warn("eigenvalue sequence is not monotone in h; "
                      "extrapolation may be unreliable")

    d1 = values[-2] - values[-3]
    d2 = values[-1] - values[-2]
    r = hs[-2] / hs[-1]
    if d2 == 0.0 or d1 / d2 <= 0.0:
        raise FitDiverged("successive differences do not decay geometrically")
    alpha0 = math.log(d1 / d2) / math.log(hs[-3] / hs[-2])
    alpha0 = min(max(alpha0, 0.1), 4.0)
    limit0 = values[-1] + d2 / (r ** alpha0 - 1.0)
    c0 = d2 / (hs[-2] ** alpha0 - hs[-1] ** alpha0)

    def residual(p):
        lam, c, a = p
        return lam + c * hs ** a - values

    fit = least_squares(residual, x0=(limit0, c0, alpha0), xtol=1e-14,
                        ftol=1e-14, gtol=1e-14, method="lm")
    if not fit.success or not np.all(np.isfinite(fit.x)):
        raise FitDiverged("nonlinear fit did not converge")
    lam, c, a = (float(v) for v in fit.x)
    return lam, c, a


@dataclass
class ConvergenceStudy:
    """Eigenvalues, errors and fitted rates over a refinement sequence."""

    family: str
    alpha: float
    Ns: list[int]
    hs: list[float]                       # max element diameter per level
    n_dofs: list[int]
    eigenvalues: np.ndarray               # (levels, k)
    references: np.ndarray | None = None  # (k,) exact or extrapolated
    errors: np.ndarray | None = None      # (levels, k)
    orders: np.ndarray | None = None      # (k,)
    extrapolated: list[tuple[float, float, float]] | None = None

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[1]


def run_study(family: str, Ns, k: int,
              spec: StabilizationSpec = StabilizationSpec(),
              reference: str = "auto") -> ConvergenceStudy:
    """Generate, assemble and solve each level, then fit rates.

    ``reference``: "exact" uses the analytic square sloshing spectrum,
    "extrapolate" fits the study's own levels, "auto" picks exact for the
    square families (t1, t2) and extrapolation otherwise.
    """
    Ns = list(Ns)
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise InvalidN("refinement levels must be strictly increasing")
    if k < 1:
        raise InvalidN("need at least one eigenvalue")
    if family not in FAMILIES:
        raise InvalidN(f"unknown mesh family {family!r}")
    if reference == "auto":
        reference = "exact" if family in ("t1", "t2") else "extrapolate"

    hs, dofs, eigs = [], [], []
    for N in Ns:
        mesh = FAMILIES[family](N)
        system = assemble_global(mesh, spec)
        result = solve_steklov(system, k)
        hs.append(mesh.max_diameter())
        dofs.append(mesh.n_vertices)
        eigs.append(result.lambdas)
    eigenvalues = np.asarray(eigs)

    study = ConvergenceStudy(family=family, alpha=spec.alpha, Ns=Ns, hs=hs,
                             n_dofs=dofs, eigenvalues=eigenvalues)
    extrapolated = None
    if reference == "exact":
        refs = np.array([exact_square_eigenvalue(i + 1) for i in range(k)])
    else:
        extrapolated = []
        refs = np.empty(k)
        for i in range(k):
            try:
                lam, c, a = extrapolate(hs, eigenvalues[:, i])
            except (FitDiverged, InsufficientLevels):
                lam, c, a = float(eigenvalues[-1, i]), float("nan"), float("nan")
            extrapolated.append((lam, c, a))
            refs[i] = lam

    study.references = refs
    study.extrapolated = extrapolated
    study.errors = np.abs(eigenvalues - refs[None, :])
    if len(Ns) >= 2:
        orders = np.empty(k)
        for i in range(k):
            err = study.errors[:, i]
            orders[i] = fit_order(hs, err) if np.all(err > 0) else float("nan")
        study.orders = orders
    return study


# ---------------------------------------------------------------------------
# table emitters

def study_to_markdown(study: ConvergenceStudy) -> str:
    k = study.k
    header = ["N", "h", "dofs"] + [f"lambda_{i + 1}" for i in range(k)]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "---|" * len(header)]
    for row, N in enumerate(study.Ns):
        cells = [str(N), f"{study.hs[row]:.6g}", str(study.n_dofs[row])]
        cells += [f"{v:.4f}" for v in study.eigenvalues[row]]
        lines.append("| " + " | ".join(cells) + " |")
    if study.orders is not None:
        lines.append("| Order |  |  | "
                     + " | ".join(f"{o:.2f}" for o in study.orders) + " |")
    label = "Extrap." if study.extrapolated is not None else "Exact"
    if study.references is not None:
        lines.append(f"| {label} |  |  | "
                     + " | ".join(f"{r:.4f}" for r in study.references) + " |")
    return "\n".join(lines) + "\n"


def study_to_csv(study: ConvergenceStudy) -> str:
    k = study.k
    out = ["N,h,dofs," + ",".join(f"lambda_{i + 1}" for i in range(k))]
    for row, N in enumerate(study.Ns):
        vals = ",".join(f"{v:.17g}" for v in study.eigenvalues[row])
        out.append(f"{N},{study.hs[row]:.17g},{study.n_dofs[row]},{vals}")
    if study.orders is not None:
        out.append("Order,,," + ",".join(f"{o:.17g}" for o in study.orders))
    if study.references is not None:
        label = "Extrap" if study.extrapolated is not None else "Exact"
        out.append(f"{label},,,"
                   + ",".join(f"{r:.17g}" for r in study.references))
    return "\n".join(out) + "\n"
