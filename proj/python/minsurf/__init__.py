"""Discrete minimal surfaces with convergence diagnostics."""

from _minsurf import (
    BoundaryCurve,
    CertificateViolation,
    DomainError,
    Triangulation,
    area,
    area_gradient,
    build_cylinder,
    build_disk,
    converge_study,
    dist_imm,
    dist_p,
    finite_limits,
    geodesic,
    hausdorff,
    matrix_exp_sym,
    matrix_log_spd,
    parse_curve,
    pushforward_argmin,
    read_mesh,
    solve,
    subdivide,
    thicken,
    write_mesh,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryCurve",
    "CertificateViolation",
    "DomainError",
    "Triangulation",
    "area",
    "area_gradient",
    "build_cylinder",
    "build_disk",
    "converge_study",
    "dist_imm",
    "dist_p",
    "finite_limits",
    "geodesic",
    "hausdorff",
    "matrix_exp_sym",
    "matrix_log_spd",
    "parse_curve",
    "pushforward_argmin",
    "read_mesh",
    "solve",
    "subdivide",
    "thicken",
    "write_mesh",
]
