"""Quadrature design and audit on model manifolds (circle, flat tori, S^2)."""
from .errors import InvalidInputError, PreconditionError, QSpecError, ResourceError
from .heat_kernel import KernelConfig, grad_kernel_inner, heat_kernel, kernel_inner
from .manifold import (
    EigenDescriptor,
    ManifoldSpec,
    canonicalize,
    eigen_matrix,
    eigenbasis,
    eval_eigenfunction,
    geodesic_distance,
    weyl_lambda,
)
from .quadrature_audit import AuditReport, QuadratureRule, audit_exactness, fit_weights
from .spectral_bound import (
    BoundCurve,
    bound_curve,
    c_d,
    rayleigh_bound,
    theorem2_ceiling,
)
from .energy_optimizer import (
    OptimizerConfig,
    approx_energy,
    energy_gradient,
    optimize_points,
    simplified_energy,
)

__version__ = "0.1.0"
