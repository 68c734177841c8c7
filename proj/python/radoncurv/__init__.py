"""Generalized Radon transforms of distribution families and the curvature check."""

import json as _json

from ._core import (
    AnnihilatorViolation,
    Embedding,
    Grid,
    RankDeficiencyError,
    TestFunction,
    annihilator_basis,
    annihilator_pool,
    builtin_test_function,
    circle_embedding,
    differential_of_transform,
    dirac_embedding,
    flat_covariant_derivative,
    gaussian,
    hessian_of_transform,
    kernel_diagnostics,
    line_embedding,
    make_grid,
    make_test_function,
    operator_matrix,
    pair,
    radon_forward,
    sff_pairing,
    sinogram_samples,
    smooth_bump,
)
from ._core import verify_curvature_theorem as _verify


def verify_curvature_theorem(embedding, y, pool, n_directions=10, tol=1e-4, seed=1, route="fd"):
    """Run the curvature comparison and return the report as a dict."""
    return _json.loads(_verify(embedding, y, pool, n_directions, tol, seed, route))


__all__ = [
    "AnnihilatorViolation",
    "Embedding",
    "Grid",
    "RankDeficiencyError",
    "TestFunction",
    "annihilator_basis",
    "annihilator_pool",
    "builtin_test_function",
    "circle_embedding",
    "differential_of_transform",
    "dirac_embedding",
    "flat_covariant_derivative",
    "gaussian",
    "hessian_of_transform",
    "kernel_diagnostics",
    "line_embedding",
    "make_grid",
    "make_test_function",
    "operator_matrix",
    "pair",
    "radon_forward",
    "sff_pairing",
    "sinogram_samples",
    "smooth_bump",
    "verify_curvature_theorem",
]
