"""hrlab: numerical laboratory for weighted Hardy-Rellich inequalities.

The package checks, at the critical exponent p = N and around it, the
chain of one-dimensional operator bounds and spherical decompositions
behind weighted inequalities between |grad(u/|x|)|, the Laplacian and
Hessian of u, reproduces the classical sharp constants by generalized
eigenproblems, and probes the two-dimensional degeneracy where no
Rellich-type bound survives.
"""

__version__ = "0.1.0"

from . import corpus, functionals, model, ops1d, quadrature, quotients  # noqa: F401
from .model import (  # noqa: F401
    AngularMode,
    OneDimConfig,
    ParameterError,
    RadialProfile,
    SpaceParams,
    TestField,
    ValidationContext,
    make_field,
    validate,
)
