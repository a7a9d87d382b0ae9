"""Energy functionals for fields u = g(r) Y(sigma).

The left-hand side is the p-energy of nabla(u/|x|), evaluated through the
pointwise splitting

    |nabla(u/|x|)|^2 = r^-4 |nabla_S u|^2 + r^-4 |r du/dr - u|^2,

which is an algebraic identity, not an inequality.  For p = 2 the cross
terms integrate to zero and the total equals the sum of the radial and
angular pieces; for p != 2 the total is computed by tensor quadrature and
the two pieces are reported as diagnostics.

Right-hand sides: |Laplacian u|^p, the exact Hessian energy |D^2 u|^p in
polar/zonal coordinates, and a separable surrogate S(u) >= |D^2 u| built
from the same blocks (second radial derivative, mixed gradient block,
sphere Hessian, first-derivative tail term).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import corpus
from .model import AngularMode, ParameterError, TestField
from .quadrature import (
    QuadratureRule,
    integrate_abs_power,
    integrate_radial,
    sphere_area,
    sphere_rule,
    sphere_rule_split,
)

__all__ = [
    "DecompositionReport",
    "lhs_functional",
    "rhs_laplacian",
    "rhs_hessian_exact",
    "rhs_surrogate",
    "ConvexityReport",
    "convexity_check",
    "BlowupReport",
    "remark_blowup_report",
]

#: Relative tolerance for exact algebraic identities checked in floating point.
REL_TOL_IDENTITY = 1e-8


def _default_rule(field: TestField, rule: Optional[QuadratureRule]) -> QuadratureRule:
    return rule if rule is not None else QuadratureRule.for_profile(field.profile)


def _angular_tables(mode: AngularMode, n_ang: int):
    """Nodes, weights and Y-derivative arrays for tensor quadrature."""
    t, w = sphere_rule(mode.N, n_ang)
    y0 = mode.value(t)
    if mode.N == 2:
        d1 = mode.dphi(t)  # dY/dtheta
        grad_sq = d1**2
        hess_sq = mode.dphi2(t) ** 2
        mixed = d1
        extra = None
    else:
        d1 = mode.dphi(t)  # dY/dphi at cos(phi) = t
        grad_sq = d1**2
        cot = mode.cot_dphi(t)
        hess_sq = mode.dphi2(t) ** 2 + cot**2
        mixed = d1
        extra = cot
    return t, w, y0, grad_sq, hess_sq, mixed, extra


def _grad_zero_splits(mode: AngularMode):
    """Parameter values where |nabla_S Y| vanishes (for kink-aware powers)."""
    if mode.ell == 0:
        return np.empty(0)
    if mode.N == 2:
        return np.array([m * np.pi / mode.ell for m in range(2 * mode.ell)])
    series = np.polynomial.legendre.Legendre.basis(mode.ell).deriv()
    roots = series.roots()
    return np.real(roots[np.abs(np.imag(roots)) < 1e-12])


def _sphere_abs_power(fn: Callable, zeros: np.ndarray, N: int, p: float) -> float:
    t, w = sphere_rule_split(N, zeros)
    return float(np.sum(w * np.abs(fn(t)) ** p))


@dataclass(frozen=True)
class DecompositionReport:
    """p-energy of nabla(u/|x|) with its radial/angular split."""

    p: float
    value: float
    radial_part: float
    angular_part: float

    @property
    def split_sum(self) -> float:
        return self.radial_part + self.angular_part

    @property
    def split_defect(self) -> float:
        """value - (radial + angular); zero up to quadrature error iff p = 2."""
        return self.value - self.split_sum

    @property
    def split_is_exact(self) -> bool:
        return self.p == 2.0


def lhs_functional(
    field: TestField,
    rule: Optional[QuadratureRule] = None,
    n_ang: int = 64,
) -> DecompositionReport:
    """Integral of |nabla(u/|x|)|^p |x|^a over R^N."""
    params = field.params
    p, N, a = params.p, params.N, params.a
    rule = _default_rule(field, rule)
    g = field.profile
    gamma = N - 1 + a - 2 * p  # r^{N-1+a} from the volume, r^{-2p} from the split

    def radial_block(r):
        return r * g.evaluate(r, 1) - g.evaluate(r, 0)

    if field.is_radial:
        i_rad = integrate_abs_power(radial_block, p, gamma, rule)
        value = sphere_area(N) * i_rad
        return DecompositionReport(p, value, value, 0.0)

    mode = field.mode
    i_rad = integrate_abs_power(radial_block, p, gamma, rule)
    a_y = _sphere_abs_power(mode.value, mode.zeros(), N, p)
    radial_part = i_rad * a_y

    i_ang = integrate_abs_power(lambda r: g.evaluate(r, 0), p, gamma, rule)
    if mode.ell == 0:
        angular_part = 0.0
    else:
        a_g = _sphere_abs_power(mode.grad_magnitude, _grad_zero_splits(mode), N, p)
        angular_part = i_ang * a_g

    # exact total by tensor quadrature (integrand is (sum of squares)^{p/2})
    r = rule.nodes
    wr = rule.weights * r ** (N - 1 + a)
    _, ws, y0, grad_sq, _, _, _ = _angular_tables(mode, n_ang)
    g0 = g.evaluate(r, 0)
    rb = r * g.evaluate(r, 1) - g0
    dens = (
        np.multiply.outer(g0**2, grad_sq) + np.multiply.outer(rb**2, y0**2)
    ) / (r**4)[:, None]
    value = float(wr @ dens ** (p / 2.0) @ ws)
    return DecompositionReport(p, value, radial_part, angular_part)


def rhs_laplacian(
    field: TestField,
    rule: Optional[QuadratureRule] = None,
    n_ang: int = 64,
) -> float:
    """Integral of |Laplacian u|^p |x|^a."""
    params = field.params
    p, N, a = params.p, params.N, params.a
    rule = _default_rule(field, rule)
    g = field.profile
    lam = 0.0 if field.is_radial else field.mode.eigenvalue

    def lap_profile(r):
        return (
            g.evaluate(r, 2)
            + (N - 1) * g.evaluate(r, 1) / r
            - lam * g.evaluate(r, 0) / r**2
        )

    i_rad = integrate_abs_power(lap_profile, p, N - 1 + a, rule)
    if field.is_radial:
        return sphere_area(N) * i_rad
    mode = field.mode
    return i_rad * _sphere_abs_power(mode.value, mode.zeros(), N, p)


def _hessian_density(field: TestField, r: np.ndarray, n_ang: int):
    """|D^2 u|^2 on the (r, angle) tensor grid, plus the angular weights."""
    g = field.profile
    g0 = g.evaluate(r, 0)
    g1 = g.evaluate(r, 1)
    g2 = g.evaluate(r, 2)
    mode = field.mode
    N = field.params.N
    if field.is_radial:
        dens = g2**2 + (N - 1) * (g1 / r) ** 2
        return dens[:, None], np.array([sphere_area(N)])
    t, ws, y0, _, _, d1, cot = _angular_tables(mode, n_ang)
    h_rr = np.multiply.outer(g2, y0)
    h_mix = np.multiply.outer((g1 - g0 / r) / r, d1)
    if N == 2:
        y2 = mode.dphi2(t)
        h_tt = np.multiply.outer(g1 / r, y0) + np.multiply.outer(g0 / r**2, y2)
        dens = h_rr**2 + 2.0 * h_mix**2 + h_tt**2
    else:
        yff = mode.dphi2(t)
        h_ff = np.multiply.outer(g1 / r, y0) + np.multiply.outer(g0 / r**2, yff)
        h_cc = np.multiply.outer(g1 / r, y0) + np.multiply.outer(g0 / r**2, cot)
        dens = h_rr**2 + 2.0 * h_mix**2 + h_ff**2 + h_cc**2
    return dens, ws


def rhs_hessian_exact(
    field: TestField,
    rule: Optional[QuadratureRule] = None,
    n_ang: int = 64,
) -> float:
    """Integral of |D^2 u|^p |x|^a, with the Hessian in polar/zonal form."""
    params = field.params
    p, N, a = params.p, params.N, params.a
    rule = _default_rule(field, rule)
    r = rule.nodes
    wr = rule.weights * r ** (N - 1 + a)
    dens, ws = _hessian_density(field, r, n_ang)
    return float(wr @ dens ** (p / 2.0) @ ws)


def rhs_surrogate(
    field: TestField,
    rule: Optional[QuadratureRule] = None,
    n_ang: int = 64,
    last_term: str = "r2",
) -> float:
    """Integral of S(u)^p |x|^a for the separable Hessian surrogate

        S^2 = (g'' Y)^2 + 2 (g'/r)^2 |nabla_S Y|^2 + (g/r^2)^2 |D_S^2 Y|^2
              + (N-1) g'^2 Y^2 / r^k,

    with k = 2 (``last_term="r2"``, the scale-consistent default) or k = 1
    (``last_term="r1"``, kept selectable for side-by-side diagnostics).
    """
    if last_term not in ("r2", "r1"):
        raise ParameterError(f"last_term must be 'r2' or 'r1', got {last_term!r}")
    k = 2 if last_term == "r2" else 1
    params = field.params
    p, N, a = params.p, params.N, params.a
    rule = _default_rule(field, rule)
    g = field.profile
    r = rule.nodes
    wr = rule.weights * r ** (N - 1 + a)
    g0 = g.evaluate(r, 0)
    g1 = g.evaluate(r, 1)
    g2 = g.evaluate(r, 2)
    if field.is_radial:
        dens = (g2**2 + (N - 1) * g1**2 / r**k)[:, None]
        ws = np.array([sphere_area(N)])
    else:
        _, ws, y0, grad_sq, hess_sq, _, _ = _angular_tables(field.mode, n_ang)
        dens = (
            np.multiply.outer(g2**2, y0**2)
            + 2.0 * np.multiply.outer((g1 / r) ** 2, grad_sq)
            + np.multiply.outer((g0 / r**2) ** 2, hess_sq)
            + (N - 1) * np.multiply.outer(g1**2 / r**k, y0**2)
        )
    return float(wr @ dens ** (p / 2.0) @ ws)


@dataclass(frozen=True)
class ConvexityReport:
    """Sampled check of (s+t)^{N/2} <= 2^{N/2-1} (s^{N/2} + t^{N/2})."""

    N: int
    n_samples: int
    max_defect: float
    scale: float

    @property
    def ok(self) -> bool:
        return self.max_defect <= 1e-12 * self.scale


def convexity_check(N: int, n_samples: int = 4096, seed: int = 0) -> ConvexityReport:
    """Sample the power-sum inequality used to split the two energy blocks.

    Valid for N >= 2 (the exponent N/2 must be >= 1 for convexity).
    """
    if N < 2:
        raise ParameterError("convexity splitting needs N >= 2")
    rng = np.random.default_rng(corpus.child_seed(seed, f"convexity-{N}"))
    s = 10.0 ** rng.uniform(-6, 6, n_samples)
    t = 10.0 ** rng.uniform(-6, 6, n_samples)
    lhs = (s + t) ** (N / 2.0)
    rhs = 2.0 ** (N / 2.0 - 1.0) * (s ** (N / 2.0) + t ** (N / 2.0))
    return ConvexityReport(
        N=N,
        n_samples=n_samples,
        max_defect=float(np.max(lhs - rhs)),
        scale=float(np.max(rhs)),
    )


@dataclass(frozen=True)
class BlowupReport:
    """Energies of the planar plateau field u_R = g_R(r) cos(theta).

    For N = 2 the gradient identity

        int |nabla(u/|x|)|^2 = int |nabla u|^2/|x|^2 - int u^2/|x|^4

    is exact; ``identity_defect`` records its quadrature residual.  The
    Hardy and Rellich terms each grow like log R while the Laplacian term
    stays bounded, which is the degeneracy this family exhibits.
    """

    R: float
    hardy_term: float
    rellich_term: float
    lap_term: float
    lhs_grad: float
    identity_defect: float
    scale: float

    @property
    def identity_ok(self) -> bool:
        return abs(self.identity_defect) <= REL_TOL_IDENTITY * self.scale

    @property
    def lap_to_rellich(self) -> float:
        return self.lap_term / self.rellich_term


def remark_blowup_report(R: float, rule: Optional[QuadratureRule] = None) -> BlowupReport:
    """Evaluate the four quadratic energies of the plateau field at radius R."""
    field = corpus.plateau_field(R)
    g = field.profile
    rule = _default_rule(field, rule)

    def sq(fn, gamma):
        return np.pi * integrate_radial(fn, gamma, rule)

    g0 = lambda r: g.evaluate(r, 0)
    g1 = lambda r: g.evaluate(r, 1)
    g2 = lambda r: g.evaluate(r, 2)

    hardy = sq(lambda r: g1(r) ** 2 + (g0(r) / r) ** 2, -1.0)
    rellich = sq(lambda r: g0(r) ** 2, -3.0)
    lap = sq(lambda r: (g2(r) + g1(r) / r - g0(r) / r**2) ** 2, 1.0)
    lhs_grad = sq(lambda r: (g0(r) ** 2 + (r * g1(r) - g0(r)) ** 2) / r**4, 1.0)
    defect = lhs_grad - (hardy - rellich)
    scale = max(abs(lhs_grad), abs(hardy), abs(rellich))
    return BlowupReport(
        R=float(R),
        hardy_term=hardy,
        rellich_term=rellich,
        lap_term=lap,
        lhs_grad=lhs_grad,
        identity_defect=defect,
        scale=scale,
    )
