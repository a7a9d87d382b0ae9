"""One-dimensional averaging operator and its norm/identity checks.

The central object is T f(x) = x^-a * integral_0^x s^b f(s) ds.  For
p >= 1 and p(a-1) > alpha it satisfies

    integral |T f|^p x^alpha dx
        <= (p(a-1) - alpha)^-1 * integral |f|^p x^(alpha - p(a-b-1)) dx,

with equality at p = 1 for f >= 0 (Tonelli).  Specialized to a = 2, b = 1
it reproduces the exact identity (u/x)' = T(u''), whose n-fold derivative
version gives the weighted bounds on d^n/dx^n (u^(k)(x)/x) checked by
:func:`corollary22_check`.  :func:`hardy1d_quotient` measures profiles
against the sharp one-dimensional weighted Hardy constant (p/|beta+1|)^p.

Left-hand integrals run over (0, infinity): the piece beyond the profile
support, where T f decays like x^-a times a constant, is added in closed
form.  Integrands |f|^p with non-even p are integrated with panels split
at the sign changes of f (see quadrature).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import OneDimConfig, ParameterError, ValidationContext, validate
from .quadrature import (
    CumulativeIntegral,
    QuadratureRule,
    integrate_abs_power,
    split_panels_at_roots,
)

__all__ = [
    "REL_TOL_BOUND",
    "REL_TOL_EQUALITY",
    "REL_TOL_RESIDUAL",
    "apply_T",
    "PropBoundCheck",
    "prop_bound_check",
    "IdentityCheck",
    "identity_check",
    "CW10Check",
    "cw10_check",
    "Cor22Check",
    "corollary22_check",
    "Hardy1DCheck",
    "hardy1d_quotient",
]

# documented contract tolerances (relative)
REL_TOL_BOUND = 1e-8      # one-sided norm bounds
REL_TOL_EQUALITY = 1e-9   # Tonelli equality at p = 1, f >= 0
REL_TOL_RESIDUAL = 1e-8   # pointwise identity residuals, scaled

_TINY = 1e-300


def _as_callable(f, nu: int = 0) -> Callable:
    if hasattr(f, "evaluate"):
        return lambda x: f.evaluate(x, nu)
    if nu != 0:
        raise ParameterError("derivative orders need a profile object")
    return f


def _default_rule(profile, rule: Optional[QuadratureRule]) -> QuadratureRule:
    return QuadratureRule.for_profile(profile) if rule is None else rule


def apply_T(config: OneDimConfig, f, rule: Optional[QuadratureRule] = None):
    """Return T f as a callable (with its cumulative integral attached).

    ``f`` is a profile object or a plain callable; in the latter case a
    rule must be given (it fixes the panels of the prefix accumulation).
    """
    if rule is None:
        if not hasattr(f, "breakpoints"):
            raise ParameterError("apply_T needs a rule when f is a bare callable")
        rule = QuadratureRule.for_profile(f)
    F = CumulativeIntegral(_as_callable(f), config.b, rule)
    a = config.a

    def T(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros(x.shape, dtype=float)
        pos = x > 0
        out[pos] = x[pos] ** (-a) * F(x[pos])
        return out[0] if scalar else out

    T.cumulative = F
    return T


@dataclass(frozen=True)
class PropBoundCheck:
    config: OneDimConfig
    lhs: float
    rhs_bound: float
    ratio: float
    constant: float
    tail: float

    @property
    def ok(self) -> bool:
        return self.ratio <= 1.0 + REL_TOL_BOUND


def prop_bound_check(
    config: OneDimConfig,
    profile,
    rule: Optional[QuadratureRule] = None,
) -> PropBoundCheck:
    """Check integral |T f|^p x^alpha <= C * integral |f|^p x^(shifted weight).

    The left integral is quadrature over the support plus the exact tail
    |F_total|^p * r1^(alpha - p a + 1) / (p a - alpha - 1).
    """
    msg = validate(None, ValidationContext.PROP_BOUND, config)
    if msg is not None:
        raise ParameterError(msg)
    rule = _default_rule(profile, rule)
    p, a, alpha = config.p, config.a, config.alpha

    F = CumulativeIntegral(_as_callable(profile), config.b, rule)
    sub = QuadratureRule(split_panels_at_roots(F, rule.panels), rule.order)
    tf_abs_p = np.abs(sub.nodes ** (-a) * F(sub.nodes)) ** p
    lhs_main = float(np.sum(sub.weights * tf_abs_p * sub.nodes**alpha))
    r1 = rule.span[1]
    decay = p * a - alpha - 1.0  # > 0 whenever p(a-1) > alpha and p >= 1
    tail = abs(F.total) ** p * r1 ** (alpha - p * a + 1.0) / decay
    lhs = lhs_main + tail

    rhs_int = integrate_abs_power(
        _as_callable(profile), p, config.rhs_weight_exponent, rule
    )
    rhs_bound = config.bound_constant * rhs_int
    ratio = lhs / rhs_bound if rhs_bound > _TINY else 0.0
    return PropBoundCheck(config, lhs, rhs_bound, ratio, config.bound_constant, tail)


@dataclass(frozen=True)
class IdentityCheck:
    max_abs_residual: float
    scale: float

    @property
    def normalized(self) -> float:
        return self.max_abs_residual / self.scale if self.scale > 0 else 0.0

    @property
    def ok(self) -> bool:
        return self.normalized <= REL_TOL_RESIDUAL


def identity_check(profile, rule: Optional[QuadratureRule] = None) -> IdentityCheck:
    """Residual of (u/x)' against T_{2,1}(u'') at all quadrature nodes."""
    rule = _default_rule(profile, rule)
    x = rule.nodes
    u = profile.evaluate(x)
    du = profile.evaluate(x, 1)
    lhs = (x * du - u) / x**2
    T = apply_T(OneDimConfig(p=1, a=2, b=1, alpha=0), lambda s: profile.evaluate(s, 2), rule)
    rhs = T(x)
    residual = float(np.max(np.abs(lhs - rhs))) if x.size else 0.0
    scale = float(max(np.max(np.abs(lhs), initial=0.0), np.max(np.abs(rhs), initial=0.0)))
    return IdentityCheck(residual, scale)


@dataclass(frozen=True)
class CW10Check:
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > _TINY else 0.0

    @property
    def ok(self) -> bool:
        return self.ratio <= 1.0 + REL_TOL_BOUND


def cw10_check(profile, rule: Optional[QuadratureRule] = None) -> CW10Check:
    """integral |(u/x)'| dx <= integral |u''| dx (L^1 endpoint of the chain)."""
    rule = _default_rule(profile, rule)

    def ddu_over_x(x):
        return (x * profile.evaluate(x, 1) - profile.evaluate(x)) / x**2

    lhs = integrate_abs_power(ddu_over_x, 1.0, 0.0, rule)
    rhs = integrate_abs_power(lambda x: profile.evaluate(x, 2), 1.0, 0.0, rule)
    return CW10Check(lhs, rhs)


@dataclass(frozen=True)
class Cor22Check:
    n: int
    k: int
    p: float
    alpha: float
    lhs: float
    rhs_bound: float
    ratio: float
    route_gap: float
    scale: float

    @property
    def ok(self) -> bool:
        gap_ok = self.route_gap <= REL_TOL_RESIDUAL * max(self.scale, _TINY)
        return gap_ok and self.ratio <= 1.0 + REL_TOL_BOUND


def corollary22_check(
    profile,
    n: int,
    k: int,
    p: float,
    alpha: float,
    rule: Optional[QuadratureRule] = None,
) -> Cor22Check:
    """Weighted bound on d^n/dx^n (u^(k)(x)/x) against u^(n+k+1).

    The inner derivative is computed twice: directly via the Leibniz
    expansion sum_j C(n,j) (-1)^j j! x^(-1-j) u^(k+n-j), and through the
    averaging operator with (a, b) = (n+1, n) applied to u^(n+k+1);
    ``route_gap`` is their maximal disagreement at the quadrature nodes.
    The bound constant is 1 / (p n - alpha).
    """
    if int(n) != n or n < 1 or int(k) != k or k < 0:
        raise ParameterError(f"need integer n >= 1, k >= 0, got n={n}, k={k}")
    if n + k + 1 > 4:
        raise ParameterError(
            f"total derivative order n+k+1 must be <= 4, got {n + k + 1}"
        )
    config = OneDimConfig(p=p, a=n + 1.0, b=float(n), alpha=alpha)
    msg = validate(None, ValidationContext.PROP_BOUND, config)
    if msg is not None:
        raise ParameterError(msg)
    rule = _default_rule(profile, rule)

    def direct(x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros(x.shape, dtype=float)
        for j in range(n + 1):
            coeff = math.comb(n, j) * (-1.0) ** j * math.factorial(j)
            acc += coeff * x ** (-1.0 - j) * profile.evaluate(x, k + n - j)
        return acc

    top = lambda x: profile.evaluate(x, n + k + 1)
    T = apply_T(config, top, rule)
    x = rule.nodes
    d_vals = direct(x)
    gap = float(np.max(np.abs(d_vals - T(x)))) if x.size else 0.0
    scale = float(np.max(np.abs(d_vals), initial=0.0))

    lhs = integrate_abs_power(direct, p, alpha, rule)
    rhs_int = integrate_abs_power(top, p, alpha, rule)
    rhs_bound = rhs_int / (p * n - alpha)
    ratio = lhs / rhs_bound if rhs_bound > _TINY else 0.0
    return Cor22Check(int(n), int(k), float(p), float(alpha), lhs, rhs_bound, ratio, gap, scale)


@dataclass(frozen=True)
class Hardy1DCheck:
    p: float
    beta: float
    lhs: float
    rhs: float
    sharp: float

    @property
    def ratio(self) -> float:
        """lhs / rhs; the sharp constant is its supremum over profiles."""
        return self.lhs / self.rhs if self.rhs > _TINY else 0.0

    @property
    def sharp_fraction(self) -> float:
        return self.ratio / self.sharp

    @property
    def ok(self) -> bool:
        return self.lhs <= self.sharp * self.rhs * (1.0 + REL_TOL_BOUND)


def hardy1d_quotient(
    profile,
    p: float,
    beta: float,
    rule: Optional[QuadratureRule] = None,
) -> Hardy1DCheck:
    """integral r^beta |f|^p dr vs (p/|beta+1|)^p integral r^(beta+p) |f'|^p dr."""
    if p <= 1:
        raise ParameterError(f"the 1-D weighted Hardy bound needs p > 1, got {p}")
    if beta == -1:
        raise ParameterError("beta = -1 is outside the weighted Hardy range")
    rule = _default_rule(profile, rule)
    lhs = integrate_abs_power(_as_callable(profile), p, beta, rule)
    rhs = integrate_abs_power(lambda x: profile.evaluate(x, 1), p, beta + p, rule)
    sharp = (p / abs(beta + 1.0)) ** p
    return Hardy1DCheck(float(p), float(beta), lhs, rhs, sharp)
