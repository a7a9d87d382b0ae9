"""Parameter objects, radial profiles, angular modes and test fields.

Everything downstream (quadrature, one-dimensional operator checks, the
N-dimensional functionals and the quotient solvers) consumes the types
defined here.  Profiles are compactly supported piecewise polynomials with
exact derivatives up to order four; fields are either radial, u = g(|x|),
or separable, u = g(|x|) Y(omega), with Y a ring harmonic cos(l theta) on
S^1 or a zonal Legendre harmonic P_l(cos phi) on S^2.

Conventions
-----------
* ``N`` is the ambient dimension (N >= 1), ``p`` the integrability exponent
  (default: the critical value p = N), ``a`` the radial weight exponent of
  |x|^a.
* Radial profiles vanish identically near both ends of their knot vector:
  with simple (unrepeated) knots, zeroing the first and last ``degree``
  coefficients removes every basis function that touches the boundary
  spans, so the support is strictly inside (knots[0], knots[-1]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import BSpline, PPoly

__all__ = [
    "ParameterError",
    "SpaceParams",
    "OneDimConfig",
    "ValidationContext",
    "validate",
    "require",
    "RadialProfile",
    "PiecewisePolyProfile",
    "log_knots",
    "AngularMode",
    "legendre_table",
    "TestField",
    "make_field",
]

MAX_DERIVATIVE_ORDER = 4


class ParameterError(ValueError):
    """Raised when parameters violate a documented precondition."""


@dataclass(frozen=True)
class SpaceParams:
    """Ambient-space parameters (N, p, a).

    ``p`` defaults to the critical exponent p = N.  ``a`` is the exponent of
    the radial weight |x|^a carried by the integrals.
    """

    N: int
    p: Optional[float] = None
    a: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be an integer >= 1, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        p = self.N if self.p is None else float(self.p)
        if not (p > 0 and math.isfinite(p)):
            raise ParameterError(f"p must be finite and > 0, got {p}")
        object.__setattr__(self, "p", p)
        if not math.isfinite(self.a):
            raise ParameterError("a must be finite")
        object.__setattr__(self, "a", float(self.a))


@dataclass(frozen=True)
class OneDimConfig:
    """Configuration of the averaging operator x^-a * integral_0^x s^b f(s) ds.

    ``p`` is the exponent of the norm inequality, ``alpha`` the weight
    exponent on the left-hand side.  The operator bound requires p >= 1 and
    p(a - 1) > alpha; that inequality is checked by ``validate`` with
    context ``PROP_BOUND``, not here, so rejected configurations can still
    be constructed and reported.
    """

    p: float
    a: float
    b: float
    alpha: float

    def __post_init__(self):
        for name in ("p", "a", "b", "alpha"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.p < 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")

    @property
    def bound_constant(self) -> float:
        """1 / (p(a-1) - alpha); only meaningful when PROP_BOUND validates."""
        return 1.0 / (self.p * (self.a - 1.0) - self.alpha)

    @property
    def rhs_weight_exponent(self) -> float:
        """Weight exponent on the right-hand side: alpha - p(a - b - 1)."""
        return self.alpha - self.p * (self.a - self.b - 1.0)


class ValidationContext(Enum):
    """Which precondition a (params, config) pair is being validated for."""

    PROP_BOUND = "prop_bound"
    RADIAL_STEP = "radial_step"
    ANGULAR_STEP = "angular_step"
    CZ_RANGE = "cz_range"


def validate(
    params: Optional[SpaceParams],
    context: ValidationContext,
    one_dim: Optional[OneDimConfig] = None,
) -> Optional[str]:
    """Check the precondition for ``context``; return None if OK else a message.

    PROP_BOUND     needs ``one_dim`` and checks p(a - 1) > alpha (``params``
                   may be None: the operator bound is purely one-dimensional).
    RADIAL_STEP    checks a < 1.
    ANGULAR_STEP   checks a != N (equivalently beta = a - N - 1 != -1).
    CZ_RANGE       checks a > -N (the |x|^a weight stays in A_infinity).
    """
    if context is ValidationContext.PROP_BOUND:
        if one_dim is None:
            return "PROP_BOUND validation needs a OneDimConfig"
        gap = one_dim.p * (one_dim.a - 1.0) - one_dim.alpha
        if gap <= 0:
            return (
                f"operator bound needs p(a-1) > alpha: "
                f"p={one_dim.p}, a={one_dim.a}, alpha={one_dim.alpha} "
                f"(gap {gap:.3g} <= 0)"
            )
        return None
    if params is None:
        return f"{context.value} validation needs SpaceParams"
    if context is ValidationContext.RADIAL_STEP:
        if params.a >= 1:
            return f"radial step needs a < 1, got a={params.a}"
        return None
    if context is ValidationContext.ANGULAR_STEP:
        if params.a == params.N:
            return (
                f"angular step needs a != N (weight exponent beta = a-N-1 "
                f"hits the forbidden -1), got a = N = {params.a}"
            )
        return None
    if context is ValidationContext.CZ_RANGE:
        if params.a <= -params.N:
            return f"weighted range needs a > -N, got a={params.a}, N={params.N}"
        return None
    raise ParameterError(f"unknown validation context {context!r}")


def require(params, context, one_dim=None):
    """Like ``validate`` but raises ParameterError on violation."""
    msg = validate(params, context, one_dim)
    if msg is not None:
        raise ParameterError(msg)


# ---------------------------------------------------------------------------
# Radial profiles
# ---------------------------------------------------------------------------


class RadialProfile:
    """Compactly supported spline profile g(r) with exact derivatives.

    Parameters
    ----------
    knots : array_like
        Strictly increasing simple knot vector, knots[0] > 0.
    degree : int
        Spline degree, at least 4 (so derivatives up to order 4 exist as
        splines).
    coefficients : array_like
        Length ``len(knots) - degree - 1``.  The first and last ``degree``
        entries must be exactly zero, which forces the profile (and all its
        derivatives) to vanish identically outside
        [knots[degree], knots[-degree-1]].
    """

    def __init__(self, knots, degree: int, coefficients):
        knots = np.asarray(knots, dtype=float)
        coefficients = np.asarray(coefficients, dtype=float)
        degree = int(degree)
        if knots.ndim != 1 or knots.size < 2:
            raise ParameterError("knots must be a 1-D array with >= 2 entries")
        if not np.all(np.diff(knots) > 0):
            raise ParameterError("knots must be strictly increasing")
        if knots[0] <= 0:
            raise ParameterError(f"knots[0] must be > 0, got {knots[0]}")
        if degree < 4:
            raise ParameterError(f"degree must be >= 4, got {degree}")
        n = knots.size - degree - 1
        if n < 2 * degree + 1:
            raise ParameterError(
                f"need at least {3 * degree + 2} knots for one interior "
                f"coefficient at degree {degree}, got {knots.size}"
            )
        if coefficients.shape != (n,):
            raise ParameterError(
                f"expected {n} coefficients for {knots.size} knots at "
                f"degree {degree}, got {coefficients.shape}"
            )
        if np.any(coefficients[:degree] != 0) or np.any(coefficients[-degree:] != 0):
            raise ParameterError(
                f"first and last {degree} coefficients must be exactly zero"
            )
        if not np.all(np.isfinite(coefficients)):
            raise ParameterError("coefficients must be finite")
        self.knots = knots
        self.degree = degree
        self.coefficients = coefficients
        base = BSpline(knots, coefficients, degree, extrapolate=False)
        ders = [base]
        for nu in range(1, MAX_DERIVATIVE_ORDER + 1):
            ders.append(ders[-1].derivative())
        self._ders = ders
        self.support = (float(knots[degree]), float(knots[-degree - 1]))

    @property
    def breakpoints(self) -> np.ndarray:
        """Distinct knot values inside the support (panel boundaries)."""
        lo, hi = self.support
        k = self.knots
        return k[(k >= lo) & (k <= hi)]

    @property
    def n_coefficients(self) -> int:
        return self.coefficients.size

    @property
    def free_slice(self) -> slice:
        """Index range of the adjustable (non-clamped) coefficients."""
        return slice(self.degree, self.n_coefficients - self.degree)

    def evaluate(self, r, nu: int = 0):
        """g^(nu)(r), exactly zero outside the support; nu <= 4."""
        if not 0 <= nu <= MAX_DERIVATIVE_ORDER:
            raise ParameterError(f"derivative order must be 0..4, got {nu}")
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        lo, hi = self.support
        inside = (r >= lo) & (r <= hi)
        if np.any(inside):
            out[inside] = self._ders[nu](r[inside])
        return out

    __call__ = evaluate

    def scale(self) -> float:
        """Coefficient-based size proxy: max|c| bounds sup|g|."""
        m = float(np.max(np.abs(self.coefficients))) if self.coefficients.size else 0.0
        return m

    def with_coefficients(self, coefficients) -> "RadialProfile":
        return RadialProfile(self.knots, self.degree, coefficients)

    def greville(self) -> np.ndarray:
        """Greville abscissae of all basis functions (coefficient sites)."""
        k, t = self.degree, self.knots
        n = self.n_coefficients
        return np.array([t[j + 1 : j + k + 1].mean() for j in range(n)])

    def __repr__(self):
        lo, hi = self.support
        return (
            f"RadialProfile(degree={self.degree}, n={self.n_coefficients}, "
            f"support=({lo:.4g}, {hi:.4g}))"
        )


class PiecewisePolyProfile:
    """Exact piecewise-polynomial profile (PPoly-backed).

    Used for analytically constructed profiles, e.g. the harmonic plateau
    family r * cutoff(r), which is a degree-10 piecewise polynomial and is
    represented here without any fitting error.  Shares the evaluation
    contract of :class:`RadialProfile`: exact derivatives up to order 4,
    identically zero outside ``support``.
    """

    def __init__(self, ppoly: PPoly, support=None):
        self._pp = ppoly
        bps = np.asarray(ppoly.x, dtype=float)
        if bps[0] <= 0:
            raise ParameterError("piecewise profile must live on r > 0")
        self.support = (
            (float(bps[0]), float(bps[-1])) if support is None else tuple(support)
        )
        self._ders = [ppoly]
        for _ in range(MAX_DERIVATIVE_ORDER):
            self._ders.append(self._ders[-1].derivative())

    @property
    def breakpoints(self) -> np.ndarray:
        return np.asarray(self._pp.x, dtype=float)

    def evaluate(self, r, nu: int = 0):
        if not 0 <= nu <= MAX_DERIVATIVE_ORDER:
            raise ParameterError(f"derivative order must be 0..4, got {nu}")
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        lo, hi = self.support
        inside = (r >= lo) & (r <= hi)
        if np.any(inside):
            out[inside] = self._ders[nu](r[inside])
        return out

    __call__ = evaluate

    def scale(self) -> float:
        # sample-based proxy; exact sup is not needed, only a stable scale
        xs = np.linspace(self.support[0], self.support[1], 257)
        return float(np.max(np.abs(self.evaluate(xs))))

    def __repr__(self):
        lo, hi = self.support
        return f"PiecewisePolyProfile(support=({lo:.4g}, {hi:.4g}))"


def log_knots(r_min: float, r_max: float, n_spans: int, degree: int = 4) -> np.ndarray:
    """Log-spaced simple knot vector on [r_min, r_max] with ``n_spans`` spans.

    The usable support of an admissible profile on this vector is
    [t[degree], t[-degree-1]], strictly inside (r_min, r_max).
    """
    if not (0 < r_min < r_max):
        raise ParameterError("need 0 < r_min < r_max")
    if n_spans < 3 * degree + 1:
        raise ParameterError(
            f"need at least {3 * degree + 1} spans for one free coefficient"
        )
    return np.geomspace(r_min, r_max, n_spans + 1)


# ---------------------------------------------------------------------------
# Angular modes
# ---------------------------------------------------------------------------


def legendre_table(ell: int, c):
    """P_l, P_l' and P_l'' at c in [-1, 1] by the three-term recurrences.

    P_{k+1} = ((2k+1) c P_k - k P_{k-1}) / (k+1), and the derivative chains
    P'_{k+1} = P'_{k-1} + (2k+1) P_k, P''_{k+1} = P''_{k-1} + (2k+1) P'_k,
    all stable on [-1, 1] including the endpoints.
    """
    c = np.asarray(c, dtype=float)
    p_prev = np.ones_like(c)
    d_prev = np.zeros_like(c)
    s_prev = np.zeros_like(c)
    if ell == 0:
        return p_prev, d_prev, s_prev
    p_cur = c.copy()
    d_cur = np.ones_like(c)
    s_cur = np.zeros_like(c)
    for k in range(1, ell):
        p_next = ((2 * k + 1) * c * p_cur - k * p_prev) / (k + 1)
        d_next = d_prev + (2 * k + 1) * p_cur
        s_next = s_prev + (2 * k + 1) * d_cur
        p_prev, p_cur = p_cur, p_next
        d_prev, d_cur = d_cur, d_next
        s_prev, s_cur = s_cur, s_next
    return p_cur, d_cur, s_cur


class AngularMode:
    """Separated angular factor of index ell on S^{N-1}, N in {2, 3}.

    N = 2: Y(theta) = cos(l theta) on the circle, parametrized by theta.
    N = 3: Y = P_l(cos phi), zonal on the 2-sphere, parametrized by
    c = cos(phi) (the natural variable of the Gauss rule; all angular
    derivatives below are expressed pole-safely in c).

    ``eigenvalue`` is l(l + N - 2), so -Delta_S Y = eigenvalue * Y.
    """

    def __init__(self, ell: int, N: int):
        if N not in (2, 3):
            raise ParameterError(f"angular modes exist for N in (2, 3), got N={N}")
        if int(ell) != ell or ell < 0:
            raise ParameterError(f"ell must be an integer >= 0, got {ell}")
        self.ell = int(ell)
        self.N = int(N)
        self.eigenvalue = float(self.ell * (self.ell + self.N - 2))

    # -- closed-form normalization, cross-checked numerically in the tests
    @property
    def norm_sq(self) -> float:
        """integral of Y^2 over the sphere."""
        if self.N == 2:
            return 2.0 * math.pi if self.ell == 0 else math.pi
        return 4.0 * math.pi / (2 * self.ell + 1)

    def value(self, t):
        """Y at parameter t (theta for N=2, c = cos phi for N=3)."""
        t = np.asarray(t, dtype=float)
        if self.N == 2:
            return np.cos(self.ell * t)
        p, _, _ = legendre_table(self.ell, t)
        return p

    def dphi(self, t):
        """dY/d(angle): -l sin(l theta), or dY/dphi = -sin(phi) P_l'(c)."""
        t = np.asarray(t, dtype=float)
        if self.N == 2:
            return -self.ell * np.sin(self.ell * t)
        _, d, _ = legendre_table(self.ell, t)
        return -np.sqrt(np.clip(1.0 - t * t, 0.0, None)) * d

    def dphi2(self, t):
        """d^2 Y/d(angle)^2; for N=3: -c P_l'(c) + (1 - c^2) P_l''(c)."""
        t = np.asarray(t, dtype=float)
        if self.N == 2:
            return -(self.ell**2) * np.cos(self.ell * t)
        _, d, s = legendre_table(self.ell, t)
        return -t * d + (1.0 - t * t) * s

    def cot_dphi(self, t):
        """cot(phi) dY/dphi, written pole-safely as -c P_l'(c) (N=3 only)."""
        if self.N != 3:
            raise ParameterError("cot-term exists only on S^2")
        t = np.asarray(t, dtype=float)
        _, d, _ = legendre_table(self.ell, t)
        return -t * d

    def grad_magnitude(self, t):
        """|grad_S Y| at parameter t."""
        return np.abs(self.dphi(t))

    def sphere_hessian_sq(self, t):
        """Squared Frobenius norm of the intrinsic sphere Hessian of Y."""
        if self.N == 2:
            return self.dphi2(t) ** 2
        return self.dphi2(t) ** 2 + self.cot_dphi(t) ** 2

    def zeros(self) -> np.ndarray:
        """Parameter values where Y vanishes (kink sites of |Y|^p)."""
        if self.ell == 0:
            return np.array([])
        if self.N == 2:
            m = np.arange(2 * self.ell)
            return (2 * m + 1) * math.pi / (2 * self.ell)
        coeffs = np.zeros(self.ell + 1)
        coeffs[-1] = 1.0
        return np.polynomial.legendre.legroots(coeffs)

    def __repr__(self):
        return f"AngularMode(ell={self.ell}, N={self.N})"


# ---------------------------------------------------------------------------
# Test fields
# ---------------------------------------------------------------------------


class TestField:
    """u = g(|x|) (radial) or u = g(|x|) Y(omega) (separable, N in {2, 3})."""

    __test__ = False  # not a pytest class despite the name

    def __init__(self, params: SpaceParams, profile, mode: Optional[AngularMode] = None):
        if mode is not None:
            if params.N not in (2, 3):
                raise ParameterError("separable fields need N in (2, 3)")
            if mode.N != params.N:
                raise ParameterError(
                    f"mode is on S^{mode.N - 1} but params have N={params.N}"
                )
        self.params = params
        self.profile = profile
        self.mode = mode

    @property
    def is_radial(self) -> bool:
        return self.mode is None

    def eval_cartesian(self, points):
        """u at Cartesian points, shape (m, N); used by the FD oracles."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.params.N:
            raise ParameterError(
                f"points must have {self.params.N} columns, got {pts.shape[1]}"
            )
        r = np.sqrt(np.sum(pts * pts, axis=1))
        g = self.profile.evaluate(r)
        if self.is_radial:
            return g
        if self.params.N == 2:
            theta = np.arctan2(pts[:, 1], pts[:, 0])
            return g * self.mode.value(theta)
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(r > 0, pts[:, 2] / np.where(r > 0, r, 1.0), 0.0)
        return g * self.mode.value(c)

    def scale(self) -> float:
        return self.profile.scale()

    def __repr__(self):
        kind = "radial" if self.is_radial else f"separable(ell={self.mode.ell})"
        return f"TestField({kind}, N={self.params.N}, p={self.params.p}, a={self.params.a})"


def make_field(kind: str, params: SpaceParams, profile, ell: Optional[int] = None) -> TestField:
    """Construct a TestField; ``kind`` is 'radial' or 'separable'.

    ``profile`` may be a profile object or a (knots, degree, coefficients)
    tuple.  For 'separable', ``ell`` selects the angular mode.
    """
    if isinstance(profile, tuple):
        profile = RadialProfile(*profile)
    if kind == "radial":
        if ell not in (None, 0):
            raise ParameterError("radial fields take no angular mode")
        return TestField(params, profile, None)
    if kind == "separable":
        if ell is None:
            raise ParameterError("separable fields need ell")
        return TestField(params, profile, AngularMode(ell, params.N))
    raise ParameterError(f"kind must be 'radial' or 'separable', got {kind!r}")
