"""Deterministic corpora of test fields.

All randomness flows from one root seed through a keyed-hash split: the
i-th member of a family draws from ``default_rng(child_seed(seed, label))``
with a label unique to the family and index, so regenerating any subset of
a corpus is bitwise reproducible and independent of generation order.

Families
--------
random_radial / random_separable
    Spline profiles with uniform [-1, 1] free coefficients on log-spaced
    knots; separable members draw an angular index l in {0..3}.
harmonic_plateau
    u_R = g(r) cos(theta) on R^2 with g = r on [1, R], taken smoothly to
    zero on [1/2, 1] and [R, 2R] by a C^4 polynomial ramp; u_R is exactly
    harmonic on the plateau annulus.
rellich_degeneracy
    The same profiles, emitted in (separable l=1, radial) pairs.
near_extremal_hardy
    Spline approximations of the truncated power shape that saturates the
    one-dimensional weighted Hardy bound.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PPoly

from .model import (
    AngularMode,
    ParameterError,
    PiecewisePolyProfile,
    RadialProfile,
    SpaceParams,
    TestField,
    log_knots,
)

__all__ = [
    "child_seed",
    "smoothstep_c4",
    "plateau_cutoff",
    "plateau_profile",
    "plateau_field",
    "CorpusSpec",
    "generate",
    "DEFAULT_R_GRID",
    "FAMILIES",
]

FAMILIES = (
    "random_radial",
    "random_separable",
    "harmonic_plateau",
    "rellich_degeneracy",
    "near_extremal_hardy",
)

#: R = 2^4 .. 2^12, the sweep used by the degeneracy and blow-up runs.
DEFAULT_R_GRID: Tuple[float, ...] = tuple(float(2**k) for k in range(4, 13))

# C^4 polynomial smoothstep on [0, 1]: the unique degree-9 polynomial with
# S(0)=0, S(1)=1 and four vanishing derivatives at both ends.
_SMOOTHSTEP = np.polynomial.Polynomial([0, 0, 0, 0, 0, 126, -420, 540, -315, 70])


def child_seed(root: int, label: str) -> int:
    """Derive a 64-bit stream seed from (root, label) via keyed BLAKE2b."""
    key = int(root).to_bytes(8, "little", signed=False)
    h = hashlib.blake2b(label.encode("utf-8"), digest_size=8, key=key)
    return int.from_bytes(h.digest(), "little")


def smoothstep_c4(s):
    """The degree-9 smoothstep: exactly 0 for s <= 0, 1 for s >= 1, C^4."""
    s = np.asarray(s, dtype=float)
    out = np.where(s <= 0.0, 0.0, np.where(s >= 1.0, 1.0, _SMOOTHSTEP(np.clip(s, 0.0, 1.0))))
    return out


def plateau_cutoff(r, ramp_up: Tuple[float, float], ramp_down: Tuple[float, float]):
    """C^4 cutoff: 0 below ramp_up, 1 between the ramps, 0 above ramp_down."""
    lo0, lo1 = ramp_up
    hi0, hi1 = ramp_down
    if not (lo0 < lo1 <= hi0 < hi1):
        raise ParameterError("ramps must satisfy lo0 < lo1 <= hi0 < hi1")
    r = np.asarray(r, dtype=float)
    up = smoothstep_c4((r - lo0) / (lo1 - lo0))
    down = 1.0 - smoothstep_c4((r - hi0) / (hi1 - hi0))
    return up * down


def _poly_to_column(poly: np.polynomial.Polynomial, k_max: int) -> np.ndarray:
    c = np.zeros(k_max + 1)
    coefs = poly.coef
    c[: coefs.size] = coefs
    return c[::-1]  # PPoly wants highest power first


def plateau_profile(R: float) -> PiecewisePolyProfile:
    """g(r) = r * cutoff(r): exactly r on [1, R], ramps on [1/2,1] and [R,2R].

    Assembled as an exact piecewise polynomial (degree 10 = r times the
    degree-9 ramp), so g and its derivatives carry no fitting error and
    the field r cos(theta) is harmonic on the plateau to machine precision.
    """
    if R < 2.0:
        raise ParameterError(f"plateau needs R >= 2, got R={R}")
    xi = np.polynomial.Polynomial([0.0, 1.0])  # local variable on each piece
    s = _SMOOTHSTEP
    piece_up = (xi + 0.5) * s(2.0 * xi)            # r in [1/2, 1], xi = r - 1/2
    piece_mid = xi + 1.0                            # r in [1, R],   xi = r - 1
    piece_down = (xi + R) * (1.0 - s(xi / R))       # r in [R, 2R],  xi = r - R
    k_max = 10
    c = np.column_stack(
        [
            _poly_to_column(piece_up, k_max),
            _poly_to_column(piece_mid, k_max),
            _poly_to_column(piece_down, k_max),
        ]
    )
    pp = PPoly(c, np.array([0.5, 1.0, R, 2.0 * R]))
    return PiecewisePolyProfile(pp)


def plateau_field(R: float, a: float = 0.0, radial: bool = False) -> TestField:
    """The plateau test field on R^2: l=1 separable (default) or radial."""
    params = SpaceParams(N=2, p=2.0, a=a)
    profile = plateau_profile(R)
    mode = None if radial else AngularMode(1, 2)
    return TestField(params, profile, mode)


@dataclass(frozen=True)
class CorpusSpec:
    """Recipe for one deterministic family of test fields."""

    family: str
    seed: int = 0
    count: int = 8
    N: int = 3
    p: Optional[float] = None
    a: float = 0.0
    r_range: Optional[Tuple[float, float]] = None
    n_spans: Optional[int] = None
    degree: int = 4
    R_grid: Tuple[float, ...] = DEFAULT_R_GRID
    hardy_p: float = 2.0
    hardy_beta: float = -3.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.count < 1:
            raise ParameterError("count must be >= 1")
        if self.seed < 0 or self.seed > 2**64 - 1:
            raise ParameterError("seed must fit in 64 bits")


def _resolved_range(spec: CorpusSpec) -> Tuple[Tuple[float, float], int]:
    if spec.family == "near_extremal_hardy":
        r_range = spec.r_range or (1e-4, 1e4)
        n_spans = spec.n_spans or 96  # 84 free coefficients at degree 4
    else:
        r_range = spec.r_range or (0.5, 8.0)
        n_spans = spec.n_spans or 24
    return r_range, n_spans


def _random_profile(spec: CorpusSpec, rng: np.random.Generator) -> RadialProfile:
    r_range, n_spans = _resolved_range(spec)
    knots = log_knots(r_range[0], r_range[1], n_spans, spec.degree)
    n = knots.size - spec.degree - 1
    coeffs = np.zeros(n)
    coeffs[spec.degree : n - spec.degree] = rng.uniform(
        -1.0, 1.0, size=n - 2 * spec.degree
    )
    return RadialProfile(knots, spec.degree, coeffs)


def _near_extremal_profile(spec: CorpusSpec, rng: np.random.Generator) -> RadialProfile:
    r_range, n_spans = _resolved_range(spec)
    knots = log_knots(r_range[0], r_range[1], n_spans, spec.degree)
    n = knots.size - spec.degree - 1
    k = spec.degree
    support = (knots[k], knots[-k - 1])
    t0, t1 = math.log(support[0]), math.log(support[1])
    # ramp fraction of the log-extent; the quotient loss scales like
    # 1/(width (1 - width) L^2), so wide ramps sit closer to extremality
    width = rng.uniform(0.35, 0.5)
    s_exp = -(spec.hardy_beta + 1.0) / spec.hardy_p

    def shape(r):
        t = (np.log(r) - t0) / (t1 - t0)
        taper = smoothstep_c4(t / width) * smoothstep_c4((1.0 - t) / width)
        return r**s_exp * taper

    # Schoenberg (Greville-point) coefficients: smooth, no fitting step
    grev = np.array([knots[j + 1 : j + k + 1].mean() for j in range(n)])
    coeffs = np.zeros(n)
    inner = slice(k, n - k)
    coeffs[inner] = shape(np.clip(grev[inner], support[0], support[1]))
    return RadialProfile(knots, spec.degree, coeffs)


def generate(spec: CorpusSpec) -> List[TestField]:
    """Materialize the family; same spec (incl. seed) => bitwise-equal fields."""
    fields: List[TestField] = []
    fam = spec.family

    if fam in ("random_radial", "random_separable"):
        for i in range(spec.count):
            rng = np.random.default_rng(child_seed(spec.seed, f"{fam}-{i}"))
            profile = _random_profile(spec, rng)
            params = SpaceParams(N=spec.N, p=spec.p, a=spec.a)
            if fam == "random_radial":
                fields.append(TestField(params, profile, None))
            else:
                if spec.N not in (2, 3):
                    raise ParameterError("random_separable needs N in (2, 3)")
                ell = int(rng.integers(0, 4))
                fields.append(TestField(params, profile, AngularMode(ell, spec.N)))
        return fields

    if fam == "harmonic_plateau":
        return [plateau_field(R, a=spec.a) for R in spec.R_grid]

    if fam == "rellich_degeneracy":
        for R in spec.R_grid:
            fields.append(plateau_field(R, a=spec.a, radial=False))
            fields.append(plateau_field(R, a=spec.a, radial=True))
        return fields

    if fam == "near_extremal_hardy":
        for i in range(spec.count):
            rng = np.random.default_rng(child_seed(spec.seed, f"{fam}-{i}"))
            profile = _near_extremal_profile(spec, rng)
            params = SpaceParams(N=max(spec.N, 1), p=spec.p, a=spec.a)
            fields.append(TestField(params, profile, None))
        return fields

    raise ParameterError(f"unhandled family {fam!r}")
