"""Panel Gauss-Legendre quadrature on (0, infinity) and on spheres.

Radial integrals are taken over panels aligned with the profile
breakpoints (so integrands are smooth per panel), with a fixed-order
Gauss-Legendre rule per panel.  Very wide panels (the plateau of the
harmonic family spans decades) are subdivided geometrically first.
Integrands with |f|^p kinks are handled by splitting panels at the
bisected sign changes of f.  Sums are formed with numpy's pairwise
summation, so results do not depend on evaluation order.

Sphere integrals: periodic trapezoid on S^1 (parametrized by theta),
Gauss-Legendre in c = cos(phi) on S^2 (zonal integrands only).
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .model import ParameterError

__all__ = [
    "IntegrationError",
    "QuadratureRule",
    "integrate_radial",
    "integrate_abs_power",
    "split_panels_at_roots",
    "CumulativeIntegral",
    "sphere_area",
    "sphere_rule",
    "sphere_rule_split",
    "integrate_sphere",
]

DEFAULT_ORDER = 12

_BRENTQ_RTOL = 4 * np.finfo(float).eps


class IntegrationError(RuntimeError):
    """Non-finite integrand or invalid quadrature setup, with panel info."""


@lru_cache(maxsize=64)
def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _subdivide_geometric(lo: float, hi: float, max_ratio: float):
    """Split [lo, hi] into geometric pieces with hi/lo <= max_ratio each."""
    if lo <= 0:
        raise IntegrationError(f"panel [{lo}, {hi}] must have lo > 0")
    n = max(1, int(math.ceil(math.log(hi / lo) / math.log(max_ratio))))
    return np.geomspace(lo, hi, n + 1)


class QuadratureRule:
    """Gauss-Legendre nodes/weights on a set of radial panels."""

    def __init__(self, panels, order: int = DEFAULT_ORDER):
        panels = np.atleast_2d(np.asarray(panels, dtype=float))
        if panels.ndim != 2 or panels.shape[1] != 2:
            raise IntegrationError("panels must have shape (m, 2)")
        if np.any(panels[:, 0] >= panels[:, 1]):
            raise IntegrationError("each panel needs left < right")
        if order < 2:
            raise IntegrationError(f"order must be >= 2, got {order}")
        self.panels = panels
        self.order = int(order)
        gx, gw = _gauss(self.order)
        half = 0.5 * (panels[:, 1] - panels[:, 0])
        mid = 0.5 * (panels[:, 1] + panels[:, 0])
        self.nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        self.weights = (half[:, None] * gw[None, :]).ravel()

    @classmethod
    def for_profile(cls, profile, order: int = DEFAULT_ORDER, max_ratio: float = 2.0):
        """Panels = profile breakpoints, wide spans subdivided geometrically."""
        bps = np.asarray(profile.breakpoints, dtype=float)
        if bps.size < 2:
            raise IntegrationError("profile has no breakpoint span")
        edges = [bps[0]]
        for lo, hi in zip(bps[:-1], bps[1:]):
            edges.extend(_subdivide_geometric(lo, hi, max_ratio)[1:])
        edges = np.asarray(edges)
        return cls(np.column_stack([edges[:-1], edges[1:]]), order)

    def refined(self, factor: int = 2) -> "QuadratureRule":
        """Split every panel into ``factor`` pieces at geometric interior points."""
        if factor < 2:
            return self
        pieces = []
        for lo, hi in self.panels:
            cuts = np.geomspace(lo, hi, factor + 1)
            pieces.append(np.column_stack([cuts[:-1], cuts[1:]]))
        return QuadratureRule(np.vstack(pieces), self.order)

    def with_extra_cuts(self, cuts) -> "QuadratureRule":
        """New rule with panels additionally split at the given abscissae."""
        cuts = np.asarray(cuts, dtype=float)
        pieces = []
        for lo, hi in self.panels:
            inner = np.sort(cuts[(cuts > lo) & (cuts < hi)])
            edges = np.concatenate([[lo], inner, [hi]])
            keep = np.concatenate([[True], np.diff(edges) > 0])
            edges = edges[keep]
            pieces.append(np.column_stack([edges[:-1], edges[1:]]))
        return QuadratureRule(np.vstack(pieces), self.order)

    @property
    def span(self):
        return float(self.panels[0, 0]), float(self.panels[-1, 1])

    def __repr__(self):
        lo, hi = self.span
        return (
            f"QuadratureRule({self.panels.shape[0]} panels on "
            f"[{lo:.4g}, {hi:.4g}], order={self.order})"
        )


def _values_on(f, x):
    return np.asarray(f(x), dtype=float) if callable(f) else np.asarray(f, dtype=float)


def _check_finite(vals, rule: QuadratureRule):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        panel = rule.panels[i // rule.order]
        raise IntegrationError(
            f"non-finite integrand at x={rule.nodes[i]:.6g} "
            f"in panel [{panel[0]:.6g}, {panel[1]:.6g}]"
        )


def integrate_radial(f, gamma: float, rule: QuadratureRule) -> float:
    """integral f(x) x^gamma dx over the rule's panels (pairwise summation)."""
    vals = _values_on(f, rule.nodes)
    if vals.shape != rule.nodes.shape:
        raise IntegrationError("integrand values must match the rule's nodes")
    _check_finite(vals, rule)
    return float(np.sum(rule.weights * vals * rule.nodes**gamma))


def split_panels_at_roots(f: Callable, panels, samples: int = 33) -> np.ndarray:
    """Split panels at interior sign changes of f (bisected to machine precision).

    Used before integrating |f|^p for non-even p: per smooth piece the
    integrand has no kink, so the fixed Gauss rule keeps full accuracy.
    """
    panels = np.atleast_2d(np.asarray(panels, dtype=float))
    out = []
    for lo, hi in panels:
        xs = np.linspace(lo, hi, samples)
        vs = np.asarray(f(xs), dtype=float)
        sign = np.sign(vs)
        cuts = [lo]
        for i in range(samples - 1):
            if sign[i] != 0 and sign[i + 1] != 0 and sign[i] != sign[i + 1]:
                root = brentq(
                    lambda x: float(np.asarray(f(np.array([x])))[0]),
                    xs[i],
                    xs[i + 1],
                    rtol=_BRENTQ_RTOL,
                )
                if cuts[-1] < root < hi:
                    cuts.append(float(root))
            elif sign[i] != 0 and sign[i + 1] == 0 and i + 1 < samples - 1:
                # exact zero at a sample point: cut there
                if cuts[-1] < xs[i + 1] < hi:
                    cuts.append(float(xs[i + 1]))
        cuts.append(hi)
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b > a:
                out.append((a, b))
    return np.asarray(out)


def integrate_abs_power(
    f: Callable,
    p: float,
    gamma: float,
    rule: QuadratureRule,
    kink_split: bool = True,
) -> float:
    """integral |f(x)|^p x^gamma dx, panel-splitting at sign changes of f."""
    even = p == round(p) and int(round(p)) % 2 == 0
    if kink_split and not even:
        sub = QuadratureRule(split_panels_at_roots(f, rule.panels), rule.order)
    else:
        sub = rule
    vals = np.abs(_values_on(f, sub.nodes)) ** p
    _check_finite(vals, sub)
    return float(np.sum(sub.weights * vals * sub.nodes**gamma))


class CumulativeIntegral:
    """F(x) = integral_0^x s^b f(s) ds for f supported on the rule's panels.

    Complete panels left of x are accumulated once (prefix sums); the
    partial panel containing x gets a fresh Gauss rule on [left, x].  Below
    the first panel F = 0; above the last, F = total.
    """

    def __init__(self, f: Callable, b: float, rule: QuadratureRule):
        self.f = f
        self.b = float(b)
        self.rule = rule
        vals = _values_on(f, rule.nodes)
        _check_finite(vals, rule)
        contrib = rule.weights * vals * rule.nodes**self.b
        per_panel = contrib.reshape(rule.panels.shape[0], rule.order).sum(axis=1)
        self._prefix = np.concatenate([[0.0], np.cumsum(per_panel)])
        self.total = float(self._prefix[-1])
        self._lefts = rule.panels[:, 0]
        self._rights = rule.panels[:, 1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty(x.shape, dtype=float)
        lo = self._lefts[0]
        hi = self._rights[-1]
        below = x <= lo
        above = x >= hi
        mid = ~(below | above)
        out[below] = 0.0
        out[above] = self.total
        if np.any(mid):
            xm = x[mid]
            idx = np.searchsorted(self._lefts, xm, side="right") - 1
            idx = np.clip(idx, 0, self._lefts.size - 1)
            left = self._lefts[idx]
            gx, gw = _gauss(self.rule.order)
            half = 0.5 * (xm - left)
            nodes = left[:, None] + half[:, None] * (gx[None, :] + 1.0)
            fv = np.asarray(self.f(nodes.ravel()), dtype=float).reshape(nodes.shape)
            partial = (half * np.sum(gw[None, :] * fv * nodes**self.b, axis=1))
            out[mid] = self._prefix[idx] + partial
        return out[0] if scalar else out


# ---------------------------------------------------------------------------
# Spheres
# ---------------------------------------------------------------------------


def sphere_area(N: int) -> float:
    """Surface measure of S^{N-1}: 2 pi^{N/2} / Gamma(N/2); N=1 gives 2."""
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be an integer >= 1, got {N}")
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def sphere_rule(N: int, n: int = 64):
    """Nodes/weights for zonal sphere integration.

    N=2: periodic trapezoid in theta on [0, 2 pi) (spectrally accurate for
    smooth periodic integrands).  N=3: Gauss-Legendre in c = cos(phi) with
    the azimuthal 2 pi folded into the weights.
    """
    if N == 2:
        t = np.arange(n) * (2.0 * math.pi / n)
        w = np.full(n, 2.0 * math.pi / n)
        return t, w
    if N == 3:
        c, w = _gauss(n)
        return c, 2.0 * math.pi * w
    raise ParameterError(f"sphere rules are for N in (2, 3), got N={N}")


def sphere_rule_split(N: int, split_at, order: int = DEFAULT_ORDER, min_panels: int = 8):
    """Panel Gauss rule on the sphere parameter, split at the given zeros.

    Same measure conventions as :func:`sphere_rule`; used for |Y|^p with
    non-even p, where the integrand kinks at the zeros of Y.
    """
    split_at = np.sort(np.asarray(split_at, dtype=float))
    if N == 2:
        edges = np.concatenate([[0.0], split_at[(split_at > 0) & (split_at < 2 * math.pi)], [2.0 * math.pi]])
    elif N == 3:
        edges = np.concatenate([[-1.0], split_at[(split_at > -1) & (split_at < 1)], [1.0]])
    else:
        raise ParameterError(f"sphere rules are for N in (2, 3), got N={N}")
    # keep resolution even when there are few zeros
    while edges.size - 1 < min_panels:
        edges = np.sort(np.concatenate([edges, 0.5 * (edges[:-1] + edges[1:])]))
    gx, gw = _gauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    if N == 3:
        w = 2.0 * math.pi * w
    return t, w


def integrate_sphere(h: Callable, N: int, n: int = 64) -> float:
    """integral of a zonal/ring function over S^{N-1} (parametrized form)."""
    t, w = sphere_rule(N, n)
    vals = np.asarray(h(t), dtype=float)
    if np.any(~np.isfinite(vals)):
        raise IntegrationError("non-finite sphere integrand")
    return float(np.sum(w * vals))
