"""Energy functionals: decomposition split, exact Hessian, surrogate, blow-up."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.interpolate import PPoly

from hrlab.corpus import plateau_field
from hrlab.functionals import (
    REL_TOL_IDENTITY,
    _hessian_density,
    convexity_check,
    lhs_functional,
    remark_blowup_report,
    rhs_hessian_exact,
    rhs_laplacian,
    rhs_surrogate,
)
from hrlab.model import (
    ParameterError,
    PiecewisePolyProfile,
    SpaceParams,
    make_field,
)
from hrlab.quadrature import sphere_area, sphere_rule
from conftest import fd_gradient, fd_hessian, random_profile


def separable(N, ell, p=None, a=0.0, seed=3):
    prof = random_profile(seed=seed)
    return make_field("separable", SpaceParams(N, p, a), prof, ell=ell)


def radial(N, p=None, a=0.0, seed=3):
    return make_field("radial", SpaceParams(N, p, a), random_profile(seed=seed))


# -------------------------------------------------------- pointwise oracles


@pytest.mark.parametrize("N,ell", [(2, 1), (2, 3), (3, 1), (3, 2)])
def test_hessian_density_matches_finite_differences(N, ell):
    field = separable(N, ell)
    n_ang = 16
    r = np.array([1.4, 3.2])
    dens, _ = _hessian_density(field, r, n_ang)
    t, _ = sphere_rule(N, n_ang)
    u = lambda x: field.eval_cartesian(np.asarray(x)[None, :])[0]
    for i, ri in enumerate(r):
        for j in (0, 5, 11):
            if N == 2:
                x = np.array([ri * math.cos(t[j]), ri * math.sin(t[j])])
            else:
                c = t[j]
                s = math.sqrt(1.0 - c * c)
                x = np.array([ri * s, 0.0, ri * c])
            H = fd_hessian(u, x, 5e-4)
            want = float(np.sum(H * H))
            assert dens[i, j] == pytest.approx(want, rel=2e-4, abs=1e-9)


def test_hessian_density_radial_matches_finite_differences():
    field = radial(3)
    r = np.array([2.1])
    dens, ws = _hessian_density(field, r, 8)
    assert dens.shape == (1, 1)
    assert ws[0] == pytest.approx(sphere_area(3))
    u = lambda x: field.eval_cartesian(np.asarray(x)[None, :])[0]
    x = np.array([2.1, 0.0, 0.0])
    H = fd_hessian(u, x, 5e-4)
    assert dens[0, 0] == pytest.approx(float(np.sum(H * H)), rel=2e-4)


def test_laplacian_energy_matches_fd_integrand():
    field = separable(3, 2, p=2.0)
    prof, mode = field.profile, field.mode
    u = lambda x: field.eval_cartesian(np.asarray(x)[None, :])[0]
    for ri, c in [(1.7, 0.3), (4.0, -0.6)]:
        s = math.sqrt(1.0 - c * c)
        x = np.array([ri * s, 0.0, ri * c])
        H = fd_hessian(u, x, 5e-4)
        lap_fd = float(np.trace(H))
        r_arr = np.array([ri])
        want = (
            prof.evaluate(r_arr, 2)[0]
            + 2 * prof.evaluate(r_arr, 1)[0] / ri
            - mode.eigenvalue * prof.evaluate(r_arr, 0)[0] / ri**2
        ) * mode.value(np.array([c]))[0]
        assert lap_fd == pytest.approx(want, rel=2e-5, abs=1e-8)


# -------------------------------------------------------- integral identities


@pytest.mark.parametrize("N", [2, 3])
def test_hessian_energy_equals_laplacian_energy_at_p2(N):
    # integration by parts: int |D^2 u|^2 = int (Delta u)^2 for compact support
    for field in (radial(N, p=2.0, seed=5), separable(N, 1, p=2.0, seed=6), separable(N, 2, p=2.0, seed=7)):
        h = rhs_hessian_exact(field)
        l = rhs_laplacian(field)
        assert h == pytest.approx(l, rel=1e-12)


def test_lhs_radial_reduction_matches_quad():
    field = radial(3, p=3.0, a=0.5)
    prof = field.profile
    rep = lhs_functional(field)
    gamma = 3 - 1 + 0.5 - 2 * 3.0  # N - 1 + a - 2p
    want, _ = quad(
        lambda r: abs(
            r * prof.evaluate(np.array([r]), 1)[0] - prof.evaluate(np.array([r]), 0)[0]
        )
        ** 3
        * r**gamma,
        prof.breakpoints[0],
        prof.breakpoints[-1],
        points=list(prof.breakpoints),
        limit=400,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    assert rep.value == pytest.approx(sphere_area(3) * want, rel=1e-8)
    assert rep.angular_part == 0.0
    assert rep.radial_part == pytest.approx(rep.value, rel=1e-12)


@pytest.mark.parametrize("N,ell", [(2, 1), (2, 2), (3, 1), (3, 3)])
def test_split_is_exact_at_p2(N, ell):
    rep = lhs_functional(separable(N, ell, p=2.0, seed=9))
    assert rep.split_is_exact
    assert rep.split_defect <= REL_TOL_IDENTITY
    assert rep.value == pytest.approx(rep.radial_part + rep.angular_part, rel=1e-12)
    assert rep.radial_part >= 0.0 and rep.angular_part > 0.0


def test_split_is_inequality_only_away_from_p2():
    rep = lhs_functional(separable(2, 1, p=3.0, seed=10))
    assert not rep.split_is_exact
    assert rep.value > 0.0
    assert rep.split_sum > 0.0


def test_lhs_value_stable_under_refinement():
    field = separable(3, 2, p=3.0, seed=11)
    from hrlab.quadrature import QuadratureRule

    coarse = lhs_functional(field, n_ang=64)
    fine = lhs_functional(
        field, rule=QuadratureRule.for_profile(field.profile).refined(2), n_ang=128
    )
    assert coarse.value == pytest.approx(fine.value, rel=2e-4)


# -------------------------------------------------------- surrogate


def test_surrogate_frozen_value_on_linear_plateau():
    # u = x1 on the annulus 2 <= r <= 8 gives S^2 = 2 / r^2 pointwise,
    # so the a = 0 energy is 2 pi * 2 * log(4) = 4 pi log 4
    pp = PPoly(np.array([[1.0], [2.0]]), np.array([2.0, 8.0]))
    prof = PiecewisePolyProfile(pp)
    field = make_field("separable", SpaceParams(2, 2.0), prof, ell=1)
    got = rhs_surrogate(field)
    assert got == pytest.approx(4 * math.pi * math.log(4.0), rel=1e-12)


def test_surrogate_last_term_selector():
    field = separable(2, 1, p=2.0, seed=12)
    r2 = rhs_surrogate(field, last_term="r2")
    r1 = rhs_surrogate(field, last_term="r1")
    assert r2 > 0.0 and r1 > 0.0
    assert r2 != pytest.approx(r1, rel=1e-3)
    with pytest.raises(ParameterError):
        rhs_surrogate(field, last_term="r3")


def test_surrogate_radial_reduction():
    # radial: S^2 = g''^2 + (N-1) g'^2 / r^2
    field = radial(3, p=2.0, a=0.0, seed=13)
    prof = field.profile
    want, _ = quad(
        lambda r: (
            prof.evaluate(np.array([r]), 2)[0] ** 2
            + 2.0 * (prof.evaluate(np.array([r]), 1)[0] / r) ** 2
        )
        * r**2,
        prof.breakpoints[0],
        prof.breakpoints[-1],
        points=list(prof.breakpoints),
        limit=400,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    assert rhs_surrogate(field) == pytest.approx(sphere_area(3) * want, rel=1e-9)


@pytest.mark.parametrize("N,ell", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_quotient_gradient_density_matches_finite_differences(N, ell):
    # the polar split r^-4 (|r g' - g|^2 Y^2 + g^2 |grad_S Y|^2) must agree
    # with a Cartesian gradient of u(x)/|x|
    field = separable(N, ell, p=2.0, seed=21)
    prof = field.profile
    mode = field.mode

    def v(x):
        pts = np.atleast_2d(x)
        return field.eval_cartesian(pts)[0] / np.linalg.norm(pts[0])

    points = [(1.1, 0.4), (2.7, 1.9 if N == 2 else -0.35), (5.2, 0.62)]
    for r, t in points:
        g0 = prof.evaluate(np.array([r]))[0]
        rb = r * prof.evaluate(np.array([r]), 1)[0] - g0
        want = (rb**2 * mode.value(t) ** 2 + g0**2 * mode.grad_magnitude(t) ** 2) / r**4
        if N == 2:
            x = np.array([r * math.cos(t), r * math.sin(t)])
        else:
            x = np.array([r * math.sqrt(1.0 - t * t), 0.0, r * t])
        got = float(np.sum(fd_gradient(v, x, 5e-4) ** 2))
        assert got == pytest.approx(want, rel=2e-5)


def test_quotient_gradient_density_matches_fd_radial():
    field = radial(3, p=2.0, seed=22)
    prof = field.profile

    def v(x):
        pts = np.atleast_2d(x)
        return field.eval_cartesian(pts)[0] / np.linalg.norm(pts[0])

    x = np.array([1.3, -2.1, 0.7])
    r = float(np.linalg.norm(x))
    g0 = prof.evaluate(np.array([r]))[0]
    rb = r * prof.evaluate(np.array([r]), 1)[0] - g0
    got = float(np.sum(fd_gradient(v, x, 5e-4) ** 2))
    assert got == pytest.approx(rb**2 / r**4, rel=2e-5)


def test_quotient_gradient_on_linear_plateau():
    # u = x1 has u/|x| = cos(theta), so the density is sin^2(theta)/r^2,
    # and the exact Hessian of the linear function vanishes
    pp = PPoly(np.array([[1.0], [2.0]]), np.array([2.0, 8.0]))
    field = make_field(
        "separable", SpaceParams(2, 2.0), PiecewisePolyProfile(pp), ell=1
    )

    def v(x):
        pts = np.atleast_2d(x)
        return field.eval_cartesian(pts)[0] / np.linalg.norm(pts[0])

    for r, t in [(3.0, 0.7), (5.5, 2.4)]:
        x = np.array([r * math.cos(t), r * math.sin(t)])
        got = float(np.sum(fd_gradient(v, x, 5e-4) ** 2))
        assert got == pytest.approx(math.sin(t) ** 2 / r**2, rel=1e-8)
    assert rhs_hessian_exact(field) == pytest.approx(0.0, abs=1e-12)


def test_zero_field_gives_zero_energies():
    prof = random_profile(seed=5)
    zero = prof.with_coefficients(np.zeros_like(prof.coefficients))
    for field in (
        make_field("radial", SpaceParams(3, 3.0), zero),
        make_field("separable", SpaceParams(2, 2.0), zero, ell=2),
    ):
        report = lhs_functional(field)
        assert report.value == 0.0
        assert report.radial_part == 0.0
        assert report.angular_part == 0.0
        assert rhs_laplacian(field) == 0.0
        assert rhs_hessian_exact(field) == 0.0
        assert rhs_surrogate(field) == 0.0


def test_surrogate_dominates_mixed_block():
    # the 2 (g'/r)^2 |grad_S Y|^2 term is kept whole inside S^2; for the
    # planar mode the sphere factor is ell^2 pi
    field = separable(2, 2, p=2.0, a=0.0, seed=15)
    prof = field.profile
    block, _ = quad(
        lambda r: prof.evaluate(np.array([r]), 1)[0] ** 2 / r,
        prof.breakpoints[0],
        prof.breakpoints[-1],
        limit=400,
    )
    assert rhs_surrogate(field) >= 2.0 * 4.0 * math.pi * block * 0.999999


def test_surrogate_dominates_pure_radial_second_derivative():
    # S^2 keeps the full g''^2 block, so dropping the angular blocks can
    # only shrink the integral
    field = separable(3, 2, p=2.0, seed=14)
    prof = field.profile
    mode = field.mode
    base, _ = quad(
        lambda r: prof.evaluate(np.array([r]), 2)[0] ** 2 * r**2,
        prof.breakpoints[0],
        prof.breakpoints[-1],
        limit=400,
    )
    assert rhs_surrogate(field) >= base * mode.norm_sq * 0.999999


# -------------------------------------------------------- convexity


@pytest.mark.parametrize("N", [2, 3, 4, 7])
def test_convexity_inequality_random_sampling(N):
    rep = convexity_check(N, n_samples=2048, seed=1)
    assert rep.ok
    assert rep.max_defect <= 1e-12 * rep.scale


def test_convexity_needs_N_at_least_2():
    with pytest.raises(ParameterError):
        convexity_check(1)


def test_convexity_deterministic():
    a = convexity_check(3, n_samples=512, seed=7)
    b = convexity_check(3, n_samples=512, seed=7)
    assert a.max_defect == b.max_defect


# -------------------------------------------------------- plateau blow-up


def test_blowup_report_frozen_values():
    rep = remark_blowup_report(16.0)
    assert rep.hardy_term == pytest.approx(38.14755194679515, rel=1e-10)
    assert rep.rellich_term == pytest.approx(10.525180579116803, rel=1e-10)
    assert rep.lap_term == pytest.approx(842.6472602933871, rel=1e-10)
    assert rep.lhs_grad == pytest.approx(27.622371367678287, rel=1e-10)
    assert rep.identity_ok


def test_blowup_laplacian_energy_is_scale_invariant():
    a = remark_blowup_report(16.0)
    b = remark_blowup_report(4096.0)
    assert a.lap_term == pytest.approx(b.lap_term, rel=1e-12)
    # the singular terms do grow
    assert b.hardy_term > a.hardy_term
    assert b.rellich_term > a.rellich_term


@pytest.mark.parametrize("R", [16.0, 256.0])
def test_blowup_cancellation_identity(R):
    rep = remark_blowup_report(R)
    assert abs(rep.identity_defect) <= 1e-8 * rep.scale
    assert rep.lap_to_rellich > 0.0
