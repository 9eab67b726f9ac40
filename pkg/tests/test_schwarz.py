
import pytest
from mpmath import eta as mp_eta
from mpmath import kleinj, mp, mpc, mpf, taylor

from mde_forge.electro import AnsatzParams, solve_system
from mde_forge.errors import InvalidArgument, InvalidPoint, LiftFailure, PathFailure, PoleOnContour
from mde_forge.qmod import evaluator, standard_test_points
from mde_forge.schwarz import (
    build_ansatz,
    hurwitz_residual,
    jet_integrate,
    jet_mobius,
    jet_mul,
    jet_pow,
    jet_schwarzian,
    mde_pair,
    measure_character,
    principal_part,
    relative_residue,
    residue_at,
    schwarzian_of_integral,
    schwarzian_residual,
    transformation_defect,
    verify_elliptic_identities,
)

TINY = mpf(10) ** -60


@pytest.fixture(scope="module")
def ansatz():
    cache = {}

    def get(s, t, k):
        if (s, t, k) not in cache:
            p = AnsatzParams(s, t, k)
            sol = solve_system(p) if k else None
            cache[(s, t, k)] = build_ansatz(p, sol)
        return cache[(s, t, k)]

    return get


# -- jets ----------------------------------------------------------------------


def test_jet_helpers_against_mpmath_taylor(hp):
    z0 = mpf("0.3")
    ex = taylor(mp.exp, z0, 5)
    sq = taylor(lambda u: mp.exp(u) * mp.cos(u), z0, 5)
    for got, ref in zip(jet_mul(ex, sq), taylor(lambda u: mp.exp(2 * u) * mp.cos(u), z0, 5)):
        assert abs(got - ref) < TINY
    for got, ref in zip(jet_pow(ex, mpf(-1) / 2), taylor(lambda u: mp.exp(-u / 2), z0, 5)):
        assert abs(got - ref) < TINY
    integ = jet_integrate(ex, mp.exp(z0))
    assert all(abs(g - r) < TINY for g, r in zip(integ, ex))


def test_jet_schwarzian_known_values(hp):
    z0 = mpf("0.2")
    # {e^z, z} = -1/2 and {tan z, z} = 2
    assert abs(jet_schwarzian(taylor(mp.exp, z0, 4)) + mpf(1) / 2) < TINY
    assert abs(jet_schwarzian(taylor(mp.tan, z0, 4)) - 2) < TINY
    mob = jet_mobius(taylor(mp.tan, z0, 4), (2, 1, 1, 3))
    assert abs(jet_schwarzian(mob) - 2) < TINY


# -- construction ----------------------------------------------------------------


def test_lift_hits_j_values(ansatz, hp):
    f = ansatz(0, 0, 2)
    for x, w in zip(f.x_values, f.w_points):
        assert abs(kleinj(w.z) - x) < mpf(10) ** -30


def test_build_requires_certified_solution():
    p = AnsatzParams(0, 0, 1)
    with pytest.raises(InvalidArgument):
        build_ansatz(p)


def test_elliptic_lift_rejected(cfg):
    with pytest.raises(LiftFailure):
        build_ansatz(AnsatzParams(0, 0, 1), cfg=cfg, x_values=[mpf(1)])


def test_k0_is_eta4(ansatz, cfg, hp):
    f = ansatz(0, 0, 0)
    z = mpc("0.1", "1.3")
    assert abs(f(z) - mp_eta(z) ** 4) < TINY


# -- residues ----------------------------------------------------------------------


def test_certified_residue_vanishes(ansatz):
    f = ansatz(0, 0, 1)
    a2, a1 = principal_part(f, 0)
    assert abs(a1) < mpf(10) ** -8 < abs(a2)
    assert abs(residue_at(f, 0)) < mpf(10) ** -60


def test_perturbed_residue_does_not_vanish(ansatz, cfg):
    f = ansatz(0, 0, 1)
    g = build_ansatz(f.params, cfg=cfg, x_values=[f.x_values[0] + mpf("0.01")])
    assert abs(residue_at(g, 0)) > mpf(10) ** -4
    assert abs(relative_residue(g, 0)) > mpf(10) ** -4


def test_residue_is_scale_covariant(ansatz):
    f = ansatz(0, 0, 1)
    g = build_ansatz(f.params, x_values=[f.x_values[0] + mpf("0.01")])
    assert abs(relative_residue(g.with_scale(1728), 0) - relative_residue(g, 0)) < mpf(10) ** -40


def test_overlapping_contour_raises(ansatz):
    f = ansatz(0, 0, 2)
    d = abs(f.pole_centers[0] - f.pole_centers[1])
    if d + mpf("0.01") < f.pole_centers[0].imag:
        radius = d + mpf("0.01")
    else:
        # the nearest other pole may be an image of w_2
        radius = f.distance_to_poles(f.pole_centers[0], exclude=f.pole_centers[0]) * mpf("1.01")
    with pytest.raises(PoleOnContour):
        principal_part(f, 0, radius=radius)


def test_elliptic_residues(ansatz):
    f = ansatz(2, 2, 0)
    assert len(f.pole_centers) == 2
    for i in range(2):
        assert abs(principal_part(f, i)[1]) < mpf(10) ** -60


# -- Schwarzian --------------------------------------------------------------------


@pytest.mark.parametrize("stk", [(0, 0, 0), (2, 0, 0), (0, 2, 0), (2, 2, 0)])
def test_schwarzian_equation(ansatz, stk, cfg):
    f = ansatz(*stk)
    e4 = evaluator("e4", cfg)
    for z in standard_test_points(cfg)[:2]:
        assert abs(schwarzian_residual(f, z)) < mpf(10) ** -6 * abs(e4(z))


def test_schwarzian_wrong_r_fails(ansatz, cfg):
    # the exponent table is not interchangeable: r = 5/6 does not fit (0, 2)
    f = ansatz(0, 2, 0)
    z = mpc("0.25", "2")
    with cfg.workprec():
        S = schwarzian_of_integral(f, z)
        wrong = 2 * mp.pi ** 2 * (mpf(5) / 6) ** 2 * evaluator("e4", cfg)(z)
    assert abs(S - wrong) > 1


def test_schwarzian_scale_invariance(ansatz):
    f = ansatz(0, 0, 1)
    g = f.with_scale(mpc("1728", "-3"))
    for z in standard_test_points()[:2]:
        assert abs(schwarzian_residual(g, z) - schwarzian_residual(f, z)) < mpf(10) ** -20


def test_invalid_point_near_pole(ansatz):
    f = ansatz(0, 0, 1)
    with pytest.raises(InvalidPoint):
        schwarzian_residual(f, f.pole_centers[0] + mpf("0.01"))


# -- MDE pair ------------------------------------------------------------------------


def test_hurwitz_pair(ansatz, hp):
    pair = mde_pair(ansatz(0, 0, 0))
    z1, z2 = mpc(0, 2), mpc(mpf(1) / 3, 1)
    # y1 = eta^-2 up to the branch sign
    assert abs(abs(pair.y1(z1)) - abs(mp_eta(z1) ** -2)) < TINY
    r1, r2 = pair.residuals(z1)
    assert r1 < mpf(10) ** -8 and r2 < mpf(10) ** -8
    assert abs(pair.wronskian(z1) - pair.wronskian(z2)) < mpf(10) ** -8


def test_pair_with_poles(ansatz):
    f = ansatz(0, 0, 1)
    pair = mde_pair(f)
    z = mpc("0.2", "1.5")
    assert max(pair.residuals(z)) < mpf(10) ** -6
    S = schwarzian_of_integral(f, z)
    assert abs(pair.ratio_schwarzian(z) - S) < mpf(10) ** -8 * abs(S)
    assert abs(pair.mobius_schwarzian(z) - S) < mpf(10) ** -8 * abs(S)


def test_path_endpoint_at_pole(ansatz):
    f = ansatz(0, 0, 1)
    pair = mde_pair(f)
    with pytest.raises(PathFailure):
        pair.h(f.pole_centers[0] + mpf("0.05"))


# -- transformation law and classical identities ---------------------------------------


@pytest.mark.parametrize("stk", [(0, 0, 0), (0, 2, 0), (2, 0, 1)])
def test_characters(ansatz, stk, cfg, hp):
    f = ansatz(*stk)
    z_ref = mpc("0.1", "1.3")
    chi_s = measure_character(f, "S", z_ref, cfg)
    chi_t = measure_character(f, "T", z_ref, cfg)
    # eta(-1/z) = sqrt(-iz) eta(z), and the weight-0 factors are S-invariant
    assert abs(chi_s + 1) < mpf(10) ** -50
    assert abs(chi_t - mp.expjpi(mpf(f.eta_power) / 12)) < mpf(10) ** -50
    for z in standard_test_points(cfg)[:2]:
        assert transformation_defect(f, "S", chi_s, z, cfg) < mpf(10) ** -15
        assert transformation_defect(f, "T", chi_t, z, cfg) < mpf(10) ** -15


def test_character_rejects_unknown_generator(ansatz):
    with pytest.raises(InvalidArgument):
        measure_character(ansatz(0, 0, 0), "U", mpc(0, 1))


def test_elliptic_identities(cfg):
    checks = verify_elliptic_identities(cfg)
    assert len(checks) == 6
    assert all(c.passed for c in checks)
    assert all(c.abs_error < mpf(10) ** -50 for c in checks)


def test_hurwitz_residual(cfg):
    for z in standard_test_points(cfg):
        assert hurwitz_residual(z, cfg) < mpf(10) ** -8
