from fractions import Fraction

import pytest
from mpmath import jacobi, mp, mpf, quad

from mde_forge.errors import DivergentWeight, InvalidParams, MultipleRootError, NoPolynomialSolution
from mde_forge.orthopoly import (
    FuchsianParams,
    RationalPoly,
    WeightParams,
    beta_total,
    count_real_roots,
    dk_value,
    empirical_monic_recurrence,
    exact_inner_product_ratio,
    gauss_quadrature,
    inner_product,
    interlaces,
    is_squarefree,
    lambda_value,
    moment_ratios,
    norm_formula,
    ode_family,
    ode_polynomial,
    ode_residual,
    published_recurrence_coeffs,
    poly_gcd,
    real_roots,
    reconciliation_report,
    squarefree_decomposition,
    weight_params,
)

X = RationalPoly.x()
SETS = [(4, 3, 12), (4, 9, 12), (8, 3, 12), (8, 9, 12)]


def mpq(v):
    v = Fraction(v)
    return mpf(v.numerator) / v.denominator


def weight_integral(fn, w):
    al, be = mpq(w.alpha), mpq(w.beta)
    return quad(lambda x: fn(x) * x ** al * (1 - x) ** be, [0, mpf(1) / 2, 1])


# -- exact polynomial arithmetic -------------------------------------------


def test_poly_arithmetic():
    p = RationalPoly([1, 2, 3])
    q = RationalPoly([Fraction(-1, 2), 1])
    quo, rem = (p * q + RationalPoly([5])).divmod(q)
    assert quo == p and rem == RationalPoly([5])
    assert p.derivative() == RationalPoly([2, 6])
    assert RationalPoly([2, 4]).monic() == RationalPoly([Fraction(1, 2), 1])
    assert RationalPoly.from_strings(p.to_strings()) == p
    assert poly_gcd((X - 1) * (X - 2), (X - 2) * (X + 5)) == X - 2


def test_fuchsian_requires_nonzero_c():
    with pytest.raises(InvalidParams):
        FuchsianParams(1, 1, 0, 2)


def test_lambda_value():
    assert lambda_value(FuchsianParams(4, 3, 12, 2)) == 2 * 7 + 6 * 2


# -- the Fuchsian polynomial -------------------------------------------------


@pytest.mark.parametrize("abc", SETS)
def test_ode_polynomials_exact(abc):
    base = FuchsianParams(*abc)
    for k in range(0, 13):
        p = ode_polynomial(base.with_degree(k))
        assert p.degree == k and p.leading == 1
        assert ode_residual(p, base.with_degree(k)).is_zero()


@pytest.mark.parametrize("abc", SETS)
def test_first_polynomial(abc):
    a, b, _ = abc
    assert ode_polynomial(FuchsianParams(*abc, k=1)) == X - Fraction(a, a + b)


def test_known_quadratic():
    assert ode_polynomial(FuchsianParams(4, 3, 12, 2)) == RationalPoly([Fraction(40, 247), Fraction(-20, 19), 1])


def test_dk_matches_brute_product():
    a, b, c, k = Fraction(5, 2), Fraction(-1, 3), Fraction(7), 4
    expected = Fraction(1)
    for i in range(k):
        expected *= (a + c * i / 2) * (b + c * i / 2) * (a + b + c * (k + i - 1) / 2)
    assert dk_value(FuchsianParams(a, b, c, k)) == expected


def test_dk_zero_rejected():
    # a + c*i/2 = 0 at i = 1
    with pytest.raises(NoPolynomialSolution, match="D_3"):
        ode_polynomial(FuchsianParams(-6, 3, 12, 3))


@pytest.mark.parametrize("alpha,beta", [(Fraction(-1, 3), Fraction(-1, 2)), (Fraction(1, 2), Fraction(3, 2)), (0, 0)])
def test_family_proportional_to_jacobi(alpha, beta, hp):
    w = WeightParams(alpha, beta)
    fam = ode_family(w, 6)
    for n in range(1, 7):
        # P_n^{(beta, alpha)}(2x - 1) has weight (1-x)^beta x^alpha on (0, 1)
        ref = lambda x: jacobi(n, mpq(beta), mpq(alpha), 2 * x - 1)
        ratios = [fam[n](x) / ref(x) for x in (mpf("0.13"), mpf("0.42"), mpf("0.77"))]
        assert max(abs(r - ratios[0]) for r in ratios) < mpf(10) ** -50 * abs(ratios[0])


def test_weight_params_roundtrip():
    w = weight_params(FuchsianParams(4, 3, 12))
    assert (w.alpha, w.beta) == (Fraction(-1, 3), Fraction(-1, 2))
    assert w.fuchsian(0, 12) == FuchsianParams(4, 3, 12, 0)


# -- moments, quadrature, norms ------------------------------------------------


def test_moments_against_beta_function(hp):
    w = WeightParams(Fraction(-1, 3), Fraction(1, 4))
    m = moment_ratios(w, 5)
    m0 = beta_total(w)
    for j in range(6):
        assert abs(mpq(m[j]) * m0 - mp.beta(mpq(w.alpha) + 1 + j, mpq(w.beta) + 1)) < mpf(10) ** -60


def test_gauss_rule_against_adaptive_quadrature(cfg, hp):
    w = WeightParams(Fraction(-1, 3), Fraction(-1, 2))
    rule = gauss_quadrature(w, 8, cfg)
    assert all(0 < x < 1 for x in rule.nodes) and all(wt > 0 for wt in rule.weights)
    poly = RationalPoly([3, -1, 0, 2, 0, 0, 1, 5, 0, 0, 0, 0, 0, 0, 0, -2])  # degree 15 = 2n - 1
    exact = mpq(exact_inner_product_ratio(poly, RationalPoly([1]), w)) * beta_total(w, cfg)
    assert abs(rule.integrate(poly) - exact) < mpf(10) ** -60
    # tanh-sinh is limited by the endpoint singularities
    assert abs(rule.integrate(poly) - weight_integral(poly, w)) < mpf(10) ** -30


def test_single_point_rule(cfg, hp):
    w = weight_params(FuchsianParams(4, 3, 12))
    rule = gauss_quadrature(w, 1, cfg)
    assert abs(rule.nodes[0] - mpf(4) / 7) < mpf(10) ** -60
    assert abs(rule.weights[0] - beta_total(w)) < mpf(10) ** -60


def test_divergent_weight():
    with pytest.raises(DivergentWeight):
        gauss_quadrature(WeightParams(-1, 0), 3)


@pytest.mark.parametrize("abc", SETS)
def test_orthogonality_and_norms(abc, cfg, hp):
    w = weight_params(FuchsianParams(*abc))
    fam = ode_family(w, 6)
    for n in range(7):
        for m in range(n):
            assert abs(inner_product(fam[m], fam[n], w, cfg)) < mpf(10) ** -60
            assert exact_inner_product_ratio(fam[m], fam[n], w) == 0
    for n in (0, 2, 4):
        h = inner_product(fam[n], fam[n], w, cfg)
        assert abs(h - weight_integral(lambda x: fam[n](x) ** 2, w)) < mpf(10) ** -30 * h
    assert abs(norm_formula(w, 0, cfg) - beta_total(w, cfg)) < mpf(10) ** -60


def test_monic_recurrence_reconstructs(cfg, hp):
    w = WeightParams(Fraction(1, 2), Fraction(-1, 3))
    fam = ode_family(w, 8)
    for n in range(1, 8):
        bn, cn = empirical_monic_recurrence(w, n, cfg)
        for x in (mpf("0.1"), mpf("0.6")):
            assert abs((x - bn) * fam[n](x) - cn * fam[n - 1](x) - fam[n + 1](x)) < mpf(10) ** -60


def test_legendre_recurrence_values(cfg, hp):
    # shifted Legendre: b_n = 1/2 and c_n = n^2 / (4 (4n^2 - 1))
    w = WeightParams(0, 0)
    for n in range(1, 6):
        bn, cn = empirical_monic_recurrence(w, n, cfg)
        assert abs(bn - mpf(1) / 2) < mpf(10) ** -60
        assert abs(cn - mpf(n * n) / (4 * (4 * n * n - 1))) < mpf(10) ** -60


def test_reconciliation_report_shape(cfg):
    w = weight_params(FuchsianParams(4, 3, 12))
    rep = reconciliation_report(w, 3, cfg)
    rows = rep["rows"]
    assert [r["n"] for r in rows] == [0, 1, 2, 3]
    assert rows[0]["norm_agrees"]
    for key in ("monic_b", "monic_c", "printed", "implied_b", "implied_c", "norm_ratio"):
        assert key in rows[1]
    # the published h_n is the norm of the classically normalised Jacobi polynomial
    assert all(r["norm_is_classical"] for r in rows)


def test_published_norm_is_classical_jacobi_norm(cfg, hp):
    w = WeightParams(Fraction(-1, 3), Fraction(-1, 2))
    for n in (1, 3):
        ref = weight_integral(lambda x: jacobi(n, mpq(w.beta), mpq(w.alpha), 2 * x - 1) ** 2, w)
        assert abs(norm_formula(w, n, cfg) - ref) < mpf(10) ** -30 * ref


def test_published_recurrence_degenerate_denominator():
    assert published_recurrence_coeffs(WeightParams(Fraction(-1, 2), Fraction(-1, 2)), 0) is None


# -- roots ---------------------------------------------------------------------


def test_real_roots_and_sturm(cfg, hp):
    p = (X - Fraction(1, 3)) * (X - Fraction(2, 3)) * (X * X + 1)
    assert count_real_roots(p) == 2
    assert count_real_roots(p, Fraction(0), Fraction(1, 2)) == 1
    r = real_roots(p, cfg)
    assert abs(r[0] - mpf(1) / 3) < mpf(10) ** -70 and abs(r[1] - mpf(2) / 3) < mpf(10) ** -70


def test_repeated_roots(cfg, hp):
    p = (X - Fraction(1, 5)) * (X - Fraction(1, 5)) * (X - 1)
    assert not is_squarefree(p)
    sq = squarefree_decomposition(p)
    assert sq[0] == X - 1 and sq[1] == X - Fraction(1, 5)
    r = real_roots(p, cfg)
    assert len(r) == 3 and abs(r[0] - r[1]) < mpf(10) ** -60
    with pytest.raises(MultipleRootError):
        real_roots(p, cfg, require_simple=True)


def test_clustered_roots(cfg, hp):
    eps = Fraction(1, 10 ** 30)
    p = (X - Fraction(1, 2)) * (X - Fraction(1, 2) - eps) * (X - Fraction(1, 4))
    r = real_roots(p, cfg)
    assert len(r) == 3 and r[1] < r[2]
    # p' ~ 1e-30 at the pair, so 256-bit evaluation gives ~1e-46 accuracy there
    assert abs(r[2] - r[1] - mpq(eps)) < mpf(10) ** -40
    assert abs(r[0] - mpf(1) / 4) < mpf(10) ** -70


def test_interlacing_up_to_twenty(cfg):
    w = weight_params(FuchsianParams(8, 9, 12))
    fam = ode_family(w, 20)
    roots = [real_roots(fam[k], cfg, require_simple=True) for k in range(1, 21)]
    for k in range(1, 20):
        assert interlaces(roots[k - 1], roots[k])
    assert not interlaces([mpf("0.9")], [mpf("0.1"), mpf("0.5")])
