"""Verification suites shared by the CLI (``verify ...``) and the acceptance tests."""

from __future__ import annotations

import random
from fractions import Fraction

from mpmath import mp, mpc, mpf

from .electro import ANSATZ_TABLE, AnsatzParams, solve_system, system_residual
from .errors import NoPolynomialSolution
from .orthopoly import (
    FuchsianParams,
    RationalPoly,
    beta_total,
    count_real_roots,
    dk_value,
    empirical_monic_recurrence,
    inner_product,
    interlaces,
    is_squarefree,
    ode_family,
    ode_polynomial,
    ode_residual,
    real_roots,
    reconciliation_report,
    weight_params,
)
from .qmod import (
    DEFAULT_CONFIG,
    EvalConfig,
    QSeries,
    delta_series,
    eisenstein_series,
    eta_power_series,
    evaluator,
    rho,
    standard_test_points,
)
from .report import Check, bound_check, exact_check, numeric_check
from .schwarz import (
    build_ansatz,
    hurwitz_residual,
    mde_pair,
    measure_character,
    principal_part,
    schwarzian_of_integral,
    s_coefficient,
    transformation_defect,
    verify_elliptic_identities,
)

MODULAR_SETS = [abc for abc, _ in ANSATZ_TABLE.values()]
SCHWARZIAN_CASES = [(0, 0, 0), (0, 2, 0), (2, 0, 0), (2, 2, 0), (0, 0, 1)]
RESIDUE_CASES = [(0, 0, 1), (0, 0, 2), (0, 2, 1), (2, 0, 1), (2, 2, 1)]
FAULTS = ("delta-coefficient",)


def _abc_name(abc) -> str:
    return ",".join(str(v) for v in abc)


# ---------------------------------------------------------------------------
# series identities
# ---------------------------------------------------------------------------


def check_series_identities(N: int = 64, fault: str | None = None) -> list:
    delta = delta_series(N)
    if fault == "delta-coefficient":
        c = list(delta.coeffs)
        c[5] = -c[5]
        delta = QSeries(delta.leading_exponent, c)
    e4 = eisenstein_series(4, N + 1)
    e6 = eisenstein_series(6, N + 1)
    lhs = (e4 ** 3 - e6 ** 2).coeffs  # index n is the q^n coefficient
    bad1 = [n for n in range(1, N + 1) if lhs[n] != 1728 * delta.coeffs[n - 1]]
    ok1 = lhs[0] == 0 and not bad1
    eta24 = eta_power_series(24, N)
    bad2 = [n + 1 for n in range(N) if eta24.coeffs[n] != delta.coeffs[n]]
    ok2 = eta24.leading_exponent == delta.leading_exponent and not bad2
    return [
        exact_check("series.e4^3-e6^2==1728*delta", ok1, {"through_q": N, "mismatched_powers": bad1}),
        exact_check("series.delta==eta^24", ok2, {"through_q": N, "mismatched_powers": bad2}),
    ]


def check_elliptic_vanishing(cfg: EvalConfig = DEFAULT_CONFIG) -> list:
    e4, e6 = evaluator("e4", cfg), evaluator("e6", cfg)
    return [
        bound_check("elliptic.|E6(i)|", e6(_i(cfg)), 1e-20),
        bound_check("elliptic.|E4(rho)|", e4(rho(cfg)), 1e-20),
    ]


def _i(cfg):
    with cfg.workprec():
        return mpc(0, 1)


def check_identities(cfg: EvalConfig = DEFAULT_CONFIG) -> list:
    return [numeric_check(f"identity.{c.name}", c.target, c.value, c.tolerance)
            for c in verify_elliptic_identities(cfg)]


def check_hurwitz(cfg: EvalConfig = DEFAULT_CONFIG, points=None) -> list:
    points = points or standard_test_points(cfg)
    return [
        bound_check(f"hurwitz.eta^-2@{_pt(z)}", hurwitz_residual(z, cfg), 1e-8)
        for z in points
    ]


def _pt(z) -> str:
    z = mpc(complex(z))
    return f"{mp.nstr(z.real, 6)}{'+' if z.imag >= 0 else '-'}{mp.nstr(abs(z.imag), 6)}i"


# ---------------------------------------------------------------------------
# polynomials and the algebraic system
# ---------------------------------------------------------------------------


def check_ode_polynomials(kmax: int = 12) -> list:
    out = []
    for abc in MODULAR_SETS:
        base = FuchsianParams(*abc)
        bad = [k for k in range(kmax + 1) if not ode_residual(ode_polynomial(base.with_degree(k)), base.with_degree(k)).is_zero()]
        out.append(exact_check(f"odepoly.exact_residual[{_abc_name(abc)}]", not bad, {"kmax": kmax, "failing_k": bad}))
        a, b, _ = abc
        p1 = ode_polynomial(base.with_degree(1))
        expected = RationalPoly([-Fraction(a, a + b), 1])
        out.append(exact_check(f"odepoly.P1==x-a/(a+b)[{_abc_name(abc)}]", p1 == expected,
                               {"P1": p1.to_strings(), "expected": expected.to_strings()}))
    return out


def dk_grid(n: int = 100, seed: int = 20240601) -> list:
    """Rational (a, b, c, k) triples; about a third are engineered zeros of D_k."""
    rng = random.Random(seed)
    grid = []
    while len(grid) < n:
        k = rng.randint(1, 6)
        c = Fraction(rng.choice([-1, 1]) * rng.randint(1, 12), rng.randint(1, 3))
        a = Fraction(rng.randint(-20, 20), rng.randint(1, 4))
        b = Fraction(rng.randint(-20, 20), rng.randint(1, 4))
        kind = len(grid) % 3 if len(grid) < 3 * (n // 3) else 0
        i = rng.randrange(k)
        if kind == 1:
            # zero of an a- or b-factor
            if rng.random() < 0.5:
                a = -c * i / 2
            else:
                b = -c * i / 2
        elif kind == 2:
            # zero of an (a + b + c(k+i-1)/2)-factor
            b = -c * (k + i - 1) / 2 - a
        grid.append((a, b, c, k))
    return grid


def raw_backward_recurrence(a, b, c, k):
    """The recurrence without the D_k guard; None when a division by zero occurs."""
    s = [Fraction(0)] * (k + 1)
    s[k] = Fraction(1)
    half = Fraction(c) / 2
    for i in range(k - 1, -1, -1):
        den = (k - i) * (a + b + half * (k + i - 1))
        if den == 0:
            return None
        s[i] = -(i + 1) * (a + half * i) * s[i + 1] / den
    return RationalPoly(s)


def admissible(poly: RationalPoly | None) -> bool:
    """Monic solution exists, with simple roots avoiding 0 and 1."""
    return poly is not None and poly(Fraction(0)) != 0 and poly(Fraction(1)) != 0 and is_squarefree(poly)


def check_dk_equivalence(grid=None) -> list:
    grid = grid or dk_grid()
    mismatches = []
    n_zero = 0
    for a, b, c, k in grid:
        p = FuchsianParams(a, b, c, k)
        nonzero = dk_value(p) != 0
        n_zero += not nonzero
        try:
            ode_polynomial(p)
            built = True
        except NoPolynomialSolution:
            built = False
        oracle = admissible(raw_backward_recurrence(p.a, p.b, p.c, k))
        if not (built == nonzero == oracle):
            mismatches.append({"abc": [a, b, c], "k": k, "dk_nonzero": nonzero, "built": built, "oracle": oracle})
    return [exact_check("dk.construction_iff_nonzero", not mismatches,
                        {"triples": len(grid), "dk_zero": n_zero, "mismatches": mismatches})]


def check_system(kmax: int = 10, cfg: EvalConfig = DEFAULT_CONFIG) -> list:
    out = []
    for (s, t), (abc, _) in ANSATZ_TABLE.items():
        worst = mpf(0)
        problems = []
        gaps = []
        for k in range(1, kmax + 1):
            sol = solve_system(AnsatzParams(s, t, k), cfg, strict=False)
            worst = max(worst, sol.residual_max)
            if sol.min_gap is not None:
                gaps.append(sol.min_gap)
            if not sol.certified:
                problems.append(k)
        out.append(Check(f"system.residual_max[{_abc_name(abc)}]", "< 1e-25", worst, worst, 1e-25,
                         bool(worst < mpf("1e-25") and not problems),
                         {"kmax": kmax, "uncertified_k": problems, "min_root_gap": min(gaps) if gaps else None}))
        a, b, _ = abc
        sol1 = solve_system(AnsatzParams(s, t, 1), cfg)
        exact = system_residual([Fraction(a, a + b)], *map(Fraction, abc))
        with cfg.workprec():
            err1 = abs(sol1.roots[0] - mpf(a) / (a + b))
        out.append(Check(f"system.k1_root==a/(a+b)[{_abc_name(abc)}]", Fraction(a, a + b), sol1.roots[0], err1, 0,
                         bool(exact == [0] and sol1.polynomial == RationalPoly([-Fraction(a, a + b), 1]))))
    with cfg.workprec():
        sol2 = solve_system(AnsatzParams(0, 0, 2), cfg)
        # quadratic formula for x^2 - (20/19) x + 40/247
        bq, cq = mpf(-20) / 19, mpf(40) / 247
        disc = mp.sqrt(bq * bq - 4 * cq)
        oracle = sorted([(-bq - disc) / 2, (-bq + disc) / 2])
        err = max(abs(u - v) for u, v in zip(sol2.roots, oracle))
    out.append(Check("system.k2_quadratic_oracle[4,3,12]", oracle, sol2.roots, err, 1e-25, bool(err < mpf("1e-25"))))
    return out


# ---------------------------------------------------------------------------
# orthogonality
# ---------------------------------------------------------------------------


def check_orthogonality(abc, nmax: int = 12, interlace_max: int = 20,
                        cfg: EvalConfig = DEFAULT_CONFIG) -> tuple[list, dict]:
    """Checks plus the (unasserted) reconciliation report for one (a, b, c)."""
    name = _abc_name(abc)
    w = weight_params(FuchsianParams(*abc))
    out = []
    with cfg.workprec():
        fam = ode_family(w, max(nmax, interlace_max) + 1)
        worst = mpf(0)
        for n in range(nmax + 1):
            for m in range(n):
                worst = max(worst, abs(inner_product(fam[m], fam[n], w, cfg)))
        out.append(bound_check(f"ortho.max|<Pm,Pn>|[{name}]", worst, 1e-25, {"nmax": nmax}))

        roots = [None] + [real_roots(fam[k], cfg, require_simple=True) for k in range(1, interlace_max + 2)]
        located = all(len(roots[k]) == k and all(0 < r < 1 for r in roots[k]) for k in range(1, interlace_max + 2))
        sturm = all(count_real_roots(fam[k], Fraction(0), Fraction(1)) == k for k in range(1, interlace_max + 1))
        inter = all(interlaces(roots[k], roots[k + 1]) for k in range(1, interlace_max + 1))
        out.append(exact_check(f"ortho.roots_simple_in_(0,1)[{name}]", located and sturm, {"kmax": interlace_max}))
        out.append(exact_check(f"ortho.interlacing[{name}]", inter, {"kmax": interlace_max}))

        h0 = inner_product(fam[0], fam[0], w, cfg)
        out.append(numeric_check(f"ortho.norm0==Beta[{name}]", beta_total(w, cfg), h0, 1e-25))

        worst_rec = mpf(0)
        for n in range(1, nmax):
            bn, cn = empirical_monic_recurrence(w, n, cfg)
            for xv in (mpf(1) / 7, mpf(1) / 2, mpf(5) / 6):
                rebuilt = (xv - bn) * fam[n](xv) - cn * fam[n - 1](xv)
                worst_rec = max(worst_rec, abs(rebuilt - fam[n + 1](xv)))
        out.append(bound_check(f"ortho.monic_recurrence_rebuilds_P(n+1)[{name}]", worst_rec, 1e-25))
        recon = reconciliation_report(w, min(nmax, 6), cfg)
    return out, recon


# ---------------------------------------------------------------------------
# the ansatz: residues, Schwarzian, MDE pair, transformation law
# ---------------------------------------------------------------------------


def _ansatz(s, t, k, cfg):
    p = AnsatzParams(s, t, k)
    sol = solve_system(p, cfg) if k else None
    return p, sol, build_ansatz(p, sol, cfg)


def check_residues(cases=RESIDUE_CASES, cfg: EvalConfig = DEFAULT_CONFIG, elliptic: bool = True) -> list:
    out = []
    for s, t, k in cases:
        p, sol, f = _ansatz(s, t, k, cfg)
        tag = f"{s},{t},{k}"
        for i in range(len(f.pole_centers)):
            label = f"w{i + 1}" if i < k else ("rho" if (s and i == k) else "i")
            if i >= k and not elliptic:
                continue
            a2, a1 = principal_part(f, i)
            out.append(bound_check(f"residue.|res|[{tag}]@{label}", a1, 1e-8,
                                   {"double_pole_coefficient": a2, "relative": a1 / a2}))
        with cfg.workprec():
            x = list(sol.roots)
            x[0] += mpf("0.01")
        g = build_ansatz(p, cfg=cfg, x_values=x)
        a2, a1 = principal_part(g, 0)
        out.append(bound_check(f"residue.control_relative[{tag}]", a1 / a2, 1e-4,
                               {"absolute_residue": a1, "double_pole_coefficient": a2}, above=True))
    for s, t in ((0, 2), (2, 0), (2, 2)):
        if not elliptic:
            break
        _, _, f = _ansatz(s, t, 0, cfg)
        for i, label in enumerate(["rho"] * bool(s) + ["i"] * bool(t)):
            out.append(bound_check(f"residue.|res|[{s},{t},0]@{label}", principal_part(f, i)[1], 1e-8))
    return out


def check_schwarzian(cases=SCHWARZIAN_CASES, points=None, cfg: EvalConfig = DEFAULT_CONFIG) -> list:
    points = points or standard_test_points(cfg)
    e4 = evaluator("e4", cfg)
    out = []
    for s, t, k in cases:
        p, _, f = _ansatz(s, t, k, cfg)
        for z in points:
            with cfg.workprec():
                S = schwarzian_of_integral(f, z, cfg)
                target = 2 * s_coefficient(p.r, cfg) * e4(z)
            out.append(numeric_check(f"schwarzian[{s},{t},{k};r={p.r}]@{_pt(z)}", target, S, 1e-6,
                                     relative_to=e4(z)))
    return out


def check_mde_pairs(cases=SCHWARZIAN_CASES, cfg: EvalConfig = DEFAULT_CONFIG, npoints: int = 3) -> list:
    points = standard_test_points(cfg)[:npoints]
    out = []
    for s, t, k in cases:
        p, _, f = _ansatz(s, t, k, cfg)
        pair = mde_pair(f)
        tag = f"{s},{t},{k}"
        ws = []
        for z in points:
            r1, r2 = pair.residuals(z)
            out.append(bound_check(f"mde.y1[{tag}]@{_pt(z)}", r1, 1e-6))
            out.append(bound_check(f"mde.y2[{tag}]@{_pt(z)}", r2, 1e-6))
            ws.append(pair.wronskian(z))
            with cfg.workprec():
                S = schwarzian_of_integral(f, z, cfg)
            out.append(numeric_check(f"mde.projective_invariance[{tag}]@{_pt(z)}", S, pair.mobius_schwarzian(z), 1e-8))
        spread = max(abs(w - ws[0]) for w in ws)
        out.append(bound_check(f"mde.wronskian_constant[{tag}]", spread, 1e-8, {"wronskian": ws[0]}))
    return out


def check_equivariance(cases=SCHWARZIAN_CASES, cfg: EvalConfig = DEFAULT_CONFIG) -> list:
    out = []
    points = standard_test_points(cfg)[:2]
    with cfg.workprec():
        z_ref = mpc("0.1", "1.3")
    for s, t, k in cases:
        _, _, f = _ansatz(s, t, k, cfg)
        for which in "ST":
            chi = measure_character(f, which, z_ref, cfg)
            for z in points:
                out.append(bound_check(f"equivariance.{which}[{s},{t},{k}]@{_pt(z)}",
                                       transformation_defect(f, which, chi, z, cfg), 1e-15, {"character": chi}))
    return out


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def run_all(cfg: EvalConfig = DEFAULT_CONFIG, fault: str | None = None) -> tuple[list, dict]:
    checks = []
    checks += check_series_identities(64, fault)
    checks += check_elliptic_vanishing(cfg)
    checks += check_identities(cfg)
    checks += check_hurwitz(cfg)
    checks += check_ode_polynomials(12)
    checks += check_dk_equivalence()
    checks += check_system(10, cfg)
    recon = {}
    for abc in MODULAR_SETS:
        c, r = check_orthogonality(abc, 12, 20, cfg)
        checks += c
        recon[_abc_name(abc)] = r
    checks += check_residues(cfg=cfg)
    checks += check_schwarzian(cfg=cfg)
    checks += check_mde_pairs(cfg=cfg)
    checks += check_equivariance(cfg=cfg)
    return checks, {"reconciliation": recon}
