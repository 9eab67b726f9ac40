"""Polynomial solutions of the Fuchsian equation

    (c/2) x (x - 1) y'' + ((a + b) x - a) y' - lambda_k y = 0,

their orthogonality on (0, 1) against x^alpha (1 - x)^beta, Gauss rules,
norms, recurrences and certified real roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from mpmath import mp, mpf

from .errors import (
    DivergentWeight,
    InvalidArgument,
    InvalidParams,
    MultipleRootError,
    NoPolynomialSolution,
)
from .qmod import DEFAULT_CONFIG, EvalConfig


def _q(v) -> Fraction:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10 ** 12)
    return Fraction(v)


# ---------------------------------------------------------------------------
# exact polynomials
# ---------------------------------------------------------------------------


class RationalPoly:
    """Dense polynomial with Fraction coefficients, ``coeffs[i]`` multiplies x^i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [_q(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def x(cls):
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other):
        if not isinstance(other, RationalPoly):
            other = RationalPoly([other])
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def __add__(self, other):
        if not isinstance(other, RationalPoly):
            other = RationalPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RationalPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RationalPoly):
            other = _q(other)
            return RationalPoly(c * other for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def divmod(self, other: "RationalPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.leading
        for i in range(len(quot) - 1, -1, -1):
            f = rem[i + other.degree] / lead
            quot[i] = f
            if f:
                for j, b in enumerate(other.coeffs):
                    rem[i + j] -= f * b
        return RationalPoly(quot), RationalPoly(rem[: other.degree] if other.degree > 0 else [])

    def derivative(self) -> "RationalPoly":
        return RationalPoly(i * c for i, c in enumerate(self.coeffs) if i)

    def monic(self) -> "RationalPoly":
        return self * (1 / self.leading)

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, Fraction) else Fraction(0)
        if isinstance(x, Fraction) or isinstance(x, int):
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        for c in reversed(self.coeffs):
            acc = acc * x + mpf(c.numerator) / c.denominator
        return acc

    def to_strings(self) -> list:
        return [_frac_str(c) for c in self.coeffs]

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "RationalPoly":
        return cls(Fraction(s) for s in items)


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_gcd(p: RationalPoly, q: RationalPoly) -> RationalPoly:
    while not q.is_zero():
        p, q = q, p.divmod(q)[1]
    return p.monic() if not p.is_zero() else p


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FuchsianParams:
    a: Fraction
    b: Fraction
    c: Fraction
    k: int = 0

    def __post_init__(self):
        for name in "abc":
            object.__setattr__(self, name, _q(getattr(self, name)))
        if self.c == 0:
            raise InvalidParams("c must be nonzero")
        if self.k < 0:
            raise InvalidArgument("degree must be >= 0")

    def with_degree(self, k: int) -> "FuchsianParams":
        return FuchsianParams(self.a, self.b, self.c, k)


@dataclass(frozen=True)
class WeightParams:
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", _q(self.alpha))
        object.__setattr__(self, "beta", _q(self.beta))

    @property
    def positive_measure(self) -> bool:
        return self.alpha > -1 and self.beta > -1

    def fuchsian(self, k: int = 0, c=2) -> FuchsianParams:
        """Fuchsian parameters whose polynomial solutions are orthogonal for this weight."""
        c = _q(c)
        return FuchsianParams(c * (self.alpha + 1) / 2, c * (self.beta + 1) / 2, c, k)

    def require_positive(self):
        if not self.positive_measure:
            raise DivergentWeight(
                f"x^{self.alpha} (1-x)^{self.beta} is not integrable on (0, 1); need alpha, beta > -1"
            )


def lambda_value(p: FuchsianParams) -> Fraction:
    k = p.k
    return k * (p.a + p.b) + p.c / 2 * k * (k - 1)


def dk_value(p: FuchsianParams) -> Fraction:
    """Product over i < k of (a + ci/2)(b + ci/2)(a + b + c(k+i-1)/2)."""
    if p.k < 1:
        raise InvalidArgument("D_k is defined for k >= 1")
    half = p.c / 2
    out = Fraction(1)
    for i in range(p.k):
        out *= (p.a + half * i) * (p.b + half * i) * (p.a + p.b + half * (p.k + i - 1))
    return out


def ode_polynomial(p: FuchsianParams) -> RationalPoly:
    """Monic degree-k polynomial solution, by backward recurrence from s_k = 1."""
    k, a, b, half = p.k, p.a, p.b, p.c / 2
    if k == 0:
        return RationalPoly([1])
    if dk_value(p) == 0:
        raise NoPolynomialSolution(
            f"D_{k}({a}, {b}, {p.c}) = 0: the residue system has no admissible solution"
        )
    s = [Fraction(0)] * (k + 1)
    s[k] = Fraction(1)
    for i in range(k - 1, -1, -1):
        s[i] = -(i + 1) * (a + half * i) * s[i + 1] / ((k - i) * (a + b + half * (k + i - 1)))
    return RationalPoly(s)


def ode_residual(poly: RationalPoly, p: FuchsianParams) -> RationalPoly:
    """Left-hand side of the Fuchsian equation applied to ``poly`` (exact)."""
    x = RationalPoly.x()
    d1 = poly.derivative()
    d2 = d1.derivative()
    return (p.c / 2) * x * (x - 1) * d2 + ((p.a + p.b) * x - p.a) * d1 - lambda_value(p) * poly


def weight_params(p: FuchsianParams) -> WeightParams:
    if p.c == 0:
        raise InvalidParams("c must be nonzero")
    return WeightParams(2 * p.a / p.c - 1, 2 * p.b / p.c - 1)


def ode_family(w: WeightParams, nmax: int) -> list:
    """Monic orthogonal polynomials P_0..P_nmax for weight w."""
    base = w.fuchsian()
    return [ode_polynomial(base.with_degree(n)) for n in range(nmax + 1)]


# ---------------------------------------------------------------------------
# moments, quadrature, inner products
# ---------------------------------------------------------------------------


def beta_total(w: WeightParams, cfg: EvalConfig = DEFAULT_CONFIG) -> mpf:
    """Integral of x^alpha (1-x)^beta over (0, 1), i.e. Beta(alpha+1, beta+1)."""
    w.require_positive()
    with cfg.workprec():
        return mp.beta(_mp(w.alpha) + 1, _mp(w.beta) + 1)


def moment_ratios(w: WeightParams, n: int) -> list:
    """Exact m_j / m_0 for j <= n, where m_j is the j-th moment of the weight."""
    out = [Fraction(1)]
    for j in range(n):
        out.append(out[-1] * (w.alpha + 1 + j) / (w.alpha + w.beta + 2 + j))
    return out


def exact_inner_product_ratio(f: RationalPoly, g: RationalPoly, w: WeightParams) -> Fraction:
    """<f, g> / Beta(alpha+1, beta+1) in exact arithmetic, via moments."""
    fg = f * g
    m = moment_ratios(w, max(fg.degree, 0))
    return sum((c * m[j] for j, c in enumerate(fg.coeffs)), Fraction(0))


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple
    weights: tuple

    def __len__(self):
        return len(self.nodes)

    def integrate(self, fn) -> mpf:
        return mp.fsum(wt * fn(x) for x, wt in zip(self.nodes, self.weights))


@lru_cache(maxsize=512)
def gauss_quadrature(w: WeightParams, npoints: int, cfg: EvalConfig = DEFAULT_CONFIG) -> QuadratureRule:
    """n-point Gauss rule for x^alpha (1-x)^beta on (0, 1).

    Nodes are roots of the monic P_n; weights from the Christoffel formula
    h_{n-1} / (P_{n-1}(x_j) P_n'(x_j)) with h_{n-1} taken from exact moments.
    """
    w.require_positive()
    if npoints < 1:
        raise InvalidArgument("npoints must be >= 1")
    base = w.fuchsian()
    pn = ode_polynomial(base.with_degree(npoints))
    pm = ode_polynomial(base.with_degree(npoints - 1))
    with cfg.workprec():
        nodes = real_roots(pn, cfg, require_simple=True)
        h = exact_inner_product_ratio(pm, pm, w)
        scale = beta_total(w, cfg) * _mp(h)
        dpn = pn.derivative()
        weights = [scale / (pm(x) * dpn(x)) for x in nodes]
    return QuadratureRule(tuple(nodes), tuple(weights))


def inner_product(f: RationalPoly, g: RationalPoly, w: WeightParams,
                  cfg: EvalConfig = DEFAULT_CONFIG) -> mpf:
    """Integral of f g x^alpha (1-x)^beta over (0, 1) by an exact Gauss rule."""
    w.require_positive()
    deg = max((f * g).degree, 0)
    rule = gauss_quadrature(w, deg // 2 + 1, cfg)
    with cfg.workprec():
        return rule.integrate(lambda x: f(x) * g(x))


def norm_formula(w: WeightParams, n: int, cfg: EvalConfig = DEFAULT_CONFIG) -> mpf:
    """Closed form 1/(2n+alpha+beta+1) * G(n+alpha+1) G(n+beta+1) / (n! G(n+alpha+beta+1))."""
    w.require_positive()
    with cfg.workprec():
        al, be = _mp(w.alpha), _mp(w.beta)
        arg = n + al + be + 1
        if arg <= 0 and arg == int(arg):
            raise InvalidParams("Gamma pole in the norm formula")
        return (mp.gamma(n + al + 1) * mp.gamma(n + be + 1)
                / ((2 * n + al + be + 1) * mp.factorial(n) * mp.gamma(arg)))


def published_recurrence_coeffs(w: WeightParams, n: int):
    """(A_n, B_n, C_n) of the published three-term recurrence, exact.

    Returns None when a denominator vanishes.
    """
    al, be = w.alpha, w.beta
    s = 2 * n + al + be
    dens = ((s + 1) * (s + 2), s * (s + 2), s * s * (s + 1))
    if any(d == 0 for d in dens):
        return None
    A = 2 * (n + 1) * (n + al + be + 1) / dens[0]
    B = (be * be - al * al) / dens[1]
    C = -2 * (n + al) * (n + be) * (s + 2) / dens[2]
    return A, B, C


def empirical_monic_recurrence(w: WeightParams, n: int, cfg: EvalConfig = DEFAULT_CONFIG):
    """(b_n, c_n) with P_{n+1} = (x - b_n) P_n - c_n P_{n-1}, from Gauss inner products.

    c_0 is returned as 0.
    """
    w.require_positive()
    fam = ode_family(w, n)
    x = RationalPoly.x()
    with cfg.workprec():
        hn = inner_product(fam[n], fam[n], w, cfg)
        bn = inner_product(x * fam[n], fam[n], w, cfg) / hn
        cn = hn / inner_product(fam[n - 1], fam[n - 1], w, cfg) if n else mpf(0)
        return bn, cn


def reconciliation_report(w: WeightParams, nmax: int, cfg: EvalConfig = DEFAULT_CONFIG) -> dict:
    """Compare the published (A_n, B_n, C_n) and h_n with the monic family.

    If the published recurrence described some rescaling of the monic P_n it
    would imply b_n = -B_n/A_n and c_n = -C_n/A_n; both are listed next to the
    values measured from the ODE polynomials.  Nothing here is asserted.
    """
    rows = []
    with cfg.workprec():
        fam = ode_family(w, nmax + 1)
        x = RationalPoly.x()
        for n in range(nmax + 1):
            row = {"n": n}
            bn, cn = empirical_monic_recurrence(w, n, cfg)
            row["monic_b"] = bn
            row["monic_c"] = cn
            hn = inner_product(fam[n], fam[n], w, cfg)
            row["monic_norm"] = hn
            row["printed_norm"] = norm_formula(w, n, cfg)
            row["norm_ratio"] = hn / row["printed_norm"]
            # P_n^(beta, alpha)(2x - 1) has leading coefficient (n+alpha+beta+1)_n / n!
            lead = mp.rf(_mp(w.alpha + w.beta) + n + 1, n) / mp.factorial(n)
            row["classical_norm_ratio"] = lead ** 2 * hn / row["printed_norm"]
            coeffs = published_recurrence_coeffs(w, n)
            if coeffs is None:
                row["printed"] = None
                rows.append(row)
                continue
            A, B, C = coeffs
            row["printed"] = {"A": A, "B": B, "C": C}
            row["implied_b"] = -B / A
            row["implied_c"] = -C / A if n else Fraction(0)
            prev = fam[n - 1] if n else RationalPoly()
            lhs = (A * x + B) * fam[n] + C * prev
            # best multiple of P_{n+1} against the printed combination
            ratio = lhs.leading / fam[n + 1].leading
            row["printed_is_multiple_of_next"] = (lhs - ratio * fam[n + 1]).is_zero()
            row["printed_scale"] = ratio
            row["b_agrees"] = abs(_mp(row["implied_b"]) - bn) < mpf(10) ** -25
            row["c_agrees"] = abs(_mp(row["implied_c"]) - cn) < mpf(10) ** -25
            row["norm_agrees"] = abs(row["norm_ratio"] - 1) < mpf(10) ** -25
            row["norm_is_classical"] = abs(row["classical_norm_ratio"] - 1) < mpf(10) ** -25
            rows.append(row)
    return {
        "alpha": w.alpha,
        "beta": w.beta,
        "rows": rows,
        "recurrence_matches_monic": all(r.get("b_agrees") and r.get("c_agrees") for r in rows if r.get("printed")),
        "norms_match_monic": all(r.get("norm_agrees") for r in rows if "norm_agrees" in r),
    }


# ---------------------------------------------------------------------------
# roots
# ---------------------------------------------------------------------------


def _mp(v: Fraction) -> mpf:
    return mpf(v.numerator) / v.denominator


def sturm_sequence(p: RationalPoly) -> list:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        r = seq[-2].divmod(seq[-1])[1]
        seq.append(-r)
    return seq[:-1]


def _sign_changes(seq, x: Fraction) -> int:
    signs = [v for v in (s(x) for s in seq) if v != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))


def _sign_changes_at_inf(seq, sign: int) -> int:
    signs = []
    for s in seq:
        lead = s.leading
        if s.degree % 2 and sign < 0:
            lead = -lead
        signs.append(lead)
    return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))


def count_real_roots(p: RationalPoly, lo: Fraction | None = None, hi: Fraction | None = None) -> int:
    """Number of distinct real roots in (lo, hi] by Sturm's theorem (exact).

    ``None`` bounds mean -inf / +inf.
    """
    seq = sturm_sequence(p)
    vlo = _sign_changes_at_inf(seq, -1) if lo is None else _sign_changes(seq, _q(lo))
    vhi = _sign_changes_at_inf(seq, 1) if hi is None else _sign_changes(seq, _q(hi))
    return vlo - vhi


def is_squarefree(p: RationalPoly) -> bool:
    return poly_gcd(p, p.derivative()).degree == 0


def _newton_refine(p: RationalPoly, x: mpf, floor: mpf, max_iter: int = 200) -> mpf:
    dp = p.derivative()
    for _ in range(max_iter):
        d = dp(x)
        if d == 0:
            break
        step = p(x) / d
        x -= step
        if abs(step) < floor:
            break
    return x


def _simple_real_roots(p: RationalPoly, cfg: EvalConfig) -> list:
    n_real = count_real_roots(p)
    if n_real == 0:
        return []
    with cfg.workprec():
        if p.degree == 1:
            return [_mp(-p.coeffs[0] / p.coeffs[1])]
        monic = p.monic()
        comp = np.zeros((p.degree, p.degree))
        comp[1:, :-1] = np.eye(p.degree - 1)
        comp[:, -1] = [-float(c) for c in monic.coeffs[:-1]]
        seeds = sorted(np.linalg.eigvals(comp), key=lambda z: abs(z.imag))[:n_real]
        floor = mpf(2) ** (-cfg.precision_bits + 24)
        roots = sorted(_newton_refine(monic, mpf(float(z.real)), floor) for z in seeds)
        if not _isolated(monic, roots, n_real):
            roots = _bisect_roots(monic, n_real, cfg)
        return roots


def _isolated(p: RationalPoly, roots: list, n_real: int) -> bool:
    """Each root sits in its own Sturm-certified bracket."""
    if len(roots) != n_real:
        return False
    gaps = [roots[i + 1] - roots[i] for i in range(len(roots) - 1)]
    if gaps and min(gaps) <= 0:
        return False
    pad = min(gaps) / 4 if gaps else mpf(1) / 4
    for r in roots:
        lo = Fraction(mp.nstr(r - pad, 60))
        hi = Fraction(mp.nstr(r + pad, 60))
        if count_real_roots(p, lo, hi) != 1:
            return False
    return True


def _bisect_roots(p: RationalPoly, n_real: int, cfg: EvalConfig) -> list:
    # Cauchy bound, then Sturm bisection to isolating intervals and Newton
    bound = 1 + max(abs(c) for c in p.coeffs[:-1]) / abs(p.leading)
    intervals = [(-bound, bound)]
    isolated = []
    while intervals:
        lo, hi = intervals.pop()
        n = count_real_roots(p, lo, hi)
        if n == 0:
            continue
        if n == 1:
            isolated.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        if p(mid) == 0:
            mid += (hi - lo) / 7
        intervals += [(lo, mid), (mid, hi)]
    out = []
    floor = mpf(2) ** (-cfg.precision_bits + 24)
    for lo, hi in isolated:
        a, b = lo, hi
        for _ in range(60):
            m = (a + b) / 2
            if (p(a) > 0) == (p(m) > 0):
                a = m
            else:
                b = m
        out.append(_newton_refine(p, _mp((a + b) / 2), floor))
    return sorted(out)


def squarefree_decomposition(p: RationalPoly) -> list:
    """Yun's algorithm: [a_1, a_2, ...] with p = lead * prod a_i^i, a_i square-free."""
    p = p.monic()
    dp = p.derivative()
    g = poly_gcd(p, dp)
    b = p.divmod(g)[0]
    c = dp.divmod(g)[0]
    d = c - b.derivative()
    out = []
    while b.degree > 0:
        a = poly_gcd(b, d)
        out.append(a)
        b = b.divmod(a)[0]
        c = d.divmod(a)[0]
        d = c - b.derivative()
    return out


def real_roots(p: RationalPoly, cfg: EvalConfig = DEFAULT_CONFIG, require_simple: bool = False) -> list:
    """Sorted real roots, repeated by multiplicity.

    Companion-matrix eigenvalues seed Newton on the exact polynomial; Sturm
    sequences certify the count and isolation.  With ``require_simple`` a
    repeated root raises :class:`MultipleRootError`.
    """
    if p.degree < 1:
        raise InvalidArgument("real_roots needs degree >= 1")
    if is_squarefree(p):
        return _simple_real_roots(p, cfg)
    if require_simple:
        raise MultipleRootError("polynomial has repeated roots (gcd(p, p') is non-constant)")
    out = []
    for mult, factor in enumerate(squarefree_decomposition(p), start=1):
        if factor.degree > 0:
            out.extend(r for r in _simple_real_roots(factor, cfg) for _ in range(mult))
    return sorted(out)


def interlaces(inner: Sequence, outer: Sequence) -> bool:
    """Exactly one element of ``inner`` strictly between consecutive ``outer``."""
    if len(outer) != len(inner) + 1:
        return False
    for lo, hi in zip(outer, outer[1:]):
        if sum(1 for r in inner if lo < r < hi) != 1:
            return False
    return True
