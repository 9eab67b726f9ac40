"""The residue-vanishing system

    a/x_i + b/(x_i - 1) + sum_{j != i} c/(x_i - x_j) = 0,   1 <= i <= k,

solved through the roots of the degree-k Fuchsian polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from mpmath import mp, mpf

from .errors import CertificationFailure, InvalidAnsatz, InvalidArgument, SingularConfiguration
from .orthopoly import (
    FuchsianParams,
    RationalPoly,
    is_squarefree,
    ode_polynomial,
    real_roots,
)
from .qmod import DEFAULT_CONFIG, EvalConfig

# (E4 exponent, E6 exponent) -> ((a, b, c), numerator of 6r at k = 0).
# 6r is the eta exponent 4 + 8s + 12t of the weight-2 ansatz divided by 4;
# a double pole at i (E6) gives r = 7/6 and one at rho (E4) gives r = 5/6.
ANSATZ_TABLE = {
    (0, 0): ((4, 3, 12), 1),
    (0, 2): ((4, 9, 12), 7),
    (2, 0): ((8, 3, 12), 5),
    (2, 2): ((8, 9, 12), 11),
}


@dataclass(frozen=True)
class AnsatzParams:
    exponent_e4: int
    exponent_e6: int
    k: int
    a: Fraction = field(default=None)
    b: Fraction = field(default=None)
    c: Fraction = field(default=None)

    def __post_init__(self):
        key = (self.exponent_e4, self.exponent_e6)
        if key not in ANSATZ_TABLE:
            raise InvalidAnsatz(f"E4/E6 exponents must each be 0 or 2, got {key}")
        if self.k < 0:
            raise InvalidArgument("k must be >= 0")
        (a, b, c), _ = ANSATZ_TABLE[key]
        for name, v in zip("abc", (a, b, c)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, Fraction(v))
            else:
                object.__setattr__(self, name, Fraction(getattr(self, name)))

    @property
    def overridden(self) -> bool:
        (a, b, c), _ = ANSATZ_TABLE[(self.exponent_e4, self.exponent_e6)]
        return (self.a, self.b, self.c) != (a, b, c)

    @property
    def r(self) -> Fraction:
        """r = m/6 with m = m0 + 12k; gcd(m, 6) = 1."""
        _, m0 = ANSATZ_TABLE[(self.exponent_e4, self.exponent_e6)]
        return Fraction(m0 + 12 * self.k, 6)

    @property
    def fuchsian(self) -> FuchsianParams:
        return FuchsianParams(self.a, self.b, self.c, self.k)

    def as_dict(self) -> dict:
        return {
            "exponent_e4": self.exponent_e4,
            "exponent_e6": self.exponent_e6,
            "k": self.k,
            "a": _frac_str(self.a),
            "b": _frac_str(self.b),
            "c": _frac_str(self.c),
            "r": _frac_str(self.r),
        }


def _frac_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def params_for(exponent_e4: int, exponent_e6: int, k: int) -> AnsatzParams:
    return AnsatzParams(exponent_e4, exponent_e6, k)


def system_residual(x: Sequence, a, b, c) -> list:
    """Left-hand sides of the system; exact when the inputs are Fractions."""
    x = list(x)
    for i, xi in enumerate(x):
        if xi == 0 or xi == 1:
            raise SingularConfiguration(f"x_{i + 1} = {xi} is a singular point of the system")
        for xj in x[i + 1:]:
            if xi == xj:
                raise SingularConfiguration("coordinates must be pairwise distinct")
    out = []
    for i, xi in enumerate(x):
        v = a / xi + b / (xi - 1)
        for j, xj in enumerate(x):
            if j != i:
                v += c / (xi - xj)
        out.append(v)
    return out


@dataclass(frozen=True)
class SystemSolution:
    params: AnsatzParams
    roots: tuple
    residual_max: mpf
    polynomial: RationalPoly
    certified: bool
    min_gap: mpf = None


def solve_system(p: AnsatzParams, cfg: EvalConfig = DEFAULT_CONFIG, strict: bool = True) -> SystemSolution:
    """Roots of the Fuchsian polynomial, checked against the system.

    Raises :class:`NoPolynomialSolution` when D_k = 0.  With ``strict`` a
    failed certificate raises :class:`CertificationFailure`; otherwise it is
    returned with ``certified=False``.
    """
    if p.k < 1:
        raise InvalidArgument("solve_system needs k >= 1")
    poly = ode_polynomial(p.fuchsian)
    tol = mpf(cfg.tol("system_residual", 1e-25))
    diagnostics = {}
    with cfg.workprec():
        simple = is_squarefree(poly)
        roots = real_roots(poly, cfg) if simple else []
        all_real = len(roots) == p.k
        in_unit = all_real and all(0 < r < 1 for r in roots)
        if all_real and simple:
            res = system_residual(roots, *(mpf(v.numerator) / v.denominator for v in (p.a, p.b, p.c)))
            residual_max = max(abs(v) for v in res)
        else:
            residual_max = mp.inf
        gaps = [roots[i + 1] - roots[i] for i in range(len(roots) - 1)]
        min_gap = min(gaps) if gaps else None
        certified = simple and all_real and in_unit and residual_max < tol
    diagnostics.update(simple=simple, real_roots=len(roots), in_unit_interval=in_unit,
                       residual_max=residual_max)
    sol = SystemSolution(p, tuple(roots), residual_max, poly, certified, min_gap)
    if strict and not certified:
        raise CertificationFailure("system solution could not be certified", diagnostics)
    return sol
