"""Exact q-expansions of E4, E6, eta powers and Delta, plus pointwise
evaluation, contour differentiation and inversion of the normalized
J-invariant on the upper half-plane.

Series coefficients are exact :class:`fractions.Fraction` values; pointwise
work happens in :mod:`mpmath` at ``EvalConfig.precision_bits``.
"""

from __future__ import annotations

import itertools
import os
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence, Union

import mpmath
from mpmath import mp, mpc, mpf

from .errors import (
    EvaluationFailure,
    InsufficientPrecisionWarning,
    InvalidArgument,
    InvalidContour,
    InversionFailure,
    PoleOnContour,
    UnsupportedWeight,
)

PRECISION_ENV = "MDE_FORGE_PRECISION_BITS"


# ---------------------------------------------------------------------------
# configuration and points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalConfig:
    precision_bits: int = 256
    truncation_order: int = 64
    contour_radius: float = 0.05
    contour_points: int = 256
    tolerances: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.precision_bits < 64:
            raise InvalidArgument("precision_bits must be >= 64")
        if self.truncation_order < 8:
            raise InvalidArgument("truncation_order must be >= 8")
        if not self.contour_radius > 0:
            raise InvalidArgument("contour_radius must be positive")
        if self.contour_points < 8 or self.contour_points % 2:
            raise InvalidArgument("contour_points must be an even integer >= 8")

    @classmethod
    def from_env(cls, **overrides) -> "EvalConfig":
        bits = os.environ.get(PRECISION_ENV)
        if bits and "precision_bits" not in overrides:
            overrides["precision_bits"] = int(bits)
        return cls(**overrides)

    def tol(self, name: str, default: float) -> float:
        return self.tolerances.get(name, default)

    def workprec(self):
        return mp.workprec(self.precision_bits)

    # hashable for lru_cache keys
    def __hash__(self):
        return hash((self.precision_bits, self.truncation_order,
                     self.contour_radius, self.contour_points,
                     tuple(sorted(self.tolerances.items()))))


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class HalfPlanePoint:
    re: mpf
    im: mpf

    def __post_init__(self):
        object.__setattr__(self, "re", mpf(self.re))
        object.__setattr__(self, "im", mpf(self.im))
        if not self.im > 0:
            raise InvalidArgument(f"point must lie in the upper half-plane, got im={self.im}")

    @classmethod
    def of(cls, z) -> "HalfPlanePoint":
        if isinstance(z, HalfPlanePoint):
            return z
        z = mpc(z)
        return cls(z.real, z.imag)

    @property
    def z(self) -> mpc:
        return mpc(self.re, self.im)

    def __complex__(self):
        return complex(self.z)


PointLike = Union[HalfPlanePoint, complex, mpc]


def as_mpc(z: PointLike) -> mpc:
    if isinstance(z, HalfPlanePoint):
        return z.z
    return mpc(z)


def rho(cfg: EvalConfig = DEFAULT_CONFIG) -> mpc:
    """The elliptic point e^{2 pi i / 3}."""
    with cfg.workprec():
        return mpc(-mpf(1) / 2, mp.sqrt(3) / 2)


# ---------------------------------------------------------------------------
# exact series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QSeries:
    """``q**leading_exponent * sum(coeffs[n] * q**n)``, known for n < truncation_order."""

    leading_exponent: Fraction
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "leading_exponent", Fraction(self.leading_exponent))
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        if len(self.coeffs) < 1:
            raise InvalidArgument("truncation_order must be >= 1")

    @property
    def truncation_order(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def truncate(self, n: int) -> "QSeries":
        return QSeries(self.leading_exponent, self.coeffs[:n])

    def _aligned(self, other: "QSeries"):
        shift = other.leading_exponent - self.leading_exponent
        if shift.denominator != 1:
            raise InvalidArgument("series exponents differ by a non-integer")
        shift = int(shift)
        if shift < 0:
            b, a = other._aligned(self)
            return a, b
        # other = q^{e+shift} * ..., re-expressed relative to q^e
        n = min(self.truncation_order, other.truncation_order + shift)
        padded = (Fraction(0),) * shift + other.coeffs
        return (QSeries(self.leading_exponent, self.coeffs[:n]),
                QSeries(self.leading_exponent, padded[:n]))

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries(0, (Fraction(other),) + (Fraction(0),) * (self.truncation_order - 1))
        a, b = self._aligned(other)
        return QSeries(a.leading_exponent, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return QSeries(self.leading_exponent, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            other = Fraction(other)
            return QSeries(self.leading_exponent, [c * other for c in self.coeffs])
        n = min(self.truncation_order, other.truncation_order)
        a, b = self.coeffs, other.coeffs
        out = [sum(a[i] * b[m - i] for i in range(m + 1)) for m in range(n)]
        return QSeries(self.leading_exponent + other.leading_exponent, out)

    __rmul__ = __mul__

    def reciprocal(self) -> "QSeries":
        a = self.coeffs
        if a[0] == 0:
            raise InvalidArgument("division requires a nonzero constant term")
        out = [1 / a[0]]
        for m in range(1, len(a)):
            out.append(-sum(a[i] * out[m - i] for i in range(1, m + 1)) / a[0])
        return QSeries(-self.leading_exponent, out)

    def __truediv__(self, other):
        if not isinstance(other, QSeries):
            return self * (1 / Fraction(other))
        return self * other.reciprocal()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise InvalidArgument("only integer powers are supported")
        if e < 0:
            return self.reciprocal() ** (-e)
        result = QSeries(0, (Fraction(1),) + (Fraction(0),) * (self.truncation_order - 1))
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def normalized(self) -> "QSeries":
        """Strip leading zero coefficients into the exponent."""
        k = 0
        while k < self.truncation_order - 1 and self.coeffs[k] == 0:
            k += 1
        return QSeries(self.leading_exponent + k, self.coeffs[k:])


def divisor_sum(k: int, n: int) -> int:
    if k <= 0 or n <= 0:
        raise InvalidArgument(f"divisor_sum needs k, n >= 1 (got k={k}, n={n})")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** k
            if d * d != n:
                total += (n // d) ** k
        d += 1
    return total


@lru_cache(maxsize=None)
def eisenstein_series(weight: int, N: int) -> QSeries:
    if weight not in (4, 6):
        raise UnsupportedWeight(f"only weights 4 and 6 are supported, got {weight}")
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    scale, k = (240, 3) if weight == 4 else (-504, 5)
    return QSeries(0, [1] + [scale * divisor_sum(k, n) for n in range(1, N)])


@lru_cache(maxsize=None)
def eta_power_series(m: int, N: int) -> QSeries:
    """eta(z)**m = q^{m/24} prod (1 - q^n)^m, truncated to N coefficients."""
    if m <= 0:
        raise InvalidArgument("eta power must be >= 1")
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    # prod_{n<N} (1 - q^n), then an integer power
    poly = [0] * N
    poly[0] = 1
    for n in range(1, N):
        for i in range(N - 1, n - 1, -1):
            poly[i] -= poly[i - n]
    base = QSeries(0, poly)
    return QSeries(Fraction(m, 24), (base ** m).coeffs)


@lru_cache(maxsize=None)
def delta_series(N: int) -> QSeries:
    """Delta = (E4^3 - E6^2)/1728 from the Eisenstein expansions; exponent 1."""
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    e4 = eisenstein_series(4, N + 1)
    e6 = eisenstein_series(6, N + 1)
    d = (e4 ** 3 - e6 ** 2) / 1728
    assert d.coeffs[0] == 0
    return QSeries(1, d.coeffs[1:])


@lru_cache(maxsize=None)
def j_normalized_series(N: int) -> QSeries:
    """E4^3/(E4^3 - E6^2) = J/1728 as a Laurent series starting at q^-1."""
    return eisenstein_series(4, N) ** 3 / (delta_series(N) * 1728)


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _mp_coeffs(series: QSeries, prec: int):
    with mp.workprec(prec):
        return tuple(mpf(c.numerator) / c.denominator for c in series.coeffs)


def _horner(coeffs, q):
    acc = mpc(0)
    for c in reversed(coeffs):
        acc = acc * q + c
    return acc


def eval_qseries(f: QSeries, z: PointLike, cfg: EvalConfig = DEFAULT_CONFIG) -> mpc:
    """Value of the truncated expansion at z; q^e is taken as exp(2 pi i e z)."""
    if f.truncation_order < cfg.truncation_order:
        warnings.warn(
            f"series has {f.truncation_order} terms, config expects {cfg.truncation_order}",
            InsufficientPrecisionWarning,
            stacklevel=2,
        )
    with cfg.workprec():
        z = as_mpc(z)
        if not z.imag > 0:
            raise InvalidArgument("evaluation point must lie in the upper half-plane")
        twopiiz = 2j * mp.pi * z
        value = _horner(_mp_coeffs(f, cfg.precision_bits), mp.exp(twopiiz))
        e = f.leading_exponent
        if e:
            value *= mp.exp(twopiiz * e.numerator / e.denominator)
        return +value


def _form_series(name: str, N: int) -> QSeries:
    if name == "e4":
        return eisenstein_series(4, N)
    if name == "e6":
        return eisenstein_series(6, N)
    if name == "eta":
        return eta_power_series(1, N)
    if name == "eta4":
        return eta_power_series(4, N)
    if name == "delta":
        return delta_series(N)
    raise InvalidArgument(f"unknown form {name!r}")


def evaluator(name: str, cfg: EvalConfig = DEFAULT_CONFIG) -> Callable[[mpc], mpc]:
    """Pointwise evaluator z -> form(z) for e4, e6, eta, eta4, delta or jnorm."""
    if name == "jnorm":
        return lambda z: j_normalized(z, cfg)
    series = _form_series(name, cfg.truncation_order)
    return lambda z: eval_qseries(series, z, cfg)


def eisenstein_pair(z: PointLike, cfg: EvalConfig = DEFAULT_CONFIG):
    """(E4(z), E6(z)) sharing one exponential."""
    N = cfg.truncation_order
    with cfg.workprec():
        z = as_mpc(z)
        q = mp.exp(2j * mp.pi * z)
        e4 = _horner(_mp_coeffs(eisenstein_series(4, N), cfg.precision_bits), q)
        e6 = _horner(_mp_coeffs(eisenstein_series(6, N), cfg.precision_bits), q)
        return e4, e6


def j_normalized(z: PointLike, cfg: EvalConfig = DEFAULT_CONFIG) -> mpc:
    """J(z)/1728 = E4^3 / (E4^3 - E6^2); equals 0 at rho and 1 at i."""
    with cfg.workprec():
        e4, e6 = eisenstein_pair(z, cfg)
        num = e4 ** 3
        den = num - e6 ** 2
        if abs(den) < mpf(2) ** (-cfg.precision_bits + 16) * max(1, abs(num)):
            raise EvaluationFailure("E4^3 - E6^2 vanishes to working precision (cusp approach)")
        return num / den


# ---------------------------------------------------------------------------
# contour differentiation
# ---------------------------------------------------------------------------


def taylor_coefficients(g: Callable[[mpc], mpc], z: PointLike, n_terms: int,
                        radius, cfg: EvalConfig = DEFAULT_CONFIG,
                        points: int | None = None, check: bool = True) -> list:
    """First ``n_terms`` Taylor coefficients of g about z from trapezoidal
    sampling on a circle.

    The estimate from every other sample point is compared with the full
    estimate; a mismatch signals a singularity on or near the contour.
    """
    M = points or cfg.contour_points
    if n_terms > M // 2:
        raise InvalidArgument("too many coefficients for the sample count")
    with cfg.workprec():
        z = as_mpc(z)
        r = mpf(radius)
        if not r > 0:
            raise InvalidContour("radius must be positive")
        if not z.imag - r > 0:
            raise InvalidContour(f"disk of radius {radius} about {mpmath.nstr(z, 8)} leaves the upper half-plane")
        roots = [mp.expjpi(mpf(2 * j) / M) for j in range(M)]
        samples = [g(z + r * w) for w in roots]
        scale = max(abs(s) for s in samples)
        if not mp.isfinite(scale):
            raise PoleOnContour("non-finite sample on the contour")
        coeffs, coarse = [], []
        for n in range(n_terms):
            # samples * w^{-n}, averaged
            full = mp.fsum(s * roots[(-n * j) % M] for j, s in enumerate(samples)) / M
            coeffs.append(full / r ** n)
            if check:
                half = mp.fsum(samples[j] * roots[(-n * j) % M] for j in range(0, M, 2)) / (M // 2)
                coarse.append(half / r ** n)
        if check:
            tol = mpf(cfg.tol("contour_convergence", 1e-20))
            for n, (a, b) in enumerate(zip(coeffs, coarse)):
                if abs(a - b) > tol * scale / r ** n:
                    raise PoleOnContour(
                        f"contour quadrature did not converge for coefficient {n} "
                        f"(|diff| = {mpmath.nstr(abs(a - b), 5)}); singularity near the contour"
                    )
        return coeffs


def cauchy_derivative(g: Callable[[mpc], mpc], z: PointLike, order: int,
                      radius=None, cfg: EvalConfig = DEFAULT_CONFIG,
                      points: int | None = None) -> mpc:
    """order!/(2 pi i) * contour integral of g(w)/(w - z)^(order+1)."""
    if order < 0:
        raise InvalidArgument("derivative order must be >= 0")
    radius = cfg.contour_radius if radius is None else radius
    coeffs = taylor_coefficients(g, z, order + 1, radius, cfg, points=points)
    with cfg.workprec():
        return coeffs[order] * mp.factorial(order)


# ---------------------------------------------------------------------------
# fundamental domain and J-inversion
# ---------------------------------------------------------------------------


def reduce_to_fundamental_domain(w: PointLike, cfg: EvalConfig = DEFAULT_CONFIG) -> mpc:
    """SL2(Z)-equivalent point with |Re| <= 1/2, |w| >= 1.

    Boundary points are canonicalized to Re w in [-1/2, 1/2) and, on the unit
    arc, Re w <= 0.
    """
    with cfg.workprec():
        w = as_mpc(w)
        eps = mpf(2) ** (-cfg.precision_bits // 2)
        for _ in range(10_000):
            w -= mp.nint(w.real)
            if abs(w) < 1 - eps:
                w = -1 / w
                continue
            break
        else:
            raise InversionFailure("fundamental-domain reduction did not terminate")
        if w.real >= mpf(1) / 2 - eps:
            w -= 1
        if abs(abs(w) - 1) < eps and w.real > eps:
            w = -1 / w
        return w


def _seeds(cfg: EvalConfig):
    with cfg.workprec():
        grid = [mpc(mpf(re) / 4, 1 + mpf(im) / 2) for re, im in itertools.product(range(-2, 3), range(5))]
        return grid + [mpc(0, 1), rho(cfg)]


def invert_j(x, cfg: EvalConfig = DEFAULT_CONFIG, max_iter: int = 80) -> HalfPlanePoint:
    """A point w of the standard fundamental domain with J(w)/1728 = x.

    Iterates the multiplicity-robust Newton step F F' / (F'^2 - F F'') with
    derivatives from a small Cauchy contour, so the critical values x = 0 and
    x = 1 converge quadratically as well.
    """
    with cfg.workprec():
        x = mpc(mpf(x.numerator) / x.denominator) if isinstance(x, Fraction) else mpc(x)
        target = mpf(cfg.tol("invert_j", 1e-12))
        step_floor = mpf(2) ** (-cfg.precision_bits // 4)
        jh = lambda z: j_normalized(z, cfg)
        seeds = sorted(_seeds(cfg), key=lambda s: abs(jh(s) - x))
        for seed in seeds:
            w = seed
            ok = False
            for _ in range(max_iter):
                r = min(mpf("0.01"), w.imag / 4)
                try:
                    c = taylor_coefficients(jh, w, 3, r, cfg, points=32, check=False)
                except EvaluationFailure:
                    break
                F, dF, ddF = c[0] - x, c[1], 2 * c[2]
                den = dF * dF - F * ddF
                if F == 0:
                    ok = True
                    break
                if den == 0:
                    break
                step = F * dF / den
                w = w - step
                if not w.imag > 0 or abs(w) > 1e6:
                    break
                if abs(step) < step_floor:
                    ok = True
                    break
            if not ok:
                continue
            w = reduce_to_fundamental_domain(w, cfg)
            if abs(jh(w) - x) < target:
                return HalfPlanePoint.of(w)
        raise InversionFailure(f"J-inversion failed for x = {mpmath.nstr(x, 15)}")


def images(p: PointLike, depth: int = 3, cfg: EvalConfig = DEFAULT_CONFIG) -> list:
    """SL2(Z)-images of p reachable by words of length <= depth in S, T, T^-1."""
    with cfg.workprec():
        maps = (lambda z: -1 / z, lambda z: z + 1, lambda z: z - 1)
        seen = {}
        frontier = [as_mpc(p)]
        def key(z):
            return (round(float(z.real), 9), round(float(z.imag), 9))
        for z in frontier:
            seen[key(z)] = z
        for _ in range(depth):
            nxt = []
            for z in frontier:
                for m in maps:
                    u = m(z)
                    if key(u) not in seen:
                        seen[key(u)] = u
                        nxt.append(u)
            frontier = nxt
        return list(seen.values())


def standard_test_points(cfg: EvalConfig = DEFAULT_CONFIG) -> list:
    """The fixed verification points 2i, 1/3 + i, 1/4 + 2i, 1/5 + 3i/2."""
    with cfg.workprec():
        return [
            HalfPlanePoint(0, 2),
            HalfPlanePoint(mpf(1) / 3, 1),
            HalfPlanePoint(mpf(1) / 4, 2),
            HalfPlanePoint(mpf(1) / 5, mpf(3) / 2),
        ]


def sequence_to_strings(values: Sequence[Fraction]) -> list:
    return [f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator) for v in values]
