"""The weight-2 ansatz, its residues, the Schwarzian of h = int f, and the
MDE solutions y1 = f^(-1/2), y2 = h f^(-1/2).

The ansatz is

    f = eta^4 (eta^8 / E4)^s (eta^12 / E6)^t prod_i (Jn - x_i)^(-2),

with Jn = J/1728.  The factors eta^8/E4 and eta^12/E6 have weight 0, so f has
weight 2 for every (s, t); near the cusp f ~ q^r with r = (4 + 8s + 12t)/24 + 2k.

Local derivatives come from Cauchy sampling; ``Jet`` helpers turn one set of
Taylor coefficients of f into jets of h, y1, y2 and their Schwarzians.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from mpmath import mp, mpc, mpf

from .electro import AnsatzParams, SystemSolution
from .errors import (
    InvalidArgument,
    InvalidPoint,
    InversionFailure,
    LiftFailure,
    PathFailure,
    PoleOnContour,
)
from .orthopoly import WeightParams, gauss_quadrature
from .qmod import (
    DEFAULT_CONFIG,
    EvalConfig,
    HalfPlanePoint,
    _horner,
    _mp_coeffs,
    as_mpc,
    eisenstein_series,
    eta_power_series,
    images,
    invert_j,
    rho,
    taylor_coefficients,
)

# ---------------------------------------------------------------------------
# truncated Taylor series ("jets") about a point
# ---------------------------------------------------------------------------


def jet_mul(a, b):
    n = min(len(a), len(b))
    return [mp.fsum(a[i] * b[m - i] for i in range(m + 1)) for m in range(n)]


def jet_pow(a, alpha):
    """a**alpha for a jet with a[0] != 0 (principal branch at the constant term)."""
    out = [a[0] ** alpha]
    for n in range(1, len(a)):
        s = mp.fsum(((alpha + 1) * k - n) * a[k] * out[n - k] for k in range(1, n + 1))
        out.append(s / (n * a[0]))
    return out


def jet_integrate(a, constant):
    return [constant] + [a[n] / (n + 1) for n in range(len(a) - 1)]


def jet_mobius(a, m):
    """(p a + q) / (r a + s) for m = (p, q, r, s)."""
    p, q, r, s = m
    num = [p * a[0] + q] + [p * v for v in a[1:]]
    den = [r * a[0] + s] + [r * v for v in a[1:]]
    return jet_mul(num, jet_pow(den, -1))


def jet_schwarzian(a):
    """{F, z} at the expansion point from F = a0 + a1 u + a2 u^2 + a3 u^3 + ..."""
    return 6 * a[3] / a[1] - 6 * (a[2] / a[1]) ** 2


# ---------------------------------------------------------------------------
# the ansatz
# ---------------------------------------------------------------------------


class AnsatzEvaluator:
    """Pointwise f(z) for given exponents (s, t) and J-values x_1..x_k.

    ``poles`` lists the known double poles (w_i, and rho / i when the E4 / E6
    exponents are 2) together with nearby SL2(Z)-images.
    """

    def __init__(self, params: AnsatzParams, x_values: Sequence, w_points: Sequence,
                 cfg: EvalConfig = DEFAULT_CONFIG, scale=1):
        self.params = params
        self.cfg = cfg
        with cfg.workprec():
            self.x_values = tuple(mpf(x) if not isinstance(x, Fraction) else mpf(x.numerator) / x.denominator
                                  for x in x_values)
            self.w_points = tuple(HalfPlanePoint.of(w) for w in w_points)
            self.scale = mpc(scale)
            centers = [w.z for w in self.w_points]
            if params.exponent_e4:
                centers.append(rho(cfg))
            if params.exponent_e6:
                centers.append(mpc(0, 1))
            self.pole_centers = tuple(centers)
            poles = []
            for c in centers:
                poles.extend(p for p in images(c, 3, cfg) if p.imag > mpf("0.2"))
            self.poles = tuple(poles)
        N = cfg.truncation_order
        self._e4 = eisenstein_series(4, N)
        self._e6 = eisenstein_series(6, N)
        self.eta_power = 4 + 8 * params.exponent_e4 + 12 * params.exponent_e6
        self._eta = eta_power_series(self.eta_power, N)

    @property
    def r(self) -> Fraction:
        return self.params.r

    def with_scale(self, scale) -> "AnsatzEvaluator":
        return AnsatzEvaluator(self.params, self.x_values, self.w_points, self.cfg, scale)

    def __call__(self, z) -> mpc:
        cfg = self.cfg
        with cfg.workprec():
            z = as_mpc(z)
            twopiiz = 2j * mp.pi * z
            q = mp.exp(twopiiz)
            bits = cfg.precision_bits
            e4 = _horner(_mp_coeffs(self._e4, bits), q)
            e6 = _horner(_mp_coeffs(self._e6, bits), q)
            val = self.scale * mp.exp(twopiiz * self.eta_power / 24) * _horner(_mp_coeffs(self._eta, bits), q)
            if self.params.exponent_e4:
                val /= e4 ** self.params.exponent_e4
            if self.params.exponent_e6:
                val /= e6 ** self.params.exponent_e6
            if self.x_values:
                e43 = e4 ** 3
                jn = e43 / (e43 - e6 ** 2)
                for x in self.x_values:
                    val /= (jn - x) ** 2
            return val

    def distance_to_poles(self, z, exclude=None) -> mpf:
        z = as_mpc(z)
        d = [abs(z - p) for p in self.poles if exclude is None or abs(p - exclude) > mpf(10) ** -20]
        return min(d) if d else mp.inf


def build_ansatz(p: AnsatzParams, sol: SystemSolution | None = None,
                 cfg: EvalConfig = DEFAULT_CONFIG, x_values: Sequence | None = None) -> AnsatzEvaluator:
    """Lift the system roots to the half-plane and assemble f.

    ``x_values`` bypasses the certified solution (used for perturbation
    controls); otherwise ``sol`` must be certified and match ``p.k``.
    """
    if x_values is None:
        if p.k == 0:
            x_values = ()
        else:
            if sol is None or not sol.certified:
                raise InvalidArgument("build_ansatz needs a certified system solution")
            if len(sol.roots) != p.k:
                raise InvalidArgument("solution size does not match k")
            x_values = sol.roots
    with cfg.workprec():
        ws = []
        for x in x_values:
            try:
                w = invert_j(x, cfg)
            except InversionFailure as exc:
                raise LiftFailure(f"could not lift x = {x} to the half-plane") from exc
            for e in (mpc(0, 1), rho(cfg), rho(cfg) + 1):
                if abs(w.z - e) < mpf(10) ** -6:
                    raise LiftFailure(f"lifted point {w.z} is elliptic")
            ws.append(w)
        for i in range(len(ws)):
            for j in range(i):
                if abs(ws[i].z - ws[j].z) < mpf(10) ** -10:
                    raise LiftFailure("lifted points are not pairwise distinct")
    return AnsatzEvaluator(p, x_values, ws, cfg)


def principal_part(f: AnsatzEvaluator, i: int, radius=None, cfg: EvalConfig | None = None):
    """(c_{-2}, c_{-1}) of the Laurent expansion of f about its i-th pole.

    Poles are ordered as in ``f.pole_centers``: the lifted w_i first, then rho
    and i when the E4 / E6 exponents are 2.  Both coefficients come from one
    trapezoidal contour; the half-sample estimate guards convergence.
    """
    cfg = cfg or f.cfg
    with cfg.workprec():
        center = f.pole_centers[i]
        others = f.distance_to_poles(center, exclude=center)
        if radius is None:
            radius = min(mpf(cfg.contour_radius), others * mpf("0.4"))
        r = mpf(radius)
        if not center.imag - r > 0:
            raise PoleOnContour("contour leaves the upper half-plane")
        if others <= r * mpf("1.05"):
            raise PoleOnContour(
                f"another pole lies at distance {mp.nstr(others, 5)} <= contour radius {mp.nstr(r, 5)}"
            )
        M = cfg.contour_points
        roots = [mp.expjpi(mpf(2 * j) / M) for j in range(M)]
        terms = [f(center + r * w) * r * w for w in roots]
        out = []
        for power in (1, 0):
            t = [v * (r * w) ** power for v, w in zip(terms, roots)]
            full = mp.fsum(t) / M
            half = mp.fsum(t[::2]) / (M // 2)
            scale = max(abs(v) for v in t)
            if abs(full - half) > mpf(cfg.tol("contour_convergence", 1e-20)) * scale:
                raise PoleOnContour("residue quadrature did not converge")
            out.append(full)
        return tuple(out)


def residue_at(f: AnsatzEvaluator, i: int, radius=None, cfg: EvalConfig | None = None) -> mpc:
    """(1/2 pi i) * contour integral of f around the i-th pole."""
    return principal_part(f, i, radius, cfg)[1]


def relative_residue(f: AnsatzEvaluator, i: int, radius=None, cfg: EvalConfig | None = None) -> mpc:
    """c_{-1}/c_{-2}: the residue measured against the double-pole strength.

    Unlike the bare residue this does not change when f is multiplied by a
    constant (for instance J versus J/1728 in the product factors).
    """
    a2, a1 = principal_part(f, i, radius, cfg)
    with (cfg or f.cfg).workprec():
        return a1 / a2


def _check_point(f: AnsatzEvaluator, z, radius) -> mpc:
    z = as_mpc(z)
    d = f.distance_to_poles(z)
    if d <= 2 * mpf(radius):
        raise InvalidPoint(f"point {mp.nstr(z, 8)} is within {mp.nstr(d, 5)} of a pole of f")
    return z


def f_jet(f: AnsatzEvaluator, z, n_terms: int, cfg: EvalConfig | None = None) -> list:
    cfg = cfg or f.cfg
    with cfg.workprec():
        z = _check_point(f, z, cfg.contour_radius)
        return taylor_coefficients(f, z, n_terms, cfg.contour_radius, cfg)


def schwarzian_of_integral(f: AnsatzEvaluator, z, cfg: EvalConfig | None = None) -> mpc:
    """{h, z} for h' = f: f''/f - (3/2)(f'/f)^2."""
    cfg = cfg or f.cfg
    c = f_jet(f, z, 3, cfg)
    with cfg.workprec():
        g = c[1] / c[0]
        return 2 * c[2] / c[0] - mpf(3) / 2 * g * g


def s_coefficient(r: Fraction, cfg: EvalConfig = DEFAULT_CONFIG) -> mpf:
    """pi^2 r^2, the coefficient of E4 in the MDE."""
    with cfg.workprec():
        return mp.pi ** 2 * mpf(r.numerator) ** 2 / mpf(r.denominator) ** 2


def _e4(z, cfg):
    return _horner(_mp_coeffs(eisenstein_series(4, cfg.truncation_order), cfg.precision_bits),
                   mp.exp(2j * mp.pi * as_mpc(z)))


def schwarzian_residual(f: AnsatzEvaluator, z, cfg: EvalConfig | None = None) -> mpc:
    """{h, z} - 2 pi^2 r^2 E4(z)."""
    cfg = cfg or f.cfg
    S = schwarzian_of_integral(f, z, cfg)
    with cfg.workprec():
        return S - 2 * s_coefficient(f.r, cfg) * _e4(z, cfg)


# ---------------------------------------------------------------------------
# path integration and the MDE pair
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Piece:
    kind: str  # "line" or "arc"
    a: mpc  # line start, or arc center
    b: mpc  # line end, or (start angle, end angle) packed as mpc
    radius: mpf = mpf(0)

    def point(self, t):
        if self.kind == "line":
            return self.a + (self.b - self.a) * t
        th = self.b.real + (self.b.imag - self.b.real) * t
        return self.a + self.radius * mp.expj(th)

    def velocity(self, t):
        if self.kind == "line":
            return self.b - self.a
        dth = self.b.imag - self.b.real
        th = self.b.real + dth * t
        return 1j * self.radius * mp.expj(th) * dth

    def length(self):
        if self.kind == "line":
            return abs(self.b - self.a)
        return abs(self.b.imag - self.b.real) * self.radius


def _segment_with_detours(a: mpc, b: mpc, poles, R: mpf) -> list:
    d = b - a
    L2 = abs(d) ** 2
    hits = []
    for p in poles:
        t = ((p - a) * d.conjugate()).real / L2 if L2 else 0
        t = min(max(t, 0), 1)
        dist = abs(a + d * t - p)
        if dist < R:
            if abs(a - p) <= R or abs(b - p) <= R:
                raise PathFailure(f"path endpoint within {mp.nstr(R, 3)} of pole {mp.nstr(p, 8)}")
            # chord intersections with the detour circle
            tc = ((p - a) * d.conjugate()).real / L2
            half = mp.sqrt(R * R - dist * dist) / mp.sqrt(L2)
            hits.append((tc - half, tc + half, p))
    hits.sort(key=lambda h: h[0])
    for (_, e1, _), (s2, _, _) in zip(hits, hits[1:]):
        if s2 <= e1:
            raise PathFailure("detour circles overlap")
    pieces = []
    cur = a
    for t1, t2, p in hits:
        z1, z2 = a + d * t1, a + d * t2
        pieces.append(_Piece("line", cur, z1))
        th1, th2 = mp.arg(z1 - p), mp.arg(z2 - p)
        # keep the detour on the side away from the real axis when possible
        up = th2 - th1
        while up <= -mp.pi:
            up += 2 * mp.pi
        while up > mp.pi:
            up -= 2 * mp.pi
        mid = p + R * mp.expj(th1 + up / 2)
        if mid.imag < p.imag:
            up = up - 2 * mp.pi if up > 0 else up + 2 * mp.pi
        pieces.append(_Piece("arc", p, mpc(th1, th1 + up), R))
        cur = z2
    pieces.append(_Piece("line", cur, b))
    return pieces


class MdePair:
    """y1 = f^(-1/2) and y2 = h f^(-1/2) with h(z) = integral of f from ``base``.

    h is integrated along an up-across-down polyline with circular detours of
    radius ``detour_radius`` around the poles of f; the square-root branch of
    y1 is continued along the same path.
    """

    def __init__(self, f: AnsatzEvaluator, base=None, detour_radius=mpf("0.1"),
                 gauss_points: int = 20, max_piece: float = 0.05):
        self.f = f
        self.cfg = f.cfg
        with self.cfg.workprec():
            if base is None:
                # i unless it is (near) a pole; never one of the standard test points
                for base in (mpc(0, 1), mpc(0, "1.25"), mpc("0.1", "1.4")):
                    if f.distance_to_poles(base) > 2 * mpf(detour_radius):
                        break
            self.base = as_mpc(base)
            self.detour_radius = mpf(detour_radius)
            self.s_coeff = s_coefficient(f.r, self.cfg)
        self.gauss_points = gauss_points
        self.max_piece = mpf(max_piece)
        self._rule = gauss_quadrature(WeightParams(0, 0), gauss_points, self.cfg)
        self._jets = {}

    def path(self, z) -> list:
        z = as_mpc(z)
        top = max(self.base.imag, z.imag, mpf("1.5"))
        corners = [self.base, mpc(self.base.real, top), mpc(z.real, top), z]
        pieces = []
        for a, b in zip(corners, corners[1:]):
            if abs(b - a) > 0:
                pieces.extend(_segment_with_detours(a, b, self.f.poles, self.detour_radius))
        return pieces

    def integrate(self, z):
        """(h(z), f(z)^(-1/2)) with the branch continued from the base point."""
        cfg = self.cfg
        with cfg.workprec():
            f = self.f
            total = mpc(0)
            y = 1 / mp.sqrt(f(self.base))
            for piece in self.path(z):
                n = max(1, int(mp.ceil(piece.length() / self.max_piece)))
                for j in range(n):
                    for node, wt in zip(self._rule.nodes, self._rule.weights):
                        t = (j + node) / n
                        fv = f(piece.point(t))
                        total += wt * fv * piece.velocity(t) / n
                    # branch continuation at each sub-piece end
                    end = f(piece.point(mpf(j + 1) / n))
                    cand = 1 / mp.sqrt(end)
                    y = cand if abs(cand - y) <= abs(cand + y) else -cand
            return total, y

    def h(self, z) -> mpc:
        return self.integrate(z)[0]

    def y1(self, z) -> mpc:
        return self.integrate(z)[1]

    def y2(self, z) -> mpc:
        h, y = self.integrate(z)
        return h * y

    def jets(self, z, n_terms: int = 4):
        """Taylor jets of (f, h, y1, y2) at z."""
        key = (str(as_mpc(z)), n_terms)
        if key not in self._jets:
            self._jets[key] = self._jets_uncached(z, n_terms)
        return self._jets[key]

    def _jets_uncached(self, z, n_terms):
        cfg = self.cfg
        fj = f_jet(self.f, z, n_terms, cfg)
        h0, y0 = self.integrate(z)
        with cfg.workprec():
            y1 = jet_pow(fj, mpf(-1) / 2)
            if abs(y1[0] + y0) < abs(y1[0] - y0):
                y1 = [-v for v in y1]
            hj = jet_integrate(fj, h0)
            y2 = jet_mul(hj, y1)
            return fj, hj, y1, y2

    def residuals(self, z):
        """(|y1'' + s E4 y1| / (|y1||E4|), same for y2)."""
        _, _, y1, y2 = self.jets(z, 4)
        with self.cfg.workprec():
            e4 = _e4(z, self.cfg)
            out = []
            for y in (y1, y2):
                res = 2 * y[2] + self.s_coeff * e4 * y[0]
                out.append(abs(res) / (abs(y[0]) * abs(e4)))
            return tuple(out)

    def wronskian(self, z) -> mpc:
        _, _, y1, y2 = self.jets(z, 4)
        with self.cfg.workprec():
            return y1[0] * y2[1] - y2[0] * y1[1]

    def ratio_schwarzian(self, z) -> mpc:
        """Schwarzian of y2/y1 computed from the jets."""
        _, _, y1, y2 = self.jets(z, 4)
        with self.cfg.workprec():
            return jet_schwarzian(jet_mul(y2, jet_pow(y1, -1)))

    def mobius_schwarzian(self, z, m=(2, 1, 1, 3)) -> mpc:
        _, hj, _, _ = self.jets(z, 4)
        with self.cfg.workprec():
            return jet_schwarzian(jet_mobius(hj, m))


def mde_pair(f: AnsatzEvaluator, base=None) -> MdePair:
    return MdePair(f, base)


# ---------------------------------------------------------------------------
# transformation behaviour and classical identities
# ---------------------------------------------------------------------------


def measure_character(f: Callable, which: str, z_ref, cfg: EvalConfig = DEFAULT_CONFIG) -> mpc:
    """f(gamma z)/((cz+d)^2 f(z)) at a reference point, for gamma = S or T."""
    with cfg.workprec():
        z = as_mpc(z_ref)
        if which == "S":
            return f(-1 / z) / (z * z * f(z))
        if which == "T":
            return f(z + 1) / f(z)
        raise InvalidArgument("gamma must be 'S' or 'T'")


def transformation_defect(f: Callable, which: str, chi, z, cfg: EvalConfig = DEFAULT_CONFIG) -> mpf:
    """|f(gamma z) - chi (cz+d)^2 f(z)| / |f(gamma z)|."""
    with cfg.workprec():
        z = as_mpc(z)
        if which == "S":
            lhs, rhs = f(-1 / z), chi * z * z * f(z)
        else:
            lhs, rhs = f(z + 1), chi * f(z)
        return abs(lhs - rhs) / abs(lhs)


def hurwitz_residual(z, cfg: EvalConfig = DEFAULT_CONFIG) -> mpf:
    """|y'' + (pi^2/36) E4 y| / |y| for y = eta^(-2)."""
    eta = eta_power_series(1, cfg.truncation_order)

    def y(w):
        with cfg.workprec():
            w = as_mpc(w)
            twopiiw = 2j * mp.pi * w
            return 1 / (mp.exp(twopiiw / 24) * _horner(_mp_coeffs(eta, cfg.precision_bits), mp.exp(twopiiw))) ** 2

    c = taylor_coefficients(y, z, 3, cfg.contour_radius, cfg)
    with cfg.workprec():
        return abs(2 * c[2] + mp.pi ** 2 / 36 * _e4(z, cfg) * c[0]) / abs(c[0])


@dataclass
class IdentityCheck:
    name: str
    target: mpc
    value: mpc
    tolerance: float

    @property
    def abs_error(self):
        return abs(self.value - self.target)

    @property
    def passed(self) -> bool:
        return bool(self.abs_error < self.tolerance)


def verify_elliptic_identities(cfg: EvalConfig = DEFAULT_CONFIG, radius=mpf("0.1")) -> list:
    """The six logarithmic-derivative ratios at i and rho."""
    from .qmod import evaluator

    eta, e4, e6, jn = (evaluator(n, cfg) for n in ("eta", "e4", "e6", "jnorm"))
    with cfg.workprec():
        i_pt, r_pt = mpc(0, 1), rho(cfg)

        def derivs(g, z, n):
            c = taylor_coefficients(g, z, n + 1, radius, cfg)
            return [c[m] * mp.factorial(m) for m in range(n + 1)]

        eta_i = derivs(eta, i_pt, 1)
        e6_i = derivs(e6, i_pt, 2)
        j_i = derivs(jn, i_pt, 3)
        eta_r = derivs(eta, r_pt, 1)
        j_r = derivs(jn, r_pt, 4)
        e4_r = derivs(e4, r_pt, 2)
        target_i = mpc(0, 3)
        target_r = 12 * (1 + r_pt) / (1 - r_pt)
        return [
            IdentityCheck("12*eta'(i)/eta(i)", target_i, 12 * eta_i[1] / eta_i[0], 1e-10),
            IdentityCheck("(3/7)*E6''(i)/E6'(i)", target_i, mpf(3) / 7 * e6_i[2] / e6_i[1], 1e-10),
            IdentityCheck("J'''(i)/J''(i)", target_i, j_i[3] / j_i[2], 1e-8),
            IdentityCheck("24*eta'(rho)/eta(rho)", target_r, 24 * eta_r[1] / eta_r[0], 1e-10),
            IdentityCheck("J''''(rho)/J'''(rho)", target_r, j_r[4] / j_r[3], 1e-8),
            IdentityCheck("(6/5)*E4''(rho)/E4'(rho)", target_r, mpf(6) / 5 * e4_r[2] / e4_r[1], 1e-10),
        ]
