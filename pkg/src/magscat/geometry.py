"""Magnetic systems on planar charts.

A system is (chart domain, metric g, closed 2-form Omega, boundary) together
with an extension margin so that every evaluator is defined on a slightly
enlarged chart.  Everything here is batched: points are arrays of shape
(..., n), metrics (..., n, n), and so on, with n in {2, 3}.

Index conventions used throughout:
    dg[..., k, i, j]      = d g_ij / d x^k
    d2g[..., l, k, i, j]  = d^2 g_ij / d x^l d x^k
    Gamma[..., k, i, j]   = Christoffel symbol Gamma^k_ij
    Y[..., k, j]          = Lorentz tensor, (Y v)^k = Y^k_j v^j, defined by
                            <Y v, w>_g = Omega(v, w)
"""
from __future__ import annotations

import dataclasses
from typing import Callable, Optional

import numpy as np

from .errors import (
    BadParams,
    DegenerateBoundary,
    InversionDiverged,
    NotPositiveDefinite,
    OutsideCollar,
    UnknownSystem,
)

Array = np.ndarray

# central-difference steps for the generic adaptors (first / second partials)
H_FD1 = 1e-5
H_FD2 = 1e-4


# ---------------------------------------------------------------------------
# field containers
# ---------------------------------------------------------------------------

class MetricField:
    """Riemannian metric given by batched evaluators for g, dg, d2g."""

    def __init__(self, g: Callable, dg: Callable, d2g: Callable):
        self.g = g
        self.dg = dg
        self.d2g = d2g

    @classmethod
    def from_g_only(cls, g_fn: Callable, n: int, h1: float = H_FD1, h2: float = H_FD2):
        """Wrap a g-only evaluator with central-difference partials."""

        def dg(x):
            x = np.asarray(x, dtype=float)
            out = np.empty(x.shape[:-1] + (n, n, n))
            for k in range(n):
                e = np.zeros(n)
                e[k] = h1
                out[..., k, :, :] = (g_fn(x + e) - g_fn(x - e)) / (2 * h1)
            return out

        def d2g(x):
            x = np.asarray(x, dtype=float)
            out = np.empty(x.shape[:-1] + (n, n, n, n))
            g0 = g_fn(x)
            for l in range(n):
                el = np.zeros(n)
                el[l] = h2
                for k in range(l, n):
                    if k == l:
                        val = (g_fn(x + el) - 2 * g0 + g_fn(x - el)) / (h2 * h2)
                    else:
                        ek = np.zeros(n)
                        ek[k] = h2
                        val = (g_fn(x + el + ek) - g_fn(x + el - ek)
                               - g_fn(x - el + ek) + g_fn(x - el - ek)) / (4 * h2 * h2)
                    out[..., l, k, :, :] = val
                    out[..., k, l, :, :] = val
            return out

        return cls(g_fn, dg, d2g)


class MagneticField:
    """Closed 2-form given by batched evaluators for Omega and dOmega."""

    def __init__(self, omega: Callable, domega: Callable):
        self.omega = omega
        self.domega = domega

    @classmethod
    def zero(cls, n: int):
        def omega(x):
            x = np.asarray(x, dtype=float)
            return np.zeros(x.shape[:-1] + (n, n))

        def domega(x):
            x = np.asarray(x, dtype=float)
            return np.zeros(x.shape[:-1] + (n, n, n))

        return cls(omega, domega)


class BoundaryChart:
    """Boundary parametrization plus an implicit level function.

    point(u) maps boundary parameters (..., n-1) into the chart, b(x) > 0
    inside, b = 0 on the boundary, db(x) is the chart gradient of b.
    `period` gives the parameter range per boundary coordinate (None for a
    non-periodic coordinate).
    """

    def __init__(self, point, dpoint, b, db, param_of_point, period):
        self.point = point
        self.dpoint = dpoint
        self.b = b
        self.db = db
        self.param_of_point = param_of_point
        self.period = period


@dataclasses.dataclass(frozen=True)
class MagneticSystem:
    n: int
    metric: MetricField
    magnetic: MagneticField
    boundary: BoundaryChart
    epsilon: float
    chart_contains: Callable
    name: str = "custom"
    params: dict = dataclasses.field(default_factory=dict)


@dataclasses.dataclass(frozen=True)
class CollarCoords:
    u: Array          # boundary parameter, shape (n-1,)
    xn: float         # signed g-distance to the boundary, positive inside


# ---------------------------------------------------------------------------
# tensor algebra
# ---------------------------------------------------------------------------

def fast_inv(a: Array) -> Array:
    """Batched matrix inverse; closed form for 2x2 blocks (hot path)."""
    if a.shape[-1] == 2:
        det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
        out = np.empty_like(a)
        out[..., 0, 0] = a[..., 1, 1]
        out[..., 1, 1] = a[..., 0, 0]
        out[..., 0, 1] = -a[..., 0, 1]
        out[..., 1, 0] = -a[..., 1, 0]
        return out / det[..., None, None]
    return np.linalg.inv(a)


def inner(g: Array, v: Array, w: Array) -> Array:
    return np.einsum("...ij,...i,...j->...", g, v, w)


def norm(g: Array, v: Array) -> Array:
    return np.sqrt(inner(g, v, v))


def _check_spd(g: Array) -> None:
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"metric not positive definite: {exc}") from exc


def metric_pack(sys: MagneticSystem, x: Array, check: bool = False):
    """Return (g, g_inv, Gamma) at x.

    Gamma^k_ij = 1/2 g^{kl} (d_i g_lj + d_j g_li - d_l g_ij).
    """
    g = sys.metric.g(x)
    if check:
        _check_spd(g)
    ginv = np.linalg.inv(g)
    dg = sys.metric.dg(x)
    lowered = (np.einsum("...ilj->...lij", dg)
               + np.einsum("...jli->...lij", dg)
               - dg) / 2.0
    Gamma = np.einsum("...kl,...lij->...kij", ginv, lowered)
    return g, ginv, Gamma


def christoffel_partials(sys: MagneticSystem, x: Array):
    """Gamma and its coordinate partials dGamma[..., m, k, i, j] = d_m Gamma^k_ij."""
    g = sys.metric.g(x)
    ginv = np.linalg.inv(g)
    dg = sys.metric.dg(x)
    d2g = sys.metric.d2g(x)
    lowered = (np.einsum("...ilj->...lij", dg)
               + np.einsum("...jli->...lij", dg)
               - dg) / 2.0
    Gamma = np.einsum("...kl,...lij->...kij", ginv, lowered)
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", ginv, dg, ginv)
    dlowered = (np.einsum("...milj->...mlij", d2g)
                + np.einsum("...mjli->...mlij", d2g)
                - d2g) / 2.0
    dGamma = (np.einsum("...mkl,...lij->...mkij", dginv, lowered)
              + np.einsum("...kl,...mlij->...mkij", ginv, dlowered))
    return Gamma, dGamma


def lorentz_Y(sys: MagneticSystem, x: Array) -> Array:
    """Lorentz force tensor: <Y v, w>_g = Omega(v, w), i.e. Y^k_j = g^{kl} Omega_jl."""
    ginv = np.linalg.inv(sys.metric.g(x))
    omega = sys.magnetic.omega(x)
    return np.einsum("...kl,...jl->...kj", ginv, omega)


def lorentz_Y_partials(sys: MagneticSystem, x: Array):
    """Y and its coordinate partials dY[..., m, k, j] = d_m Y^k_j."""
    g = sys.metric.g(x)
    ginv = np.linalg.inv(g)
    dg = sys.metric.dg(x)
    omega = sys.magnetic.omega(x)
    domega = sys.magnetic.domega(x)
    Y = np.einsum("...kl,...jl->...kj", ginv, omega)
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", ginv, dg, ginv)
    dY = (np.einsum("...mkl,...jl->...mkj", dginv, omega)
          + np.einsum("...kl,...mjl->...mkj", ginv, domega))
    return Y, dY


def nabla_Y(sys: MagneticSystem, x: Array):
    """Covariant derivative of Y: nY[..., m, k, j] = (nabla_m Y)^k_j."""
    Y, dY = lorentz_Y_partials(sys, x)
    _, _, Gamma = metric_pack(sys, x)
    nY = (dY
          + np.einsum("...kma,...aj->...mkj", np.einsum("...kam->...kma", Gamma), Y)
          - np.einsum("...amj,...ka->...mkj", Gamma, Y))
    return Y, nY


def riemann(sys: MagneticSystem, x: Array) -> Array:
    """Riemann tensor R[..., l, k, i, j] with R(e_i, e_j) e_k = R^l_kij e_l,
    convention R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
    """
    Gamma, dGamma = christoffel_partials(sys, x)
    R = (np.einsum("...iljk->...lkij", dGamma)
         - np.einsum("...jlik->...lkij", dGamma)
         + np.einsum("...lim,...mjk->...lkij", Gamma, Gamma)
         - np.einsum("...ljm,...mik->...lkij", Gamma, Gamma))
    return R


def jacobi_curvature_term(sys: MagneticSystem, x: Array, gamma_dot: Array, Z: Array) -> Array:
    """The tidal operator of the Jacobi equation applied to Z.

    Evaluates R(Z, gamma') gamma' in the convention above; on the unit sphere
    this equals +Z for Z orthogonal to gamma'.
    """
    R = riemann(sys, x)
    return np.einsum("...lkij,...i,...j,...k->...l", R, Z, gamma_dot, gamma_dot)


# ---------------------------------------------------------------------------
# boundary geometry
# ---------------------------------------------------------------------------

def inward_normal(sys: MagneticSystem, x: Array) -> Array:
    """g-unit inward normal from the implicit function (valid near the boundary)."""
    db = sys.boundary.db(x)
    ginv = np.linalg.inv(sys.metric.g(x))
    grad = np.einsum("...ij,...j->...i", ginv, db)
    nrm = np.sqrt(np.einsum("...i,...i->...", db, grad))
    return grad / nrm[..., None]


@dataclasses.dataclass
class BoundaryFrame:
    u: Array
    x: Array
    nu: Array
    tangents: Array      # shape (n, n-1), columns are d x / d u^a
    iota_g: Array        # (n-1, n-1) first fundamental form in the u chart

    def unit_tangent(self, a: int = 0) -> Array:
        t = self.tangents[:, a]
        return t / np.sqrt(self.iota_g[a, a])


_HU = 1e-6  # step for u-derivatives of the normal field


def boundary_frame(sys: MagneticSystem, u) -> BoundaryFrame:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x = sys.boundary.point(u)
    T = sys.boundary.dpoint(u)
    g = sys.metric.g(x)
    iota = np.einsum("ia,ij,jb->ab", T, g, T)
    if np.linalg.matrix_rank(iota, tol=1e-10) < sys.n - 1:
        raise DegenerateBoundary(f"tangent basis rank deficient at u={u}")
    nu = inward_normal(sys, x)
    return BoundaryFrame(u=u, x=x, nu=nu, tangents=T, iota_g=iota)


def second_fundamental_form(sys: MagneticSystem, u, v: Array) -> float:
    """II(v, v) = -<nabla_v nu, v>_g for a tangent vector v at x(u).

    Positive for the boundary circle of a flat disk with the inward normal.
    """
    fr = boundary_frame(sys, u)
    m = sys.n - 1
    # coefficients of v in the tangent basis
    c = np.linalg.lstsq(fr.tangents, np.asarray(v, dtype=float), rcond=None)[0]
    _, _, Gamma = metric_pack(sys, fr.x)
    nabla_v_nu = np.einsum("kij,i,j->k", Gamma, np.asarray(v, float), fr.nu)
    for a in range(m):
        e = np.zeros(m)
        e[a] = _HU
        nu_p = inward_normal(sys, sys.boundary.point(fr.u + e))
        nu_m = inward_normal(sys, sys.boundary.point(fr.u - e))
        nabla_v_nu = nabla_v_nu + c[a] * (nu_p - nu_m) / (2 * _HU)
    g = sys.metric.g(fr.x)
    return float(-inner(g, nabla_v_nu, np.asarray(v, float)))


def convexity_indicator(sys: MagneticSystem, u, v: Array) -> float:
    """lambda(u, v) = II(v, v) - <Y v, nu>_g for a unit tangent v.

    Strict magnetic convexity of the boundary in direction v means lambda > 0.
    """
    fr = boundary_frame(sys, u)
    g = sys.metric.g(fr.x)
    Y = lorentz_Y(sys, fr.x)
    Yv = Y @ np.asarray(v, dtype=float)
    return second_fundamental_form(sys, u, v) - float(inner(g, Yv, fr.nu))


# ---------------------------------------------------------------------------
# collar (boundary normal) coordinates
# ---------------------------------------------------------------------------

def _geodesic_rhs(sys: MagneticSystem, y: Array) -> Array:
    n = sys.n
    x, v = y[..., :n], y[..., n:]
    _, _, Gamma = metric_pack(sys, x)
    acc = -np.einsum("...kij,...i,...j->...k", Gamma, v, v)
    return np.concatenate([v, acc], axis=-1)


def _rk4_fixed(rhs, y0: Array, t: float, h: float) -> Array:
    """Integrate y' = rhs(y) from 0 to t (t may be negative) with fixed steps."""
    if t == 0.0:
        return y0.copy()
    nsteps = max(1, int(np.ceil(abs(t) / h)))
    step = t / nsteps
    y = y0.astype(float).copy()
    for _ in range(nsteps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * step * k1)
        k3 = rhs(y + 0.5 * step * k2)
        k4 = rhs(y + step * k3)
        y = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


H_COLLAR = 1e-3


def collar_map(sys: MagneticSystem, u, xn: float, with_velocity: bool = False):
    """Follow the unit-speed (non-magnetic) g-geodesic from x(u) along the
    inward normal for signed time xn."""
    if abs(xn) >= sys.epsilon and xn < 0:
        raise OutsideCollar(f"xn={xn} outside (-eps, eps) with eps={sys.epsilon}")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x0 = sys.boundary.point(u)
    nu = inward_normal(sys, x0)
    y = _rk4_fixed(lambda s: _geodesic_rhs(sys, s), np.concatenate([x0, nu]), xn, H_COLLAR)
    if with_velocity:
        return y[: sys.n], y[sys.n:]
    return y[: sys.n]


def collar_inverse(sys: MagneticSystem, x: Array, n_starts: int = 64) -> CollarCoords:
    """Invert the collar map by damped Newton, multistarted from the nearest
    boundary sample."""
    x = np.asarray(x, dtype=float)
    m = sys.n - 1
    if m != 1:
        raise NotImplementedError("collar inversion implemented for n = 2 charts")
    period = sys.boundary.period[0]
    us = np.linspace(0.0, period, n_starts, endpoint=False)
    pts = sys.boundary.point(us[:, None])
    k = int(np.argmin(np.sum((pts - x) ** 2, axis=-1)))
    u = float(us[k])
    xn = float(sys.boundary.b(x))

    def res(u_, xn_):
        return collar_map(sys, [u_], xn_) - x

    r = res(u, xn)
    for _ in range(60):
        if np.max(np.abs(r)) < 1e-11:
            break
        hu, hn = 1e-6, 1e-6
        J = np.empty((sys.n, 2))
        J[:, 0] = (res(u + hu, xn) - res(u - hu, xn)) / (2 * hu)
        J[:, 1] = (res(u, xn + hn) - res(u, xn - hn)) / (2 * hn)
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise InversionDiverged(str(exc)) from exc
        lam = 1.0
        for _ in range(30):
            r_new = res(u - lam * step[0], xn - lam * step[1])
            if np.max(np.abs(r_new)) < np.max(np.abs(r)):
                break
            lam *= 0.5
        u, xn = u - lam * step[0], xn - lam * step[1]
        r = r_new
    else:
        raise InversionDiverged(f"collar Newton stalled at |r|={np.max(np.abs(r)):.2e}")
    return CollarCoords(u=np.array([u % period]), xn=float(xn))


def collar_metric(sys: MagneticSystem, u, xn: float) -> Array:
    """Metric components in collar coordinates (u, xn) at the given point.

    The xn column of the Jacobian is the exact geodesic velocity; the u
    columns come from central differences of the collar map.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    m = sys.n - 1
    x, vel = collar_map(sys, u, xn, with_velocity=True)
    J = np.empty((sys.n, sys.n))
    for a in range(m):
        e = np.zeros(m)
        e[a] = _HU
        J[:, a] = (collar_map(sys, u + e, xn) - collar_map(sys, u - e, xn)) / (2 * _HU)
    J[:, m] = vel
    g = sys.metric.g(x)
    return J.T @ g @ J


# ---------------------------------------------------------------------------
# built-in systems
# ---------------------------------------------------------------------------

def _circle_boundary(R_chart: float, length: float) -> BoundaryChart:
    """Circle of chart radius R_chart, parametrized by u in [0, length)."""
    rate = 2 * np.pi / length

    def point(u):
        u = np.asarray(u, dtype=float)
        ang = u[..., 0] * rate
        return np.stack([R_chart * np.cos(ang), R_chart * np.sin(ang)], axis=-1)

    def dpoint(u):
        u = np.asarray(u, dtype=float)
        ang = u[..., 0] * rate
        d = np.stack([-R_chart * rate * np.sin(ang), R_chart * rate * np.cos(ang)], axis=-1)
        return d[..., :, None]

    def param_of_point(x):
        x = np.asarray(x, dtype=float)
        ang = np.arctan2(x[..., 1], x[..., 0]) % (2 * np.pi)
        return (ang / rate)[..., None]

    return point, dpoint, param_of_point


def _euclidean_disk(R: float, B: float, epsilon: Optional[float]) -> MagneticSystem:
    if R <= 0:
        raise BadParams(f"disk radius must be positive, got {R}")
    n = 2
    eps = 0.2 * R if epsilon is None else epsilon

    def g(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        return out

    def dg(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (2, 2, 2))

    def d2g(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (2, 2, 2, 2))

    def omega(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 1] = B
        out[..., 1, 0] = -B
        return out

    def domega(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (2, 2, 2))

    point, dpoint, param_of_point = _circle_boundary(R, 2 * np.pi * R)

    def b(x):
        x = np.asarray(x, dtype=float)
        return R - np.sqrt(np.sum(x * x, axis=-1))

    def db(x):
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x * x, axis=-1))
        return -x / r[..., None]

    chart_R = R + eps

    def contains(x):
        x = np.asarray(x, dtype=float)
        return np.sum(x * x, axis=-1) < chart_R * chart_R

    return MagneticSystem(
        n=n,
        metric=MetricField(g, dg, d2g),
        magnetic=MagneticField(omega, domega),
        boundary=BoundaryChart(point, dpoint, b, db, param_of_point, (2 * np.pi * R,)),
        epsilon=eps,
        chart_contains=contains,
        name="euclidean_disk",
        params={"R": R, "B": B},
    )


def _spherical_cap(phi0: float, B: float, epsilon: Optional[float]) -> MagneticSystem:
    """Geodesic cap of colatitude phi0 on the unit round sphere, in the
    stereographic chart from the antipode.  The conformal factor is
    c(x) = 2 / (1 + |x|^2); b(x) = phi0 - 2 atan|x| is the exact distance
    to the boundary circle."""
    if not (0.0 < phi0 < np.pi):
        raise BadParams(f"cap colatitude must lie in (0, pi), got {phi0}")
    eps = min(0.2 * phi0, 0.45 * (np.pi - phi0)) if epsilon is None else epsilon
    if phi0 + eps >= np.pi:
        raise BadParams("cap plus collar reaches the chart antipode")

    def conf(x):
        w = np.sum(x * x, axis=-1)
        return 2.0 / (1.0 + w)

    def g(x):
        x = np.asarray(x, dtype=float)
        c = conf(x)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = c * c
        out[..., 1, 1] = c * c
        return out

    def dg(x):
        x = np.asarray(x, dtype=float)
        c = conf(x)
        coef = -2.0 * c**3  # d_k (c^2) = -2 c^3 x_k
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        for k in range(2):
            out[..., k, 0, 0] = coef * x[..., k]
            out[..., k, 1, 1] = coef * x[..., k]
        return out

    def d2g(x):
        x = np.asarray(x, dtype=float)
        c = conf(x)
        out = np.zeros(x.shape[:-1] + (2, 2, 2, 2))
        for l in range(2):
            for k in range(2):
                val = 6.0 * c**4 * x[..., l] * x[..., k]
                if l == k:
                    val = val - 2.0 * c**3
                out[..., l, k, 0, 0] = val
                out[..., l, k, 1, 1] = val
        return out

    def omega(x):
        x = np.asarray(x, dtype=float)
        c2 = conf(x) ** 2
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 1] = B * c2
        out[..., 1, 0] = -B * c2
        return out

    def domega(x):
        x = np.asarray(x, dtype=float)
        c = conf(x)
        coef = -2.0 * B * c**3
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        for k in range(2):
            out[..., k, 0, 1] = coef * x[..., k]
            out[..., k, 1, 0] = -coef * x[..., k]
        return out

    r0 = np.tan(phi0 / 2.0)
    length = 2 * np.pi * np.sin(phi0)
    point, dpoint, param_of_point = _circle_boundary(r0, length)

    def b(x):
        x = np.asarray(x, dtype=float)
        return phi0 - 2.0 * np.arctan(np.sqrt(np.sum(x * x, axis=-1)))

    def db(x):
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x * x, axis=-1))
        w = r * r
        return (-2.0 / ((1.0 + w) * r))[..., None] * x

    r_chart = np.tan((phi0 + eps) / 2.0)

    def contains(x):
        x = np.asarray(x, dtype=float)
        return np.sum(x * x, axis=-1) < r_chart * r_chart

    return MagneticSystem(
        n=2,
        metric=MetricField(g, dg, d2g),
        magnetic=MagneticField(omega, domega),
        boundary=BoundaryChart(point, dpoint, b, db, param_of_point, (length,)),
        epsilon=eps,
        chart_contains=contains,
        name="spherical_cap",
        params={"phi0": phi0, "B": B},
    )


def _bump_profile(q: Array):
    """eta(q) = exp(1 - 1/(1-q)) for q < 1, 0 otherwise; returns eta, eta', eta''."""
    q = np.asarray(q, dtype=float)
    inside = q < 1.0
    qs = np.where(inside, q, 0.0)
    one_m = 1.0 - qs
    eta = np.where(inside, np.exp(1.0 - 1.0 / one_m), 0.0)
    d1 = np.where(inside, -eta / one_m**2, 0.0)
    d2 = np.where(inside, eta * (1.0 / one_m**4 - 2.0 / one_m**3), 0.0)
    return eta, d1, d2


def _perturbed_disk(R: float, B: float, center, radius: float, amplitude: float,
                    epsilon: Optional[float]) -> MagneticSystem:
    """Flat disk with a compactly supported conformal bump: g = exp(2 psi) delta,
    psi = amplitude * eta(|x - center|^2 / radius^2)."""
    if R <= 0 or radius <= 0:
        raise BadParams("perturbed_disk needs R > 0 and bump radius > 0")
    base = _euclidean_disk(R, B, epsilon)
    c0 = np.asarray(center, dtype=float)
    r2 = radius * radius

    def psi_jets(x):
        x = np.asarray(x, dtype=float)
        dx = x - c0
        q = np.sum(dx * dx, axis=-1) / r2
        eta, e1, e2 = _bump_profile(q)
        psi = amplitude * eta
        dq = 2.0 * dx / r2
        dpsi = amplitude * e1[..., None] * dq
        # d_j d_i psi = A (eta'' dq_i dq_j + eta' * 2 delta_ij / r2)
        d2psi = (amplitude * e2[..., None, None] * dq[..., :, None] * dq[..., None, :]
                 + (amplitude * 2.0 / r2) * e1[..., None, None] * np.eye(2))
        return psi, dpsi, d2psi

    def g(x):
        psi, _, _ = psi_jets(x)
        f = np.exp(2.0 * psi)
        out = np.zeros(np.shape(psi) + (2, 2))
        out[..., 0, 0] = f
        out[..., 1, 1] = f
        return out

    def dg(x):
        psi, dpsi, _ = psi_jets(x)
        f = np.exp(2.0 * psi)
        out = np.zeros(np.shape(psi) + (2, 2, 2))
        for k in range(2):
            v = 2.0 * dpsi[..., k] * f
            out[..., k, 0, 0] = v
            out[..., k, 1, 1] = v
        return out

    def d2g(x):
        psi, dpsi, d2psi = psi_jets(x)
        f = np.exp(2.0 * psi)
        out = np.zeros(np.shape(psi) + (2, 2, 2, 2))
        for l in range(2):
            for k in range(2):
                v = (2.0 * d2psi[..., l, k] + 4.0 * dpsi[..., k] * dpsi[..., l]) * f
                out[..., l, k, 0, 0] = v
                out[..., l, k, 1, 1] = v
        return out

    return MagneticSystem(
        n=2,
        metric=MetricField(g, dg, d2g),
        magnetic=base.magnetic,
        boundary=base.boundary,
        epsilon=base.epsilon,
        chart_contains=base.chart_contains,
        name="perturbed_disk",
        params={"R": R, "B": B, "bump_center": tuple(np.atleast_1d(center)),
                "bump_radius": radius, "bump_amplitude": amplitude},
    )


def builtin_system(name: str, **params) -> MagneticSystem:
    """Factory for the closed-form test systems."""
    epsilon = params.pop("epsilon", None)
    if name == "euclidean_disk":
        return _euclidean_disk(params.pop("R", 1.0), params.pop("B", 0.0), epsilon)
    if name == "spherical_cap":
        return _spherical_cap(params.pop("phi0", np.pi / 2), params.pop("B", 0.0), epsilon)
    if name == "perturbed_disk":
        return _perturbed_disk(
            params.pop("R", 1.0),
            params.pop("B", 0.0),
            params.pop("bump_center", (0.0, 0.0)),
            params.pop("bump_radius", 0.4),
            params.pop("bump_amplitude", 0.05),
            epsilon,
        )
    raise UnknownSystem(f"unknown builtin system {name!r}")
