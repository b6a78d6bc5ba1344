"""Geometry of conformal metrics g = lambda(x,y)^2 (dx^2 + dy^2).

Everything is driven by symbolic expressions (module ``expr``): the metric
factor and the field components are ASTs, so partial derivatives used in the
Killing residual, in curvature and in the geodesic equation are exact.
Time integration (flows, geodesics) uses scipy's RK45.

The independent check ``lie_derivative_fd`` never touches symbolic
derivatives: it measures d/dt of the pulled-back metric through the actual
flow with finite differences only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import dblquad, solve_ivp

from . import expr as ex
from .surfaces import CanonicalSurface


@dataclass(frozen=True)
class ODEOptions:
    rtol: float = 1e-9
    atol: float = 1e-9
    max_step: float = np.inf
    method: str = "RK45"


DEFAULT_ODE = ODEOptions()


class NotUnitSpeed(ValueError):
    """Geodesics must start with a g-unit velocity."""


class RegionLeavesSurface(ValueError):
    """Area integration needs the whole region inside the surface."""


def _as_expr(e):
    return ex.parse(e) if isinstance(e, str) else e


class ConformalMetric:
    """Metric lambda^2 (dx^2 + dy^2) on a canonical surface.

    Immutable after construction; all derived expressions are cached.
    """

    def __init__(self, surface: CanonicalSurface, lam):
        self.surface = surface
        self.lam = _as_expr(lam)

    def __repr__(self):
        return f"ConformalMetric({self.surface.kind}, {ex.to_source(self.lam)!r})"

    @cached_property
    def lam2(self):
        return ex.mul(self.lam, self.lam)

    @cached_property
    def lam2_grad(self):
        return ex.diff(self.lam2, "x"), ex.diff(self.lam2, "y")

    @cached_property
    def log_lam(self):
        return ex.un("log", self.lam)

    @cached_property
    def log_lam_grad(self):
        return ex.diff(self.log_lam, "x"), ex.diff(self.log_lam, "y")

    @cached_property
    def curvature_expr(self):
        # K = -(laplacian of log lambda) / lambda^2
        px, py = self.log_lam_grad
        lap = ex.add(ex.diff(px, "x"), ex.diff(py, "y"))
        return ex.neg(ex.div(lap, self.lam2))

    def lam_at(self, z):
        z = np.asarray(z, dtype=complex)
        return ex.evaluate(self.lam, z.real, z.imag)

    def lam2_at(self, z):
        z = np.asarray(z, dtype=complex)
        return ex.evaluate(self.lam2, z.real, z.imag)

    def tensor_at(self, z) -> np.ndarray:
        return float(self.lam2_at(complex(z))) * np.eye(2)

    def norm(self, z, vec: complex) -> float:
        """g-length of a tangent vector at z."""
        return float(self.lam_at(complex(z))) * abs(vec)

    def inner(self, z, a: complex, b: complex) -> float:
        return float(self.lam2_at(complex(z))) * (a.real * b.real + a.imag * b.imag)


class VectorField:
    """Field X = u(x,y) d/dx + v(x,y) d/dy, componentwise symbolic."""

    def __init__(self, u, v, tag: str = "custom"):
        self.u = _as_expr(u)
        self.v = _as_expr(v)
        self.tag = tag

    @staticmethod
    def rotational() -> "VectorField":
        """z -> iz, the rigid rotation field (-y, x)."""
        return VectorField("-y", "x", tag="rotational")

    @staticmethod
    def translational() -> "VectorField":
        """z -> i, the vertical translation field (0, 1)."""
        return VectorField("0", "1", tag="translational")

    def __repr__(self):
        return f"VectorField({ex.to_source(self.u)!r}, {ex.to_source(self.v)!r})"

    @cached_property
    def jac_exprs(self):
        return (ex.diff(self.u, "x"), ex.diff(self.u, "y"),
                ex.diff(self.v, "x"), ex.diff(self.v, "y"))

    def at(self, z):
        """Complex value u + iv, vectorized over complex arrays."""
        z = np.asarray(z, dtype=complex)
        u = ex.evaluate(self.u, z.real, z.imag)
        v = ex.evaluate(self.v, z.real, z.imag)
        out = np.asarray(u, dtype=float) + 1j * np.asarray(v, dtype=float)
        return complex(out) if out.ndim == 0 else out

    def jacobian_at(self, z) -> np.ndarray:
        x, y = complex(z).real, complex(z).imag
        ux, uy, vx, vy = (ex.evaluate(d, x, y) for d in self.jac_exprs)
        return np.array([[ux, uy], [vx, vy]], dtype=float)


# -- Killing residual ---------------------------------------------------------

def killing_residual(g: ConformalMetric, X: VectorField, p) -> np.ndarray:
    """Symmetric 2x2 residual of the Killing equation at p.

    For g = lambda^2 delta the Lie derivative L_X g has entries
        (L_X g)_11 = X(lambda^2) + 2 lambda^2 u_x
        (L_X g)_22 = X(lambda^2) + 2 lambda^2 v_y
        (L_X g)_12 = lambda^2 (u_y + v_x)
    and X is Killing iff all three vanish.
    """
    x, y = complex(p).real, complex(p).imag
    L2 = ex.evaluate(g.lam2, x, y)
    gx, gy = (ex.evaluate(d, x, y) for d in g.lam2_grad)
    u = ex.evaluate(X.u, x, y)
    v = ex.evaluate(X.v, x, y)
    ux, uy, vx, vy = (ex.evaluate(d, x, y) for d in X.jac_exprs)
    xl2 = u * gx + v * gy
    r11 = xl2 + 2 * L2 * ux
    r22 = xl2 + 2 * L2 * vy
    r12 = L2 * (uy + vx)
    return np.array([[r11, r12], [r12, r22]], dtype=float)


def killing_residual_max(g: ConformalMetric, X: VectorField, zs) -> float:
    """Max absolute residual entry over an array of complex sample points."""
    zs = np.asarray(zs, dtype=complex)
    x, y = zs.real, zs.imag
    L2 = ex.evaluate(g.lam2, x, y) * np.ones_like(x)
    gx = ex.evaluate(g.lam2_grad[0], x, y) * np.ones_like(x)
    gy = ex.evaluate(g.lam2_grad[1], x, y) * np.ones_like(x)
    u = ex.evaluate(X.u, x, y) * np.ones_like(x)
    v = ex.evaluate(X.v, x, y) * np.ones_like(x)
    ux, uy, vx, vy = (ex.evaluate(d, x, y) * np.ones_like(x) for d in X.jac_exprs)
    xl2 = u * gx + v * gy
    worst = np.maximum(np.abs(xl2 + 2 * L2 * ux), np.abs(xl2 + 2 * L2 * vy))
    worst = np.maximum(worst, np.abs(L2 * (uy + vx)))
    return float(np.max(worst))


# -- flows ---------------------------------------------------------------------

def flow_path(X: VectorField, z0: complex, t_end: float,
              ode: ODEOptions = DEFAULT_ODE):
    """Integrate z' = X(z) from z0 over [0, t_end] (t_end may be negative).

    Returns the scipy solution object with dense output; positions are
    recovered with ``sol.sol(t)`` as (x, y) pairs.
    """
    z0 = complex(z0)

    def rhs(t, s):
        u = ex.evaluate(X.u, s[0], s[1])
        v = ex.evaluate(X.v, s[0], s[1])
        return (u, v)

    sol = solve_ivp(rhs, (0.0, t_end), (z0.real, z0.imag), method=ode.method,
                    rtol=ode.rtol, atol=ode.atol, max_step=ode.max_step,
                    dense_output=True)
    return sol


def flow_to(X: VectorField, z0: complex, t: float,
            ode: ODEOptions = DEFAULT_ODE) -> complex:
    """Endpoint of the flow of X from z0 at time t."""
    if t == 0:
        return complex(z0)
    sol = flow_path(X, z0, t, ode)
    if not sol.success:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    return complex(sol.y[0, -1], sol.y[1, -1])


def flow_points(X: VectorField, zs, t: float,
                ode: ODEOptions = DEFAULT_ODE) -> np.ndarray:
    """Flow many seeds at once (one stacked ODE system)."""
    zs = np.asarray(zs, dtype=complex).ravel()
    if t == 0:
        return zs.copy()
    n = zs.size

    def rhs(_, s):
        x, y = s[:n], s[n:]
        u = ex.evaluate(X.u, x, y) * np.ones_like(x)
        v = ex.evaluate(X.v, x, y) * np.ones_like(x)
        return np.concatenate([u, v])

    s0 = np.concatenate([zs.real, zs.imag])
    sol = solve_ivp(rhs, (0.0, t), s0, method=ode.method,
                    rtol=ode.rtol, atol=ode.atol, max_step=ode.max_step)
    if not sol.success:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    return sol.y[:n, -1] + 1j * sol.y[n:, -1]


def flow_with_jacobian(X: VectorField, z0: complex, t: float,
                       ode: ODEOptions = DEFAULT_ODE):
    """Flow endpoint plus the spatial Jacobian d flow / d z0 (variational ODE)."""
    z0 = complex(z0)

    def rhs(_, s):
        x, y = s[0], s[1]
        u = ex.evaluate(X.u, x, y)
        v = ex.evaluate(X.v, x, y)
        ux, uy, vx, vy = (ex.evaluate(d, x, y) for d in X.jac_exprs)
        a = np.array([[ux, uy], [vx, vy]])
        j = s[2:].reshape(2, 2)
        return np.concatenate([[u, v], (a @ j).ravel()])

    s0 = np.array([z0.real, z0.imag, 1.0, 0.0, 0.0, 1.0])
    sol = solve_ivp(rhs, (0.0, t), s0, method=ode.method,
                    rtol=ode.rtol, atol=ode.atol, max_step=ode.max_step)
    if not sol.success:
        raise RuntimeError(f"variational flow failed: {sol.message}")
    end = sol.y[:, -1]
    return complex(end[0], end[1]), end[2:].reshape(2, 2)


# -- independent finite-difference check ---------------------------------------

def lie_derivative_fd(g: ConformalMetric, X: VectorField, p,
                      dt: float = 1e-3, dx: float = 1e-5) -> np.ndarray:
    """d/dt at t=0 of (flow_t^* g) at p, by finite differences only.

    No symbolic derivative enters: the flow is integrated tightly, the
    spatial Jacobian comes from central differences of the flow map and the
    time derivative from a central difference in t.  Agreement with
    ``killing_residual`` validates the symbolic route.
    """
    tight = ODEOptions(rtol=1e-11, atol=1e-11)
    p = complex(p)

    def pullback(t: float) -> np.ndarray:
        zc = flow_to(X, p, t, tight)
        zpx = flow_to(X, p + dx, t, tight)
        zmx = flow_to(X, p - dx, t, tight)
        zpy = flow_to(X, p + 1j * dx, t, tight)
        zmy = flow_to(X, p - 1j * dx, t, tight)
        cx = (zpx - zmx) / (2 * dx)
        cy = (zpy - zmy) / (2 * dx)
        jac = np.array([[cx.real, cy.real], [cx.imag, cy.imag]])
        return jac.T @ g.tensor_at(zc) @ jac

    return (pullback(dt) - pullback(-dt)) / (2 * dt)


# -- curvature, geodesics, area -------------------------------------------------

def gauss_curvature(g: ConformalMetric, p) -> float:
    x, y = complex(p).real, complex(p).imag
    return float(ex.evaluate(g.curvature_expr, x, y))


def unit_vector(g: ConformalMetric, p, direction: complex) -> complex:
    """Scale a direction to g-unit length at p."""
    n = g.norm(p, direction)
    if n == 0:
        raise ValueError("zero direction")
    return complex(direction) / n


@dataclass
class GeodesicResult:
    t: np.ndarray
    points: np.ndarray  # complex positions
    velocities: np.ndarray  # complex dz/dt
    exit_time: float | None
    sol: object  # scipy dense solution over the full integration window

    def point_at(self, t: float) -> complex:
        s = self.sol.sol(t)
        return complex(s[0], s[1])

    def velocity_at(self, t: float) -> complex:
        s = self.sol.sol(t)
        return complex(s[2], s[3])


def geodesic(g: ConformalMetric, p, v: complex, t_end: float,
             samples: int = 200, ode: ODEOptions = DEFAULT_ODE,
             unit_tol: float = 1e-6) -> GeodesicResult:
    """Unit-speed geodesic of g from p with initial velocity v.

    With phi = log lambda the geodesic system in isothermal coordinates is
        x'' = -phi_x (x'^2 - y'^2) - 2 phi_y x' y'
        y'' =  phi_y (x'^2 - y'^2) - 2 phi_x x' y'
    The initial velocity must satisfy lambda(p) |v| = 1; integration stops
    at ``exit_time`` if the path leaves the surface.
    """
    p = complex(p)
    v = complex(v)
    if abs(g.norm(p, v) - 1.0) > unit_tol:
        raise NotUnitSpeed(f"|v|_g = {g.norm(p, v)}, expected 1")
    phi_x, phi_y = g.log_lam_grad

    def rhs(t, s):
        x, y, xd, yd = s
        px = ex.evaluate(phi_x, x, y)
        py = ex.evaluate(phi_y, x, y)
        q = xd * xd - yd * yd
        return (xd, yd, -px * q - 2 * py * xd * yd, py * q - 2 * px * xd * yd)

    sol = solve_ivp(rhs, (0.0, t_end), (p.real, p.imag, v.real, v.imag),
                    method=ode.method, rtol=ode.rtol, atol=ode.atol,
                    max_step=ode.max_step, dense_output=True)
    t_hi = sol.t[-1]
    ts = np.linspace(0.0, t_hi, samples)
    vals = sol.sol(ts)
    pts = vals[0] + 1j * vals[1]
    vels = vals[2] + 1j * vals[3]
    exit_time = _first_exit(g.surface, sol, 0.0, t_hi, samples)
    return GeodesicResult(ts, pts, vels, exit_time, sol)


def _first_exit(surface: CanonicalSurface, sol, t_lo: float, t_hi: float,
                samples: int) -> float | None:
    """First time the dense path leaves the surface, refined by bisection."""
    ts = np.linspace(t_lo, t_hi, samples)
    prev = t_lo
    for t in ts[1:]:
        s = sol.sol(t)
        if not surface.contains(complex(s[0], s[1])):
            lo, hi = prev, t
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                sm = sol.sol(mid)
                if surface.contains(complex(sm[0], sm[1])):
                    lo = mid
                else:
                    hi = mid
            return float(hi)
        prev = t
    return None


def area(g: ConformalMetric, center, radius: float,
         epsabs: float = 1e-9, epsrel: float = 1e-9) -> float:
    """g-area of the Euclidean disc B_radius(center), adaptive quadrature."""
    center = complex(center)
    for k in range(16):
        q = center + radius * np.exp(2j * np.pi * k / 16)
        if not g.surface.contains(q):
            raise RegionLeavesSurface(f"rim point {q} outside {g.surface.kind}")
    if not g.surface.contains(center):
        raise RegionLeavesSurface(f"center {center} outside {g.surface.kind}")

    def integrand(s, th):
        x = center.real + s * np.cos(th)
        y = center.imag + s * np.sin(th)
        return s * ex.evaluate(g.lam2, x, y)

    val, _ = dblquad(integrand, 0.0, 2 * np.pi, 0.0, radius,
                     epsabs=epsabs, epsrel=epsrel)
    return float(val)
