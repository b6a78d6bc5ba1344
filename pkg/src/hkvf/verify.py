"""Verification of the flow axioms for a metric/field candidate.

A candidate (conformal metric g on a canonical surface, vector field X)
is accepted when

    1. X is a Killing field of g            (symbolic residual on a grid)
    2. X is not identically zero            (a witness point with |X| > 0)
    3. X is tangent along any boundary      (slip product on boundary samples)
    4. the flow of X is complete, and so is the restricted boundary flow
       (integration from seeds, both time directions, watching punctures,
        open edges and infinity)

plus periodicity detection (first-return analysis), which downstream
classification consumes.  Completeness verdicts are horizon-qualified:
"no escape within |t| <= T" is evidence, not proof.  Sphere flows switch
charts near infinity (w = 1/z, the field transforming to -w^2 X(1/w)), so
large |z| on the sphere is never mistaken for an escape.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from . import expr as ex
from .expr import EvalDomainError
from .geometry import ConformalMetric, ODEOptions, VectorField, killing_residual_max
from .mobius import INF
from .surfaces import TWO_PI, CanonicalSurface

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not_applicable"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class VerifyOptions:
    grid_n: int = 41
    boundary_samples: int = 64
    horizon: float = 50.0
    tol_killing: float = 1e-6
    tol_slip: float = 1e-8
    tol_zero: float = 1e-10
    tol_return: float = 1e-7
    escape_radius: float = 1e6
    puncture_margin: float = 1e-9
    grid_puncture_margin: float = 1e-6
    seeds: tuple = ()
    ode: ODEOptions = dc_field(default_factory=ODEOptions)


DEFAULT_OPTIONS = VerifyOptions()


@dataclass
class CheckResult:
    name: str
    status: str  # pass | fail | not_applicable | inconclusive
    worst: float = 0.0
    tolerance: float = 0.0
    detail: str = ""
    witness: complex | None = None
    escape_time: float | None = None
    escape_point: complex | None = None

    @property
    def passed(self) -> bool:
        return self.status in (PASS, NOT_APPLICABLE)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "status": self.status,
            "worst": float(self.worst),
            "tolerance": float(self.tolerance),
            "detail": self.detail,
        }
        if self.witness is not None:
            out["witness"] = [self.witness.real, self.witness.imag]
        if self.escape_time is not None:
            out["escape_time"] = float(self.escape_time)
        if self.escape_point is not None:
            out["escape_point"] = [self.escape_point.real, self.escape_point.imag]
        return out


@dataclass
class PeriodicityReport:
    periodic: bool
    period: float | None
    per_seed: list  # (seed, first return time or None)
    detail: str = ""

    @property
    def witness(self) -> complex | None:
        for s, t in self.per_seed:
            if t is not None:
                return s
        return None

    def to_dict(self) -> dict:
        return {
            "periodic": bool(self.periodic),
            "period": None if self.period is None else float(self.period),
            "per_seed": [
                {"seed": [s.real, s.imag],
                 "return_time": None if t is None else float(t)}
                for s, t in self.per_seed
            ],
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    surface: CanonicalSurface
    is_hkvf: bool
    checks: list
    periodic: PeriodicityReport | None = None

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def inconclusive(self) -> bool:
        return any(c.status == INCONCLUSIVE for c in self.checks)

    def to_dict(self) -> dict:
        out = {
            "surface": self.surface.to_dict(),
            "is_hkvf": bool(self.is_hkvf),
            "inconclusive": bool(self.inconclusive),
            "checks": [c.to_dict() for c in self.checks],
        }
        if self.periodic is not None:
            out["periodic"] = self.periodic.to_dict()
        return out


# -- sampling -----------------------------------------------------------------

def _box(surface: CanonicalSurface):
    k = surface.kind
    if k in ("riemann_sphere", "plane", "punctured_plane"):
        return (-2.0, 2.0, -2.0, 2.0)
    if k in ("disc", "closed_disc", "punctured_disc", "punctured_closed_disc",
             "annulus", "closed_annulus", "semi_closed_annulus"):
        return (-1.0, 1.0, -1.0, 1.0)
    if k in ("half_plane_open", "half_plane_closed"):
        return (0.0, 4.0, -2.0, 2.0)
    if k in ("channel_open", "channel_semi_closed", "channel_closed"):
        return (0.0, TWO_PI, -2.0, 2.0)
    if k == "cylinder":
        return (0.0, TWO_PI, -2.0, 2.0)
    raise ValueError(k)


def sample_interior_grid(surface: CanonicalSurface, n: int = 41,
                         puncture_margin: float = 1e-6) -> np.ndarray:
    """Complex sample points of the surface on an n x n grid.

    The bounding box is clipped to surface membership; points within
    ``puncture_margin`` of a puncture are dropped.
    """
    if surface.kind == "torus":
        s = np.linspace(0.0, 1.0, n, endpoint=False)
        t = np.linspace(0.0, 1.0, n, endpoint=False)
        S, T = np.meshgrid(s, t)
        return S.ravel() * surface.pi1 + T.ravel() * surface.pi2
    x0, x1, y0, y1 = _box(surface)
    if surface.kind == "cylinder":
        xs = np.linspace(x0, x1, n, endpoint=False)
    else:
        xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys)
    pts = (X + 1j * Y).ravel()
    keep = np.array([surface.contains(z) for z in pts], dtype=bool)
    for p in surface.punctures:
        keep &= np.abs(pts - p) > puncture_margin
    return pts[keep]


def sample_boundary(surface: CanonicalSurface, n: int = 64, span: float = 3.0):
    """(component, parameter values, points) for each boundary curve."""
    out = []
    for comp in surface.boundary_components():
        if comp.shape == "circle":
            ss = np.linspace(0.0, TWO_PI, n, endpoint=False)
        else:
            ss = np.linspace(-span, span, n)
        pts = np.array([comp.point_at(s) for s in ss])
        out.append((comp, ss, pts))
    return out


def default_seeds(surface: CanonicalSurface):
    k = surface.kind
    if k in ("riemann_sphere", "plane", "punctured_plane"):
        return (0.8 + 0.1j, -0.5 + 0.6j, 0.3 - 0.7j)
    if k in ("disc", "closed_disc", "punctured_disc", "punctured_closed_disc"):
        return (0.3 + 0.1j, -0.25 + 0.35j, 0.15 - 0.4j)
    if k in ("annulus", "closed_annulus", "semi_closed_annulus"):
        rho = surface.rho
        radii = [rho + f * (1 - rho) for f in (0.25, 0.5, 0.75)]
        angles = (0.4, 2.0, 4.1)
        return tuple(r * np.exp(1j * a) for r, a in zip(radii, angles))
    if k in ("half_plane_open", "half_plane_closed"):
        return (0.5 + 0.3j, 1.5 - 0.8j, 2.5 + 1.1j)
    if k in ("channel_open", "channel_semi_closed", "channel_closed", "cylinder"):
        return (1.0 + 0.2j, 3.0 - 0.5j, 5.0 + 0.8j)
    if k == "torus":
        return (0.3 * surface.pi1 + 0.2 * surface.pi2,
                0.7 * surface.pi1 + 0.5 * surface.pi2,
                0.1 * surface.pi1 + 0.8 * surface.pi2)
    raise ValueError(k)


# -- pointwise checks ----------------------------------------------------------

def check_killing(g: ConformalMetric, X: VectorField,
                  opts: VerifyOptions = DEFAULT_OPTIONS) -> CheckResult:
    pts = sample_interior_grid(g.surface, opts.grid_n, opts.grid_puncture_margin)
    try:
        lam = np.asarray(g.lam_at(pts))
        if np.any(lam <= 0):
            return CheckResult("killing", FAIL, float(np.min(lam)),
                               opts.tol_killing,
                               "metric factor is not positive on the grid")
        worst = killing_residual_max(g, X, pts)
    except EvalDomainError as err:
        return CheckResult("killing", INCONCLUSIVE, np.inf, opts.tol_killing,
                           f"evaluation failed: {err}")
    status = PASS if worst <= opts.tol_killing else FAIL
    return CheckResult("killing", status, worst, opts.tol_killing,
                       f"max Lie-derivative entry over {pts.size} points")


def check_nonzero(X: VectorField, grid,
                  opts: VerifyOptions = DEFAULT_OPTIONS) -> CheckResult:
    """X is not identically zero: some sample has |X| above tol_zero."""
    pts = np.asarray(grid, dtype=complex)
    try:
        # constant components evaluate to scalars; broadcast back
        mags = np.abs(X.at(pts)) * np.ones(pts.shape)
    except EvalDomainError as err:
        return CheckResult("nonzero", INCONCLUSIVE, 0.0, opts.tol_zero,
                           f"evaluation failed: {err}")
    best = int(np.argmax(mags))
    if mags[best] > opts.tol_zero:
        return CheckResult("nonzero", PASS, float(mags[best]), opts.tol_zero,
                           f"witness over {pts.size} points",
                           witness=complex(pts[best]))
    detail = f"|X| <= {opts.tol_zero} at all {pts.size} sample points"
    if pts.size < 9:
        detail += " (warning: grid too small to distinguish X = 0 from sparse sampling)"
    return CheckResult("nonzero", FAIL, float(mags[best]), opts.tol_zero, detail)


def slip_product(g: ConformalMetric, X: VectorField, q: complex,
                 normal: complex) -> float:
    """g(X, n) with n the g-unit inward normal (n = normal / lambda)."""
    lam = float(g.lam_at(complex(q)))
    xv = X.at(complex(q))
    return lam * (xv.real * normal.real + xv.imag * normal.imag)


def check_slip(g: ConformalMetric, X: VectorField,
               opts: VerifyOptions = DEFAULT_OPTIONS) -> CheckResult:
    comps = sample_boundary(g.surface, opts.boundary_samples)
    if not comps:
        return CheckResult("slip", NOT_APPLICABLE, 0.0, opts.tol_slip,
                           "surface has no boundary")
    worst = 0.0
    worst_q = None
    try:
        for comp, ss, pts in comps:
            for s, q in zip(ss, pts):
                val = abs(slip_product(g, X, q, comp.normal_at(s)))
                if val > worst:
                    worst, worst_q = val, complex(q)
    except EvalDomainError as err:
        return CheckResult("slip", INCONCLUSIVE, np.inf, opts.tol_slip,
                           f"evaluation failed: {err}")
    n_pts = sum(len(p) for _, _, p in comps)
    status = PASS if worst <= opts.tol_slip else FAIL
    return CheckResult("slip", status, worst, opts.tol_slip,
                       f"max |g(X, normal)| over {n_pts} boundary points",
                       witness=worst_q)


# -- completeness ----------------------------------------------------------------

@dataclass
class FlowOutcome:
    seed: complex
    t_end: float
    escaped: bool
    escape_time: float | None = None
    escape_point: complex | None = None
    reason: str = ""
    final: complex | None = None  # endpoint at t_end when not escaped


def _exit_events(surface: CanonicalSurface, opts: VerifyOptions):
    """Terminal event functions marking an exit from the surface."""
    events = []
    k = surface.kind

    def radius_event(level, direction):
        def ev(t, s):
            return np.hypot(s[0], s[1]) - level
        ev.terminal = True
        ev.direction = direction
        return ev

    def re_event(level, direction):
        def ev(t, s):
            return s[0] - level
        ev.terminal = True
        ev.direction = direction
        return ev

    if surface.punctures:
        events.append(("puncture", radius_event(opts.puncture_margin, -1)))
    if k == "cylinder":
        # the only way off a cylinder is Im -> +-infinity
        def im_event(t, s):
            return abs(s[1]) - opts.escape_radius
        im_event.terminal = True
        im_event.direction = +1
        events.append(("infinity", im_event))
    elif k not in ("riemann_sphere", "torus"):
        events.append(("infinity", radius_event(opts.escape_radius, +1)))
    closed_margin = 1e-6  # slip-conforming orbits stay well inside this
    if k in ("disc", "punctured_disc", "annulus", "semi_closed_annulus"):
        events.append(("outer edge", radius_event(1.0, +1)))
    if k in ("closed_disc", "punctured_closed_disc", "closed_annulus"):
        events.append(("beyond closed edge", radius_event(1.0 + closed_margin, +1)))
    if k == "annulus":
        events.append(("inner edge", radius_event(surface.rho, -1)))
    if k in ("closed_annulus", "semi_closed_annulus"):
        events.append(("beyond closed edge", radius_event(surface.rho - closed_margin, -1)))
    if k == "half_plane_open":
        events.append(("edge", re_event(0.0, -1)))
    if k == "half_plane_closed":
        events.append(("beyond closed edge", re_event(-closed_margin, -1)))
    if k == "channel_open":
        events.append(("left edge", re_event(0.0, -1)))
        events.append(("right edge", re_event(TWO_PI, +1)))
    if k == "channel_semi_closed":
        events.append(("beyond closed edge", re_event(-closed_margin, -1)))
        events.append(("right edge", re_event(TWO_PI, +1)))
    if k == "channel_closed":
        events.append(("beyond closed edge", re_event(-closed_margin, -1)))
        events.append(("beyond closed edge", re_event(TWO_PI + closed_margin, +1)))
    return events


def flow_on_surface(surface: CanonicalSurface, X: VectorField, seed: complex,
                    t_end: float, opts: VerifyOptions = DEFAULT_OPTIONS) -> FlowOutcome:
    """Integrate the flow watching for escapes; sphere uses two charts."""
    if surface.kind == "riemann_sphere":
        return _flow_sphere(X, seed, t_end, opts)
    named = _exit_events(surface, opts)
    evs = [e for _, e in named]

    def rhs(t, s):
        u = ex.evaluate(X.u, s[0], s[1])
        v = ex.evaluate(X.v, s[0], s[1])
        return (u, v)

    # a transversal pass through a puncture enters and leaves the 1e-9
    # margin inside one solver step, which a distance event cannot see;
    # catch it at the root of the radial velocity (closest approach)
    n_named = len(evs)
    if surface.punctures:
        def approach(t, s):
            return (s[0] * ex.evaluate(X.u, s[0], s[1])
                    + s[1] * ex.evaluate(X.v, s[0], s[1]))
        approach.terminal = False
        approach.direction = +1 if t_end >= 0 else -1
        evs = evs + [approach]

    try:
        sol = solve_ivp(rhs, (0.0, t_end), (complex(seed).real, complex(seed).imag),
                        method=opts.ode.method, rtol=opts.ode.rtol,
                        atol=opts.ode.atol, max_step=opts.ode.max_step,
                        events=evs)
    except EvalDomainError as err:
        return FlowOutcome(seed, t_end, True, None, None,
                           f"field evaluation failed mid-flow: {err}")
    if not sol.success and sol.status != 1:
        return FlowOutcome(seed, t_end, True, None, None,
                           f"integration failed: {sol.message}")
    escapes = []
    for (reason, _), hits, states in zip(named, sol.t_events[:n_named],
                                         sol.y_events[:n_named]):
        if hits.size:
            q = complex(states[0][0], states[0][1])
            escapes.append((abs(float(hits[0])), float(hits[0]), q, reason))
    if surface.punctures:
        for t, state in zip(sol.t_events[n_named], sol.y_events[n_named]):
            q = complex(state[0], state[1])
            if abs(q) <= opts.puncture_margin:
                escapes.append((abs(float(t)), float(t), q, "puncture"))
    if escapes:
        escapes.sort(key=lambda e: e[0])
        _, t, q, reason = escapes[0]
        return FlowOutcome(seed, t_end, True, t, q, reason)
    return FlowOutcome(seed, t_end, False,
                       final=complex(sol.y[0, -1], sol.y[1, -1]))


def _flow_sphere(X: VectorField, seed: complex, t_end: float,
                 opts: VerifyOptions) -> FlowOutcome:
    """Two-chart integration: z while |z| < 3, else w = 1/z.

    In the w chart the field is W(w) = -w^2 X(1/w); the charts overlap on
    1.5 < |z| < 3 so the switching events cannot chatter.
    """
    t_now = 0.0
    if seed is INF:
        in_w = True
        z = 0j
    else:
        z = complex(seed)
        in_w = abs(z) > 2.0
        if in_w:
            z = 1.0 / z

    def rhs_z(t, s):
        u = ex.evaluate(X.u, s[0], s[1])
        v = ex.evaluate(X.v, s[0], s[1])
        return (u, v)

    def rhs_w(t, s):
        w = complex(s[0], s[1])
        val = -(w * w) * X.at(1.0 / w)
        return (val.real, val.imag)

    def cross(level):
        def ev(t, s):
            return np.hypot(s[0], s[1]) - level
        ev.terminal = True
        ev.direction = +1
        return ev

    def endpoint(zz: complex, ww: bool):
        if not ww:
            return zz
        return INF if zz == 0 else 1.0 / zz

    sign = 1.0 if t_end >= 0 else -1.0
    for _ in range(400):
        remaining = t_end - t_now
        if sign * remaining <= 0:
            return FlowOutcome(seed, t_end, False, final=endpoint(z, in_w))
        try:
            if in_w:
                sol = solve_ivp(rhs_w, (0.0, remaining), (z.real, z.imag),
                                method=opts.ode.method, rtol=opts.ode.rtol,
                                atol=opts.ode.atol, events=[cross(1.0 / 1.5)])
            else:
                sol = solve_ivp(rhs_z, (0.0, remaining), (z.real, z.imag),
                                method=opts.ode.method, rtol=opts.ode.rtol,
                                atol=opts.ode.atol, events=[cross(3.0)])
        except (EvalDomainError, ZeroDivisionError) as err:
            return FlowOutcome(seed, t_end, True, None, None,
                               f"field evaluation failed mid-flow: {err}")
        if not sol.success and sol.status != 1:
            return FlowOutcome(seed, t_end, True, None, None,
                               f"integration failed: {sol.message}")
        z = complex(sol.y[0, -1], sol.y[1, -1])
        t_now += sol.t[-1]
        if sol.status == 1:  # hit the chart switch
            z = 1.0 / z
            in_w = not in_w
        else:
            return FlowOutcome(seed, t_end, False, final=endpoint(z, in_w))
    return FlowOutcome(seed, t_end, True, None, None,
                       "chart switching did not terminate")


def check_complete(g: ConformalMetric, X: VectorField,
                   opts: VerifyOptions = DEFAULT_OPTIONS) -> CheckResult:
    seeds = opts.seeds or default_seeds(g.surface)
    for seed in seeds:
        for direction in (+1.0, -1.0):
            out = flow_on_surface(g.surface, X, seed, direction * opts.horizon, opts)
            if out.escaped:
                way = "forward" if direction > 0 else "backward"
                if out.escape_time is None:
                    return CheckResult("complete", INCONCLUSIVE, np.inf,
                                       opts.horizon,
                                       f"orbit from {seed} ({way}): {out.reason}",
                                       witness=complex(seed))
                return CheckResult(
                    "complete", FAIL, abs(out.escape_time), opts.horizon,
                    f"orbit from {seed} ({way}) escaped: {out.reason}",
                    witness=complex(seed), escape_time=out.escape_time,
                    escape_point=out.escape_point)
    return CheckResult("complete", PASS, float(opts.horizon), opts.horizon,
                       f"no escape from {len(seeds)} seeds within |t| <= {opts.horizon}")


def check_boundary_complete(g: ConformalMetric, X: VectorField,
                            opts: VerifyOptions = DEFAULT_OPTIONS) -> CheckResult:
    """Completeness of the restricted field on each boundary curve.

    Circles are compact, so the restricted flow cannot escape (still
    integrated, to surface evaluation failures).  On a vertical line the
    tangential ODE is y' = v(x0, y), which can run off to infinity.
    """
    comps = g.surface.boundary_components()
    if not comps:
        return CheckResult("boundary_complete", NOT_APPLICABLE, 0.0,
                           opts.horizon, "surface has no boundary")
    for comp in comps:
        if comp.shape == "circle":
            rad = comp.value

            def rhs(t, s):
                q = rad * np.exp(1j * s[0])
                xv = X.at(q)
                tangent = 1j * np.exp(1j * s[0])
                return ((xv.real * tangent.real + xv.imag * tangent.imag) / rad,)

            seeds1d = (0.3, 2.4)
        else:
            x0 = comp.value

            def rhs(t, s):
                return (ex.evaluate(X.v, x0, s[0]),)

            seeds1d = (-1.0, 0.5)
        for s0 in seeds1d:
            for direction in (+1.0, -1.0):
                def blow(t, s):
                    return abs(s[0]) - opts.escape_radius
                blow.terminal = True
                blow.direction = +1
                try:
                    sol = solve_ivp(rhs, (0.0, direction * opts.horizon), (s0,),
                                    method=opts.ode.method, rtol=opts.ode.rtol,
                                    atol=opts.ode.atol,
                                    events=[blow] if comp.shape == "vline" else None)
                except EvalDomainError as err:
                    return CheckResult("boundary_complete", INCONCLUSIVE, np.inf,
                                       opts.horizon, f"evaluation failed: {err}")
                if not sol.success and sol.status != 1:
                    return CheckResult("boundary_complete", INCONCLUSIVE, np.inf,
                                       opts.horizon,
                                       f"integration failed: {sol.message}")
                if sol.status == 1:
                    t_esc = float(sol.t_events[0][0])
                    q = comp.point_at(float(sol.y_events[0][0][0]))
                    return CheckResult(
                        "boundary_complete", FAIL, abs(t_esc), opts.horizon,
                        f"boundary orbit escaped along {comp.shape} at {comp.value}",
                        witness=comp.point_at(s0), escape_time=t_esc,
                        escape_point=q)
    return CheckResult("boundary_complete", PASS, float(opts.horizon), opts.horizon,
                       f"boundary orbits stayed bounded within |t| <= {opts.horizon}")


# -- periodicity -----------------------------------------------------------------

def first_return_time(surface: CanonicalSurface, X: VectorField, seed: complex,
                      opts: VerifyOptions = DEFAULT_OPTIONS,
                      capture: float = 0.05) -> float | None:
    """First t > 0 with flow_t(seed) back at seed (modulo the surface's
    identifications), or None within the horizon."""
    seed = complex(seed)

    def rhs(t, s):
        u = ex.evaluate(X.u, s[0], s[1])
        v = ex.evaluate(X.v, s[0], s[1])
        return (u, v)

    try:
        sol = solve_ivp(rhs, (0.0, opts.horizon), (seed.real, seed.imag),
                        method=opts.ode.method, rtol=opts.ode.rtol,
                        atol=opts.ode.atol, dense_output=True)
    except EvalDomainError:
        return None
    if not sol.success:
        return None
    t_hi = sol.t[-1]

    def gap(t: float) -> float:
        s = sol.sol(t)
        return surface.distance(complex(s[0], s[1]), seed)

    n = 20001
    ts = np.linspace(0.0, t_hi, n)
    vals = sol.sol(ts)
    zs = vals[0] + 1j * vals[1]
    ds = np.array([surface.distance(z, seed) for z in zs])
    step = ts[1] - ts[0]
    # tiny orbits near a fixed point never leave a fixed capture radius;
    # shrink it to a fraction of the actual excursion
    capture = min(capture, 0.25 * float(np.max(ds)))
    if capture <= 0:
        return None
    # skip the initial departure from the seed
    i = 1
    while i < n and ds[i] < capture:
        i += 1
    while i < n - 1:
        if ds[i] < capture and ds[i] <= ds[i - 1] and ds[i] <= ds[i + 1]:
            res = minimize_scalar(gap,
                                  bounds=(max(ts[i] - step, 0.0), ts[i] + step),
                                  method="bounded", options={"xatol": 1e-12})
            if res.fun < opts.tol_return:
                return float(res.x)
            # a dip that misses the seed: move past it
            while i < n - 1 and ds[i] < capture:
                i += 1
        i += 1
    return None


def detect_periodic(g: ConformalMetric, X: VectorField,
                    opts: VerifyOptions = DEFAULT_OPTIONS) -> PeriodicityReport:
    """Common first-return period over the seeds, if one exists.

    Seeds sitting at (numerical) zeros of X are skipped: stationary points
    are trivially periodic and carry no period information.
    """
    seeds = opts.seeds or default_seeds(g.surface)
    per_seed = []
    times = []
    for seed in seeds:
        if abs(X.at(complex(seed))) <= opts.tol_zero:
            per_seed.append((complex(seed), None))
            continue
        t = first_return_time(g.surface, X, seed, opts)
        per_seed.append((complex(seed), t))
        times.append(t)
    usable = [t for t in times if t is not None]
    if not usable or len(usable) != len(times):
        return PeriodicityReport(False, None, per_seed,
                                 "no common return within the horizon")
    spread = max(usable) - min(usable)
    if spread > 1e-6:
        return PeriodicityReport(False, None, per_seed,
                                 f"return times disagree by {spread:.3g}")
    return PeriodicityReport(True, float(np.mean(usable)), per_seed,
                             f"return times agree within {spread:.3g}")


# -- top level ---------------------------------------------------------------------

def verify(g: ConformalMetric, X: VectorField,
           opts: VerifyOptions = DEFAULT_OPTIONS,
           with_periodicity: bool = True) -> VerificationReport:
    """Run all axiom checks (and periodicity detection when they pass)."""
    grid = sample_interior_grid(g.surface, opts.grid_n, opts.grid_puncture_margin)
    checks = [
        check_killing(g, X, opts),
        check_nonzero(X, grid, opts),
        check_slip(g, X, opts),
        check_complete(g, X, opts),
        check_boundary_complete(g, X, opts),
    ]
    ok = all(c.passed for c in checks)
    periodic = None
    if ok and with_periodicity:
        periodic = detect_periodic(g, X, opts)
    return VerificationReport(g.surface, ok, checks, periodic)
