"""Catalog of canonical conformal surfaces.

Every surface here is a plane domain (possibly with circular or straight
boundary pieces), the Riemann sphere, a cylinder, or a flat torus.  The kinds:

    riemann_sphere, plane, disc, half_plane_open, channel_open,
    punctured_plane, cylinder, punctured_disc, annulus(rho), torus(pi1, pi2),
    closed_disc, punctured_closed_disc, closed_annulus(rho),
    semi_closed_annulus(rho), half_plane_closed, channel_semi_closed,
    channel_closed

Conventions: discs and annuli sit inside the unit circle (annulus is
rho < |z| < 1); half planes are Re z > 0; channels are 0 < Re z < 2pi;
the cylinder is the vertical strip [0, 2pi) x R glued along Re z = 0, 2pi;
the torus is C modulo the lattice spanned by pi1, pi2.  semi_closed_annulus
includes its inner circle |z| = rho only; channel_semi_closed includes
Re z = 0 only.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .mobius import INF

BOUNDARY_TOL = 1e-12
TWO_PI = 2.0 * np.pi

KINDS = frozenset({
    "riemann_sphere", "plane", "disc", "half_plane_open", "channel_open",
    "punctured_plane", "cylinder", "punctured_disc", "annulus", "torus",
    "closed_disc", "punctured_closed_disc", "closed_annulus",
    "semi_closed_annulus", "half_plane_closed", "channel_semi_closed",
    "channel_closed",
})

_NEEDS_RHO = frozenset({"annulus", "closed_annulus", "semi_closed_annulus"})

# kinds whose flows should be compared modulo a period
_CIRCLE_KINDS = frozenset({"cylinder"})


class UnknownSurface(ValueError):
    pass


class BadParameter(ValueError):
    pass


class DegenerateLattice(ValueError):
    """Torus periods must be linearly independent over R."""


@dataclass(frozen=True)
class BoundaryCurve:
    """One boundary component, an analytic circle or vertical line.

    ``shape`` is "circle" (|z| = value) or "vline" (Re z = value);
    ``inward`` is the Euclidean unit inward normal direction at angle/height
    parameter s, given by ``normal_at``.
    """

    shape: str
    value: float
    inward_sign: int  # +1: normal points away from 0 / toward +x

    def point_at(self, s: float) -> complex:
        if self.shape == "circle":
            return self.value * cmath.exp(1j * s)
        return complex(self.value, s)

    def tangent_at(self, s: float) -> complex:
        """Unit tangent in the direction of increasing s."""
        if self.shape == "circle":
            return 1j * cmath.exp(1j * s)
        return 1j

    def normal_at(self, s: float) -> complex:
        """Euclidean unit normal pointing into the surface."""
        if self.shape == "circle":
            return self.inward_sign * cmath.exp(1j * s)
        return complex(self.inward_sign, 0.0)


@dataclass(frozen=True)
class CanonicalSurface:
    kind: str
    rho: float | None = None
    pi1: complex | None = None
    pi2: complex | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnknownSurface(self.kind)
        if self.kind in _NEEDS_RHO:
            if self.rho is None or not (0 < self.rho < 1):
                raise BadParameter(f"{self.kind} needs 0 < rho < 1, got {self.rho}")
        elif self.rho is not None:
            raise BadParameter(f"{self.kind} takes no rho")
        if self.kind == "torus":
            if self.pi1 is None or self.pi2 is None:
                raise BadParameter("torus needs pi1 and pi2")
            if abs(_lattice_det(self.pi1, self.pi2)) < 1e-12:
                raise DegenerateLattice(f"pi1={self.pi1}, pi2={self.pi2}")
        elif self.pi1 is not None or self.pi2 is not None:
            raise BadParameter(f"{self.kind} takes no lattice")

    # -- point membership ---------------------------------------------------

    def contains(self, z, tol: float = BOUNDARY_TOL) -> bool:
        """Membership; closed edges absorb float noise up to ``tol``."""
        k = self.kind
        if z is INF:
            return k == "riemann_sphere"
        z = complex(z)
        r = abs(z)
        x = z.real
        if k == "riemann_sphere" or k == "plane":
            return True
        if k == "disc":
            return r < 1
        if k == "closed_disc":
            return r <= 1 + tol
        if k == "punctured_plane":
            return r > 0
        if k == "punctured_disc":
            return 0 < r < 1
        if k == "punctured_closed_disc":
            return 0 < r <= 1 + tol
        if k == "annulus":
            return self.rho < r < 1
        if k == "closed_annulus":
            return self.rho - tol <= r <= 1 + tol
        if k == "semi_closed_annulus":
            return self.rho - tol <= r < 1
        if k == "half_plane_open":
            return x > 0
        if k == "half_plane_closed":
            return x >= -tol
        if k == "channel_open":
            return 0 < x < TWO_PI
        if k == "channel_semi_closed":
            return -tol <= x < TWO_PI
        if k == "channel_closed":
            return -tol <= x <= TWO_PI + tol
        if k == "cylinder":
            return True  # Re is taken mod 2pi
        if k == "torus":
            return True
        raise UnknownSurface(k)

    def on_boundary(self, z, tol: float = BOUNDARY_TOL) -> bool:
        if z is INF:
            return False
        z = complex(z)
        for b in self.boundary_components():
            if b.shape == "circle" and abs(abs(z) - b.value) <= tol:
                return True
            if b.shape == "vline" and abs(z.real - b.value) <= tol:
                return True
        return False

    # -- boundary ------------------------------------------------------------

    def boundary_components(self):
        """Boundary curves belonging to the surface (closed edges only)."""
        k = self.kind
        if k == "closed_disc" or k == "punctured_closed_disc":
            return [BoundaryCurve("circle", 1.0, -1)]
        if k == "closed_annulus":
            return [BoundaryCurve("circle", self.rho, +1),
                    BoundaryCurve("circle", 1.0, -1)]
        if k == "semi_closed_annulus":
            return [BoundaryCurve("circle", self.rho, +1)]
        if k == "half_plane_closed":
            return [BoundaryCurve("vline", 0.0, +1)]
        if k == "channel_semi_closed":
            return [BoundaryCurve("vline", 0.0, +1)]
        if k == "channel_closed":
            return [BoundaryCurve("vline", 0.0, +1),
                    BoundaryCurve("vline", TWO_PI, -1)]
        return []

    @property
    def has_boundary(self) -> bool:
        return bool(self.boundary_components())

    @property
    def punctures(self):
        k = self.kind
        if k in ("punctured_plane", "punctured_disc", "punctured_closed_disc"):
            return [0j]
        return []

    @property
    def is_compact(self) -> bool:
        return self.kind in ("riemann_sphere", "torus", "closed_disc",
                             "closed_annulus")

    def interior_point(self) -> complex:
        """Some point of the open interior, handy as a default seed."""
        k = self.kind
        if k in ("riemann_sphere", "plane", "punctured_plane", "cylinder"):
            return 1.0 + 0.0j if k != "cylinder" else complex(np.pi, 0.0)
        if k in ("disc", "closed_disc"):
            return 0.25 + 0.0j
        if k in ("punctured_disc", "punctured_closed_disc"):
            return 0.5 + 0.0j
        if k in ("annulus", "closed_annulus", "semi_closed_annulus"):
            return complex(0.5 * (self.rho + 1.0), 0.0)
        if k in ("half_plane_open", "half_plane_closed"):
            return 1.0 + 0.0j
        if k in ("channel_open", "channel_semi_closed", "channel_closed"):
            return complex(np.pi, 0.0)
        if k == "torus":
            return 0.5 * self.pi1 + 0.5 * self.pi2
        raise UnknownSurface(k)

    # -- quotient structure ----------------------------------------------

    def reduce_point(self, z: complex) -> complex:
        """Fold z into the fundamental domain (torus, cylinder); else identity."""
        if self.kind == "torus":
            return torus_reduce(self.pi1, self.pi2, z)
        if self.kind == "cylinder":
            x = z.real % TWO_PI
            return complex(x, z.imag)
        return complex(z)

    def distance(self, z, w) -> float:
        """Distance respecting quotient identifications; chordal on the sphere."""
        if self.kind == "riemann_sphere":
            return chordal_distance(z, w)
        if z is INF or w is INF:
            return np.inf
        z, w = complex(z), complex(w)
        if self.kind == "torus":
            return torus_distance(self.pi1, self.pi2, z, w)
        if self.kind == "cylinder":
            d = z - w
            x = (d.real + np.pi) % TWO_PI - np.pi
            return float(np.hypot(x, d.imag))
        return abs(z - w)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.rho is not None:
            out["rho"] = self.rho
        if self.pi1 is not None:
            out["pi1"] = [self.pi1.real, self.pi1.imag]
            out["pi2"] = [self.pi2.real, self.pi2.imag]
        return out

    @staticmethod
    def from_dict(data: dict) -> "CanonicalSurface":
        kind = data.get("kind")
        if kind is None:
            raise UnknownSurface("missing surface kind")
        rho = data.get("rho")
        pi1, pi2 = data.get("pi1"), data.get("pi2")
        if pi1 is not None:
            pi1 = complex(pi1[0], pi1[1]) if not isinstance(pi1, complex) else pi1
        if pi2 is not None:
            pi2 = complex(pi2[0], pi2[1]) if not isinstance(pi2, complex) else pi2
        extra = set(data) - {"kind", "rho", "pi1", "pi2"}
        if extra:
            raise BadParameter(f"unknown surface fields: {sorted(extra)}")
        return CanonicalSurface(kind, rho=rho, pi1=pi1, pi2=pi2)


# -- factories --------------------------------------------------------------

def riemann_sphere(): return CanonicalSurface("riemann_sphere")
def plane(): return CanonicalSurface("plane")
def disc(): return CanonicalSurface("disc")
def half_plane_open(): return CanonicalSurface("half_plane_open")
def channel_open(): return CanonicalSurface("channel_open")
def punctured_plane(): return CanonicalSurface("punctured_plane")
def cylinder(): return CanonicalSurface("cylinder")
def punctured_disc(): return CanonicalSurface("punctured_disc")
def annulus(rho): return CanonicalSurface("annulus", rho=float(rho))
def torus(pi1, pi2): return CanonicalSurface("torus", pi1=complex(pi1), pi2=complex(pi2))
def closed_disc(): return CanonicalSurface("closed_disc")
def punctured_closed_disc(): return CanonicalSurface("punctured_closed_disc")
def closed_annulus(rho): return CanonicalSurface("closed_annulus", rho=float(rho))
def semi_closed_annulus(rho): return CanonicalSurface("semi_closed_annulus", rho=float(rho))
def half_plane_closed(): return CanonicalSurface("half_plane_closed")
def channel_semi_closed(): return CanonicalSurface("channel_semi_closed")
def channel_closed(): return CanonicalSurface("channel_closed")


# -- lattice helpers ---------------------------------------------------------

def _lattice_det(pi1: complex, pi2: complex) -> float:
    return pi1.real * pi2.imag - pi1.imag * pi2.real


def torus_reduce(pi1: complex, pi2: complex, z: complex) -> complex:
    """Representative of z in the fundamental parallelogram s*pi1 + t*pi2,
    s, t in [0, 1)."""
    det = _lattice_det(pi1, pi2)
    if abs(det) < 1e-12:
        raise DegenerateLattice(f"pi1={pi1}, pi2={pi2}")
    z = complex(z)
    s = (z.real * pi2.imag - z.imag * pi2.real) / det
    t = (pi1.real * z.imag - pi1.imag * z.real) / det
    s -= np.floor(s)
    t -= np.floor(t)
    return s * pi1 + t * pi2


def torus_coords(pi1: complex, pi2: complex, z: complex):
    """Lattice coordinates (s, t) with z = s*pi1 + t*pi2 (not reduced)."""
    det = _lattice_det(pi1, pi2)
    if abs(det) < 1e-12:
        raise DegenerateLattice(f"pi1={pi1}, pi2={pi2}")
    z = complex(z)
    s = (z.real * pi2.imag - z.imag * pi2.real) / det
    t = (pi1.real * z.imag - pi1.imag * z.real) / det
    return s, t


def torus_distance(pi1: complex, pi2: complex, z: complex, w: complex) -> float:
    """min |z - w - gamma| over lattice vectors gamma."""
    d = torus_reduce(pi1, pi2, complex(z) - complex(w))
    best = np.inf
    for m in (-1, 0, 1):
        for n in (-1, 0, 1):
            best = min(best, abs(d - m * pi1 - n * pi2))
    return float(best)


def reduced_lattice_basis(pi1: complex, pi2: complex):
    """Gauss-reduced basis (b1, b2): |b1| <= |b2|, |Re(b2/b1)| <= 1/2,
    Im(b2/b1) > 0."""
    b1, b2 = complex(pi1), complex(pi2)
    if abs(_lattice_det(b1, b2)) < 1e-12:
        raise DegenerateLattice(f"pi1={pi1}, pi2={pi2}")
    while True:
        if abs(b2) < abs(b1):
            b1, b2 = b2, b1
        mu = (b2.real * b1.real + b2.imag * b1.imag) / (abs(b1) ** 2)
        k = np.round(mu)
        if k != 0:
            b2 = b2 - k * b1
        if abs(b2) >= abs(b1) and abs((b2.real * b1.real + b2.imag * b1.imag)
                                      / abs(b1) ** 2) <= 0.5 + 1e-12:
            break
    if _lattice_det(b1, b2) < 0:
        b2 = -b2
    return b1, b2


def chordal_distance(z, w) -> float:
    """Distance on the sphere via the standard chordal metric."""
    if z is INF and w is INF:
        return 0.0
    if z is INF:
        return 2.0 / float(np.sqrt(1 + abs(complex(w)) ** 2))
    if w is INF:
        return 2.0 / float(np.sqrt(1 + abs(complex(z)) ** 2))
    z, w = complex(z), complex(w)
    return 2.0 * abs(z - w) / float(np.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2)))
