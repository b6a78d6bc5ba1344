"""Mobius transformations of the Riemann sphere.

A transformation f(z) = (az + b)/(cz + d) with ad - bc != 0 is stored as the
coefficient quadruple (a, b, c, d), normalized to unit determinant.  Since
(a, b, c, d) and (-a, -b, -c, -d) give the same map, a canonical sign is chosen
so equality of maps is equality of coefficients.

The point at infinity is the module-level singleton ``INF``, not a float inf:
arithmetic never touches it, only the chart logic does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_ALG = 1e-9


class _Infinity:
    """The point at infinity on the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

IDENTITY = "identity"
ELLIPTIC = "elliptic"
PARABOLIC = "parabolic"
HYPERBOLIC = "hyperbolic"
LOXODROMIC = "loxodromic"


class SingularMatrix(ValueError):
    """Coefficients with ad - bc = 0 do not define a Mobius transformation."""


class IdentityHasNoFixedPointSet(ValueError):
    """Every point is fixed, so there is no finite fixed-point list to return."""


class DegenerateTriple(ValueError):
    """Three-point interpolation needs pairwise distinct points."""


def _is_inf(z) -> bool:
    return z is INF


def _key(z):
    # lexicographic (Re, Im); INF sorts after every finite point
    if z is INF:
        return (1, 0.0, 0.0)
    return (0, z.real, z.imag)


def order_points(points):
    """Sort sphere points by (Re, Im), with INF last."""
    pts = [p if p is INF else complex(p) for p in points]
    return sorted(pts, key=_key)


@dataclass(frozen=True)
class MobiusTransform:
    """z -> (az + b)/(cz + d), unit determinant, canonical sign."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = complex(self.a) * complex(self.d) - complex(self.b) * complex(self.c)
        if abs(det) < 1e-14:
            raise SingularMatrix(f"determinant {det} too close to zero")
        if abs(det - 1) <= 1e-13:
            # already unit determinant; dividing by sqrt(det) would only add noise
            a, b, c, d = complex(self.a), complex(self.b), complex(self.c), complex(self.d)
        else:
            s = np.sqrt(det)
            a, b, c, d = complex(self.a) / s, complex(self.b) / s, complex(self.c) / s, complex(self.d) / s
        tr = a + d
        flip = False
        if tr.real < 0:
            flip = True
        elif tr.real == 0:
            if tr.imag < 0:
                flip = True
            elif tr.imag == 0 and a.real < 0:
                flip = True
        if flip:
            a, b, c, d = -a, -b, -c, -d
        object.__setattr__(self, "a", complex(a))
        object.__setattr__(self, "b", complex(b))
        object.__setattr__(self, "c", complex(c))
        object.__setattr__(self, "d", complex(d))

    @staticmethod
    def identity() -> "MobiusTransform":
        return MobiusTransform(1, 0, 0, 1)

    @staticmethod
    def translation(w) -> "MobiusTransform":
        return MobiusTransform(1, w, 0, 1)

    @staticmethod
    def scaling(k) -> "MobiusTransform":
        if k == 0:
            raise SingularMatrix("scaling by zero")
        return MobiusTransform(k, 0, 0, 1)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def to_floats(self):
        """Serialize as (a.re, a.im, b.re, b.im, c.re, c.im, d.re, d.im)."""
        return (
            self.a.real, self.a.imag,
            self.b.real, self.b.imag,
            self.c.real, self.c.imag,
            self.d.real, self.d.imag,
        )

    @staticmethod
    def from_floats(vals) -> "MobiusTransform":
        vals = [float(v) for v in vals]
        if len(vals) != 8:
            raise ValueError("expected 8 reals")
        return MobiusTransform(
            complex(vals[0], vals[1]),
            complex(vals[2], vals[3]),
            complex(vals[4], vals[5]),
            complex(vals[6], vals[7]),
        )

    def compose(self, other: "MobiusTransform") -> "MobiusTransform":
        """Return self after other: (self.compose(other))(z) = self(other(z))."""
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        return MobiusTransform(
            a1 * a2 + b1 * c2,
            a1 * b2 + b1 * d2,
            c1 * a2 + d1 * c2,
            c1 * b2 + d1 * d2,
        )

    def inverse(self) -> "MobiusTransform":
        return MobiusTransform(self.d, -self.b, -self.c, self.a)

    def conjugate_by(self, h: "MobiusTransform") -> "MobiusTransform":
        """Return h o self o h^-1."""
        return h.compose(self).compose(h.inverse())

    def __call__(self, z):
        if z is INF:
            if abs(self.c) == 0:
                return INF
            return self.a / self.c
        z = complex(z)
        den = self.c * z + self.d
        # coefficients carry ~1e-16 relative noise, so the pole is a small
        # window, not an exact zero of the denominator
        scale = abs(self.c) * abs(z) + abs(self.d)
        if den == 0 or abs(den) <= 1e-13 * scale:
            return INF
        return (self.a * z + self.b) / den

    def is_identity(self, tol: float = TOL_ALG) -> bool:
        return (
            abs(self.a - 1) <= tol
            and abs(self.d - 1) <= tol
            and abs(self.b) <= tol
            and abs(self.c) <= tol
        )

    def fixed_points(self, tol: float = TOL_ALG):
        """Fixed points on the sphere, ordered by (Re, Im) with INF last.

        Solves c z^2 + (d - a) z - b = 0; with unit determinant the
        discriminant (d-a)^2 + 4bc equals tr^2 - 4, so a double root is
        exactly the parabolic case.  Raises for the identity, whose fixed
        set is the whole sphere.
        """
        if self.is_identity(tol):
            raise IdentityHasNoFixedPointSet("identity fixes every point")
        a, b, c, d = self.a, self.b, self.c, self.d
        if abs(c) <= tol:
            # infinity is fixed
            if abs(d - a) <= tol:
                return [INF]
            return order_points([b / (d - a), INF])
        disc = (d - a) * (d - a) + 4 * b * c
        if abs(disc) <= 4 * tol:
            return [complex((a - d) / (2 * c))]
        root = np.sqrt(complex(disc))
        z1 = (a - d + root) / (2 * c)
        z2 = (a - d - root) / (2 * c)
        return order_points([z1, z2])

    def classify(self, tol: float = TOL_ALG) -> "MobiusClass":
        """Classify by the trace of the unit-determinant representative.

        tr^2 real in [0,4) -> elliptic, = 4 -> parabolic (or identity),
        real in (4,inf) -> hyperbolic, anything else -> loxodromic.
        """
        if self.is_identity(tol):
            return MobiusClass(IDENTITY, [], self.trace)
        tr = self.trace
        fps = self.fixed_points(tol)
        if min(abs(tr - 2), abs(tr + 2)) <= tol:
            kind = PARABOLIC
        elif abs(tr.imag) <= tol and abs(tr.real) < 2:
            kind = ELLIPTIC
        elif abs(tr.imag) <= tol and abs(tr.real) > 2:
            kind = HYPERBOLIC
        else:
            kind = LOXODROMIC
        return MobiusClass(kind, fps, tr)


@dataclass(frozen=True)
class MobiusClass:
    kind: str
    fixed_points: list
    trace: complex


def _to_zero_one_inf(z1, z2, z3) -> MobiusTransform:
    # rows of the matrix sending (z1, z2, z3) to (0, 1, INF)
    if z1 is INF:
        return MobiusTransform(0, z2 - z3, 1, -z3)
    if z2 is INF:
        return MobiusTransform(1, -z1, 1, -z3)
    if z3 is INF:
        return MobiusTransform(1, -z1, 0, z2 - z1)
    return MobiusTransform(
        z2 - z3, -z1 * (z2 - z3),
        z2 - z1, -z3 * (z2 - z1),
    )


def _check_distinct(points, tol):
    for i in range(3):
        for j in range(i + 1, 3):
            p, q = points[i], points[j]
            if p is INF and q is INF:
                raise DegenerateTriple("repeated point at infinity")
            if p is not INF and q is not INF and abs(p - q) <= tol:
                raise DegenerateTriple(f"points {p} and {q} coincide")


def from_three_points(sources, targets, tol: float = TOL_ALG) -> MobiusTransform:
    """The unique Mobius transformation sending sources[i] to targets[i].

    Built as T^-1 o S where S, T send the triples to (0, 1, INF); either
    triple may contain INF.  Raises DegenerateTriple on repeated points.
    """
    sources = list(sources)
    targets = list(targets)
    if len(sources) != 3 or len(targets) != 3:
        raise ValueError("need exactly three source and three target points")
    _check_distinct(sources, tol)
    _check_distinct(targets, tol)
    s = _to_zero_one_inf(*sources)
    t = _to_zero_one_inf(*targets)
    return t.inverse().compose(s)


def random_transform(rng: np.random.Generator) -> MobiusTransform:
    """Random normalized transform with well-conditioned determinant."""
    while True:
        v = rng.standard_normal(8)
        a = complex(v[0], v[1])
        b = complex(v[2], v[3])
        c = complex(v[4], v[5])
        d = complex(v[6], v[7])
        if abs(a * d - b * c) > 1e-3:
            return MobiusTransform(a, b, c, d)
