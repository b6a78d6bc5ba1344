"""Atomic conformal maps between canonical surfaces, and composite chains.

The atoms:

    mobius                      (az + b)/(cz + d)
    scale(k), shift(c)          kz, z + c (Mobius, but serialized by intent)
    disc_to_half_plane          z -> (-z + 1)/(z + 1), disc onto Re w > 0
    half_plane_to_disc          w -> (w - 1)/(-w - 1), its inverse
    disc_to_channel             z -> -2i log(i(1 - z)/(1 + z)), onto 0 < Re w < 2pi
    channel_to_disc             w -> (1 + i e^{iw/2})/(1 - i e^{iw/2})
    punctured_plane_to_cylinder z -> -i log z   (arg in [0, 2pi))
    cylinder_to_punctured_plane w -> e^{iw}
    spiral_to_cylinder(v)       z -> (i/v) log z, straightens z -> e^{vt} z
    log, exp                    branch arg in [0, 2pi)
    conj                        z -> conj(z) (anti-conformal, no derivative)

A MapChain applies its atoms in list order and records the source and target
surfaces.  Chains evaluate on numpy arrays of finite complex points; the
holomorphic derivative is the chain-rule product of atom derivatives.
"""

from __future__ import annotations

import numpy as np

from .mobius import INF, MobiusTransform
from .surfaces import TWO_PI, CanonicalSurface

DOMAIN_TOL = 1e-9


class DomainEscape(ValueError):
    """A point left an atom's domain while being pushed through a chain."""


class AntiConformalAtom(ValueError):
    """conj has no holomorphic derivative."""


def _arg_02pi(z):
    a = np.angle(z)
    return np.where(a < 0, a + TWO_PI, a)


def log_02pi(z):
    """log with the branch arg in [0, 2pi) (cut along the positive axis)."""
    z = np.asarray(z, dtype=complex)
    out = np.log(np.abs(z)) + 1j * _arg_02pi(z)
    return complex(out) if out.ndim == 0 else out


class Atom:
    kind = "atom"

    def forward(self, z):
        raise NotImplementedError

    def inverse(self, w):
        raise NotImplementedError

    def deriv(self, z):
        raise NotImplementedError

    def in_domain(self, z) -> bool:
        return True

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params()}

    def __repr__(self):
        ps = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.kind}({ps})"


class MobiusAtom(Atom):
    kind = "mobius"

    def __init__(self, m: MobiusTransform):
        self.m = m

    def forward(self, z):
        m = self.m
        return (m.a * z + m.b) / (m.c * z + m.d)

    def inverse(self, w):
        m = self.m.inverse()
        return (m.a * w + m.b) / (m.c * w + m.d)

    def deriv(self, z):
        # unit determinant: f'(z) = 1/(cz + d)^2
        m = self.m
        return 1.0 / (m.c * z + m.d) ** 2

    def params(self):
        return {"coeffs": list(self.m.to_floats())}


class Scale(Atom):
    kind = "scale"

    def __init__(self, k: complex):
        if k == 0:
            raise ValueError("scale factor must be nonzero")
        self.k = complex(k)

    def forward(self, z):
        return self.k * z

    def inverse(self, w):
        return w / self.k

    def deriv(self, z):
        return self.k * np.ones_like(np.asarray(z))

    def params(self):
        return {"k": [self.k.real, self.k.imag]}


class Shift(Atom):
    kind = "shift"

    def __init__(self, c: complex):
        self.c = complex(c)

    def forward(self, z):
        return z + self.c

    def inverse(self, w):
        return w - self.c

    def deriv(self, z):
        return np.ones_like(np.asarray(z))

    def params(self):
        return {"c": [self.c.real, self.c.imag]}


class DiscToHalfPlane(Atom):
    """(-z + 1)/(z + 1); 0 -> 1, the unit circle -> the imaginary axis."""

    kind = "disc_to_half_plane"

    def forward(self, z):
        return (1 - z) / (1 + z)

    def inverse(self, w):
        return (w - 1) / (-w - 1)

    def deriv(self, z):
        return -2.0 / (1 + z) ** 2

    def in_domain(self, z) -> bool:
        return bool(np.all(np.abs(z) <= 1 + DOMAIN_TOL))


class HalfPlaneToDisc(Atom):
    kind = "half_plane_to_disc"

    def forward(self, z):
        return (z - 1) / (-z - 1)

    def inverse(self, w):
        return (1 - w) / (1 + w)

    def deriv(self, z):
        return -2.0 / (1 + z) ** 2

    def in_domain(self, z) -> bool:
        return bool(np.all(np.real(z) >= -DOMAIN_TOL))


class DiscToChannel(Atom):
    """-2i log(i(1-z)/(1+z)); the disc onto the channel 0 < Re w < 2pi.

    i(1-z)/(1+z) lands in the upper half plane, so the principal log is
    continuous here and Re w = 2 arg(.) spans (0, 2pi).
    """

    kind = "disc_to_channel"

    def forward(self, z):
        return -2j * np.log(1j * (1 - z) / (1 + z))

    def inverse(self, w):
        e = np.exp(0.5j * w)
        return (1 + 1j * e) / (1 - 1j * e)

    def deriv(self, z):
        return 4j / (1 - z ** 2)

    def in_domain(self, z) -> bool:
        return bool(np.all(np.abs(z) <= 1 + DOMAIN_TOL))


class ChannelToDisc(Atom):
    kind = "channel_to_disc"

    def forward(self, z):
        e = np.exp(0.5j * z)
        return (1 + 1j * e) / (1 - 1j * e)

    def inverse(self, w):
        return -2j * np.log(1j * (1 - w) / (1 + w))

    def deriv(self, z):
        e = np.exp(0.5j * z)
        return -e / (1 - 1j * e) ** 2

    def in_domain(self, z) -> bool:
        x = np.real(z)
        return bool(np.all((x >= -DOMAIN_TOL) & (x <= TWO_PI + DOMAIN_TOL)))


class PuncturedPlaneToCylinder(Atom):
    """-i log z; |z| = 1 goes to the circle Im w = 0, arg to Re w in [0, 2pi)."""

    kind = "punctured_plane_to_cylinder"

    def forward(self, z):
        return -1j * log_02pi(z)

    def inverse(self, w):
        return np.exp(1j * w)

    def deriv(self, z):
        return -1j / z

    def in_domain(self, z) -> bool:
        return bool(np.all(np.abs(z) > 0))


class CylinderToPuncturedPlane(Atom):
    kind = "cylinder_to_punctured_plane"

    def forward(self, z):
        return np.exp(1j * z)

    def inverse(self, w):
        return -1j * log_02pi(w)

    def deriv(self, z):
        return 1j * np.exp(1j * z)


class SpiralToCylinder(Atom):
    """(i/v) log z; conjugates z -> e^{vt} z into w -> w + it.

    The cylinder period is omega = 2 pi i * (i/v) = -2pi/v, so comparisons
    on the image are taken modulo Re omega.
    """

    kind = "spiral_to_cylinder"

    def __init__(self, v: float):
        if v == 0:
            raise ValueError("rate v must be nonzero")
        self.v = float(v)

    @property
    def period(self) -> float:
        return -TWO_PI / self.v

    def forward(self, z):
        return (1j / self.v) * log_02pi(z)

    def inverse(self, w):
        return np.exp(-1j * self.v * w)

    def deriv(self, z):
        return 1j / (self.v * z)

    def in_domain(self, z) -> bool:
        return bool(np.all(np.abs(z) > 0))

    def params(self):
        return {"v": self.v}


class LogMap(Atom):
    kind = "log"

    def forward(self, z):
        return log_02pi(z)

    def inverse(self, w):
        return np.exp(w)

    def deriv(self, z):
        return 1.0 / z

    def in_domain(self, z) -> bool:
        return bool(np.all(np.abs(z) > 0))


class ExpMap(Atom):
    kind = "exp"

    def forward(self, z):
        return np.exp(z)

    def inverse(self, w):
        return log_02pi(w)

    def deriv(self, z):
        return np.exp(z)


class Conj(Atom):
    """Anti-conformal reflection, available for hand-built chains only."""

    kind = "conj"

    def forward(self, z):
        return np.conj(z)

    def inverse(self, w):
        return np.conj(w)

    def deriv(self, z):
        raise AntiConformalAtom("conj is anti-conformal")


_ATOM_KINDS = {
    cls.kind: cls for cls in (
        MobiusAtom, Scale, Shift, DiscToHalfPlane, HalfPlaneToDisc,
        DiscToChannel, ChannelToDisc, PuncturedPlaneToCylinder,
        CylinderToPuncturedPlane, SpiralToCylinder, LogMap, ExpMap, Conj,
    )
}


def atom_from_dict(data: dict) -> Atom:
    kind = data.get("kind")
    if kind not in _ATOM_KINDS:
        raise ValueError(f"unknown atom kind {kind!r}")
    cls = _ATOM_KINDS[kind]
    if kind == "mobius":
        return MobiusAtom(MobiusTransform.from_floats(data["coeffs"]))
    if kind == "scale":
        return Scale(complex(data["k"][0], data["k"][1]))
    if kind == "shift":
        return Shift(complex(data["c"][0], data["c"][1]))
    if kind == "spiral_to_cylinder":
        return SpiralToCylinder(data["v"])
    return cls()


class MapChain:
    """Composite map: atoms applied in list order, source -> target."""

    def __init__(self, atoms, source: CanonicalSurface, target: CanonicalSurface):
        self.atoms = list(atoms)
        self.source = source
        self.target = target

    def __repr__(self):
        inner = " -> ".join(a.kind for a in self.atoms) or "identity"
        return f"MapChain({self.source.kind} -> {self.target.kind}: {inner})"

    def apply(self, z, validate: bool = False):
        w = np.asarray(z, dtype=complex)
        scalar = w.ndim == 0
        for atom in self.atoms:
            if validate and not atom.in_domain(w):
                raise DomainEscape(f"point left the domain of {atom.kind}")
            w = atom.forward(w)
        return complex(w) if scalar else np.asarray(w)

    def apply_inverse(self, w, validate: bool = False):
        z = np.asarray(w, dtype=complex)
        scalar = z.ndim == 0
        for atom in reversed(self.atoms):
            z = atom.inverse(z)
            if validate and not atom.in_domain(z):
                raise DomainEscape(f"inverse left the domain of {atom.kind}")
        return complex(z) if scalar else np.asarray(z)

    def deriv(self, z):
        """Holomorphic derivative of the composite by the chain rule."""
        w = np.asarray(z, dtype=complex)
        scalar = w.ndim == 0
        d = np.ones_like(w)
        for atom in self.atoms:
            d = d * atom.deriv(w)
            w = atom.forward(w)
        return complex(d) if scalar else np.asarray(d)

    def pulled_lambda(self, lam_source, w):
        """Metric factor on the target: lambda(phi^{-1}(w)) * |(phi^{-1})'(w)|.

        ``lam_source`` is a callable z -> lambda(z) on the source.
        """
        z = self.apply_inverse(w)
        return lam_source(z) / np.abs(self.deriv(z))

    def then(self, atom: Atom, target: CanonicalSurface) -> "MapChain":
        return MapChain(self.atoms + [atom], self.source, target)

    def as_mobius(self) -> MobiusTransform | None:
        """Collapse to a single Mobius transformation when possible."""
        m = MobiusTransform.identity()
        for atom in self.atoms:
            if isinstance(atom, MobiusAtom):
                step = atom.m
            elif isinstance(atom, Scale):
                step = MobiusTransform.scaling(atom.k)
            elif isinstance(atom, Shift):
                step = MobiusTransform.translation(atom.c)
            elif isinstance(atom, DiscToHalfPlane):
                step = MobiusTransform(-1, 1, 1, 1)
            elif isinstance(atom, HalfPlaneToDisc):
                step = MobiusTransform(1, -1, -1, -1)
            else:
                return None
            m = step.compose(m)
        return m

    def conjugate_mobius(self, f: MobiusTransform) -> MobiusTransform | None:
        """phi o f o phi^{-1} exactly, when the whole chain is Mobius."""
        m = self.as_mobius()
        if m is None:
            return None
        return m.compose(f).compose(m.inverse())

    def conjugated(self, source_map):
        """phi o F o phi^{-1} as a callable on target points; F acts on the
        source (any callable on complex arrays)."""

        def mapped(w):
            return self.apply(source_map(self.apply_inverse(w)))

        return mapped

    def to_dict(self) -> dict:
        return {
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "atoms": [a.to_dict() for a in self.atoms],
        }

    @staticmethod
    def from_dict(data: dict) -> "MapChain":
        return MapChain(
            [atom_from_dict(a) for a in data["atoms"]],
            CanonicalSurface.from_dict(data["source"]),
            CanonicalSurface.from_dict(data["target"]),
        )


def identity_chain(surface: CanonicalSurface) -> MapChain:
    return MapChain([], surface, surface)


def check_conformal(chain: MapChain, pts, h: float = 1e-6) -> dict:
    """Finite-difference conformality report over sample points.

    Wirtinger derivatives from central differences: dbar should vanish and
    d should match ``chain.deriv``; this route shares no code with deriv.
    """
    pts = np.asarray(pts, dtype=complex).ravel()
    fx = (chain.apply(pts + h) - chain.apply(pts - h)) / (2 * h)
    fy = (chain.apply(pts + 1j * h) - chain.apply(pts - 1j * h)) / (2 * h)
    dbar = 0.5 * (fx + 1j * fy)
    d = 0.5 * (fx - 1j * fy)
    analytic = chain.deriv(pts)
    return {
        "max_dbar": float(np.max(np.abs(dbar))),
        "min_deriv": float(np.min(np.abs(analytic))),
        "max_deriv_mismatch": float(
            np.max(np.abs(d - analytic) / (1 + np.abs(analytic)))),
        "n_points": int(pts.size),
    }


def cylinder_mod(w, period: float = TWO_PI):
    """Reduce Re w into [0, period) (cylinder representative)."""
    w = np.asarray(w, dtype=complex)
    out = (w.real % abs(period)) + 1j * w.imag
    return complex(out) if out.ndim == 0 else out


def cylinder_gap(a, b, period: float = TWO_PI) -> float:
    """Distance on the cylinder of circumference |period|."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    p = abs(period)
    dx = np.abs(((a.real - b.real) + p / 2) % p - p / 2)
    return float(np.max(np.hypot(dx, a.imag - b.imag)))
