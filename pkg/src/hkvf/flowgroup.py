"""Fitting one-parameter families of plane automorphisms.

An isometric flow pushed to a model chart is a family of Mobius
transformations t -> m_t forming a group: m_{t+s} = m_t o m_s.  In an
affine chart (transforms fixing infinity) the family is
z -> a(t) z + b(t) with

    a'(t) = a'(0) a(t),  a(0) = 1,
    b'(t) = b'(0) a(t),  b(0) = 0,

so a(t) = exp(a'(0) t) and either a'(0) = 0 with b(t) = b'(0) t
(a translation family) or b is identically zero after recentering on the
fixed point (a rotation-like family).  This module recovers a'(0), b'(0)
from sampled transforms, screens non-isometric families by the
area-contraction argument, and normalizes time and direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ConformalMetric, RegionLeavesSurface, area
from .mobius import TOL_ALG, MobiusTransform

TOL_GROUP = 1e-7
TOL_FIT = 1e-6

ROTATION_LIKE = "rotation_like"
TRANSLATION_LIKE = "translation_like"


class GroupLawViolation(ValueError):
    """Samples do not compose: m_{t+s} differs from m_t o m_s."""


class InconsistentFamily(ValueError):
    """Neither exp(a'(0)t) z nor z + b'(0) t fits the samples."""


class AdditivityViolation(ValueError):
    """Angle samples do not satisfy theta(t+s) = theta(t) + theta(s)."""


class ZeroGenerator(ValueError):
    """Both derivatives at t = 0 vanish."""


@dataclass(frozen=True)
class FlowSample:
    """Transforms m_k observed at strictly increasing times t_k, t_0 = 0."""

    times: tuple
    transforms: tuple

    def __post_init__(self):
        if len(self.times) != len(self.transforms):
            raise ValueError("times and transforms differ in length")
        if len(self.times) < 2:
            raise ValueError("need at least two samples")
        ts = np.asarray(self.times, dtype=float)
        if np.any(np.diff(ts) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if abs(ts[0]) > 1e-15:
            raise ValueError("first sample time must be 0")
        if not self.transforms[0].is_identity(TOL_ALG):
            raise ValueError("transform at t = 0 must be the identity")

    @staticmethod
    def from_pairs(pairs) -> "FlowSample":
        pairs = sorted(pairs, key=lambda p: p[0])
        return FlowSample(tuple(float(t) for t, _ in pairs),
                          tuple(m for _, m in pairs))

    def affine_coefficients(self, tol: float = 1e-6):
        """(A_k, B_k) with m_k(z) = A_k z + B_k; error if any m_k moves infinity."""
        A, B = [], []
        for t, m in zip(self.times, self.transforms):
            scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
            if abs(m.c) > tol * scale:
                raise InconsistentFamily(
                    f"transform at t = {t} is not affine (|c| = {abs(m.c):.3g})")
            A.append(m.a / m.d)
            B.append(m.b / m.d)
        return np.asarray(A), np.asarray(B)


@dataclass(frozen=True)
class GeneratorData:
    a_dot0: complex
    b_dot0: complex
    family_kind: str
    residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "a_dot0": [self.a_dot0.real, self.a_dot0.imag],
            "b_dot0": [self.b_dot0.real, self.b_dot0.imag],
            "kind": self.family_kind,
            "residual": float(self.residual),
        }


def closed_form_transform(gen: GeneratorData, t: float) -> MobiusTransform:
    """The family member at time t implied by the generator."""
    if gen.family_kind == ROTATION_LIKE:
        return MobiusTransform(np.exp(gen.a_dot0 * t), 0.0, 0.0, 1.0)
    return MobiusTransform(1.0, gen.b_dot0 * t, 0.0, 1.0)


def sample_closed_form(gen: GeneratorData, times) -> FlowSample:
    return FlowSample(tuple(float(t) for t in times),
                      tuple(closed_form_transform(gen, t) for t in times))


def deviation_from_identity(m: MobiusTransform) -> float:
    """Distance of a unit-determinant transform from +-identity."""
    plus = max(abs(m.a - 1), abs(m.b), abs(m.c), abs(m.d - 1))
    minus = max(abs(m.a + 1), abs(m.b), abs(m.c), abs(m.d + 1))
    return min(plus, minus)


def check_group_law(sample: FlowSample, tol: float = TOL_GROUP) -> float:
    """Worst composition defect over sample pairs whose sum is sampled."""
    ts = np.asarray(sample.times)
    index = {round(float(t), 12): k for k, t in enumerate(ts)}
    worst = 0.0
    worst_pair = None
    for i in range(len(ts)):
        for j in range(i, len(ts)):
            k = index.get(round(float(ts[i] + ts[j]), 12))
            if k is None:
                continue
            composed = sample.transforms[i].compose(sample.transforms[j])
            defect = deviation_from_identity(
                sample.transforms[k].inverse().compose(composed))
            if defect > worst:
                worst, worst_pair = defect, (float(ts[i]), float(ts[j]))
    if worst > tol:
        raise GroupLawViolation(
            f"pair t = {worst_pair} composes with defect {worst:.3g} > {tol}")
    return worst


def estimate_generator(sample: FlowSample):
    """(a'(0), b'(0)) by Richardson extrapolation of forward differences.

    Uses the two smallest positive sample times; exact through the linear
    error term, so truncation is O(t^2).
    """
    A, B = sample.affine_coefficients()
    ts = np.asarray(sample.times)
    t1, t2 = ts[1], ts[2]
    da1, da2 = (A[1] - 1.0) / t1, (A[2] - 1.0) / t2
    db1, db2 = B[1] / t1, B[2] / t2
    a_dot0 = (t2 * da1 - t1 * da2) / (t2 - t1)
    b_dot0 = (t2 * db1 - t1 * db2) / (t2 - t1)
    return complex(a_dot0), complex(b_dot0)


def fit_family(sample: FlowSample, tol_fit: float = TOL_FIT,
               tol_group: float = TOL_GROUP) -> GeneratorData:
    """Recover the generator of an affine one-parameter family."""
    if len(sample.times) < 4:
        raise ValueError("need at least four sample times")
    check_group_law(sample, tol_group)
    A, B = sample.affine_coefficients()
    ts = np.asarray(sample.times)
    a_est, b_est = estimate_generator(sample)
    tt = float(np.dot(ts, ts))

    # rotation-like refinement: least squares of log A_k = a'(0) t_k,
    # branch-corrected toward the finite-difference estimate
    logs = np.log(A[1:].astype(complex))
    guide = a_est * ts[1:]
    logs += 2j * np.pi * np.round((guide - logs).imag / (2 * np.pi))
    a_fit = complex(np.dot(ts[1:], logs) / np.dot(ts[1:], ts[1:]))
    res_rot = max(float(np.max(np.abs(np.exp(a_fit * ts) - A))),
                  float(np.max(np.abs(B))))

    # translation-like refinement
    b_fit = complex(np.dot(ts, B) / tt)
    res_tra = max(float(np.max(np.abs(B - b_fit * ts))),
                  float(np.max(np.abs(A - 1.0))))

    if abs(a_est) > tol_fit:
        if res_rot <= tol_fit:
            return GeneratorData(a_fit, 0j, ROTATION_LIKE, res_rot)
    elif res_tra <= tol_fit:
        return GeneratorData(0j, b_fit, TRANSLATION_LIKE, res_tra)
    raise InconsistentFamily(
        f"rotation residual {res_rot:.3g}, translation residual {res_tra:.3g} "
        f"(tolerance {tol_fit})")


@dataclass(frozen=True)
class ScreenVerdict:
    accepted: bool
    re_a_dot0: float
    area_ratios: tuple  # (t, measured ratio or None, predicted ratio)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "re_a_dot0": self.re_a_dot0,
            "area_ratios": [
                {"t": t, "measured": m, "predicted": p}
                for t, m, p in self.area_ratios
            ],
        }


def isometry_screen(gen: GeneratorData, g: ConformalMetric,
                    radius: float = 0.5, times=(1.0, 5.0),
                    tol: float = TOL_ALG) -> ScreenVerdict:
    """Reject generators whose flow contracts or expands areas.

    A family exp(a'(0)t) z with Re a'(0) != 0 scales the Euclidean
    radius of a ball about the fixed point by exp(Re a'(0) t), so it
    cannot consist of isometries.  The measured g-area ratios of the
    flowed ball document the contraction for the report.
    """
    re = float(gen.a_dot0.real)
    ratios = []
    if gen.family_kind == ROTATION_LIKE:
        try:
            base = area(g, 0j, radius)
        except RegionLeavesSurface:
            base = None
        for t in times:
            predicted = float(np.exp(2.0 * re * t))
            measured = None
            if base is not None:
                a_t = np.exp(gen.a_dot0 * t)
                try:
                    measured = area(g, 0j, radius * abs(a_t)) / base
                except RegionLeavesSurface:
                    measured = None
            ratios.append((float(t), measured, predicted))
    else:
        # translations move balls rigidly; no scaling in any chart
        ratios = [(float(t), None, 1.0) for t in times]
    return ScreenVerdict(abs(re) <= tol, re, tuple(ratios))


def normalize_time(gen: GeneratorData, tol: float = 1e-12):
    """Scale time (and pick the conjugating rotation) for the normal form.

    Returns (normalized generator, rescale, rotation): the original flow
    at time ``rescale * t`` matches the normal form at time t after the
    chart map z -> rotation * z.  Rotation-like generators (purely
    imaginary a'(0) after the screen) normalize to a'(0) = i with a signed
    time rescale; translation-like ones to b'(0) = i via the unit rotation
    i / direction, with |b'(0)| absorbed into the rescale.
    """
    if gen.family_kind == ROTATION_LIKE:
        mu = float(gen.a_dot0.imag)
        if abs(mu) <= tol:
            raise ZeroGenerator("rotation rate vanishes")
        return GeneratorData(1j, 0j, ROTATION_LIKE), 1.0 / mu, 1.0 + 0j
    v = complex(gen.b_dot0)
    speed = abs(v)
    if speed <= tol:
        raise ZeroGenerator("translation velocity vanishes")
    rotation = 1j / (v / speed)
    return GeneratorData(0j, 1j, TRANSLATION_LIKE), 1.0 / speed, rotation


@dataclass(frozen=True)
class ThetaFit:
    theta_dot0: float
    worst_defect: float


def theta_additivity_check(times, thetas, tol: float = TOL_GROUP) -> ThetaFit:
    """Verify theta(t+s) = theta(t) + theta(s) and report the slope."""
    ts = np.asarray(times, dtype=float)
    th = np.asarray(thetas, dtype=float)
    if ts.shape != th.shape:
        raise ValueError("times and angles differ in length")
    index = {round(float(t), 12): k for k, t in enumerate(ts)}
    k0 = index.get(0.0)
    if k0 is not None and abs(th[k0]) > tol:
        raise AdditivityViolation(f"theta(0) = {th[k0]:.3g} != 0")
    worst = 0.0
    worst_pair = None
    for i in range(len(ts)):
        for j in range(i, len(ts)):
            k = index.get(round(float(ts[i] + ts[j]), 12))
            if k is None:
                continue
            defect = abs(th[k] - th[i] - th[j])
            if defect > worst:
                worst, worst_pair = defect, (float(ts[i]), float(ts[j]))
    if worst > tol:
        raise AdditivityViolation(
            f"pair t = {worst_pair} breaks additivity by {worst:.3g} > {tol}")
    slope = float(np.dot(ts, th) / np.dot(ts, ts))
    return ThetaFit(slope, worst)
