import json
import math

import numpy as np
import pytest

from hkvf import surfaces
from hkvf.geometry import ConformalMetric, ODEOptions, VectorField
from hkvf.verify import (
    VerifyOptions,
    check_boundary_complete,
    check_complete,
    check_killing,
    check_nonzero,
    check_slip,
    default_seeds,
    detect_periodic,
    first_return_time,
    flow_on_surface,
    sample_boundary,
    sample_interior_grid,
    verify,
)

ROT = VectorField.rotational()


def metric(surface, lam: str) -> ConformalMetric:
    return ConformalMetric(surface, lam)


# -- sampling -------------------------------------------------------------------

def test_grid_respects_membership():
    for surf in (surfaces.disc(), surfaces.annulus(0.5), surfaces.half_plane_open(),
                 surfaces.channel_open(), surfaces.punctured_disc()):
        pts = sample_interior_grid(surf, n=21)
        assert pts.size > 50
        assert all(surf.contains(z) for z in pts)
        for p in surf.punctures:
            assert np.min(np.abs(pts - p)) > 1e-6


def test_grid_torus_covers_fundamental_domain():
    surf = surfaces.torus(2.0, 2j)
    pts = sample_interior_grid(surf, n=9)
    assert pts.size == 81
    assert all(surf.contains(z) for z in pts)


def test_boundary_samples_sit_on_boundary():
    surf = surfaces.closed_annulus(0.25)
    comps = sample_boundary(surf, n=16)
    assert len(comps) == 2
    for comp, ss, pts in comps:
        assert all(surf.on_boundary(q) for q in pts)
        # inward normal points into the interior
        q = pts[0]
        nudged = q + 1e-6 * comp.normal_at(ss[0])
        assert surf.contains(nudged)


# -- killing --------------------------------------------------------------------

def test_killing_rotation_on_poincare_disc():
    g = metric(surfaces.disc(), "2/(1-r^2)")
    res = check_killing(g, ROT)
    assert res.status == "pass"
    assert res.worst < 1e-10


def test_killing_rejects_shear():
    g = metric(surfaces.plane(), "1")
    res = check_killing(g, VectorField("y", "0"))
    assert res.status == "fail"
    assert res.worst > 0.1


def test_killing_inconclusive_on_bad_metric_expression():
    # lambda = 1/x blows up on the x = 0 grid line of the disc
    g = metric(surfaces.disc(), "1/x")
    res = check_killing(g, ROT)
    assert res.status == "inconclusive"


# -- nonzero ----------------------------------------------------------------------

def test_nonzero_passes_despite_interior_zero():
    # the rotation field vanishes at 0, which is a grid point; one
    # nonzero sample anywhere must be enough
    surf = surfaces.disc()
    grid = sample_interior_grid(surf, n=41)
    assert np.min(np.abs(grid)) == 0.0
    res = check_nonzero(ROT, grid)
    assert res.status == "pass"
    assert res.witness is not None
    assert abs(ROT.at(res.witness)) > 1e-10


def test_nonzero_fails_for_zero_field():
    grid = sample_interior_grid(surfaces.disc(), n=21)
    res = check_nonzero(VectorField("0", "0"), grid)
    assert res.status == "fail"
    assert res.witness is None


def test_nonzero_degenerate_grid_warns():
    # rotation restricted to the single sample {0} looks like the zero
    # field; the failure must flag the grid as too small to trust
    res = check_nonzero(ROT, np.array([0j]))
    assert res.status == "fail"
    assert "warning" in res.detail


# -- slip -------------------------------------------------------------------------

def test_slip_rotation_tangent_to_circles():
    g = metric(surfaces.closed_annulus(0.5), "1/r")
    res = check_slip(g, ROT)
    assert res.status == "pass"
    assert res.worst < 1e-12


def test_slip_not_applicable_without_boundary():
    g = metric(surfaces.plane(), "1")
    res = check_slip(g, ROT)
    assert res.status == "not_applicable"
    assert res.passed


def test_slip_flags_radial_flow_through_rim():
    # w -> -w^2 on the closed unit disc about a puncture: at w = 1 the
    # field is the inward normal itself, slip product of size one
    g = metric(surfaces.punctured_closed_disc(), "1/r^2")
    X = VectorField("-(x^2 - y^2)", "-2*x*y")
    res = check_slip(g, X)
    assert res.status == "fail"
    assert res.worst > 0.5
    assert res.witness is not None


# -- completeness -----------------------------------------------------------------

def test_complete_rotation_on_disc():
    g = metric(surfaces.disc(), "2/(1-r^2)")
    res = check_complete(g, ROT)
    assert res.status == "pass"


def test_escape_through_puncture_time_and_point():
    # unit-speed flow toward the origin from -1 reaches the puncture at t = 1
    g = metric(surfaces.punctured_plane(), "1")
    X = VectorField("1", "0")
    opts = VerifyOptions(seeds=(-1.0 + 0j,))
    res = check_complete(g, X, opts)
    assert res.status == "fail"
    assert res.escape_time == pytest.approx(1.0, abs=1e-3)
    assert abs(res.escape_point) < 1e-3
    assert "puncture" in res.detail


def test_escape_time_robust_under_tolerance_halving():
    g = metric(surfaces.punctured_plane(), "1")
    X = VectorField("1", "0")
    times = []
    for scale in (1.0, 0.5):
        ode = ODEOptions(rtol=1e-9 * scale, atol=1e-9 * scale)
        opts = VerifyOptions(seeds=(-1.0 + 0j,), ode=ode)
        res = check_complete(g, X, opts)
        assert res.status == "fail"
        times.append(res.escape_time)
    assert abs(times[0] - times[1]) < 1e-4


def test_escape_to_infinity():
    g = metric(surfaces.plane(), "1")
    X = VectorField("x", "y")  # z' = z, exponential blow-up
    out = flow_on_surface(g.surface, X, 1.0 + 0j, 50.0)
    assert out.escaped
    assert out.reason == "infinity"
    assert out.escape_time == pytest.approx(math.log(1e6), abs=1e-3)


def test_escape_through_open_edge():
    g = metric(surfaces.disc(), "1")
    X = VectorField("1", "0")
    res = check_complete(g, X, VerifyOptions(seeds=(0j,)))
    assert res.status == "fail"
    assert res.escape_time == pytest.approx(1.0, abs=1e-6)
    assert abs(res.escape_point - 1.0) < 1e-6


def test_sphere_flow_passes_through_infinity():
    # z' = z^2 leaves every bounded chart yet is complete on the sphere
    g = metric(surfaces.riemann_sphere(), "2/(1+r^2)")
    X = VectorField("x^2 - y^2", "2*x*y")
    out = flow_on_surface(g.surface, X, 0.5 + 0j, 50.0)
    assert not out.escaped
    out = flow_on_surface(g.surface, X, 0.5 + 0j, -50.0)
    assert not out.escaped


def test_boundary_complete_circle():
    g = metric(surfaces.closed_disc(), "1")
    res = check_boundary_complete(g, ROT)
    assert res.status == "pass"


def test_boundary_complete_not_applicable():
    g = metric(surfaces.cylinder(), "1")
    res = check_boundary_complete(g, ROT)
    assert res.status == "not_applicable"


def test_boundary_complete_catches_blowup_on_edge():
    # X = (0, y^2) is tangent to the wall x = 0 but its restriction
    # y' = y^2 blows up in finite time
    g = metric(surfaces.half_plane_closed(), "1")
    X = VectorField("0", "y^2")
    res = check_boundary_complete(g, X)
    assert res.status == "fail"
    assert res.escape_time is not None
    assert res.escape_point is not None
    assert res.escape_point.real == pytest.approx(0.0, abs=1e-9)


# -- periodicity ------------------------------------------------------------------

def test_first_return_of_rotation_is_two_pi():
    t = first_return_time(surfaces.disc(), ROT, 0.4 + 0.1j)
    assert t == pytest.approx(2 * math.pi, abs=1e-7)


def test_first_return_none_for_translation():
    t = first_return_time(surfaces.half_plane_open(), VectorField.translational(),
                          1.0 + 0j)
    assert t is None


def test_periodic_detection_seed_invariant():
    g = metric(surfaces.disc(), "2/(1-r^2)")
    rep = detect_periodic(g, ROT)
    assert rep.periodic
    assert rep.period == pytest.approx(2 * math.pi, abs=1e-6)
    times = [t for _, t in rep.per_seed if t is not None]
    assert max(times) - min(times) < 1e-6
    assert rep.witness is not None


def test_periodic_on_cylinder_wraps():
    g = metric(surfaces.cylinder(), "1")
    rep = detect_periodic(g, VectorField("1", "0"))
    assert rep.periodic
    assert rep.period == pytest.approx(2 * math.pi, abs=1e-6)


# -- full verdicts ----------------------------------------------------------------

ROTATION_PAIRS = [
    (surfaces.disc(), "2/(1-r^2)"),
    (surfaces.plane(), "2/(1+r^2)"),
    (surfaces.riemann_sphere(), "2/(1+r^2)"),
    (surfaces.closed_disc(), "1"),
    (surfaces.closed_annulus(0.5), "1/r"),
]


@pytest.mark.parametrize("surf,lam", ROTATION_PAIRS,
                         ids=[s.kind for s, _ in ROTATION_PAIRS])
def test_rotation_pairs_are_hkvf(surf, lam):
    rep = verify(metric(surf, lam), ROT)
    assert rep.is_hkvf
    assert rep.periodic is not None and rep.periodic.periodic
    assert rep.periodic.period == pytest.approx(2 * math.pi, abs=1e-6)


def test_translation_pair_on_half_plane():
    rep = verify(metric(surfaces.half_plane_open(), "1/x"),
                 VectorField.translational())
    assert rep.is_hkvf
    assert not rep.periodic.periodic


def test_radial_counterexample_fails_only_slip():
    g = metric(surfaces.punctured_closed_disc(), "1/r^2")
    X = VectorField("-(x^2 - y^2)", "-2*x*y")
    rep = verify(g, X)
    assert not rep.is_hkvf
    assert rep.check("killing").passed
    assert rep.check("nonzero").passed
    assert not rep.check("slip").passed
    assert rep.check("complete").passed
    assert rep.check("boundary_complete").passed


def test_incomplete_counterexample_fails_only_completeness():
    g = metric(surfaces.punctured_plane(), "1")
    X = VectorField("1", "0")
    rep = verify(g, X, VerifyOptions(seeds=(-1.0 + 0j, -2.0 + 0.0j)))
    assert not rep.is_hkvf
    assert rep.check("killing").passed
    assert rep.check("slip").passed
    assert not rep.check("complete").passed
    assert rep.check("complete").escape_time == pytest.approx(1.0, abs=1e-3)


def test_report_serialization_round_trips():
    rep = verify(metric(surfaces.disc(), "2/(1-r^2)"), ROT)
    blob = json.dumps(rep.to_dict(), sort_keys=True)
    data = json.loads(blob)
    assert data["is_hkvf"] is True
    assert data["inconclusive"] is False
    names = [c["name"] for c in data["checks"]]
    assert names == ["killing", "nonzero", "slip", "complete", "boundary_complete"]
    nz = data["checks"][1]
    assert "witness" in nz
    assert data["periodic"]["period"] == pytest.approx(2 * math.pi, abs=1e-6)


def test_default_seeds_live_on_surface():
    for surf in (surfaces.riemann_sphere(), surfaces.disc(), surfaces.annulus(0.3),
                 surfaces.torus(2.0, 1j), surfaces.channel_closed(),
                 surfaces.punctured_disc(), surfaces.half_plane_closed()):
        for s in default_seeds(surf):
            assert surf.contains(s)
