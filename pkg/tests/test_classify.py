import json
import math

import numpy as np
import pytest

from hkvf import surfaces
from hkvf.classify import (
    ROTATION,
    TRANSLATION,
    CutSpec,
    FixedPointInDomain,
    GeodesicEscape,
    InvalidCut,
    NonOrthogonal,
    NotHkvf,
    ReductionMismatch,
    SymmetryMismatch,
    TorusFixedPoint,
    annulus_alpha_constraint,
    canonical_coordinates,
    circle_invariance_defect,
    classify_flow,
    collar_extend,
    cut_boundary_case,
)
from hkvf.conformal_maps import MapChain
from hkvf.geometry import ConformalMetric, VectorField
from hkvf.verify import PeriodicityReport, VerificationReport

ROT = VectorField.rotational()
TRA = VectorField.translational()
TWO_PI = 2.0 * math.pi


def metric(surface, lam):
    return ConformalMetric(surface, lam)


def run(surface, lam, X):
    return classify_flow(surface, metric(surface, lam), X)


def fake_pass(surface, periodic, period=None):
    # hand-built report for routes that real verification cannot reach
    return VerificationReport(surface, True, [],
                              PeriodicityReport(periodic, period, []))


# -- rotation round trips ----------------------------------------------------------


def test_sphere_rotation_roundtrip():
    res = run(surfaces.riemann_sphere(), "2/(1+r^2)", ROT)
    assert res.target.kind == "riemann_sphere"
    assert res.normal_form == ROTATION
    assert res.periodic_branch
    assert res.chain.atoms == []
    assert res.rescale == pytest.approx(1.0, abs=1e-7)
    assert res.residuals["normal_form"] < 1e-6
    assert res.residuals["symmetry"] < 1e-6


def test_sphere_tilted_axis():
    # rotation fixing the antipodal pair -1, 1: generator i(z^2-1)/2
    X = VectorField("-x*y", "(x^2 - y^2 - 1)/2")
    res = run(surfaces.riemann_sphere(), "2/(1+r^2)", X)
    assert res.target.kind == "riemann_sphere"
    assert res.normal_form == ROTATION
    assert abs(res.rescale) == pytest.approx(1.0, abs=1e-6)
    assert len(res.chain.atoms) == 1
    assert abs(res.chain.apply(-1.0 + 0j)) < 1e-7


def test_plane_flat_rotation():
    res = run(surfaces.plane(), "1", ROT)
    assert res.target.kind == "plane"
    assert res.normal_form == ROTATION
    assert res.chain.atoms == []
    assert res.rescale == pytest.approx(1.0, abs=1e-7)


def test_plane_offcenter_rotation_recentred():
    p = 0.3 - 0.4j
    lam = "1/(1 + (x-0.3)^2 + (y+0.4)^2)"
    X = VectorField("-(y+0.4)", "x-0.3")
    res = run(surfaces.plane(), lam, X)
    assert res.target.kind == "plane"
    assert res.normal_form == ROTATION
    assert abs(res.chain.apply(p)) < 1e-7
    assert res.residuals["symmetry"] < 1e-6


def test_disc_hyperbolic_metric_rotation():
    res = run(surfaces.disc(), "2/(1-r^2)", ROT)
    assert res.target.kind == "disc"
    assert res.normal_form == ROTATION
    assert res.chain.atoms == []


def test_disc_offcenter_elliptic():
    # generator i h/h' for h(z) = (z-p)/(1-pz), p = 0.3
    u = "(0.6*x*y - 1.09*y)/0.91"
    v = "(-0.3*(x^2-y^2) + 1.09*x - 0.3)/0.91"
    res = run(surfaces.disc(), "2/(1-r^2)", VectorField(u, v))
    assert res.target.kind == "disc"
    assert res.normal_form == ROTATION
    assert abs(res.chain.apply(0.3 + 0j)) < 1e-7
    assert res.rescale == pytest.approx(1.0, abs=1e-6)
    assert res.residuals["theta_additivity"] < 1e-7


def test_anchored_rotation_kinds():
    for surf, lam in (
        (surfaces.punctured_plane(), "1/r"),
        (surfaces.punctured_disc(), "1/r"),
        (surfaces.annulus(0.5), "1/r"),
        (surfaces.closed_disc(), "1"),
        (surfaces.punctured_closed_disc(), "1/r"),
        (surfaces.closed_annulus(0.5), "1/r"),
        (surfaces.semi_closed_annulus(0.5), "1/r"),
    ):
        res = run(surf, lam, ROT)
        assert res.target == surf, surf.kind
        assert res.normal_form == ROTATION
        assert res.chain.atoms == []
        assert res.rescale == pytest.approx(1.0, abs=1e-7)
        assert res.periodic_branch


def test_annulus_records_alpha_roots():
    res = run(surfaces.closed_annulus(0.5), "1/r", ROT)
    assert res.residuals["annulus_alpha_roots"] == pytest.approx(0.8)


# -- translation round trips -------------------------------------------------------


def test_plane_flat_translation():
    res = run(surfaces.plane(), "1", TRA)
    assert res.target.kind == "plane"
    assert res.normal_form == TRANSLATION
    assert res.chain.atoms == []
    assert res.rescale == pytest.approx(1.0, abs=1e-7)
    assert not res.periodic_branch


def test_plane_tilted_translation():
    X = VectorField("1", "1")
    res = run(surfaces.plane(), "1/(1 + (x-y)^2)", X)
    assert res.target.kind == "plane"
    assert res.normal_form == TRANSLATION
    assert len(res.chain.atoms) == 1
    assert res.rescale == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-7)
    assert res.residuals["symmetry"] < 1e-6


def test_vertical_strip_kinds():
    for surf in (surfaces.half_plane_closed(), surfaces.channel_semi_closed(),
                 surfaces.channel_closed()):
        res = run(surf, "1", TRA)
        assert res.target == surf
        assert res.normal_form == TRANSLATION
        assert res.chain.atoms == []
        assert res.rescale == pytest.approx(1.0, abs=1e-7)


def test_half_plane_presentation_roundtrip():
    res = run(surfaces.half_plane_open(), "1/x", TRA)
    assert res.target.kind == "half_plane_open"
    assert res.normal_form == TRANSLATION
    w = res.chain.apply(2.0 + 3.0j)
    assert w == pytest.approx(2.0 + 3.0j, abs=1e-7)


def test_channel_presentation_roundtrip():
    res = run(surfaces.channel_open(), "1", TRA)
    assert res.target.kind == "channel_open"
    assert res.normal_form == TRANSLATION
    w = res.chain.apply(1.0 + 2.0j)
    assert w == pytest.approx(1.0 + 2.0j, abs=1e-6)


def test_disc_hyperbolic_flow_to_channel():
    # generator (1-z^2)/4 fixes -1 and 1; theta rate 1
    X = VectorField("(1 - x^2 + y^2)/4", "-x*y/2")
    res = run(surfaces.disc(), "2/(1-r^2)", X)
    assert res.target.kind == "channel_open"
    assert res.normal_form == TRANSLATION
    assert res.rescale == pytest.approx(1.0, abs=1e-6)
    assert res.chain.apply(0j) == pytest.approx(math.pi, abs=1e-6)
    assert res.residuals["theta_additivity"] < 1e-7


def test_disc_parabolic_flow_to_half_plane():
    # pullback of d/dy on the right half-plane: -i(1+z)^2/2, fixes -1
    X = VectorField("(1+x)*y", "-((1+x)^2 - y^2)/2")
    res = run(surfaces.disc(), "2/(1-r^2)", X)
    assert res.target.kind == "half_plane_open"
    assert res.normal_form == TRANSLATION
    assert res.rescale == pytest.approx(1.0, abs=1e-6)
    assert res.chain.apply(0j) == pytest.approx(1.0 + 0j, abs=1e-7)


def test_punctured_plane_spiral_to_cylinder():
    mu = 0.2 + 1.0j
    X = VectorField("0.2*x - y", "x + 0.2*y")
    res = run(surfaces.punctured_plane(), "1/r", X)
    assert res.target.kind == "cylinder"
    assert res.normal_form == TRANSLATION
    assert not res.periodic_branch
    assert abs(res.rescale) == pytest.approx(1.0 / abs(mu), abs=1e-6)
    v_hat = mu / abs(mu)
    assert res.lattice == pytest.approx(-TWO_PI / v_hat, abs=1e-6)


def test_pure_dilation_to_cylinder():
    X = VectorField("x/5", "y/5")
    res = run(surfaces.punctured_plane(), "1/r", X)
    assert res.target.kind == "cylinder"
    assert res.rescale == pytest.approx(5.0, abs=1e-5)
    assert res.lattice == pytest.approx(-TWO_PI)
    kinds = [a.kind for a in res.chain.atoms]
    assert kinds == ["spiral_to_cylinder"]


def test_cylinder_presentation_roundtrip():
    res = run(surfaces.cylinder(), "1", TRA)
    assert res.target.kind == "cylinder"
    assert res.normal_form == TRANSLATION
    assert res.rescale == pytest.approx(-1.0, abs=1e-7)
    kinds = [a.kind for a in res.chain.atoms]
    assert kinds == ["cylinder_to_punctured_plane", "spiral_to_cylinder"]


def test_torus_vertical_translation():
    surf = surfaces.torus(TWO_PI, TWO_PI * 1j)
    res = run(surf, "1", TRA)
    assert res.target.kind == "torus"
    assert res.target.pi1 == pytest.approx(TWO_PI)
    assert res.target.pi2 == pytest.approx(TWO_PI * 1j)
    assert res.normal_form == TRANSLATION
    assert res.chain.atoms == []
    assert res.rescale == pytest.approx(1.0, abs=1e-7)
    assert res.periodic_branch  # periodic, yet the form stays translational


def test_torus_diagonal_flow_rescales_lattice():
    surf = surfaces.torus(TWO_PI, TWO_PI * 1j)
    res = run(surf, "1", VectorField("1", "1"))
    assert res.target.kind == "torus"
    assert res.normal_form == TRANSLATION
    assert res.rescale == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-7)
    assert abs(res.target.pi1) == pytest.approx(TWO_PI, abs=1e-6)
    assert abs(res.target.pi2) == pytest.approx(TWO_PI, abs=1e-6)
    assert res.residuals["normal_form"] < 1e-6


# -- rejection paths ---------------------------------------------------------------


def test_not_hkvf_raises():
    with pytest.raises(NotHkvf):
        run(surfaces.plane(), "1", VectorField("x", "y"))


def test_torus_rotation_like_lift_raises():
    surf = surfaces.torus(TWO_PI, TWO_PI * 1j)
    g = metric(surf, "1")
    with pytest.raises(TorusFixedPoint):
        classify_flow(surf, g, ROT, report=fake_pass(surf, True, TWO_PI))


def test_closed_disc_rejects_non_elliptic():
    surf = surfaces.closed_disc()
    g = metric(surf, "2/(1-r^2)")
    X = VectorField("(1 - x^2 + y^2)/4", "-x*y/2")
    with pytest.raises(ReductionMismatch, match="elliptic"):
        classify_flow(surf, g, X, report=fake_pass(surf, False))


def test_symmetry_mismatch_detected():
    surf = surfaces.plane()
    g = metric(surf, "1/(1 + x^2 + y^2)")
    with pytest.raises(SymmetryMismatch):
        classify_flow(surf, g, TRA, report=fake_pass(surf, False))


def test_surface_metric_mismatch():
    with pytest.raises(ValueError):
        classify_flow(surfaces.plane(), metric(surfaces.disc(), "1"), ROT)


# -- serialization -----------------------------------------------------------------


def test_result_serializes_to_json():
    res = run(surfaces.plane(), "1", ROT)
    data = res.to_dict()
    blob = json.dumps(data, sort_keys=True)
    assert json.loads(blob)["normal_form"] == ROTATION
    assert "lattice" not in data
    chain = MapChain.from_dict(data["chain"])
    assert chain.apply(0.5 + 0.5j) == pytest.approx(
        res.chain.apply(0.5 + 0.5j))
    assert len(data["lambda_profile"]) == 101


def test_spiral_result_records_lattice():
    res = run(surfaces.cylinder(), "1", TRA)
    data = res.to_dict()
    assert data["lattice"] == pytest.approx([-TWO_PI, 0.0])


# -- band coordinates --------------------------------------------------------------


def test_band_coordinates_sphere():
    res = run(surfaces.riemann_sphere(), "2/(1+r^2)", ROT)
    cc = canonical_coordinates(res)
    assert cc.vertical_periodic
    assert cc.residual < 1e-6
    for x1, lamE in cc.profile:
        expected = 2.0 * math.exp(x1) / (1.0 + math.exp(2.0 * x1))
        assert lamE == pytest.approx(expected, abs=1e-9)


def test_band_coordinates_flat_punctured_disc():
    # flat metric on the punctured disc unrolls to lambda_E = e^{x1} on x1 < 0
    res = run(surfaces.punctured_disc(), "1", ROT)
    cc = canonical_coordinates(res)
    assert cc.band[1] <= 0.0
    for x1, lamE in cc.profile:
        assert lamE == pytest.approx(math.exp(x1), abs=1e-9)


def test_band_coordinates_cone_metric_is_flat():
    res = run(surfaces.punctured_plane(), "1/r", ROT)
    cc = canonical_coordinates(res)
    for _, lamE in cc.profile:
        assert lamE == pytest.approx(1.0, abs=1e-9)


def test_band_coordinates_translation():
    res = run(surfaces.half_plane_closed(), "1", TRA)
    cc = canonical_coordinates(res)
    assert not cc.vertical_periodic
    assert cc.residual < 1e-6
    assert cc.band == pytest.approx((0.0, 3.0))


def test_band_coordinates_fixed_point_guard():
    res = run(surfaces.plane(), "1", TRA)
    with pytest.raises(FixedPointInDomain):
        canonical_coordinates(res, ROT)  # |ROT| vanishes at 0 inside the band


# -- collar charts -----------------------------------------------------------------


def test_collar_flat_half_plane():
    g = metric(surfaces.half_plane_closed(), "1")
    chart = collar_extend(g, TRA, 0j, eps=0.3)
    assert chart.conformality_residual < 1e-6
    assert chart.orthogonality_max < 1e-10
    for t, f in chart.f_samples:
        assert f == pytest.approx(t, abs=1e-9)
    j0 = chart.depth_values.index(0.0)
    for i, x in enumerate(chart.flow_values):
        assert chart.grid[j0][i] == pytest.approx(1j * x, abs=1e-8)


def test_collar_flat_annulus_log_profile():
    g = metric(surfaces.closed_annulus(0.5), "1")
    chart = collar_extend(g, ROT, 1.0 + 0j, eps=0.3)
    assert chart.conformality_residual < 1e-5
    assert chart.orthogonality_max < 1e-8
    for t, f in chart.f_samples:
        assert f == pytest.approx(-math.log1p(-t), abs=1e-8)
    j0 = chart.depth_values.index(0.0)
    for i, x in enumerate(chart.flow_values):
        assert chart.grid[j0][i] == pytest.approx(np.exp(1j * x), abs=1e-8)


def test_collar_inner_edge_of_annulus():
    g = metric(surfaces.closed_annulus(0.5), "1")
    chart = collar_extend(g, ROT, 0.5 + 0j, eps=0.2)
    assert chart.conformality_residual < 1e-5


def test_collar_geodesic_escape():
    g = metric(surfaces.closed_annulus(0.5), "1")
    with pytest.raises(GeodesicEscape):
        collar_extend(g, ROT, 1.0 + 0j, eps=0.6)


def test_collar_non_orthogonal_field():
    g = metric(surfaces.half_plane_closed(), "1")
    with pytest.raises(NonOrthogonal):
        collar_extend(g, VectorField("1", "1"), 0j, eps=0.2)


def test_collar_vanishing_base_point():
    g = metric(surfaces.half_plane_closed(), "1")
    with pytest.raises(ValueError):
        collar_extend(g, VectorField("x", "0"), 0j, eps=0.2)


def test_collar_off_boundary_point():
    g = metric(surfaces.half_plane_closed(), "1")
    with pytest.raises(ValueError):
        collar_extend(g, TRA, 1.0 + 0j, eps=0.2)


# -- annulus alpha constraint ------------------------------------------------------


def test_alpha_constraint_roots():
    zero, root = annulus_alpha_constraint(0.5)
    assert zero == 0.0
    assert root == pytest.approx(0.8, abs=1e-12)
    with pytest.raises(ValueError):
        annulus_alpha_constraint(1.5)


def test_alpha_zero_preserves_both_circles():
    assert circle_invariance_defect(0.5, 0.0) < 1e-12
    assert circle_invariance_defect(0.5, 0.0, theta=1.2) < 1e-12


def test_alpha_nonzero_root_breaks_a_circle():
    # the nonzero root maps the inner point back, but not the whole circle
    assert circle_invariance_defect(0.5, 0.8) > 0.1


# -- cuts along orbits -------------------------------------------------------------


def test_cut_plane_circle_inner():
    out = cut_boundary_case(surfaces.plane(), ROTATION,
                            CutSpec("circle", (3.0,), "inner"))
    assert out.kind == "closed_disc"


def test_cut_plane_circle_outer():
    out = cut_boundary_case(surfaces.plane(), ROTATION,
                            CutSpec("circle", (3.0,), "outer"))
    assert out.kind == "punctured_closed_disc"


def test_cut_punctured_plane_two_circles():
    out = cut_boundary_case(surfaces.punctured_plane(), ROTATION,
                            CutSpec("circle", (1.0, 0.5)))
    assert out.kind == "closed_annulus"
    assert out.rho == pytest.approx(0.5)


def test_cut_sphere_outer_cap():
    out = cut_boundary_case(surfaces.riemann_sphere(), ROTATION,
                            CutSpec("circle", (2.0,), "outer"))
    assert out.kind == "closed_disc"


def test_cut_disc_keep_outer_ring():
    out = cut_boundary_case(surfaces.disc(), ROTATION,
                            CutSpec("circle", (0.7,), "outer"))
    assert out.kind == "semi_closed_annulus"
    assert out.rho == pytest.approx(0.7)


def test_cut_annulus_keep_inner_inverts():
    out = cut_boundary_case(surfaces.annulus(0.5), ROTATION,
                            CutSpec("circle", (0.8,), "inner"))
    assert out.kind == "semi_closed_annulus"
    assert out.rho == pytest.approx(0.625)


def test_cut_plane_vline():
    out = cut_boundary_case(surfaces.plane(), TRANSLATION,
                            CutSpec("vline", (2.0,), "right"))
    assert out.kind == "half_plane_closed"
    out = cut_boundary_case(surfaces.plane(), TRANSLATION,
                            CutSpec("vline", (-1.0, 2.0)))
    assert out.kind == "channel_closed"


def test_cut_half_plane_keep_left():
    out = cut_boundary_case(surfaces.half_plane_open(), TRANSLATION,
                            CutSpec("vline", (5.0,), "left"))
    assert out.kind == "channel_semi_closed"


def test_cut_channel_two_lines():
    out = cut_boundary_case(surfaces.channel_open(), TRANSLATION,
                            CutSpec("vline", (1.0, 4.0)))
    assert out.kind == "channel_closed"


def test_cut_invalid_cases():
    with pytest.raises(InvalidCut):
        cut_boundary_case(surfaces.cylinder(), TRANSLATION,
                          CutSpec("circle", (1.0,), "inner"))
    with pytest.raises(InvalidCut):
        cut_boundary_case(surfaces.torus(TWO_PI, TWO_PI * 1j), TRANSLATION,
                          CutSpec("vline", (1.0,), "left"))
    with pytest.raises(InvalidCut):
        # a circle is not an orbit of the translation form
        cut_boundary_case(surfaces.plane(), TRANSLATION,
                          CutSpec("circle", (1.0,), "inner"))
    with pytest.raises(InvalidCut):
        cut_boundary_case(surfaces.annulus(0.5), ROTATION,
                          CutSpec("circle", (0.3,), "inner"))  # below rho
    with pytest.raises(InvalidCut):
        cut_boundary_case(surfaces.plane(), ROTATION,
                          CutSpec("circle", (1.0, 1.0)))
    with pytest.raises(InvalidCut):
        cut_boundary_case(surfaces.plane(), ROTATION,
                          CutSpec("circle", (1.0,)))  # keep side missing
    with pytest.raises(InvalidCut):
        cut_boundary_case(surfaces.closed_disc(), ROTATION,
                          CutSpec("circle", (0.5,), "inner"))
