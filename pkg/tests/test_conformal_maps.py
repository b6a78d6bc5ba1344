import numpy as np
import pytest

from hkvf import surfaces
from hkvf.conformal_maps import (
    ChannelToDisc,
    Conj,
    AntiConformalAtom,
    CylinderToPuncturedPlane,
    DiscToChannel,
    DiscToHalfPlane,
    DomainEscape,
    ExpMap,
    HalfPlaneToDisc,
    LogMap,
    MapChain,
    MobiusAtom,
    PuncturedPlaneToCylinder,
    Scale,
    Shift,
    SpiralToCylinder,
    check_conformal,
    cylinder_gap,
    cylinder_mod,
    identity_chain,
)
from hkvf.mobius import MobiusTransform


def _disc_grid(n=9, rmax=0.85):
    rs = np.linspace(0.1, rmax, n)
    ths = np.linspace(0.1, 2 * np.pi - 0.1, n)
    R, T = np.meshgrid(rs, ths)
    return (R * np.exp(1j * T)).ravel()


def test_disc_half_plane_values():
    f = DiscToHalfPlane()
    assert f.forward(0j) == pytest.approx(1)
    assert f.forward(1j) == pytest.approx(-1j)   # (1 - i)/(1 + i)
    g = HalfPlaneToDisc()
    assert g.forward(1 + 0j) == pytest.approx(0)
    z = 0.3 - 0.4j
    assert g.forward(f.forward(z)) == pytest.approx(z)
    # derivative chain: (g o f)' = 1
    w = f.forward(z)
    assert f.deriv(z) * g.deriv(w) == pytest.approx(1)


def test_disc_boundary_to_imaginary_axis():
    f = DiscToHalfPlane()
    # theta = pi is the pole (z = -1 maps to infinity), keep off it
    for th in np.linspace(0.2, 2 * np.pi - 0.2, 8):
        w = f.forward(np.exp(1j * th))
        assert abs(w.real) < 1e-12


def test_disc_channel_values():
    f = DiscToChannel()
    assert f.forward(0j) == pytest.approx(np.pi)
    g = ChannelToDisc()
    assert g.forward(np.pi + 0j) == pytest.approx(0)
    z = -0.2 + 0.5j
    w = f.forward(z)
    assert 0 < w.real < 2 * np.pi
    assert g.forward(w) == pytest.approx(z)
    assert f.deriv(z) * g.deriv(w) == pytest.approx(1)


def test_channel_covers_full_width():
    f = DiscToChannel()
    ws = f.forward(_disc_grid(25, rmax=0.999))
    assert ws.real.min() < 0.1
    assert ws.real.max() > 2 * np.pi - 0.1


def test_log_cylinder_values():
    f = PuncturedPlaneToCylinder()
    assert f.forward(np.e + 0j) == pytest.approx(-1j)
    assert f.forward(1 + 0j) == pytest.approx(0)
    g = CylinderToPuncturedPlane()
    assert g.forward(-1j + 0j) == pytest.approx(np.e)
    z = 0.4 + 0.9j
    assert g.forward(f.forward(z)) == pytest.approx(z)
    # unit circle lands on the Im = 0 circle of the cylinder
    assert abs(f.forward(np.exp(1j * 2.1)).imag) < 1e-12


def test_spiral_straightening():
    # F(e^{vt} z) = F(z) + it modulo the cylinder period
    v = -0.7
    f = SpiralToCylinder(v)
    zs = _disc_grid(7, rmax=0.9) + 1.0  # keep away from 0
    for t in (0.3, 1.1):
        lhs = f.forward(np.exp(v * t) * zs)
        rhs = f.forward(zs) + 1j * t
        assert cylinder_gap(lhs, rhs, f.period) < 1e-9


def test_parabolic_conjugates_to_translation():
    # disc_to_half_plane turns the boundary-parabolic family into w - 2i theta
    th = 0.8
    f = MobiusTransform(1 + 1j * th, 1j * th, -1j * th, 1 - 1j * th)
    chain = MapChain([DiscToHalfPlane()], surfaces.disc(), surfaces.half_plane_open())
    conj = chain.conjugate_mobius(f)
    expected = MobiusTransform.translation(-2j * th)
    assert conj == expected or np.allclose(conj.to_floats(), expected.to_floats(), atol=1e-12)


def test_hyperbolic_conjugates_to_translation():
    # disc_to_channel turns (z + c)/(cz + 1) into w + i theta,
    # theta = -2 log((1-c)/(1+c)); c = 1/2 gives theta = 2 log 3
    c = 0.5
    th = 2 * np.log(3.0)
    f = MobiusTransform(1, c, c, 1)
    chain = MapChain([DiscToChannel()], surfaces.disc(), surfaces.channel_open())
    mapped = chain.conjugated(lambda z: (f.a * z + f.b) / (f.c * z + f.d))
    xs = np.linspace(0.4, 2 * np.pi - 0.4, 9)
    ys = np.linspace(-1.0, 1.0, 5)
    W = (xs[:, None] + 1j * ys[None, :]).ravel()
    assert np.max(np.abs(mapped(W) - (W + 1j * th))) < 1e-9


def test_chain_apply_and_deriv():
    chain = MapChain(
        [Shift(0.2), Scale(2j), MobiusAtom(MobiusTransform(1, 1j, 0, 1))],
        surfaces.plane(), surfaces.plane())
    z = 0.3 - 0.1j
    assert chain.apply(z) == pytest.approx(2j * (z + 0.2) + 1j)
    assert chain.deriv(z) == pytest.approx(2j)
    assert chain.apply_inverse(chain.apply(z)) == pytest.approx(z)
    m = chain.as_mobius()
    assert m is not None
    assert m(z) == pytest.approx(chain.apply(z))


def test_chain_with_log_is_not_mobius():
    chain = MapChain([LogMap()], surfaces.punctured_plane(), surfaces.plane())
    assert chain.as_mobius() is None
    assert chain.apply(np.e + 0j) == pytest.approx(1.0)
    assert MapChain([ExpMap()], surfaces.plane(), surfaces.plane()).apply(0j) == pytest.approx(1.0)


def test_domain_validation():
    chain = MapChain([DiscToHalfPlane()], surfaces.disc(), surfaces.half_plane_open())
    with pytest.raises(DomainEscape):
        chain.apply(np.array([1.5 + 0j]), validate=True)
    chain.apply(np.array([1.5 + 0j]))  # unchecked by default


def test_conj_atom():
    c = Conj()
    assert c.forward(1 + 2j) == 1 - 2j
    with pytest.raises(AntiConformalAtom):
        c.deriv(0j)


def test_pulled_lambda_poincare_models():
    # hyperbolic disc factor 2/(1-|z|^2) becomes 1/Re(w) on the half plane
    chain = MapChain([DiscToHalfPlane()], surfaces.disc(), surfaces.half_plane_open())
    lam = lambda z: 2.0 / (1.0 - np.abs(z) ** 2)
    for w in (1 + 0j, 2 + 1j, 0.5 - 0.3j):
        assert chain.pulled_lambda(lam, w) == pytest.approx(1.0 / w.real)


def test_check_conformal():
    grid = _disc_grid(9, rmax=0.8)
    chain = MapChain([DiscToChannel()], surfaces.disc(), surfaces.channel_open())
    rep = check_conformal(chain, grid)
    assert rep["max_dbar"] < 1e-6
    assert rep["max_deriv_mismatch"] < 1e-6
    assert rep["min_deriv"] > 0
    conj_chain = MapChain([Conj()], surfaces.plane(), surfaces.plane())
    fx = (conj_chain.apply(grid + 1e-6) - conj_chain.apply(grid - 1e-6)) / 2e-6
    assert np.allclose(fx, 1.0)  # dbar of conj is 1, nowhere near conformal


def test_serialization_roundtrip():
    chain = MapChain(
        [MobiusAtom(MobiusTransform(1, 0.5, 0.5, 1)), DiscToChannel(),
         Shift(1j), SpiralToCylinder(-2.0)],
        surfaces.disc(), surfaces.cylinder())
    data = chain.to_dict()
    back = MapChain.from_dict(data)
    assert [a.kind for a in back.atoms] == [a.kind for a in chain.atoms]
    z = 0.1 + 0.2j
    assert back.apply(z) == pytest.approx(chain.apply(z))
    assert back.source == chain.source and back.target == chain.target


def test_cylinder_mod_and_gap():
    w = cylinder_mod(7.0 + 2j)
    assert w == pytest.approx((7.0 - 2 * np.pi) + 2j)
    assert cylinder_gap(0.1 + 1j, (2 * np.pi - 0.1) + 1j) == pytest.approx(0.2)
    assert identity_chain(surfaces.disc()).apply(0.5 + 0j) == 0.5


def test_conjugate_mobius_identity_on_identity_chain():
    f = MobiusTransform(1, 1j, 0, 1)
    conj = identity_chain(surfaces.plane()).conjugate_mobius(f)
    assert conj == f
