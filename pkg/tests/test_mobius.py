import numpy as np
import pytest

from hkvf.mobius import (
    INF,
    ELLIPTIC,
    HYPERBOLIC,
    IDENTITY,
    LOXODROMIC,
    PARABOLIC,
    DegenerateTriple,
    IdentityHasNoFixedPointSet,
    MobiusTransform,
    SingularMatrix,
    from_three_points,
    random_transform,
)


def test_normalization_fixes_sign():
    m = MobiusTransform(-2, 0, 0, -2)
    assert m.is_identity()
    assert m.a == pytest.approx(1)
    # determinant is restored to 1
    f = MobiusTransform(3, 1, 2, 5)
    assert abs(f.a * f.d - f.b * f.c - 1) < 1e-12


def test_singular_matrix_rejected():
    with pytest.raises(SingularMatrix):
        MobiusTransform(1, 2, 2, 4)


def test_translation_compose():
    t = MobiusTransform.translation(1j)
    t2 = t.compose(t)
    assert t2(0) == pytest.approx(2j)
    assert t2(INF) is INF


def test_apply_pole_goes_to_inf():
    f = MobiusTransform(0, 1, 1, 0)  # 1/z
    assert f(0) is INF
    assert f(INF) == pytest.approx(0)
    assert f(2) == pytest.approx(0.5)


def test_parabolic_example():
    # ((1+i th) z + i th) / (-i th z + 1 - i th) fixes exactly -1
    th = 1.0
    f = MobiusTransform(1 + 1j * th, 1j * th, -1j * th, 1 - 1j * th)
    assert f.trace == pytest.approx(2)
    assert f.fixed_points() == [pytest.approx(-1 + 0j)]
    assert f.classify().kind == PARABOLIC
    assert f(-1) == pytest.approx(-1)


def test_hyperbolic_example():
    # (z + c)/(cz + 1) with c = 1/2: trace 4/sqrt(3), fixed points -1, 1
    h = MobiusTransform(1, 0.5, 0.5, 1)
    assert h.trace == pytest.approx(4 / np.sqrt(3))
    fps = h.fixed_points()
    assert fps == [pytest.approx(-1 + 0j), pytest.approx(1 + 0j)]
    assert h.classify().kind == HYPERBOLIC


def test_rotation_is_elliptic():
    r = MobiusTransform(np.exp(1j * 0.7), 0, 0, 1)
    cls = r.classify()
    assert cls.kind == ELLIPTIC
    assert cls.fixed_points[0] == pytest.approx(0)
    assert cls.fixed_points[1] is INF


def test_loxodromic():
    f = MobiusTransform(2 * np.exp(1j * 0.5), 0, 0, 1)
    assert f.classify().kind == LOXODROMIC


def test_identity_classification_and_fixed_point_error():
    m = MobiusTransform.identity()
    assert m.classify().kind == IDENTITY
    with pytest.raises(IdentityHasNoFixedPointSet):
        m.fixed_points()


def test_fixed_point_ordering():
    # ordering is (Re, Im) lexicographic with INF last
    f = MobiusTransform(1, 0.5, 0.5, 1)
    assert f.fixed_points() == [(-1 + 0j), (1 + 0j)]
    g = MobiusTransform(2, 0, 0, 1)  # fixes 0 and INF
    fps = g.fixed_points()
    assert fps[0] == 0 and fps[1] is INF


def test_from_three_points_translation():
    g = from_three_points([0, 1, INF], [1j, 1 + 1j, INF])
    assert g(0.5) == pytest.approx(0.5 + 1j)
    assert g(INF) is INF


def test_from_three_points_rotation():
    g = from_three_points([1, 1j, -1], [1j, -1, -1j])
    z = 0.3 + 0.1j
    assert g(z) == pytest.approx(1j * z)


def test_from_three_points_degenerate():
    with pytest.raises(DegenerateTriple):
        from_three_points([0, 0, 1], [0, 1, 2])
    with pytest.raises(DegenerateTriple):
        from_three_points([INF, INF, 1], [0, 1, 2])


def test_from_three_points_hits_targets():
    rng = np.random.default_rng(7)
    for _ in range(50):
        pts = rng.standard_normal(6) * 2
        src = [complex(pts[0], pts[1]), complex(pts[2], pts[3]), INF]
        tgt = [complex(pts[4], pts[5]), INF, 0]
        try:
            g = from_three_points(src, tgt)
        except DegenerateTriple:
            continue
        assert g(src[0]) == pytest.approx(tgt[0])
        assert g(src[1]) is INF
        assert g(INF) == pytest.approx(0)


def test_group_laws_random():
    rng = np.random.default_rng(11)
    for _ in range(200):
        f = random_transform(rng)
        g = random_transform(rng)
        z = complex(*rng.standard_normal(2))
        fg = f.compose(g)
        lhs, rhs = fg(z), f(g(z))
        if lhs is INF or rhs is INF:
            continue
        assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))
        assert f.compose(f.inverse()).is_identity(1e-10)
        assert f.inverse().compose(f).is_identity(1e-10)


def test_sign_flip_gives_same_transform():
    rng = np.random.default_rng(13)
    for _ in range(100):
        f = random_transform(rng)
        g = MobiusTransform(-f.a, -f.b, -f.c, -f.d)
        assert f == g


def test_classification_conjugation_invariant():
    rng = np.random.default_rng(17)
    for _ in range(200):
        f = random_transform(rng)
        h = random_transform(rng)
        k1 = f.classify().kind
        k2 = f.conjugate_by(h).classify().kind
        assert k1 == k2


def test_trace_matches_fixed_point_count():
    # parabolic <=> double root of the fixed point quadratic
    rng = np.random.default_rng(19)
    for _ in range(1000):
        f = random_transform(rng)
        cls = f.classify()
        n = len(cls.fixed_points)
        if cls.kind == PARABOLIC:
            assert n == 1
        else:
            assert n == 2


def test_parabolic_conjugate_stays_single_fixed():
    rng = np.random.default_rng(23)
    base = MobiusTransform(1, 1, 0, 1)  # z + 1
    for _ in range(100):
        h = random_transform(rng)
        g = base.conjugate_by(h)
        cls = g.classify()
        assert cls.kind == PARABOLIC
        assert len(cls.fixed_points) == 1


def test_serialization_roundtrip():
    rng = np.random.default_rng(29)
    for _ in range(50):
        f = random_transform(rng)
        g = MobiusTransform.from_floats(f.to_floats())
        assert f == g
    assert MobiusTransform.from_floats([1, 0, 0, 0, 0, 0, 1, 0]).is_identity()
