import numpy as np
import pytest

from roiskip.errors import DegenerateMapping, SingularHomography
from roiskip.geometry import (Frame, Homography, Point, bilinear_sample,
                              compose, invert, warp_frame, warp_point,
                              warp_points)


def random_homography(rng):
    # well-conditioned near-identity projective transform
    return Homography(
        a1=1.0 + rng.uniform(-0.05, 0.05), a2=rng.uniform(-0.05, 0.05),
        a3=rng.uniform(-5, 5), a4=rng.uniform(-0.05, 0.05),
        a5=1.0 + rng.uniform(-0.05, 0.05), a6=rng.uniform(-5, 5),
        a7=rng.uniform(-1e-4, 1e-4), a8=rng.uniform(-1e-4, 1e-4))


def smooth_frame(w, h, seed=0):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    plane = (128 + 50 * np.sin(xx / 9.0) * np.cos(yy / 7.0)
             + 20 * np.sin((xx + yy) / 13.0))
    plane += rng.normal(0, 1.0, plane.shape)
    return Frame(np.clip(np.rint(plane), 0, 255).astype(np.uint8))


class TestWarpPoint:
    def test_identity(self):
        p = warp_point(Homography.identity(), Point(17.0, 4.5))
        assert (p.x, p.y) == (17.0, 4.5)

    def test_translation(self):
        h = Homography.translation(5.0, -2.0)
        p = warp_point(h, Point(0.0, 0.0))
        assert (p.x, p.y) == (5.0, -2.0)

    def test_perspective_denominator(self):
        # (1·100 + 0 + 0) / (0.001·100 + 1) = 100 / 1.1
        h = Homography(a7=0.001)
        p = warp_point(h, Point(100.0, 0.0))
        assert p.x == pytest.approx(100.0 / 1.1, abs=1e-12)
        assert p.y == 0.0

    def test_degenerate_denominator(self):
        h = Homography(a7=-0.01)
        with pytest.raises(DegenerateMapping):
            warp_point(h, Point(100.0, 0.0))

    def test_affine_linearity(self):
        # for a7=a8=0 the translation-free part is linear
        h = Homography(a1=1.2, a2=-0.3, a3=7.0, a4=0.4, a5=0.9, a6=-2.0)
        f0 = warp_point(h, Point(0.0, 0.0))
        for alpha in (0.5, 2.0, -1.5):
            p = Point(3.0, -4.0)
            fp = warp_point(h, p)
            fap = warp_point(h, Point(alpha * p.x, alpha * p.y))
            assert fap.x - f0.x == pytest.approx(alpha * (fp.x - f0.x))
            assert fap.y - f0.y == pytest.approx(alpha * (fp.y - f0.y))


class TestInvert:
    def test_identity(self):
        assert invert(Homography.identity()).params == Homography().params

    def test_translation(self):
        inv = invert(Homography.translation(5.0, -2.0))
        assert inv.a3 == pytest.approx(-5.0)
        assert inv.a6 == pytest.approx(2.0)

    def test_roundtrip_points(self):
        rng = np.random.default_rng(1)
        h = random_homography(rng)
        hi = invert(h)
        xs = rng.uniform(0, 500, 100)
        ys = rng.uniform(0, 500, 100)
        wx, wy = warp_points(h, xs, ys)
        bx, by = warp_points(hi, wx, wy)
        assert np.max(np.hypot(bx - xs, by - ys)) < 1e-6

    def test_double_invert(self):
        rng = np.random.default_rng(2)
        h = random_homography(rng)
        hh = invert(invert(h))
        assert np.allclose(hh.params, h.params, atol=1e-9)

    def test_singular(self):
        with pytest.raises(SingularHomography):
            Homography.from_matrix(np.zeros((3, 3)))


class TestCompose:
    def test_identity_neutral(self):
        rng = np.random.default_rng(3)
        h = random_homography(rng)
        c = compose(Homography.identity(), h)
        assert np.allclose(c.params, h.params, atol=1e-12)

    def test_translations_add(self):
        c = compose(Homography.translation(4.0, 1.0),
                    Homography.translation(3.0, 0.0))
        assert c.a3 == pytest.approx(7.0)
        assert c.a6 == pytest.approx(1.0)

    def test_compose_with_inverse(self):
        rng = np.random.default_rng(4)
        h = random_homography(rng)
        c = compose(h, invert(h))
        assert np.allclose(c.params, Homography.identity().params, atol=1e-9)

    def test_matches_pointwise_application(self):
        rng = np.random.default_rng(5)
        h1 = random_homography(rng)
        h2 = random_homography(rng)
        p = Point(12.0, 34.0)
        via_compose = warp_point(compose(h2, h1), p)
        via_chain = warp_point(h2, warp_point(h1, p))
        assert via_compose.x == pytest.approx(via_chain.x, abs=1e-9)
        assert via_compose.y == pytest.approx(via_chain.y, abs=1e-9)


class TestWarpFrame:
    def test_identity(self):
        f = smooth_frame(48, 32)
        out, cov = warp_frame(f, Homography.identity(), 48, 32)
        assert np.array_equal(out.y, f.y)
        assert cov.all()

    def test_translation_coverage(self):
        f = smooth_frame(64, 64)
        out, cov = warp_frame(f, Homography.translation(10.0, 0.0), 64, 64)
        assert not cov[:, :10].any()
        assert cov[:, 10:].all()

    def test_coverage_matches_brute_force_oracle(self):
        # oracle: per-pel inverse mapping via warp_point
        rng = np.random.default_rng(6)
        f = smooth_frame(32, 24)
        h = random_homography(rng)
        _, cov = warp_frame(f, h, 32, 24)
        hi = invert(h)
        for y in range(24):
            for x in range(32):
                s = warp_point(hi, Point(float(x), float(y)))
                inside = 0 <= s.x <= 31 and 0 <= s.y <= 23
                assert cov[y, x] == inside

    def test_warp_and_unwarp_interior(self):
        # noiseless, bandlimited content: interpolation error stays tiny
        yy, xx = np.mgrid[0:96, 0:96].astype(np.float64)
        plane = 128 + 60 * np.sin(xx / 11.0) * np.cos(yy / 13.0)
        f = Frame(np.clip(np.rint(plane), 0, 255).astype(np.uint8))
        h = Homography.translation(3.5, -2.25)
        mid, _ = warp_frame(f, h, 96, 96)
        back, cov = warp_frame(mid, invert(h), 96, 96)
        # interior pels only: both warps must have had valid sources
        interior = np.zeros((96, 96), dtype=bool)
        interior[8:-8, 8:-8] = True
        err = np.abs(back.y.astype(int) - f.y.astype(int))[interior & cov]
        assert err.max() <= 2

    def test_fill_value(self):
        f = smooth_frame(32, 32)
        out, cov = warp_frame(f, Homography.translation(8.0, 0.0), 32, 32,
                              fill=77)
        assert (out.y[~cov] == 77).all()


def test_bilinear_sample_exact_grid():
    plane = np.arange(12, dtype=np.float64).reshape(3, 4)
    v, ok = bilinear_sample(plane, np.array([1.0, 2.5]), np.array([1.0, 0.0]))
    assert ok.all()
    assert v[0] == 5.0
    assert v[1] == pytest.approx(2.5)


def test_bilinear_sample_out_of_bounds():
    plane = np.ones((4, 4))
    v, ok = bilinear_sample(plane, np.array([-0.1, 3.1]), np.array([0.0, 0.0]))
    assert not ok.any()
    assert (v == 0).all()
