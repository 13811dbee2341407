import numpy as np
import pytest

from barriers import (
    GreatCircle,
    SpherePoint,
    SphereTubeRegion,
    SubsphereFlag,
    build_maximal_set_region,
    circle_point,
    errors,
    region_disconnection_check,
    sample_sphere,
    sphere_distance,
    subsphere_distance,
    sweepout_leaf_find,
    tube_region_contains,
)

E3 = np.eye(3)
E4 = np.eye(4)


def s3_region(eps=0.3):
    return SphereTubeRegion(GreatCircle(SpherePoint(E4[0]), E4[1]), eps)


class TestDistance:
    def test_right_angle(self):
        assert sphere_distance(SpherePoint(E3[0]), SpherePoint(E3[1])) == pytest.approx(np.pi / 2)

    def test_antipodal(self):
        x = SpherePoint(np.array([0.6, 0.8, 0.0]))
        y = SpherePoint(-x.coords)
        assert sphere_distance(x, y) == pytest.approx(np.pi)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b, c = (SpherePoint(v) for v in sample_sphere(3, 3, rng))
            assert sphere_distance(a, c) <= sphere_distance(a, b) + sphere_distance(b, c) + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(errors.InvalidInputError):
            sphere_distance(SpherePoint(E3[0]), SpherePoint(E4[0]))


class TestCircle:
    def test_endpoints(self):
        c = GreatCircle(SpherePoint(E4[0]), E4[1])
        np.testing.assert_allclose(circle_point(c, 0.0).coords, E4[0], atol=1e-15)
        np.testing.assert_allclose(circle_point(c, np.pi / 2).coords, E4[1], atol=1e-15)
        np.testing.assert_allclose(circle_point(c, np.pi).coords, -E4[0], atol=1e-12)

    def test_unit_speed_and_orthogonal_velocity(self):
        c = GreatCircle(SpherePoint(E4[0]), E4[1])
        h = 1e-6
        for t in np.linspace(0, 2 * np.pi, 17):
            gamma = c.point(t)
            vel = (c.point(t + h) - c.point(t - h)) / (2 * h)
            assert np.linalg.norm(gamma) == pytest.approx(1.0, abs=1e-12)
            assert abs(gamma @ vel) < 1e-6
            assert np.linalg.norm(vel) == pytest.approx(1.0, abs=1e-6)

    def test_requires_tangency(self):
        with pytest.raises(errors.InvalidInputError):
            GreatCircle(SpherePoint(E4[0]), (E4[0] + E4[1]) / np.sqrt(2))


class TestSubsphereDistance:
    def test_point_in_normal_span(self):
        flag = SubsphereFlag(E4[:2])
        assert subsphere_distance(SpherePoint(E4[0]), flag) == pytest.approx(np.pi / 2)

    def test_point_on_subsphere(self):
        flag = SubsphereFlag(E4[:2])
        assert subsphere_distance(SpherePoint(E4[2]), flag) == 0.0

    def test_against_sampling_oracle(self):
        # oracle: brute-force min distance over many points of the subsphere
        rng = np.random.default_rng(1)
        flag = SubsphereFlag(E4[:2])
        sub = sample_sphere(1, 100_000, rng)  # circle in the e3-e4 plane
        sub4 = np.zeros((len(sub), 4))
        sub4[:, 2:] = sub
        for _ in range(10):
            x = SpherePoint(sample_sphere(3, 1, rng)[0])
            brute = np.arccos(np.clip(sub4 @ x.coords, -1, 1)).min()
            assert subsphere_distance(x, flag) == pytest.approx(brute, abs=2e-3)

    def test_monotone_under_adding_normals(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = SpherePoint(sample_sphere(3, 1, rng)[0])
            d1 = subsphere_distance(x, SubsphereFlag(E4[:1]))
            d2 = subsphere_distance(x, SubsphereFlag(E4[:2]))
            d3 = subsphere_distance(x, SubsphereFlag(E4[:3]))
            assert d1 <= d2 + 1e-12 and d2 <= d3 + 1e-12


class TestTubeRegion:
    def test_base_point_inside(self):
        region = s3_region()
        assert tube_region_contains(region, SpherePoint(E4[0]))

    def test_barrier_point_outside(self):
        region = s3_region()
        assert not tube_region_contains(region, SpherePoint(E4[2]))

    def test_leaf_radius_below_convexity_bound(self):
        region = s3_region(0.3)
        assert region.ball_radius < np.pi / 2

    def test_epsilon_range(self):
        with pytest.raises(errors.InvalidInputError):
            s3_region(2.0)


class TestLeafFind:
    def test_constructed_point_at_leaf_distance(self):
        region = s3_region()
        r = region.ball_radius
        # point at distance exactly r from Gamma(0) = e1, generic position
        direction = np.array([0.0, 0.4, 0.6, np.sqrt(1 - 0.16 - 0.36)])
        x = SpherePoint(np.cos(r) * E4[0] + np.sin(r) * direction)
        ts = sweepout_leaf_find(region, x)
        assert any(min(t, 2 * np.pi - t) < 1e-6 for t in ts)

    def test_barrier_point_has_no_leaf(self):
        region = s3_region()
        assert sweepout_leaf_find(region, SpherePoint(E4[2])) == []

    def test_generic_region_point_has_two_leaves(self):
        # oracle: dense grid count of level crossings
        region = s3_region()
        rng = np.random.default_rng(3)
        checked = 0
        while checked < 15:
            x = SpherePoint(sample_sphere(3, 1, rng)[0])
            d = subsphere_distance(x, region.barrier_flag)
            if abs(d - region.epsilon) < 1e-3:
                continue
            ts = np.linspace(0, 2 * np.pi, 200_001)
            gam = np.cos(ts)[:, None] * E4[0] + np.sin(ts)[:, None] * E4[1]
            f = np.arccos(np.clip(gam @ x.coords, -1, 1)) - region.ball_radius
            crossings = int(np.sum(np.sign(f[:-1]) * np.sign(f[1:]) < 0))
            found = sweepout_leaf_find(region, x)
            assert len(found) == crossings
            if d > region.epsilon:
                assert len(found) == 2
            else:
                assert found == []
            checked += 1

    def test_membership_equivalence_with_closed_form(self):
        region = s3_region()
        rng = np.random.default_rng(4)
        for coords in sample_sphere(3, 300, rng):
            x = SpherePoint(coords)
            d = subsphere_distance(x, region.barrier_flag)
            if abs(d - region.epsilon) <= 1e-6:
                continue
            assert tube_region_contains(region, x) == bool(sweepout_leaf_find(region, x))

    def test_every_leaf_lies_inside_region(self):
        region = s3_region()
        rng = np.random.default_rng(5)
        r = region.ball_radius
        for t in rng.uniform(0, 2 * np.pi, 8):
            center = region.circle.point(t)
            # sample the distance sphere of radius r around the center
            for raw in sample_sphere(3, 125, rng):
                tangent = raw - (raw @ center) * center
                nrm = np.linalg.norm(tangent)
                if nrm < 1e-9:
                    continue
                y = SpherePoint(np.cos(r) * center + np.sin(r) * tangent / nrm)
                assert tube_region_contains(region, y, slack=1e-9)


class TestMaximalSetRegion:
    def test_s2_reduction(self):
        x0 = SpherePoint(np.array([0.0, 0.0, 1.0]))
        region = build_maximal_set_region(SubsphereFlag(np.empty((0, 3))), x0, 0.3)
        np.testing.assert_allclose(region.circle.point(np.pi / 2), x0.coords, atol=1e-12)
        assert region.circle.base.ambient_dim == 3

    def test_circle_through_x0_and_orthogonal_to_flag(self):
        rng = np.random.default_rng(6)
        flag_vecs = np.stack([E4[3]])
        x0 = SpherePoint(E4[2])
        region = build_maximal_set_region(SubsphereFlag(flag_vecs), x0, 0.25)
        np.testing.assert_allclose(region.circle.point(np.pi / 2), x0.coords, atol=1e-12)
        for t in rng.uniform(0, 2 * np.pi, 32):
            assert abs(region.circle.point(t) @ E4[3]) < 1e-12

    def test_flag_order_irrelevant(self):
        e = np.eye(5)
        x0 = SpherePoint(e[2])
        r1 = build_maximal_set_region(SubsphereFlag(np.stack([e[3], e[4]])), x0, 0.2)
        r2 = build_maximal_set_region(SubsphereFlag(np.stack([e[4], e[3]])), x0, 0.2)
        ts = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        pts1 = np.array([r1.circle.point(t) for t in ts])
        pts2 = np.array([r2.circle.point(t) for t in ts])
        # same circle as a point set
        for p in pts1:
            assert np.min(np.linalg.norm(pts2 - p, axis=1)) < 2e-2
        np.testing.assert_allclose(r1.circle.base.coords, r2.circle.base.coords, atol=1e-9)

    def test_degenerate_flag(self):
        e = np.eye(3)
        with pytest.raises(errors.DegenerateInputError):
            build_maximal_set_region(SubsphereFlag(np.stack([e[0], e[1]])), SpherePoint(e[2]), 0.2)


class TestDisconnection:
    def test_leaf_removal_gives_two_components(self):
        region = s3_region()
        assert region_disconnection_check(region, 0.7, samples=10_000, seed=42) == 2

    def test_intact_region_connected(self):
        region = s3_region()
        assert region_disconnection_check(region, None, samples=10_000, seed=42) == 1

    def test_seed_stability(self):
        region = s3_region()
        a = region_disconnection_check(region, 1.3, samples=10_000, seed=7)
        b = region_disconnection_check(region, 1.3, samples=10_000, seed=1234)
        assert a == b == 2

    def test_sample_floor(self):
        region = s3_region()
        with pytest.raises(errors.InvalidInputError):
            region_disconnection_check(region, 0.0, samples=500, seed=0)

    def test_under_resolved_raises(self):
        region = s3_region()
        with pytest.raises(errors.InsufficientSamplingError):
            region_disconnection_check(region, 0.0, samples=1000, seed=0)
