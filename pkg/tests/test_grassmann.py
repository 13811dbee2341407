import numpy as np
import pytest

from barriers import (
    Frame,
    GrassmannPoint,
    GrassmannTangent,
    GreatCircle,
    SpherePoint,
    SphereTubeRegion,
    ball_membership,
    errors,
    eta_basis,
    geodesic_distance,
    geodesic_point,
    main_region_contains,
    pinner,
    principal_angles,
    random_point,
    random_unit_tangent,
    same_oriented_plane,
    sample_sphere,
    sweep_angle_range,
    sweep_crossing_contains,
    t_max,
    tube_region_contains,
    wedge,
)

E4 = np.eye(4)
E5 = np.eye(5)

T_MAX_TWO_SLOT = 1.1107207345395915  # pi / (2 sqrt(2)), direct formula evaluation
T_MAX_08_06 = 1.1219973762820692  # pi / 2.8


def standard_point(n, p):
    return GrassmannPoint(Frame(np.eye(n)[:p]))


def rank_one(w):
    A = np.zeros((w.p, w.n - w.p))
    A[0, 0] = 1.0
    return GrassmannTangent(w, A)


def two_slot(w):
    A = np.zeros((w.p, w.n - w.p))
    A[0, 0] = np.sqrt(0.5)
    A[1, 1] = np.sqrt(0.5)
    return GrassmannTangent(w, A)


class TestEtaBasis:
    def test_standard_basis_example(self):
        w = standard_point(4, 2)
        etas = eta_basis(w)
        expected = [
            wedge(E4[2], E4[1]),  # slot 1 <- n1 = e3
            wedge(E4[3], E4[1]),
            wedge(E4[0], E4[2]),
            wedge(E4[0], E4[3]),
        ]
        for eta, exp in zip(etas, expected):
            np.testing.assert_allclose(eta.coords, exp.coords, atol=1e-15)

    def test_orthonormal(self):
        w = standard_point(5, 2)
        etas = eta_basis(w)
        for i, a in enumerate(etas):
            for j, b in enumerate(etas):
                assert pinner(a, b) == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)

    @pytest.mark.parametrize("n,p", [(4, 2), (5, 2), (6, 3)])
    def test_dimension_count(self, n, p):
        rng = np.random.default_rng(n * 10 + p)
        w = random_point(n, p, rng)
        assert len(eta_basis(w)) == p * (n - p)


class TestCanonicalForm:
    def test_single_rotation(self):
        w = standard_point(4, 2)
        X = rank_one(w)
        assert X.rank == 1
        np.testing.assert_allclose(X.rates, [1.0])

    def test_two_slot_rotation(self):
        w = standard_point(4, 2)
        X = two_slot(w)
        assert X.rank == 2
        np.testing.assert_allclose(X.rates, [np.sqrt(0.5), np.sqrt(0.5)], atol=1e-15)

    @pytest.mark.parametrize("n,p", [(4, 2), (5, 2), (6, 3)])
    def test_reconstruction_and_gauge_invariance(self, n, p):
        rng = np.random.default_rng(n * 100 + p)
        for _ in range(25):
            w = random_point(n, p, rng)
            X = random_unit_tangent(w, rng)
            np.testing.assert_allclose(X.reconstruct_coeffs(), X.coeffs, atol=1e-12)
            # rotation frames must stay orthonormal and orientation-compatible
            R = X.rotated_span_frame
            np.testing.assert_allclose(R @ R.T, np.eye(p), atol=1e-12)
            # gauge the plane frame by a random SO(p) matrix: rates invariant
            Q = np.linalg.qr(rng.standard_normal((p, p)))[0]
            if np.linalg.det(Q) < 0:
                Q[0] = -Q[0]
            w2 = w.rotated(Q)
            A2 = Q @ X.coeffs  # same tangent expressed in the rotated frame
            X2 = GrassmannTangent(w2, A2, normals=X.normals)
            pad = p * [0.0]
            r1 = list(X.rates) + pad
            r2 = list(X2.rates) + pad
            np.testing.assert_allclose(r1[:p], r2[:p], atol=1e-10)

    def test_pvector_reconstruction(self):
        rng = np.random.default_rng(9)
        w = random_point(5, 2, rng)
        X = random_unit_tangent(w, rng)
        # rebuild the tangent p-vector from the rotated frames and rates
        rebuilt = np.zeros_like(X.as_pvector().coords)
        E, N = X.rotated_span_frame, X.rotated_normal_frame
        for i in range(X.rank):
            rows = E.copy()
            rows[i] = N[i]
            rebuilt = rebuilt + X.rates[i] * wedge(*rows).coords
        np.testing.assert_allclose(rebuilt, X.as_pvector().coords, atol=1e-12)

    def test_zero_tangent(self):
        w = standard_point(4, 2)
        with pytest.raises(errors.ZeroTangentError):
            GrassmannTangent(w, np.zeros((2, 2)))


class TestGeodesic:
    def test_quarter_turn(self):
        w = standard_point(4, 2)
        X = rank_one(w)
        end = geodesic_point(X, np.pi / 2)
        assert same_oriented_plane(end, GrassmannPoint(Frame(np.stack([E4[2], E4[1]]))))

    def test_half_turn_reverses_orientation(self):
        w = standard_point(4, 2)
        X = rank_one(w)
        end = geodesic_point(X, np.pi)
        np.testing.assert_allclose(end.plucker.coords, -w.plucker.coords, atol=1e-12)

    def test_small_t_distance(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            w = random_point(5, 2, rng)
            X = random_unit_tangent(w, rng)
            t = 0.05
            assert geodesic_distance(w, geodesic_point(X, t)) == pytest.approx(t, abs=1e-8)

    def test_unit_speed_between_interior_points(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            w = random_point(4, 2, rng)
            X = random_unit_tangent(w, rng)
            tm = t_max(X)
            s, t = 0.2 * tm, 0.9 * tm
            d = geodesic_distance(geodesic_point(X, s), geodesic_point(X, t))
            assert d == pytest.approx(t - s, abs=1e-8)

    def test_non_unit_warns_and_rescales(self):
        w = standard_point(4, 2)
        X = GrassmannTangent(w, np.array([[2.0, 0.0], [0.0, 0.0]]))
        with pytest.warns(RuntimeWarning):
            end = geodesic_point(X, np.pi / 2)
        assert same_oriented_plane(end, GrassmannPoint(Frame(np.stack([E4[2], E4[1]]))))


class TestPrincipalAngles:
    def test_identical(self):
        w = standard_point(4, 2)
        np.testing.assert_allclose(principal_angles(w, w), [0.0, 0.0], atol=1e-7)
        assert geodesic_distance(w, w) == pytest.approx(0.0, abs=1e-7)

    def test_single_right_angle(self):
        w1 = standard_point(4, 2)
        w2 = GrassmannPoint(Frame(np.stack([E4[0], E4[2]])))
        theta = principal_angles(w1, w2)
        np.testing.assert_allclose(theta, [np.pi / 2, 0.0], atol=1e-12)
        assert geodesic_distance(w1, w2) == pytest.approx(np.pi / 2)

    def test_orthogonal_planes(self):
        w1 = standard_point(4, 2)
        w2 = GrassmannPoint(Frame(np.stack([E4[2], E4[3]])))
        theta = principal_angles(w1, w2)
        assert theta.sum() == pytest.approx(np.pi)

    def test_orientation_reversal_is_far(self):
        w = standard_point(4, 2)
        wrev = GrassmannPoint(Frame(np.stack([E4[1], E4[0]])))
        theta = principal_angles(w, wrev)
        np.testing.assert_allclose(theta, [np.pi, 0.0], atol=1e-12)
        assert geodesic_distance(w, wrev) == pytest.approx(np.pi)

    def test_angles_match_geodesic_rates(self):
        rng = np.random.default_rng(23)
        for _ in range(15):
            w = random_point(5, 2, rng)
            X = random_unit_tangent(w, rng)
            t = 0.3 * t_max(X)
            theta = principal_angles(w, geodesic_point(X, t))
            expected = np.zeros(2)
            expected[: X.rank] = X.rates * t
            np.testing.assert_allclose(theta, np.sort(expected)[::-1], atol=1e-9)

    def test_gauge_invariance(self):
        rng = np.random.default_rng(24)
        w1 = random_point(4, 2, rng)
        w2 = random_point(4, 2, rng)
        base = principal_angles(w1, w2)
        for _ in range(10):
            th = rng.uniform(0, 2 * np.pi)
            R = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
            np.testing.assert_allclose(principal_angles(w1.rotated(R), w2), base, atol=1e-10)


class TestTMax:
    def test_rank_one_exact(self):
        w = standard_point(4, 2)
        assert t_max(rank_one(w)) == pytest.approx(np.pi / 2, abs=1e-12)

    def test_two_slot(self):
        w = standard_point(4, 2)
        assert t_max(two_slot(w)) == pytest.approx(T_MAX_TWO_SLOT, abs=1e-12)

    def test_unequal_rates(self):
        w = standard_point(4, 2)
        X = GrassmannTangent(w, np.diag([0.8, 0.6]))
        assert t_max(X) == pytest.approx(T_MAX_08_06, abs=1e-12)


class TestBallMembership:
    def test_center(self):
        w = standard_point(4, 2)
        assert ball_membership(w, w) == "inside"

    def test_orthogonal_outside(self):
        w = standard_point(4, 2)
        w2 = GrassmannPoint(Frame(np.stack([E4[2], E4[3]])))
        assert ball_membership(w, w2) == "outside"

    def test_two_slot_endpoint_on_boundary(self):
        w = standard_point(4, 2)
        X2 = two_slot(w)
        end = geodesic_point(X2, t_max(X2))
        assert ball_membership(w, end) == "boundary"

    def test_along_geodesics(self):
        rng = np.random.default_rng(31)
        for _ in range(15):
            w = random_point(5, 2, rng)
            X = random_unit_tangent(w, rng)
            tm = t_max(X)
            assert ball_membership(w, geodesic_point(X, 0.7 * tm)) == "inside"
            assert ball_membership(w, geodesic_point(X, tm), tol=1e-7) == "boundary"


class TestMainRegion:
    @pytest.mark.parametrize("n", [4, 5])
    @pytest.mark.parametrize("eps", [0.1, 0.3])
    def test_two_slot_endpoints_excluded(self, n, eps):
        rng = np.random.default_rng(n * 7 + int(eps * 10))
        for _ in range(10):
            w0 = random_point(n, 2, rng)
            X1 = rank_one(w0)
            X2 = two_slot(w0)
            tm = t_max(X2)
            for sgn in (1.0, -1.0):
                end = geodesic_point(X2, sgn * tm)
                assert not main_region_contains(w0, X1, eps, end)

    def test_shrunk_boundary_point_included(self):
        eps = 0.3
        w0 = standard_point(4, 2)
        X1 = rank_one(w0)
        # rank-1 sweep endpoint of the epsilon-shrunk ball at t = 0
        boundary = geodesic_point(X1, np.pi / 2 - eps)
        assert main_region_contains(w0, X1, eps, boundary)
        assert sweep_crossing_contains(w0, X1, eps, boundary, grid=512)

    def test_rank_validation(self):
        w0 = standard_point(4, 2)
        with pytest.raises(errors.InvalidInputError):
            main_region_contains(w0, two_slot(w0), 0.3, w0)

    def test_sweep_range_against_dense_grid_oracle(self):
        rng = np.random.default_rng(33)
        w0 = standard_point(4, 2)
        X1 = rank_one(w0)
        E, N = X1.rotated_span_frame, X1.rotated_normal_frame
        for _ in range(5):
            w2 = random_point(4, 2, rng)
            ts = np.linspace(0, 2 * np.pi, 20_000, endpoint=False)
            vals = []
            for t in ts:
                rows = E.copy()
                rows[0] = np.cos(t) * E[0] + np.sin(t) * N[0]
                theta = principal_angles(GrassmannPoint(Frame(rows)), w2)
                vals.append(theta[0] + theta[1])
            lo, hi = float(np.min(vals)), float(np.max(vals))
            smin, smax = sweep_angle_range(w0, X1, w2, grid=512)
            assert smin == pytest.approx(lo, abs=1e-6)
            assert smax == pytest.approx(hi, abs=1e-6)

    def test_codim1_reduction_matches_sphere_tube(self):
        # G+(1, 4) is S^3: the leaf-crossing test must agree with the
        # closed-form tube membership
        eps = 0.3
        e = np.eye(4)
        w0 = GrassmannPoint(Frame(e[:1]))
        X1 = GrassmannTangent(w0, np.array([[1.0, 0.0, 0.0]]))
        region = SphereTubeRegion(GreatCircle(SpherePoint(e[0]), e[1]), eps)
        rng = np.random.default_rng(34)
        for coords in sample_sphere(3, 40, rng):
            x = SpherePoint(coords)
            from barriers import subsphere_distance

            if abs(subsphere_distance(x, region.barrier_flag) - eps) < 1e-3:
                continue
            w2 = GrassmannPoint(Frame(coords[None, :]))
            assert sweep_crossing_contains(w0, X1, eps, w2, grid=512) == tube_region_contains(
                region, x
            )


class TestErrors:
    def test_dimension_mismatch(self):
        with pytest.raises(errors.InvalidInputError):
            geodesic_distance(standard_point(4, 2), standard_point(5, 2))

    def test_gauge_requires_rotation(self):
        w = standard_point(4, 2)
        with pytest.raises(errors.InvalidInputError):
            w.rotated(np.diag([1.0, -1.0]))
