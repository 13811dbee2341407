import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barriers import (
    Frame,
    PVector,
    errors,
    gram_schmidt,
    is_simple,
    pinner,
    plucker,
    pnorm,
    pvector_wedge,
    wedge,
)

E4 = np.eye(4)


def random_orthonormal(n, p, rng):
    return gram_schmidt(rng.standard_normal((p, n)))


def gram_det(vectors) -> float:
    """Independent oracle: norm^2 of a wedge of vectors is det of their Gram matrix."""
    M = np.asarray(vectors, dtype=float)
    return float(np.linalg.det(M @ M.T))


class TestWedge:
    def test_coordinate_wedge(self):
        pv = wedge(E4[0], E4[1])
        assert pv.coefficient((0, 1)) == 1.0
        assert np.count_nonzero(pv.coords) == 1

    def test_alternation_same_vector(self):
        v = np.array([0.3, -1.2, 0.5, 2.0])
        assert pnorm(wedge(v, v)) == 0.0

    def test_bilinearity(self):
        pv = wedge(E4[0] + E4[1], E4[2])
        assert pv.coefficient((0, 2)) == 1.0
        assert pv.coefficient((1, 2)) == 1.0
        assert pnorm(pv) == pytest.approx(np.sqrt(2.0))

    def test_dimension_mismatch(self):
        with pytest.raises(errors.InvalidInputError):
            wedge(np.ones(3), np.ones(4))

    def test_too_many_vectors(self):
        with pytest.raises(errors.InvalidInputError):
            wedge(*[np.ones(2) for _ in range(3)])

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_swapping_arguments_negates(self, seed):
        rng = np.random.default_rng(seed)
        u, v, w = rng.standard_normal((3, 5))
        a = wedge(u, v, w)
        b = wedge(v, u, w)
        np.testing.assert_allclose(a.coords, -b.coords, atol=1e-12)

    def test_norm_matches_gram_determinant(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            vs = rng.standard_normal((2, 5))
            assert pnorm(wedge(*vs)) ** 2 == pytest.approx(gram_det(vs), rel=1e-10)


class TestPinner:
    def test_unit(self):
        a = wedge(E4[0], E4[1])
        assert pinner(a, a) == 1.0

    def test_disjoint(self):
        assert pinner(wedge(E4[0], E4[1]), wedge(E4[0], E4[2])) == 0.0

    def test_plucker_norm_via_gram_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            F = random_orthonormal(5, 2, rng)
            expected = gram_det(F.vectors)  # = 1 for orthonormal rows
            assert expected == pytest.approx(1.0, abs=1e-12)
            assert pinner(plucker(F), plucker(F)) == pytest.approx(expected, abs=1e-12)

    def test_mismatch_errors(self):
        with pytest.raises(errors.InvalidInputError):
            pinner(wedge(E4[0], E4[1]), wedge(np.eye(5)[0], np.eye(5)[1]))


class TestGramSchmidt:
    def test_already_orthonormal(self):
        F = gram_schmidt([E4[0], E4[1]])
        np.testing.assert_allclose(F.vectors, E4[:2], atol=1e-15)

    def test_hand_example(self):
        F = gram_schmidt([2 * E4[0], E4[0] + E4[1]])
        np.testing.assert_allclose(F.vectors, E4[:2], atol=1e-14)

    def test_random_triple_orthonormal(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            F = gram_schmidt(rng.standard_normal((3, 6)))
            np.testing.assert_allclose(F.vectors @ F.vectors.T, np.eye(3), atol=1e-12)

    def test_orientation_preserved(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            vs = rng.standard_normal((4, 4))
            if abs(np.linalg.det(vs)) < 1e-3:
                continue
            F = gram_schmidt(vs)
            assert np.sign(np.linalg.det(F.vectors)) == np.sign(np.linalg.det(vs))

    def test_rank_deficient(self):
        with pytest.raises(errors.DegenerateInputError):
            gram_schmidt([E4[0], E4[0] + 1e-13 * E4[1]])


class TestPlucker:
    def test_standard_plane(self):
        F = Frame(E4[:2])
        np.testing.assert_allclose(plucker(F).coords, wedge(E4[0], E4[1]).coords)

    def test_so2_invariance(self):
        for theta in np.linspace(0.0, 2 * np.pi, 9):
            c, s = np.cos(theta), np.sin(theta)
            F = Frame(np.stack([c * E4[0] + s * E4[1], -s * E4[0] + c * E4[1]]))
            np.testing.assert_allclose(
                plucker(F).coords, wedge(E4[0], E4[1]).coords, atol=1e-12
            )

    def test_unit_norm_random(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            F = random_orthonormal(6, 3, rng)
            assert pnorm(plucker(F)) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_non_orthonormal(self):
        with pytest.raises(errors.InvalidInputError):
            Frame(np.stack([E4[0], E4[0] + 0.1 * E4[1]]))


class TestIsSimple:
    def test_coordinate_plane(self):
        assert is_simple(wedge(E4[0], E4[1]), 1e-10)

    def test_symplectic_form_not_simple(self):
        a = PVector(4, 2, [1, 0, 0, 0, 0, 1])  # e12 + e34
        # oracle: the single grade-4 coefficient is 2(a12 a34 - a13 a24 + a14 a23)
        oracle = 2 * (1 * 1 - 0 + 0)
        ww = pvector_wedge(a, a)
        assert ww.coords == pytest.approx([oracle])
        assert not is_simple(a, 1e-10)

    def test_frame_wedges_simple(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            F = random_orthonormal(5, 2, rng)
            assert is_simple(plucker(F), 1e-10)

    def test_wrong_grade(self):
        with pytest.raises(errors.UnsupportedGradeError):
            is_simple(wedge(E4[0], E4[1], E4[2]), 1e-10)
