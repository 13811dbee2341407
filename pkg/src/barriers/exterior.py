"""Exterior algebra over lexicographic multi-index coordinates.

A grade-p element of Lambda_p(R^n) is stored as the vector of its
coefficients on the basis {e_I : I = (i_1 < ... < i_p)}, with the
multi-indices enumerated in lexicographic order.  That ordering is the
file-format contract for every coordinate this package writes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .errors import DegenerateInputError, InvalidInputError, UnsupportedGradeError

ORTHONORMALITY_TOL = 1e-9


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    """All strictly increasing p-tuples from range(n), lexicographic."""
    return tuple(itertools.combinations(range(n), p))


@lru_cache(maxsize=None)
def _index_position(n: int, p: int) -> dict[tuple[int, ...], int]:
    return {I: k for k, I in enumerate(multi_indices(n, p))}


def _permutation_sign(seq: tuple[int, ...]) -> int:
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class PVector:
    """Grade-p vector in Lambda_p(R^n)."""

    n: int
    p: int
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.shape != (comb(self.n, self.p),):
            raise InvalidInputError(
                f"expected {comb(self.n, self.p)} coordinates for (n={self.n}, p={self.p}), "
                f"got shape {coords.shape}"
            )
        if not np.all(np.isfinite(coords)):
            raise InvalidInputError("p-vector coordinates must be finite")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    def coefficient(self, index: tuple[int, ...]) -> float:
        """Coefficient on e_I for a strictly increasing multi-index I (0-based)."""
        return float(self.coords[_index_position(self.n, self.p)[tuple(index)]])


@dataclass(frozen=True)
class Frame:
    """Ordered orthonormal p-tuple of vectors in R^n, stored as rows."""

    vectors: np.ndarray
    n: int = field(init=False)
    p: int = field(init=False)

    def __post_init__(self):
        V = np.asarray(self.vectors, dtype=float)
        if V.ndim != 2:
            raise InvalidInputError("frame must be a (p, n) array of row vectors")
        p, n = V.shape
        if p > n:
            raise InvalidInputError(f"frame with {p} vectors cannot fit in R^{n}")
        gram = V @ V.T
        if np.abs(gram - np.eye(p)).max() >= ORTHONORMALITY_TOL:
            raise InvalidInputError(
                "frame vectors are not orthonormal within "
                f"{ORTHONORMALITY_TOL:g} (max Gram deviation "
                f"{np.abs(gram - np.eye(p)).max():.3e})"
            )
        V = V.copy()
        V.flags.writeable = False
        object.__setattr__(self, "vectors", V)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)

    def __iter__(self):
        return iter(self.vectors)


def wedge(*vectors) -> PVector:
    """Wedge product of p vectors in R^n.

    The coefficient on a multi-index I is the p x p minor formed from the
    rows of the stacked vectors and the columns I.
    """
    if not vectors:
        raise InvalidInputError("wedge needs at least one vector")
    try:
        M = np.asarray(vectors, dtype=float)
    except ValueError as exc:
        raise InvalidInputError("wedge arguments must share one dimension") from exc
    if M.ndim != 2:
        raise InvalidInputError("wedge arguments must be 1-d vectors")
    p, n = M.shape
    if not 1 <= p <= n:
        raise InvalidInputError(f"cannot wedge {p} vectors in R^{n}")
    if p == 1:
        return PVector(n, 1, M[0])
    coords = np.empty(comb(n, p))
    for k, I in enumerate(multi_indices(n, p)):
        coords[k] = np.linalg.det(M[:, I])
    return PVector(n, p, coords)


def pvector_wedge(a: PVector, b: PVector) -> PVector:
    """Wedge product of two p-vectors via the shuffle formula."""
    if a.n != b.n:
        raise InvalidInputError("ambient dimensions differ")
    n, grade = a.n, a.p + b.p
    if grade > n:
        raise InvalidInputError(f"grade {grade} exceeds ambient dimension {n}")
    pos_a = _index_position(n, a.p)
    pos_b = _index_position(n, b.p)
    coords = np.zeros(comb(n, grade))
    for k, K in enumerate(multi_indices(n, grade)):
        total = 0.0
        for I in itertools.combinations(K, a.p):
            J = tuple(i for i in K if i not in I)
            total += _permutation_sign(I + J) * a.coords[pos_a[I]] * b.coords[pos_b[J]]
        coords[k] = total
    return PVector(n, grade, coords)


def pinner(a: PVector, b: PVector) -> float:
    """Induced inner product on Lambda_p: Euclidean dot of coordinates."""
    if (a.n, a.p) != (b.n, b.p):
        raise InvalidInputError(
            f"grade/dimension mismatch: (n={a.n}, p={a.p}) vs (n={b.n}, p={b.p})"
        )
    return float(a.coords @ b.coords)


def pnorm(a: PVector) -> float:
    return float(np.linalg.norm(a.coords))


def gram_schmidt(vectors) -> Frame:
    """Orthonormalize while preserving the span and its orientation.

    Rank deficiency (smallest singular value <= 1e-10) is an error, not a
    silent drop.
    """
    M = np.asarray(vectors, dtype=float)
    if M.ndim != 2:
        raise InvalidInputError("expected a (p, n) array of row vectors")
    smin = np.linalg.svd(M, compute_uv=False)[-1]
    if smin <= 1e-10:
        raise DegenerateInputError(
            f"input is numerically rank deficient (smallest singular value {smin:.3e})"
        )
    # QR with positive diagonal of R: the change of basis is upper triangular
    # with positive determinant, so the oriented span is untouched.
    Q, R = np.linalg.qr(M.T)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Frame((Q * signs).T)


def plucker(frame: Frame) -> PVector:
    """Unit simple p-vector representing the oriented span of the frame."""
    if not isinstance(frame, Frame):
        frame = Frame(np.asarray(frame, dtype=float))
    return wedge(*frame.vectors)


def is_simple(a: PVector, tol: float = 1e-10) -> bool:
    """Whether a grade-2 vector is decomposable: |a ^ a| <= tol * |a|^2."""
    if a.p != 2:
        raise UnsupportedGradeError(f"simplicity test implemented for grade 2 only, got {a.p}")
    if a.n < 4:
        return True
    return pnorm(pvector_wedge(a, a)) <= tol * pnorm(a) ** 2
