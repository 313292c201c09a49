"""
Quotient norms derived from an anchor set
=========================================

Given linearly independent anchors Y = {y_1, ..., y_n} and a subset
S = {i_1 < ... < i_m} of {1, ..., n}, the quotient of X by
span(Y minus {y_i : i in S}) carries the norm

    ||u||*_S = sum over i in S of ||u, y_1, ..., y_{i-1}, y_{i+1}, ..., y_n||

Each summand is a class-1 norm. The C(n, m) subsets of size m form the
class-m collection. Cosets are handled through representative vectors only.
Indices are 1-based throughout, matching the mathematical notation.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateAnchorsError, InvalidParameterError, InvalidSubsetError
from .nnorm_core import NormParams, as_vector, as_vectors, is_linearly_independent, lp_n_norm
from .utils import get_abs_tol, get_rel_tol

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class IndexSubset:
    """A strictly increasing tuple of 1-based anchor indices."""

    indices: tuple

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise InvalidSubsetError("an index subset must not be empty")
        if indices[0] < 1:
            raise InvalidSubsetError(f"indices are 1-based, got {indices[0]}")
        if any(a >= b for a, b in zip(indices, indices[1:])):
            raise InvalidSubsetError(f"indices must be strictly increasing, got {indices}")
        object.__setattr__(self, 'indices', indices)

    @classmethod
    def of(cls, *indices):
        return cls(tuple(indices))

    @classmethod
    def parse(cls, text):
        """Parse ``"1,3"`` (any order, no repeats) into a subset."""
        try:
            values = [int(part) for part in str(text).replace('{', '').replace('}', '').split(',') if part.strip()]
        except ValueError as exc:
            raise InvalidSubsetError(f"cannot parse index subset {text!r}") from exc
        if len(set(values)) != len(values):
            raise InvalidSubsetError(f"repeated index in {text!r}")
        return cls(tuple(sorted(values)))

    @property
    def m(self):
        return len(self.indices)

    def validate(self, n):
        if self.indices[-1] > n:
            raise InvalidSubsetError(f"index {self.indices[-1]} out of range for n = {n}")
        return self

    def complement(self, n):
        """Zero-based rows of the anchors that span the quotiented subspace."""
        chosen = set(self.indices)
        return [i - 1 for i in range(1, n + 1) if i not in chosen]

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __str__(self):
        return ','.join(str(i) for i in self.indices)


def as_subset(subset, n):
    """Accept an ``IndexSubset`` or any iterable of ints and validate it against n."""
    if not isinstance(subset, IndexSubset):
        subset = IndexSubset(tuple(subset))
    return subset.validate(n)


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """
    An ordered, linearly independent set of n anchor vectors in R^d.

    Immutable after validation; the independence check runs on construction.
    """

    vectors: np.ndarray
    params: NormParams

    def __post_init__(self):
        rows = as_vectors(self.vectors, self.params).copy()
        rows.setflags(write=False)
        object.__setattr__(self, 'vectors', rows)
        if not is_linearly_independent(rows, self.params):
            raise DegenerateAnchorsError("anchor vectors are not linearly independent")

    @classmethod
    def from_vectors(cls, vectors, p=2.0, rel_tol=None, abs_tol=None):
        return cls(vectors=as_vectors(vectors), params=NormParams.for_vectors(vectors, p, rel_tol, abs_tol))

    @classmethod
    def standard(cls, d, p=2.0):
        """The standard basis e_1, ..., e_d of R^d (n = d)."""
        return cls.from_vectors(np.eye(d), p=p)

    @property
    def n(self):
        return self.params.n

    @property
    def d(self):
        return self.params.d

    @property
    def p(self):
        return self.params.p

    def with_exponent(self, p):
        if p == self.params.p:
            return self
        return AnchorSet(vectors=self.vectors, params=self.params.with_exponent(p))

    def scale(self, u):
        """
        ||u|| times the largest anchor length to the (n - 1), the size of a typical class-1 term.

        A class-1 term is an n-norm with u and n - 1 anchors as arguments, so it
        grows with the (n - 1)-th power of the anchor lengths. ||u|| * max ||y||
        alone is only homogeneous in the right degree for n = 2.
        """
        longest = float(np.max(np.linalg.norm(self.vectors, axis=1)))
        return float(np.linalg.norm(u)) * longest ** (self.n - 1)

    def __repr__(self):
        return f"AnchorSet(n={self.n}, d={self.d}, p={self.p})"


@dataclass(frozen=True)
class ClassCollection:
    """All C(n, m) index subsets of size m, in lexicographic order."""

    n: int
    m: int
    subsets: tuple

    def __iter__(self):
        return iter(self.subsets)

    def __len__(self):
        return len(self.subsets)


def _check_class(n, m):
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n}")
    if int(m) != m or not 1 <= m <= n:
        raise InvalidParameterError(f"m must lie in 1..{n}, got {m}")


def class1_norm(u, Y, i):
    """||u, y_1, ..., y_{i-1}, y_{i+1}, ..., y_n||: u takes the place of y_i."""
    if int(i) != i or not 1 <= i <= Y.n:
        raise InvalidSubsetError(f"index {i} out of range for n = {Y.n}")
    u = as_vector(u, Y.d)
    rows = np.vstack([u, np.delete(Y.vectors, int(i) - 1, axis=0)])
    return lp_n_norm(rows, Y.params)


def class1_norms(u, Y):
    """All n class-1 values of u, in index order."""
    return [class1_norm(u, Y, i) for i in range(1, Y.n + 1)]


def classm_norm(u, Y, S):
    """
    The quotient norm ||u||*_S, summed over S in ascending index order.

    Args:
        u: Representative vector of dimension ``Y.d``.
        Y: The ``AnchorSet``.
        S: ``IndexSubset`` (or iterable of 1-based indices) valid for ``Y.n``.

    Returns:
        float: sum of ``class1_norm(u, Y, i)`` for i in S.
    """
    S = as_subset(S, Y.n)
    u = as_vector(u, Y.d)
    return sum(class1_norm(u, Y, i) for i in S)


def enumerate_class(n, m):
    _check_class(n, m)
    subsets = tuple(IndexSubset(c) for c in itertools.combinations(range(1, n + 1), m))
    return ClassCollection(n=n, m=m, subsets=subsets)


def covering_family(n, m):
    """
    ceil(n/m) subsets of size m whose union is {1, ..., n}.

    Consecutive blocks of m indices; when m does not divide n the last block
    is right-aligned and overlaps its neighbour.
    """
    _check_class(n, m)
    family = []
    for block in range(math.ceil(n / m)):
        start = min(block * m, n - m)
        family.append(IndexSubset(tuple(range(start + 1, start + m + 1))))
    return family


def subsets_for(n, m, use_covering):
    return covering_family(n, m) if use_covering else list(enumerate_class(n, m))


def quotient_zero_check(u, Y, S):
    """True iff u represents the zero coset, i.e. u lies in span(Y minus {y_i : i in S})."""
    u = as_vector(u, Y.d)
    return classm_norm(u, Y, S) <= Y.params.abs_tol * Y.scale(u)


def coset_shift(u, Y, S, coefficients):
    """u + sum of coefficients times the anchors outside S: another representative of the same coset."""
    S = as_subset(S, Y.n)
    rows = S.complement(Y.n)
    u = as_vector(u, Y.d)
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != (len(rows),):
        raise InvalidParameterError(f"expected {len(rows)} coefficients, got shape {coefficients.shape}")
    if not rows:
        return u.copy()
    return u + coefficients @ Y.vectors[rows]


def in_span_residual(u, Y, S):
    """Least-squares distance from u to span(Y minus {y_i : i in S}); the rank-test oracle for the zero check."""
    S = as_subset(S, Y.n)
    u = as_vector(u, Y.d)
    rows = S.complement(Y.n)
    if not rows:
        return float(np.linalg.norm(u))
    basis = Y.vectors[rows].T
    coefficients, *_ = np.linalg.lstsq(basis, u, rcond=None)
    return float(np.linalg.norm(basis @ coefficients - u))


def random_anchor_set(rng, n, d, p, margin=10.0, max_attempts=1000):
    """
    Draw a standard-normal anchor set whose n-norm clears the independence threshold by ``margin``.

    Near-degenerate anchors make the lower equivalence constant vanish, so they are redrawn.
    """
    params = NormParams(n=n, p=p, d=d, rel_tol=get_rel_tol(), abs_tol=get_abs_tol())
    for _ in range(max_attempts):
        rows = rng.standard_normal((n, d))
        threshold = params.rel_tol * float(np.prod(np.linalg.norm(rows, axis=1)))
        if lp_n_norm(rows, params) > margin * threshold:
            return AnchorSet(vectors=rows, params=params)
    raise DegenerateAnchorsError(f"no well-conditioned anchor set after {max_attempts} draws")
