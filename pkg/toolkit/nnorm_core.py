"""
Determinant n-norm on truncated l^p
===================================

For n vectors x_1, ..., x_n of R^d the n-norm is

    ||x_1, ..., x_n||_p = ( sum over column sets j_1 < ... < j_n of |det[x_i[j_k]]|^p )^(1/p)

which equals the (1/n!)-weighted sum over *ordered* index tuples: the n!
orderings of one column set contribute equal terms and tuples with a repeated
column contribute zero. ``ordered_tuple_n_norm`` keeps the ordered form as an
independent oracle.

Vectors stand for l^p sequences truncated to their first d coordinates; results
are exact for sequences supported there. p = infinity is not supported.
"""

import dataclasses
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    NonFiniteInputError,
    NumericalBreakdownError,
)
from .utils import DEFAULT_ABS_TOL, DEFAULT_REL_TOL, get_abs_tol, get_rel_tol, relative_excess, run_sharded

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormParams:
    """Parameters shared by every n-norm evaluation: arity, exponent, dimension, tolerances."""

    n: int
    p: float
    d: int
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"n must be a positive integer, got {self.n}")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidParameterError(f"d must be a positive integer, got {self.d}")
        if self.n > self.d:
            raise DimensionMismatchError(f"n = {self.n} exceeds the dimension d = {self.d}")
        if not math.isfinite(self.p) or self.p < 1:
            raise InvalidParameterError(f"p must satisfy 1 <= p < inf, got {self.p}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidParameterError("rel_tol and abs_tol must be positive")

    @classmethod
    def from_settings(cls, n, p, d):
        """Build parameters with the tolerances configured in settings."""
        return cls(n=n, p=p, d=d, rel_tol=get_rel_tol(), abs_tol=get_abs_tol())

    @classmethod
    def for_vectors(cls, vectors, p, rel_tol=None, abs_tol=None):
        rows = as_vectors(vectors)
        return cls(
            n=rows.shape[0],
            p=p,
            d=rows.shape[1],
            rel_tol=get_rel_tol() if rel_tol is None else rel_tol,
            abs_tol=get_abs_tol() if abs_tol is None else abs_tol,
        )

    def with_exponent(self, p):
        return dataclasses.replace(self, p=p)


def as_vector(x, d=None):
    """Coerce ``x`` to a finite 1-D float array, optionally of dimension ``d``."""
    try:
        vector = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NonFiniteInputError(f"not a real vector: {exc}") from exc
    if vector.ndim != 1 or vector.size == 0:
        raise DimensionMismatchError(f"expected a nonempty 1-D vector, got shape {vector.shape}")
    if d is not None and vector.shape[0] != d:
        raise DimensionMismatchError(f"expected dimension {d}, got {vector.shape[0]}")
    if not np.all(np.isfinite(vector)):
        raise NonFiniteInputError("vector entries must be finite")
    return vector


def as_vectors(vectors, params=None):
    """
    Coerce a list of vectors to an ``(n, d)`` float array.

    Args:
        vectors: Sequence of equal-length real sequences (or a 2-D array).
        params: Optional ``NormParams``; when given, the shape must be ``(params.n, params.d)``.

    Returns:
        numpy.ndarray: The stacked rows.
    """
    try:
        rows = np.asarray(vectors, dtype=float)
    except ValueError as exc:
        raise DimensionMismatchError(f"vectors do not share one dimension: {exc}") from exc
    if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
        raise DimensionMismatchError(f"expected a nonempty list of vectors, got shape {rows.shape}")
    if params is not None:
        if rows.shape[0] != params.n:
            raise DimensionMismatchError(f"expected {params.n} vectors, got {rows.shape[0]}")
        if rows.shape[1] != params.d:
            raise DimensionMismatchError(f"expected dimension {params.d}, got {rows.shape[1]}")
    if rows.shape[0] > rows.shape[1]:
        raise DimensionMismatchError(f"n = {rows.shape[0]} exceeds the dimension d = {rows.shape[1]}")
    if not np.all(np.isfinite(rows)):
        raise NonFiniteInputError("vector entries must be finite")
    return rows


@lru_cache(maxsize=None)
def combination_index(d, n):
    """Column sets j_1 < ... < j_n of {0, ..., d-1} in lexicographic order, shape (C(d, n), n)."""
    index = np.array(list(itertools.combinations(range(d), n)), dtype=np.intp).reshape(-1, n)
    index.setflags(write=False)
    return index


def batched_det(matrices):
    """Determinants of a stack of square matrices; closed form up to 3x3, LU beyond."""
    size = matrices.shape[-1]
    a = matrices
    if size == 1:
        return a[..., 0, 0].copy()
    if size == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    if size == 3:
        return (
            a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
            - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
            + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
        )
    # LAPACK getrf: LU with partial pivoting
    return np.linalg.det(a)


def minors(rows):
    """All n x n minors of the (n, d) matrix ``rows``, one per column set."""
    n, d = rows.shape
    columns = combination_index(d, n)
    return batched_det(np.moveaxis(rows[:, columns], 1, 0))


def _p_sum(values, p):
    """(sum |v|^p)^(1/p), scaled by the largest entry to stay clear of under/overflow."""
    magnitudes = np.abs(values)
    if magnitudes.size == 0:
        return 0.0
    largest = float(magnitudes.max())
    if largest == 0.0:
        return 0.0
    return largest * float(np.sum((magnitudes / largest) ** p)) ** (1.0 / p)


def _unit_rows(rows):
    """
    Divide each row by its largest absolute entry.

    Determinants are linear in each row, so a minor of the original rows is the
    same minor of the scaled rows times the product of the scales. Returns
    ``(scaled, scales)``, or ``(None, scales)`` when some row is zero.
    """
    scales = np.max(np.abs(rows), axis=1)
    if np.any(scales == 0.0):
        return None, scales
    return rows / scales[:, np.newaxis], scales


def _restore_scale(value, scales, what):
    """``value`` times the product of ``scales``; a product outside the float range is a breakdown."""
    if value == 0.0:
        return 0.0
    with np.errstate(over='ignore', under='ignore'):
        product = float(np.prod(scales))
    if math.isfinite(product) and product > 0.0:
        result = value * product
    else:
        result = math.exp(math.log(value) + float(np.sum(np.log(scales))))
    if not math.isfinite(result):
        raise NumericalBreakdownError(f"{what} exceeds the floating-point range")
    return result


def lp_n_norm(vectors, params):
    """
    Evaluate the determinant n-norm of ``vectors``.

    Args:
        vectors: Exactly ``params.n`` vectors of dimension ``params.d``.
        params: ``NormParams`` fixing n, p and d.

    Returns:
        float: The nonnegative n-norm value.

    Raises:
        NumericalBreakdownError: The value is finite input but not representable as a float.
    """
    rows = as_vectors(vectors, params)
    scaled, scales = _unit_rows(rows)
    if scaled is None:
        return 0.0
    return _restore_scale(_p_sum(minors(scaled), params.p), scales, 'n-norm')


def ordered_tuple_n_norm(vectors, params):
    """The literal form: (1/n!) * sum over all ordered index tuples of |det|^p, to the 1/p."""
    rows = as_vectors(vectors, params)
    n, d = rows.shape
    tuples = np.array(list(itertools.product(range(d), repeat=n)), dtype=np.intp)
    dets = batched_det(np.moveaxis(rows[:, tuples], 1, 0))
    total = float(np.sum(np.abs(dets) ** params.p)) / math.factorial(n)
    return total ** (1.0 / params.p)


def gram_2_norm(vectors, abs_tol=None):
    """
    Euclidean n-norm as the square root of the Gram determinant det[<x_i, x_k>].

    Agrees with ``lp_n_norm`` at p = 2 (Cauchy-Binet). The determinant is taken
    on rows scaled to unit largest entry; below ``-abs_tol`` there means the
    floating-point computation broke down.
    """
    rows = as_vectors(vectors)
    if abs_tol is None:
        abs_tol = get_abs_tol()
    scaled, scales = _unit_rows(rows)
    if scaled is None:
        return 0.0
    gram = scaled @ scaled.T
    value = float(batched_det(gram[np.newaxis])[0])
    if value < -abs_tol:
        raise NumericalBreakdownError(f"Gram determinant is negative ({value:.3e})")
    return _restore_scale(math.sqrt(max(value, 0.0)), scales, 'Gram 2-norm')


def independence_threshold(vectors, params):
    """rel_tol times the product of Euclidean lengths, so the test is scale-invariant."""
    rows = as_vectors(vectors, params)
    return params.rel_tol * float(np.prod(np.linalg.norm(rows, axis=1)))


def is_linearly_independent(vectors, params):
    rows = as_vectors(vectors, params)
    scaled, _ = _unit_rows(rows)
    if scaled is None:
        return False
    # both sides carry the same product of row scales
    return _p_sum(minors(scaled), params.p) > independence_threshold(scaled, params)


# =============================================================================
# Axiom checks
# =============================================================================

AXIOM_NAMES = ('nonnegativity', 'dependence', 'permutation', 'homogeneity', 'triangle')


@dataclass
class AxiomTally:
    name: str
    checked: int = 0
    violations: int = 0
    worst: float = 0.0

    def record(self, excess):
        self.checked += 1
        if excess > 0:
            self.violations += 1
            self.worst = max(self.worst, excess)

    def merge(self, other):
        self.checked += other.checked
        self.violations += other.violations
        self.worst = max(self.worst, other.worst)


@dataclass
class AxiomReport:
    """Pass/fail counts per axiom and the worst relative violation seen."""

    params: NormParams
    sample_count: int
    seed: int
    tallies: list = field(default_factory=list)

    @property
    def violations(self):
        return sum(tally.violations for tally in self.tallies)

    @property
    def worst_violation(self):
        return max((tally.worst for tally in self.tallies), default=0.0)

    @property
    def passed(self):
        return self.violations == 0


def _dependent_copy(rows, rng):
    dependent = rows.copy()
    if rows.shape[0] == 1:
        dependent[0] = 0.0
    else:
        dependent[-1] = rng.standard_normal(rows.shape[0] - 1) @ rows[:-1]
    return dependent


def _axiom_shard(params, rng, count):
    tallies = {name: AxiomTally(name) for name in AXIOM_NAMES}
    n, d = params.n, params.d
    rel_tol, abs_tol = params.rel_tol, params.abs_tol
    orderings = [list(order) for order in itertools.permutations(range(n))]

    for _ in range(count):
        rows = rng.standard_normal((n, d))
        value = lp_n_norm(rows, params)
        scale = max(value, abs_tol)

        # (i) nonnegativity; zero exactly on dependent tuples, positive otherwise
        tallies['nonnegativity'].record(relative_excess(-value, 0.0, scale))
        dependent = _dependent_copy(rows, rng)
        dependent_value = lp_n_norm(dependent, params)
        lengths = float(np.prod(np.linalg.norm(dependent, axis=1)))
        excess = relative_excess(dependent_value, abs_tol * max(1.0, lengths), 1.0)
        if is_linearly_independent(dependent, params) or not is_linearly_independent(rows, params):
            excess = max(excess, 1.0)
        tallies['dependence'].record(excess)

        # (ii) every ordering of the arguments
        worst = 0.0
        for order in orderings:
            permuted = lp_n_norm(rows[order], params)
            worst = max(worst, relative_excess(abs(permuted - value), rel_tol * value + abs_tol, scale))
        tallies['permutation'].record(worst)

        # (iii) |alpha|-homogeneity in the first argument
        alpha = rng.uniform(-5.0, 5.0)
        scaled = rows.copy()
        scaled[0] *= alpha
        target = abs(alpha) * value
        tallies['homogeneity'].record(
            relative_excess(abs(lp_n_norm(scaled, params) - target), rel_tol * target + abs_tol, max(target, abs_tol))
        )

        # (iv) triangle inequality in the first argument
        other = rng.standard_normal(d)
        summed = rows.copy()
        summed[0] += other
        swapped = rows.copy()
        swapped[0] = other
        bound = value + lp_n_norm(swapped, params)
        tallies['triangle'].record(
            relative_excess(lp_n_norm(summed, params), bound * (1.0 + rel_tol) + abs_tol, max(bound, abs_tol))
        )

    return [tallies[name] for name in AXIOM_NAMES]


def check_axioms(params, sample_count, seed):
    """
    Check axioms (i)-(iv) of an n-norm on seeded random tuples.

    Dependent tuples are built on purpose (a random combination of the other
    n - 1 rows replaces the last one) because random draws are independent
    with probability one. A report with violations is a valid result.
    """
    if int(sample_count) != sample_count or sample_count < 1:
        raise InvalidParameterError(f"sample_count must be a positive integer, got {sample_count}")

    shards = run_sharded(lambda rng, count, index: _axiom_shard(params, rng, count), sample_count, seed)
    tallies = [AxiomTally(name) for name in AXIOM_NAMES]
    for shard in shards:
        for total, part in zip(tallies, shard):
            total.merge(part)

    report = AxiomReport(params=params, sample_count=sample_count, seed=seed, tallies=tallies)
    logger.info(
        f"Axiom check n={params.n} p={params.p} d={params.d}: "
        f"{report.violations} violations over {sample_count} samples"
    )
    return report
