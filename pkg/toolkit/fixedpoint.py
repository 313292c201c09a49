"""
Contractive mappings and the Banach iteration
=============================================

A map T is contractive with respect to the class-m norms when one constant
C in (0, 1) satisfies ||Tx - Ty||*_S <= C ||x - y||*_S for every subset S of
size m. This module estimates such constants from samples, certifies them
exactly where that is possible, checks how contraction carries across classes,
and runs the iteration x_k = T(x_{k-1}) with a-priori error bounds
C^k * M / (1 - C), M being the size of the first step.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from .exceptions import (
    DimensionMismatchError,
    DivergenceError,
    InvalidParameterError,
    NoInformativePairsError,
    NonFiniteInputError,
    NonFiniteIterateError,
)
from .nnorm_core import as_vector
from .quotient import IndexSubset, class1_norms, covering_family, enumerate_class
from .utils import run_sharded

logger = logging.getLogger(__name__)


# =============================================================================
# Mappings
# =============================================================================

MAPPING_REGISTRY = {}


def register_mapping(name):
    """Register a built-in nonlinear map under ``name`` for ``{"kind": "registered"}`` inputs."""
    def decorator(func):
        MAPPING_REGISTRY[name] = func
        return func
    return decorator


@register_mapping('identity')
def _identity(x):
    return x.copy()


@register_mapping('half_sine')
def _half_sine(x):
    return 0.5 * np.sin(x)


@register_mapping('half_tanh')
def _half_tanh(x):
    return 0.5 * np.tanh(x)


@register_mapping('half_cosine')
def _half_cosine(x):
    return 0.5 * np.cos(x)


class Mapping:
    """A deterministic self-map of R^d."""

    kind = None

    def __call__(self, x):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class AffineMapping(Mapping):
    """T(x) = A x + b."""

    A: np.ndarray
    b: np.ndarray

    kind = 'affine'

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise DimensionMismatchError(f"A must be a nonempty square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise NonFiniteInputError("A entries must be finite")
        b = as_vector(self.b, A.shape[0])
        A = A.copy()
        A.setflags(write=False)
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'b', b)

    @property
    def d(self):
        return self.A.shape[0]

    def __call__(self, x):
        return self.A @ as_vector(x, self.d) + self.b

    def to_dict(self):
        return {'kind': self.kind, 'A': self.A.tolist(), 'b': self.b.tolist()}


@dataclass(frozen=True)
class ScalingMapping(Mapping):
    """T(x) = c x."""

    c: float

    kind = 'scaling'

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise NonFiniteInputError("the scaling factor must be finite")

    def __call__(self, x):
        return self.c * as_vector(x)

    def to_dict(self):
        return {'kind': self.kind, 'c': self.c}


@dataclass(frozen=True)
class RegisteredMapping(Mapping):
    """A named built-in map from ``MAPPING_REGISTRY``."""

    name: str

    kind = 'registered'

    def __post_init__(self):
        if self.name not in MAPPING_REGISTRY:
            known = ', '.join(sorted(MAPPING_REGISTRY))
            raise InvalidParameterError(f"unknown registered mapping {self.name!r} (known: {known})")

    def __call__(self, x):
        return MAPPING_REGISTRY[self.name](as_vector(x))

    def to_dict(self):
        return {'kind': self.kind, 'name': self.name}


def fixed_point_oracle(A, b):
    """The fixed point of x -> A x + b by a direct solve of (I - A) x = b."""
    A = np.asarray(A, dtype=float)
    return np.linalg.solve(np.eye(A.shape[0]) - A, np.asarray(b, dtype=float))


def random_affine_contraction(rng, Y, max_factor=0.9):
    """
    An affine map that is diagonal in anchor coordinates (requires n = d).

    Its eigenvalues are drawn from [-max_factor, max_factor], so it is a
    contraction for every class with certified constant max |eigenvalue|.
    """
    if Y.n != Y.d:
        raise DimensionMismatchError("anchor-diagonal maps need the anchors to span R^d (n = d)")
    basis = Y.vectors.T
    factors = rng.uniform(-max_factor, max_factor, size=Y.d)
    A = basis @ np.diag(factors) @ np.linalg.inv(basis)
    b = rng.standard_normal(Y.d)
    return AffineMapping(A=A, b=b)


# =============================================================================
# Contraction constants
# =============================================================================

@dataclass
class ContractionEstimate:
    """
    Per-subset contraction constants for one class.

    Sampled estimates are lower bounds on the true constant (``is_certified``
    is False); certified ones are exact.
    """

    m: int
    per_subset_C: dict
    C_hat: float
    pairs_used: int
    is_certified: bool = False
    note: str = ''


def _subset_sum(values, subset):
    return sum(values[i - 1] for i in subset)


def _sample_class1(T, sampler, Y, num_pairs, seed):
    """Sample pairs and return the points with class-1 values of x - y and T(x) - T(y)."""
    if int(num_pairs) != num_pairs or num_pairs < 1:
        raise InvalidParameterError(f"num_pairs must be a positive integer, got {num_pairs}")
    if sampler.d != Y.d:
        raise DimensionMismatchError(f"sampler dimension {sampler.d} does not match anchors ({Y.d})")

    def task(rng, count, index):
        first, second = sampler.pairs(count, rng)
        before, after = [], []
        for x, y in zip(first, second):
            before.append(class1_norms(x - y, Y))
            after.append(class1_norms(as_vector(T(x), Y.d) - as_vector(T(y), Y.d), Y))
        return first, second, before, after

    shards = [shard for shard in run_sharded(task, num_pairs, seed) if len(shard[0])]
    first = np.vstack([shard[0] for shard in shards])
    second = np.vstack([shard[1] for shard in shards])
    before = [row for shard in shards for row in shard[2]]
    after = [row for shard in shards for row in shard[3]]
    return first, second, before, after


def _ratios(before, after, subset, abs_tol):
    """(pair index, ratio) for every pair whose denominator exceeds abs_tol."""
    ratios = []
    for index, (den_values, num_values) in enumerate(zip(before, after)):
        denominator = _subset_sum(den_values, subset)
        if denominator > abs_tol:
            ratios.append((index, _subset_sum(num_values, subset) / denominator))
    return ratios


def _estimate_from_samples(before, after, Y, m):
    per_subset = {}
    informative = set()
    for subset in enumerate_class(Y.n, m):
        ratios = _ratios(before, after, subset, Y.params.abs_tol)
        informative.update(index for index, _ in ratios)
        if not ratios:
            logger.warning(f"No informative pair for subset {{{subset}}}; its constant is reported as 0")
        per_subset[subset] = max((ratio for _, ratio in ratios), default=0.0)
    if not informative:
        raise NoInformativePairsError("no informative pairs: every sampled difference vanished")
    return ContractionEstimate(
        m=m,
        per_subset_C=per_subset,
        C_hat=max(per_subset.values()),
        pairs_used=len(informative),
        is_certified=False,
        note='sampled lower bound on the contraction constant',
    )


def estimate_contraction(T, sampler, Y, m, num_pairs, seed):
    """
    Estimate the class-m contraction constant of T from sampled pairs.

    For each subset S the estimate is the largest observed ratio
    ||Tx - Ty||*_S / ||x - y||*_S; pairs with a denominator at most abs_tol
    are skipped. The result is a lower bound, never a certificate.
    """
    _, _, before, after = _sample_class1(T, sampler, Y, num_pairs, seed)
    estimate = _estimate_from_samples(before, after, Y, m)
    logger.info(f"Class-{m} contraction estimate C_hat={estimate.C_hat:.6g} from {estimate.pairs_used} pairs")
    return estimate


def certify_contraction(T, Y, m):
    """
    Exact class-m contraction constant where one can be computed, else None.

    Scaling maps give |c| for every subset. Affine maps are certified when the
    anchors span R^d: in anchor coordinates a = B^-1 u (B has the anchors as
    columns) every class-m norm is |det B| * sum of |a_i| over S, so the
    constant for S is the largest absolute column sum of (B^-1 A B)[S, S],
    provided the map keeps span(anchors outside S) inside itself.
    """
    subsets = list(enumerate_class(Y.n, m))
    if isinstance(T, ScalingMapping):
        factor = abs(T.c)
        return ContractionEstimate(
            m=m, per_subset_C={subset: factor for subset in subsets}, C_hat=factor,
            pairs_used=0, is_certified=True, note='exact: every quotient norm is homogeneous',
        )
    if not isinstance(T, AffineMapping):
        logger.info(f"No exact contraction constant for a {T.kind} mapping")
        return None
    if T.d != Y.d:
        raise DimensionMismatchError(f"mapping dimension {T.d} does not match anchors ({Y.d})")
    if Y.n != Y.d:
        logger.info("Anchors do not span R^d; the affine constant can only be sampled")
        return None

    basis = Y.vectors.T
    coordinates = np.linalg.solve(basis, T.A @ basis)
    leak_tol = Y.params.rel_tol * max(1.0, float(np.max(np.abs(coordinates))))
    per_subset = {}
    for subset in subsets:
        rows = [i - 1 for i in subset]
        others = subset.complement(Y.n)
        if others and float(np.max(np.abs(coordinates[np.ix_(rows, others)]))) > leak_tol:
            logger.warning(
                f"Mapping does not preserve span(anchors outside {{{subset}}}); "
                f"it is not contractive for that quotient norm"
            )
            return None
        per_subset[subset] = float(np.max(np.sum(np.abs(coordinates[np.ix_(rows, rows)]), axis=0)))
    return ContractionEstimate(
        m=m, per_subset_C=per_subset, C_hat=max(per_subset.values()),
        pairs_used=0, is_certified=True, note='exact induced constant in anchor coordinates',
    )


# =============================================================================
# Class propagation
# =============================================================================

@dataclass
class PropagationCounterexample:
    kind: str
    pair_index: int
    subset: IndexSubset
    ratio: float
    bound: float
    x: list
    y: list


@dataclass
class PropagationReport:
    """Pairwise check that class-1 contraction carries to class m, and class m to class n."""

    n: int
    m: int
    C1: float
    Cm: float
    Cn: float
    pairs_checked: int
    multiplicity: int
    multiplicity_ok: bool
    counterexamples: list = field(default_factory=list)

    @property
    def holds(self):
        return not self.counterexamples and self.multiplicity_ok


def verify_class_propagation(T, sampler, Y, m, num_pairs, seed):
    """
    Check the class-1 => class-m and class-m => class-n contraction inequalities pair by pair.

    Every class-m ratio must stay within rel_tol of the class-1 estimate, and
    every class-n ratio within rel_tol of the class-m estimate. The sum of
    all class-m norms equals binomial(n-1, m-1) times the class-n norm, which
    is the multiplicity behind the class-n step; it is checked on every pair too.
    """
    first, second, before, after = _sample_class1(T, sampler, Y, num_pairs, seed)
    rel_tol, abs_tol = Y.params.rel_tol, Y.params.abs_tol
    class1 = _estimate_from_samples(before, after, Y, 1)
    classm = _estimate_from_samples(before, after, Y, m)
    full = IndexSubset(tuple(range(1, Y.n + 1)))
    classn_ratios = _ratios(before, after, full, abs_tol)
    multiplicity = math.comb(Y.n - 1, m - 1)

    report = PropagationReport(
        n=Y.n, m=m, C1=class1.C_hat, Cm=classm.C_hat,
        Cn=max((ratio for _, ratio in classn_ratios), default=0.0),
        pairs_checked=len(before), multiplicity=multiplicity, multiplicity_ok=True,
    )

    def flag(kind, index, subset, ratio, bound):
        report.counterexamples.append(PropagationCounterexample(
            kind=kind, pair_index=index, subset=subset, ratio=ratio, bound=bound,
            x=first[index].tolist(), y=second[index].tolist(),
        ))

    subsets = list(enumerate_class(Y.n, m))
    for subset in subsets:
        for index, ratio in _ratios(before, after, subset, abs_tol):
            if ratio > class1.C_hat + rel_tol:
                flag('class-1 to class-m', index, subset, ratio, class1.C_hat)
    for index, ratio in classn_ratios:
        if ratio > classm.C_hat + rel_tol:
            flag('class-m to class-n', index, full, ratio, classm.C_hat)

    for values in before:
        total = sum(_subset_sum(values, subset) for subset in subsets)
        expected = multiplicity * _subset_sum(values, full)
        if abs(total - expected) > rel_tol * expected + abs_tol:
            report.multiplicity_ok = False
            break

    logger.info(
        f"Class propagation n={Y.n} m={m}: C1={report.C1:.6g} Cm={report.Cm:.6g} Cn={report.Cn:.6g}, "
        f"{len(report.counterexamples)} counterexamples"
    )
    return report


# =============================================================================
# Banach iteration
# =============================================================================

@dataclass
class FixedPointResult:
    solution: np.ndarray
    iterations: int
    residual_per_subset: dict
    apriori_bound_trace: list
    converged: bool
    difference_trace: list = field(default_factory=list)
    first_step_bound: float = 0.0
    contraction_constant: float = None
    certified: bool = False
    projections: int = 0


def _check_box(box, d):
    if box is None:
        return None
    lower, upper = (np.broadcast_to(np.asarray(bound, dtype=float), (d,)) for bound in box)
    if np.any(lower > upper):
        raise InvalidParameterError("box lower bound exceeds upper bound")
    return lower, upper


def banach_solve(T, x0, Y, m, eps, max_iter, estimate=None, box=None):
    """
    Iterate x_k = T(x_{k-1}) until successive steps are small in every class-m norm.

    Args:
        T: The ``Mapping``.
        x0: Starting point.
        Y: ``AnchorSet`` defining the quotient norms.
        m: Class of the norms used for stopping and reporting.
        eps: Stopping threshold for ||x_k - x_{k-1}||*_S.
        max_iter: Iteration cap; reaching it returns ``converged=False``.
        estimate: Optional ``ContractionEstimate``; with C_hat in [0, 1) the
            a-priori bound C_hat^k * M / (1 - C_hat) is recorded per iteration.
        box: Optional ``(lower, upper)`` bounds; iterates are projected onto the box.

    Returns:
        FixedPointResult

    Raises:
        DivergenceError: the step size grew for ``NNORM_DIVERGENCE_WINDOW`` consecutive iterations.
        NonFiniteIterateError: an iterate stopped being finite.
    """
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    if int(max_iter) != max_iter or max_iter < 1:
        raise InvalidParameterError(f"max_iter must be a positive integer, got {max_iter}")
    x = as_vector(x0, Y.d)
    covering = covering_family(Y.n, m)
    subsets = list(enumerate_class(Y.n, m))
    window = getattr(settings, 'NNORM_DIVERGENCE_WINDOW', 10)
    bounds = _check_box(box, Y.d)

    C = None
    if estimate is not None:
        if 0 <= estimate.C_hat < 1:
            C = estimate.C_hat
        else:
            logger.warning(f"Contraction estimate C_hat={estimate.C_hat:.6g} is not below 1; no a-priori bound")

    result = FixedPointResult(
        solution=x, iterations=0, residual_per_subset={}, apriori_bound_trace=[], converged=False,
        contraction_constant=C, certified=bool(estimate is not None and estimate.is_certified and C is not None),
    )
    if bounds is not None:
        clipped = np.clip(x, *bounds)
        if np.any(clipped != x):
            result.projections += 1
            logger.warning("Starting point projected onto the box")
        x = clipped

    growth = 0
    previous_size = None
    for k in range(1, int(max_iter) + 1):
        try:
            x_next = as_vector(T(x), Y.d)
        except NonFiniteInputError as exc:
            error = NonFiniteIterateError(f"iterate {k} is not finite")
            error.result = result
            raise error from exc
        if bounds is not None:
            clipped = np.clip(x_next, *bounds)
            if np.any(clipped != x_next):
                result.projections += 1
            x_next = clipped

        values = class1_norms(x_next - x, Y)
        step_sizes = [_subset_sum(values, subset) for subset in covering]
        step_size = max(step_sizes)
        if k == 1:
            result.first_step_bound = max(_subset_sum(values, subset) for subset in subsets)
        result.difference_trace.append(step_size)
        if C is not None:
            result.apriori_bound_trace.append(C ** k * result.first_step_bound / (1.0 - C))
        result.iterations = k
        result.solution = x_next
        logger.debug(f"Iteration {k}: step {step_size:.3e}")

        if all(size <= eps for size in step_sizes):
            residuals = {subset: _subset_sum(values, subset) for subset in subsets}
            result.residual_per_subset = residuals
            if all(value <= eps for value in residuals.values()):
                result.converged = True
                break

        growth = growth + 1 if previous_size is not None and step_size > previous_size else 0
        if growth >= window:
            result.residual_per_subset = {subset: _subset_sum(values, subset) for subset in subsets}
            error = DivergenceError(f"step size grew for {window} consecutive iterations (at iteration {k})")
            error.result = result
            logger.error(str(error))
            raise error
        previous_size = step_size
        x = x_next

    if not result.converged:
        result.residual_per_subset = {subset: _subset_sum(values, subset) for subset in subsets}
        logger.warning(f"Banach iteration stopped at max_iter={max_iter} without converging")
    else:
        logger.info(f"Banach iteration converged after {result.iterations} iterations")
    if result.projections:
        logger.warning(f"{result.projections} iterates were projected onto the box")
    return result


@dataclass
class UniquenessReport:
    status: str
    max_distance: float
    threshold: float
    solutions: list
    iterations: list


def uniqueness_probe(T, starts, Y, m, eps, max_iter, estimate=None):
    """
    Run the iteration from every start and compare the limits.

    Passes when all limits lie within ``NNORM_UNIQUENESS_FACTOR * eps`` of each
    other in every class-m norm; any run that does not converge makes the
    report inconclusive.
    """
    if len(starts) < 2:
        raise InvalidParameterError("uniqueness_probe needs at least two starting points")
    factor = getattr(settings, 'NNORM_UNIQUENESS_FACTOR', 10)
    solutions, iterations = [], []
    inconclusive = False
    for start in starts:
        try:
            result = banach_solve(T, start, Y, m, eps, max_iter, estimate=estimate)
        except (DivergenceError, NonFiniteIterateError) as exc:
            logger.warning(f"Uniqueness probe run diverged: {exc}")
            inconclusive = True
            continue
        inconclusive = inconclusive or not result.converged
        solutions.append(result.solution)
        iterations.append(result.iterations)

    subsets = list(enumerate_class(Y.n, m))
    distance = 0.0
    for a, b in itertools.combinations(solutions, 2):
        values = class1_norms(a - b, Y)
        distance = max(distance, max(_subset_sum(values, subset) for subset in subsets))

    threshold = factor * eps
    if inconclusive:
        status = 'inconclusive'
    else:
        status = 'pass' if distance <= threshold else 'fail'
    return UniquenessReport(
        status=status, max_distance=distance, threshold=threshold,
        solutions=[solution.tolist() for solution in solutions], iterations=iterations,
    )
