"""
Finite-sample diagnostics with respect to class-m norms
=======================================================

A finite prefix can never prove that a sequence converges, so every check
returns a three-valued ``Verdict``: satisfied, violated (with a witness) or
inconclusive. The "tail" of a prefix of length K is its last max(2, K // 4)
points.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from .exceptions import DimensionMismatchError, InvalidParameterError, NonFiniteInputError
from .nnorm_core import as_vector
from .quotient import class1_norms, enumerate_class, subsets_for
from .utils import get_default_seed

logger = logging.getLogger(__name__)

SATISFIED = 'satisfied'
VIOLATED = 'violated'
INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True, eq=False)
class SequencePrefix:
    """The first K >= 2 points of a sequence in R^d, stored as a (K, d) array."""

    points: np.ndarray

    def __post_init__(self):
        try:
            points = np.asarray(self.points, dtype=float)
        except ValueError as exc:
            raise DimensionMismatchError(f"sequence points do not share one dimension: {exc}") from exc
        if points.ndim != 2 or points.shape[1] == 0:
            raise DimensionMismatchError(f"expected a list of vectors, got shape {points.shape}")
        if points.shape[0] < 2:
            raise InvalidParameterError(f"a sequence prefix needs at least 2 points, got {points.shape[0]}")
        if not np.all(np.isfinite(points)):
            raise NonFiniteInputError("sequence points must be finite")
        points = points.copy()
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)

    @property
    def K(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def tail_indices(self, minimum=2):
        return range(self.K - max(minimum, self.K // 4), self.K)

    def __len__(self):
        return self.K


@dataclass(frozen=True)
class Witness:
    index: int
    subset: object
    value: float


@dataclass
class Verdict:
    """
    Outcome of a finite-prefix check.

    ``tail_values`` maps each checked subset to its values over the tail.
    ``witness`` is set exactly when the status is violated.
    """

    status: str
    witness: Witness = None
    tail_values: dict = field(default_factory=dict)
    m: int = 1
    eps: float = 0.0

    @property
    def satisfied(self):
        return self.status == SATISFIED

    @property
    def violated(self):
        return self.status == VIOLATED


def _check_eps(eps):
    if not (eps > 0 and math.isfinite(eps)):
        raise InvalidParameterError(f"eps must be positive and finite, got {eps}")


def _check_prefix(seq, Y):
    if not isinstance(seq, SequencePrefix):
        seq = SequencePrefix(seq)
    if seq.d != Y.d:
        raise DimensionMismatchError(f"sequence dimension {seq.d} does not match anchors ({Y.d})")
    return seq


def _subset_values(u, Y, subsets):
    values = class1_norms(u, Y)
    return [sum(values[i - 1] for i in subset) for subset in subsets]


def _largest(u, Y, subsets):
    return max(_subset_values(u, Y, subsets))


def _decide(last_index, last_values, tail_values, subsets, eps, m):
    """Violated if the last index exceeds eps, satisfied if the whole tail is below it."""
    worst = max(range(len(subsets)), key=lambda j: last_values[j])
    if last_values[worst] > eps:
        return Verdict(
            status=VIOLATED,
            witness=Witness(index=last_index, subset=subsets[worst], value=last_values[worst]),
            tail_values=tail_values, m=m, eps=eps,
        )
    if all(value < eps for values in tail_values.values() for value in values):
        return Verdict(status=SATISFIED, tail_values=tail_values, m=m, eps=eps)
    return Verdict(status=INCONCLUSIVE, tail_values=tail_values, m=m, eps=eps)


def check_convergence(seq, limit, Y, m, eps, use_covering=False):
    """
    Does the prefix converge to ``limit`` with respect to the class-m norms?

    Args:
        seq: ``SequencePrefix`` (or a list of points).
        limit: Candidate limit vector.
        Y: ``AnchorSet``.
        m: Class of the norms.
        eps: Threshold.
        use_covering: Check only the ceil(n/m) covering subsets instead of all C(n, m).

    Returns:
        Verdict: witness indices are 0-based positions in the prefix.
    """
    seq = _check_prefix(seq, Y)
    limit = as_vector(limit, Y.d)
    _check_eps(eps)
    subsets = subsets_for(Y.n, m, use_covering)

    tail = list(seq.tail_indices())
    rows = [_subset_values(seq.points[k] - limit, Y, subsets) for k in tail]
    tail_values = {subset: [row[j] for row in rows] for j, subset in enumerate(subsets)}
    verdict = _decide(tail[-1], rows[-1], tail_values, subsets, eps, m)
    logger.debug(f"Convergence check m={m} eps={eps:g} on K={seq.K}: {verdict.status}")
    return verdict


def check_cauchy(seq, Y, m, eps, use_covering=False):
    """
    Is the prefix Cauchy with respect to the class-m norms?

    Compares every pair of tail points. The tail values of a subset are, per
    tail index k, the largest ||x_k - x_l||*_S over the tail. A violation is
    witnessed by the last point and some earlier tail point.
    """
    seq = _check_prefix(seq, Y)
    _check_eps(eps)
    subsets = subsets_for(Y.n, m, use_covering)

    tail = list(seq.tail_indices())
    spread = {k: [0.0] * len(subsets) for k in tail}
    last_row = [0.0] * len(subsets)
    witness_index = tail[-1]
    for position, k in enumerate(tail):
        for l in tail[position + 1:]:
            values = _subset_values(seq.points[k] - seq.points[l], Y, subsets)
            for j, value in enumerate(values):
                spread[k][j] = max(spread[k][j], value)
                spread[l][j] = max(spread[l][j], value)
            if l == tail[-1] and max(values) > max(last_row):
                last_row = values
                witness_index = k

    tail_values = {subset: [spread[k][j] for k in tail] for j, subset in enumerate(subsets)}
    verdict = _decide(witness_index, last_row, tail_values, subsets, eps, m)
    logger.debug(f"Cauchy check m={m} eps={eps:g} on K={seq.K}: {verdict.status}")
    return verdict


def check_bounded(points, Y, m):
    """M = the largest class-m norm over all points and all C(n, m) subsets."""
    rows = np.asarray(points, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise InvalidParameterError("check_bounded needs a nonempty list of points")
    subsets = list(enumerate_class(Y.n, m))
    return max(_largest(as_vector(row, Y.d), Y, subsets) for row in rows)


# =============================================================================
# Cross-class consistency
# =============================================================================

@dataclass
class ConsistencyReport:
    """Convergence and Cauchy verdicts at two classes, eps scaled by the class size."""

    m1: int
    m2: int
    eps: float
    convergence: dict
    cauchy: dict
    defects: list = field(default_factory=list)

    @property
    def agree(self):
        return not self.defects


def _compare(kind, first, second, defects):
    if INCONCLUSIVE in (first.status, second.status):
        return
    if first.status != second.status:
        defects.append(
            f"{kind}: class-{first.m} is {first.status} at eps={first.eps:g} "
            f"but class-{second.m} is {second.status} at eps={second.eps:g}"
        )


def cross_class_consistency(seq, limit, Y, m1, m2, eps):
    """
    Run the convergence and Cauchy checks at classes m1 and m2 and compare.

    A class-m norm is a sum of m class-1 norms, so each class is checked at
    eps * m. Disagreement between two decisive verdicts is a defect;
    inconclusive verdicts never disagree.
    """
    seq = _check_prefix(seq, Y)
    _check_eps(eps)
    convergence = {m: check_convergence(seq, limit, Y, m, eps * m) for m in (m1, m2)}
    cauchy = {m: check_cauchy(seq, Y, m, eps * m) for m in (m1, m2)}
    report = ConsistencyReport(m1=m1, m2=m2, eps=eps, convergence=convergence, cauchy=cauchy)
    _compare('convergence', convergence[m1], convergence[m2], report.defects)
    _compare('cauchy', cauchy[m1], cauchy[m2], report.defects)
    for defect in report.defects:
        logger.warning(f"Cross-class defect: {defect}")
    return report


@dataclass
class ImageConvergenceReport:
    source: Verdict
    image: Verdict

    @property
    def consistent(self):
        return not (self.source.satisfied and self.image.violated)


def check_image_convergence(T, seq, limit, Y, m, eps):
    """
    Check that T(x_k) converges to T(limit) when x_k converges to limit.

    Holds for every continuous T; a satisfied source with a violated image
    points at a discontinuity.
    """
    seq = _check_prefix(seq, Y)
    limit = as_vector(limit, Y.d)
    image = SequencePrefix([as_vector(T(point), Y.d) for point in seq.points])
    return ImageConvergenceReport(
        source=check_convergence(seq, limit, Y, m, eps),
        image=check_convergence(image, as_vector(T(limit), Y.d), Y, m, eps),
    )


# =============================================================================
# Continuity
# =============================================================================

def contraction_continuity_delta(C, eps):
    """delta = eps / C: a contraction with constant C moves points at most C times as far."""
    _check_eps(eps)
    if C < 0:
        raise InvalidParameterError(f"a contraction constant is nonnegative, got {C}")
    return math.inf if C == 0 else eps / C


@dataclass
class ContinuityRow:
    eps: float
    delta: float
    status: str
    rays: int
    rays_crossed: int
    reference_delta: float = None
    meets_reference: bool = None


@dataclass
class ContinuityReport:
    """Empirical modulus of continuity of T at a, one row per eps."""

    l: int
    m: int
    a: list
    rows: list = field(default_factory=list)

    @property
    def failed(self):
        return any(row.status == 'failed' or row.meets_reference is False for row in self.rows)


def _shrinks(profile, radii):
    """Output size at the smallest radius fell by at least the square root of the radius ratio."""
    return profile[0] <= profile[-1] * math.sqrt(radii[0] / radii[-1])


def continuity_probe(T, a, Y, l, m, eps_list, sampler, seed=None, contraction=None):
    """
    Estimate, for each eps, the largest delta that keeps T(x) within eps of T(a).

    Rays x = a + r v leave ``a`` along the sampler's directions. The input
    size is the largest class-l norm of x - a, the output size the largest
    class-m norm of T(x) - T(a). On each ray the first sampled radius whose
    output size reaches eps is refined by bisection, and the ray's delta is
    the input size just below that crossing. delta is the minimum over rays.

    Row statuses:
        ok: at least one ray crossed and every crossing lies inside the sampled radii.
        unbounded: no ray crossed; delta is the largest sampled input size.
        failed: some ray crosses eps already at the smallest radius and its
            output size does not shrink with the radius.
        inconclusive: the sampler produced no usable direction, or a ray
            crosses at the smallest radius while its output size still shrinks
            with the radius (eps is below what the sampled radii resolve).

    ``contraction`` (a ``ContractionEstimate`` or a number) adds the reference
    delta eps / C when l == m.
    """
    a = as_vector(a, Y.d)
    if sampler.d != Y.d:
        raise DimensionMismatchError(f"sampler dimension {sampler.d} does not match anchors ({Y.d})")
    eps_list = [float(eps) for eps in eps_list]
    for eps in eps_list:
        _check_eps(eps)
    seed = get_default_seed() if seed is None else seed
    steps = getattr(settings, 'NNORM_BISECTION_STEPS', 80)
    l_subsets = list(enumerate_class(Y.n, l))
    m_subsets = list(enumerate_class(Y.n, m))
    image_a = as_vector(T(a), Y.d)

    C = getattr(contraction, 'C_hat', contraction)

    def input_size(direction, r):
        return _largest((a + r * direction) - a, Y, l_subsets)

    def output_size(direction, r):
        return _largest(as_vector(T(a + r * direction), Y.d) - image_a, Y, m_subsets)

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    radii = sampler.radii()
    rays = [v for v in sampler.directions(rng) if input_size(v, 1.0) > 0]
    profiles = [[output_size(v, r) for r in radii] for v in rays]

    report = ContinuityReport(l=l, m=m, a=a.tolist())
    for eps in eps_list:
        row = ContinuityRow(eps=eps, delta=0.0, status='inconclusive', rays=len(rays), rays_crossed=0)
        if C is not None and l == m:
            row.reference_delta = contraction_continuity_delta(C, eps)
        report.rows.append(row)
        if not rays:
            logger.warning(f"Continuity probe at eps={eps:g}: no usable directions")
            continue

        deltas, widest = [], 0.0
        failed = False
        exhausted = 0
        for direction, profile in zip(rays, profiles):
            widest = max(widest, input_size(direction, radii[-1]))
            crossing = next((j for j, size in enumerate(profile) if size >= eps), None)
            if crossing is None:
                continue
            if crossing == 0:
                if _shrinks(profile, radii):
                    exhausted += 1
                else:
                    failed = True
                    deltas.append(0.0)
                continue
            lo, hi = radii[crossing - 1], radii[crossing]
            for _ in range(steps):
                mid = 0.5 * (lo + hi)
                if output_size(direction, mid) >= eps:
                    hi = mid
                else:
                    lo = mid
            deltas.append(input_size(direction, lo))

        row.rays_crossed = len(deltas) + exhausted
        if failed:
            row.status = 'failed'
        elif exhausted:
            row.status = 'inconclusive'
            logger.warning(f"Continuity probe at eps={eps:g}: below the smallest sampled radius")
        elif deltas:
            row.status = 'ok'
            row.delta = min(deltas)
        else:
            row.status = 'unbounded'
            row.delta = widest
        if row.reference_delta is not None and row.status == 'ok':
            row.meets_reference = row.delta >= row.reference_delta * (1.0 - Y.params.rel_tol)
        logger.debug(f"Continuity probe at eps={eps:g}: delta={row.delta:.6g} ({row.status})")

    if report.failed:
        logger.warning(f"Continuity probe found no working delta for some eps (l={l}, m={m})")
    return report
