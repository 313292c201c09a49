"""
Equivalence of the usual l^p norm with the norms built from an anchor set
=========================================================================

Three norms live on the same truncated l^p space:

* the usual norm ||x||_p,
* the star norm ||x||*_p, the p-sum of the n class-1 values of x,
* the class-n norm ||x||*_{1..n}, the plain sum of those values.

With N = ||y_1, ..., y_n||_p and P = (sum over (n-1)-subsets of the products
of ||y_i||_p^p)^(1/p) they satisfy

    n N / ((2n - 1) sum ||y_i||_p) * ||x||_p <= ||x||*_p <= (n!)^(1 - 1/p) P ||x||_p
    ||x||*_p <= ||x||*_{1..n} <= n^(1 - 1/p) ||x||*_p

and, composed, the class-n norm sits between the same lower constant and
(n n!)^(1 - 1/p) P times ||x||_p.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameterError
from .nnorm_core import as_vector, lp_n_norm
from .quotient import IndexSubset, class1_norms, classm_norm, random_anchor_set
from .utils import run_sharded

logger = logging.getLogger(__name__)

CHECKS = ('theorem', 'prop', 'corollary')


def _check_p(p):
    if not (math.isfinite(p) and p >= 1):
        raise InvalidParameterError(f"p must satisfy 1 <= p < inf, got {p}")


def usual_lp_norm(x, p):
    """(sum |x_i|^p)^(1/p)."""
    _check_p(p)
    return float(np.linalg.norm(as_vector(x), ord=p))


def star_p_norm(x, Y, p):
    """The p-sum of the n class-1 values of x, each an n-norm with exponent p."""
    _check_p(p)
    values = class1_norms(as_vector(x, Y.d), Y.with_exponent(p))
    return float(np.linalg.norm(values, ord=p))


def class_n_norm(x, Y, p):
    """||x||*_{1..n} with every class-1 term evaluated at exponent p."""
    return classm_norm(x, Y.with_exponent(p), IndexSubset(tuple(range(1, Y.n + 1))))


def lower_constant(Y, p):
    """n ||y_1, ..., y_n||_p / ((2n - 1) (||y_1||_p + ... + ||y_n||_p))."""
    Yp = Y.with_exponent(p)
    lengths = sum(usual_lp_norm(y, p) for y in Y.vectors)
    return Y.n * lp_n_norm(Y.vectors, Yp.params) / ((2 * Y.n - 1) * lengths)


def product_sum(Y, p):
    """(sum over (n-1)-subsets of prod ||y_i||_p^p)^(1/p)."""
    lengths = [usual_lp_norm(y, p) ** p for y in Y.vectors]
    total = sum(math.prod(chosen) for chosen in itertools.combinations(lengths, Y.n - 1))
    return total ** (1.0 / p)


def upper_constant(Y, p):
    return math.factorial(Y.n) ** (1.0 - 1.0 / p) * product_sum(Y, p)


def corollary_upper_constant(Y, p):
    return (Y.n * math.factorial(Y.n)) ** (1.0 - 1.0 / p) * product_sum(Y, p)


@dataclass
class EquivalenceEntry:
    """
    lower <= mid <= upper for one sample.

    ``lower`` and ``upper`` are the constants times the size the check compares
    against. ``slack`` is the tighter of the two margins, relative to upper.
    """

    check: str
    d: int
    lower_constant: float
    upper_constant: float
    lower: float
    mid: float
    upper: float
    slack: float
    passed: bool


def _entry(check, lower_constant, upper_constant, size, mid, Y):
    rel_tol, abs_tol = Y.params.rel_tol, Y.params.abs_tol
    lower, upper = lower_constant * size, upper_constant * size
    tolerance = rel_tol * upper + abs_tol
    passed = lower - tolerance <= mid <= upper + tolerance
    slack = min(mid - lower, upper - mid) / max(upper, abs_tol)
    if not passed:
        logger.warning(f"{check} bound violated: {lower:.6g} <= {mid:.6g} <= {upper:.6g} fails")
    return EquivalenceEntry(
        check=check, d=Y.d, lower_constant=lower_constant, upper_constant=upper_constant,
        lower=lower, mid=mid, upper=upper, slack=slack, passed=passed,
    )


def check_theorem_equivalent(x, Y, p):
    """Usual norm against the star norm."""
    x = as_vector(x, Y.d)
    return _entry('theorem', lower_constant(Y, p), upper_constant(Y, p), usual_lp_norm(x, p), star_p_norm(x, Y, p), Y)


def check_prop1(x, Y, p):
    """Star norm against the class-n norm."""
    x = as_vector(x, Y.d)
    return _entry('prop', 1.0, Y.n ** (1.0 - 1.0 / p), star_p_norm(x, Y, p), class_n_norm(x, Y, p), Y)


def check_corollary_combined(x, Y, p):
    """Usual norm against the class-n norm, with the composed constants."""
    x = as_vector(x, Y.d)
    return _entry(
        'corollary', lower_constant(Y, p), corollary_upper_constant(Y, p), usual_lp_norm(x, p), class_n_norm(x, Y, p), Y,
    )


def chain_consistent(theorem, prop, corollary, Y):
    """
    Composing the theorem and prop checks must reproduce the combined one.

    Upper side: n^(1 - 1/p) ||x||*_p lies between the class-n norm and the
    combined upper bound, so the composed margin is never tighter than the
    direct one. Lower side: ||x||*_p lies between the lower bound and the
    class-n norm.
    """
    tolerance = Y.params.rel_tol * corollary.upper + Y.params.abs_tol
    upper_ok = prop.mid <= prop.upper + tolerance and prop.upper <= corollary.upper + tolerance
    lower_ok = theorem.lower <= theorem.mid + tolerance and theorem.mid <= prop.mid + tolerance
    return upper_ok and lower_ok


@dataclass
class EquivalenceReport:
    """
    A seeded batch of equivalence checks for one (n, p).

    ``entries`` keeps every sample of every check, constants included.
    ``max_slack`` is the tightest relative margin seen per check, the number
    that says how close the bounds came to failing; ``loosest_slack`` is the
    other extreme. ``rows`` holds one CSV row per sample, built from the
    combined check; its ``pass`` column is set only when all three checks and
    the chain hold.
    """

    n: int
    p: float
    seed: int
    samples: int
    dims: list
    rows: list = field(default_factory=list)
    entries: dict = field(default_factory=dict)
    checked: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    max_slack: dict = field(default_factory=dict)
    loosest_slack: dict = field(default_factory=dict)
    chain_failures: int = 0

    @property
    def passed(self):
        return not any(self.failures.values()) and self.chain_failures == 0


CSV_FIELDS = ('seed', 'n', 'p', 'd', 'lower', 'mid', 'upper', 'slack', 'pass')


def verify_equivalence_batch(n, p, samples, seed, dims=None):
    """
    Run all three checks on ``samples`` random (x, Y) draws for every d in ``dims``.

    Each d gets its own seed stream derived from (seed, n, d), split into
    deterministic shards. Anchor sets come from ``random_anchor_set`` with a
    10x independence margin; x is standard normal.
    """
    _check_p(p)
    if int(samples) != samples or samples < 1:
        raise InvalidParameterError(f"samples must be a positive integer, got {samples}")
    if dims is None:
        dims = sorted({n, n + 2, max(8, n)})
    dims = [int(d) for d in dims]
    if any(d < n for d in dims):
        raise InvalidParameterError(f"every dimension must be at least n = {n}, got {dims}")

    report = EquivalenceReport(n=n, p=p, seed=seed, samples=samples, dims=dims)
    for check in CHECKS:
        report.entries[check] = []
        report.checked[check] = 0
        report.failures[check] = 0

    def task(rng, count, index):
        results = []
        for _ in range(count):
            Y = random_anchor_set(rng, n, d, p)
            x = rng.standard_normal(d)
            entries = (check_theorem_equivalent(x, Y, p), check_prop1(x, Y, p), check_corollary_combined(x, Y, p))
            results.append((entries, chain_consistent(*entries, Y)))
        return results

    for d in dims:
        for shard in run_sharded(task, samples, [seed, n, d]):
            for entries, consistent in shard:
                for entry in entries:
                    report.entries[entry.check].append(entry)
                    report.checked[entry.check] += 1
                    report.failures[entry.check] += 0 if entry.passed else 1
                    report.max_slack[entry.check] = min(report.max_slack.get(entry.check, math.inf), entry.slack)
                    report.loosest_slack[entry.check] = max(
                        report.loosest_slack.get(entry.check, -math.inf), entry.slack,
                    )
                report.chain_failures += 0 if consistent else 1
                combined = entries[-1]
                report.rows.append({
                    'seed': seed, 'n': n, 'p': p, 'd': d,
                    'lower': combined.lower, 'mid': combined.mid, 'upper': combined.upper,
                    'slack': combined.slack,
                    'pass': all(entry.passed for entry in entries) and consistent,
                })

    logger.info(
        f"Equivalence batch n={n} p={p:g}: {len(report.rows)} samples, "
        f"failures={report.failures}, chain_failures={report.chain_failures}"
    )
    return report
