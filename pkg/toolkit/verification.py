"""
Seeded property suites run by ``manage.py verify-all``.

Each suite returns a ``SuiteResult``; sample counts default to the desk-scale
sizes below and can be lowered with ``samples`` for quick runs. Every suite
derives its generator from ``(seed, suite position)`` so suites can run alone
and still reproduce the numbers of a full run.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import SequencePrefix, check_cauchy, check_convergence
from .exceptions import ConvergenceError
from .fixedpoint import (
    AffineMapping,
    banach_solve,
    certify_contraction,
    fixed_point_oracle,
    random_affine_contraction,
    uniqueness_probe,
    verify_class_propagation,
)
from .lp_equivalence import check_prop1, check_theorem_equivalent, verify_equivalence_batch
from .nnorm_core import NormParams, check_axioms, gram_2_norm, lp_n_norm, ordered_tuple_n_norm
from .quotient import (
    AnchorSet,
    class1_norms,
    classm_norm,
    coset_shift,
    covering_family,
    enumerate_class,
    in_span_residual,
    quotient_zero_check,
    random_anchor_set,
)
from .sampling import DomainSampler
from .utils import get_abs_tol, get_rel_tol

logger = logging.getLogger(__name__)

# Anchors for the iteration suites must be well conditioned so that rounding in
# the iterates stays far below the stopping threshold.
WELL_CONDITIONED_MARGIN = 1e6


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    checks: int = 0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def check(self, ok, message):
        self.checks += 1
        if not ok:
            self.passed = False
            if len(self.failures) < 20:
                self.failures.append(message)
        return ok


@dataclass
class VerificationReport:
    seed: int
    suites: list

    @property
    def passed(self):
        return all(suite.passed for suite in self.suites)


def _rng(seed, position):
    return np.random.default_rng(np.random.SeedSequence([seed, position]))


def _close(a, b, scale):
    return abs(a - b) <= get_rel_tol() * scale + get_abs_tol()


def _finite(value):
    value = float(value)
    return value if math.isfinite(value) else None


def axiom_suite(seed, samples=None):
    """Axioms of the determinant n-norm for (n, p, d) in {2,3} x {1,2,3} x {4,8}."""
    samples = samples or 1000
    result = SuiteResult('axioms')
    worst = 0.0
    for n, p, d in itertools.product((2, 3), (1.0, 2.0, 3.0), (4, 8)):
        report = check_axioms(NormParams.from_settings(n, p, d), samples, seed)
        worst = max(worst, report.worst_violation)
        for tally in report.tallies:
            result.check(
                tally.violations == 0,
                f"n={n} p={p:g} d={d}: {tally.violations} {tally.name} violations (worst {tally.worst:.3e})",
            )
    result.details = {'samples_per_configuration': samples, 'worst_violation': _finite(worst)}
    return result


def oracle_suite(seed, samples=None):
    """Combination-sum norm against the ordered-tuple form, and against the Gram form at p = 2."""
    samples = samples or 200
    rng = _rng(seed, 2)
    result = SuiteResult('oracles')
    exponents = (1.0, 1.5, 2.0, 3.0)
    for n in range(1, 4):
        for d in range(n, 7):
            for index in range(samples):
                rows = rng.standard_normal((n, d))
                p = exponents[index % len(exponents)]
                params = NormParams.from_settings(n, p, d)
                value = lp_n_norm(rows, params)
                oracle = ordered_tuple_n_norm(rows, params)
                result.check(
                    _close(value, oracle, max(value, oracle)),
                    f"n={n} d={d} p={p:g}: combination sum {value!r} vs ordered tuples {oracle!r}",
                )
                euclidean = lp_n_norm(rows, params.with_exponent(2.0))
                gram = gram_2_norm(rows)
                result.check(
                    _close(euclidean, gram, max(euclidean, gram)),
                    f"n={n} d={d}: p=2 norm {euclidean!r} vs Gram form {gram!r}",
                )
    result.details = {'samples_per_shape': samples}
    return result


def quotient_suite(seed, samples=None):
    """Shifting a representative by the quotiented span leaves every quotient norm unchanged."""
    samples = samples or 1000
    rng = _rng(seed, 3)
    result = SuiteResult('quotient')
    exponents = (1.0, 2.0, 3.0)
    worst = 0.0
    for n in range(1, 5):
        for index in range(samples):
            d = n + index % 3
            Y = random_anchor_set(rng, n, d, exponents[index % len(exponents)])
            u = rng.standard_normal(d)
            for m in range(1, n + 1):
                for subset in enumerate_class(n, m):
                    coefficients = rng.standard_normal(n - m)
                    shifted = coset_shift(u, Y, subset, coefficients)
                    before = classm_norm(u, Y, subset)
                    after = classm_norm(shifted, Y, subset)
                    scale = max(before, Y.scale(shifted))
                    worst = max(worst, abs(after - before) / scale)
                    result.check(
                        _close(before, after, scale),
                        f"n={n} S={{{subset}}}: norm moved from {before!r} to {after!r} under a coset shift",
                    )
                    zero = coset_shift(np.zeros(d), Y, subset, coefficients)
                    result.check(
                        quotient_zero_check(zero, Y, subset)
                        and in_span_residual(zero, Y, subset) <= 1e-9 * (1.0 + float(np.linalg.norm(zero))),
                        f"n={n} S={{{subset}}}: a span element is not recognised as the zero coset",
                    )
    result.details = {'samples_per_n': samples, 'worst_relative_change': _finite(worst)}
    return result


def curated_sequences(rng, d, count=20, length=60):
    """``count`` convergent and ``count`` divergent prefixes around a random limit."""
    limit = rng.standard_normal(d)
    k = np.arange(1, length + 1, dtype=float)[:, np.newaxis]
    convergent, divergent = [], []
    for index in range(count):
        v = 0.1 * rng.standard_normal(d)
        if index % 2 == 0:
            rate = rng.uniform(0.3, 0.6)
            convergent.append(limit + rate ** k * v)
            divergent.append(limit + k * v)
        else:
            convergent.append(limit + v / k ** 4)
            divergent.append(limit + 10.0 * (-1.0) ** k * v)
    return limit, [SequencePrefix(points) for points in convergent], [SequencePrefix(points) for points in divergent]


def covering_suite(seed, samples=None, eps=1e-3):
    """Covering-family verdicts equal full-class verdicts for every n <= 5 and m <= n."""
    count = min(samples or 20, 20)
    rng = _rng(seed, 4)
    result = SuiteResult('covering')
    for n in range(1, 6):
        Y = random_anchor_set(rng, n, n + 1, 2.0, margin=WELL_CONDITIONED_MARGIN)
        limit, convergent, divergent = curated_sequences(rng, Y.d, count)
        for m in range(1, n + 1):
            result.check(
                len(covering_family(n, m)) == math.ceil(n / m),
                f"n={n} m={m}: covering family has {len(covering_family(n, m))} subsets",
            )
            for expected, family in (('satisfied', convergent), ('violated', divergent)):
                for index, seq in enumerate(family):
                    for name, run in (
                        ('convergence', lambda covering: check_convergence(seq, limit, Y, m, eps, covering)),
                        ('cauchy', lambda covering: check_cauchy(seq, Y, m, eps, covering)),
                    ):
                        reduced, full = run(True), run(False)
                        result.check(
                            reduced.status == full.status == expected,
                            f"n={n} m={m} {name} #{index}: covering {reduced.status}, "
                            f"full {full.status}, expected {expected}",
                        )
    result.details = {'sequences_per_kind': count, 'eps': eps}
    return result


def _random_affine(rng, d, norm=0.9):
    G = rng.standard_normal((d, d))
    return AffineMapping(A=norm * G / np.linalg.norm(G, 2), b=rng.standard_normal(d))


def propagation_suite(seed, samples=None, pairs=500):
    """Contraction estimates never increase from class 1 to class m, nor from class m to class n."""
    maps = min(samples or 50, 50)
    rng = _rng(seed, 5)
    result = SuiteResult('propagation')
    for index in range(maps):
        n = 2 + index % 3
        d = n + index % 2
        m = 1 + index % n
        Y = random_anchor_set(rng, n, d, 2.0, margin=WELL_CONDITIONED_MARGIN)
        T = _random_affine(rng, d)
        sampler = DomainSampler(center=np.zeros(d))
        report = verify_class_propagation(T, sampler, Y, m, pairs, [seed, index])
        result.check(
            not report.counterexamples,
            f"map #{index} n={n} m={m}: {len(report.counterexamples)} propagation counterexamples",
        )
        result.check(report.multiplicity_ok, f"map #{index}: class-m sums disagree with the class-n multiplicity")
    result.details = {'maps': maps, 'pairs_per_map': pairs}
    return result


def _error(x, target, Y, subsets):
    values = class1_norms(x - target, Y)
    return max(sum(values[i - 1] for i in subset) for subset in subsets)


def fixed_point_suite(seed, samples=None, eps=1e-9, max_iter=10000):
    """Certified affine contractions: convergence, oracle agreement, a-priori bounds and uniqueness."""
    maps = min(samples or 50, 50)
    rng = _rng(seed, 6)
    result = SuiteResult('fixed_point')
    worst_error = 0.0
    for index in range(maps):
        n = 2 + index % 3
        m = 1 + index % n
        Y = random_anchor_set(rng, n, n, 2.0, margin=WELL_CONDITIONED_MARGIN)
        T = random_affine_contraction(rng, Y, 0.9)
        estimate = certify_contraction(T, Y, m)
        if not result.check(estimate is not None, f"map #{index}: no certificate for an anchor-diagonal map"):
            continue
        result.check(
            estimate.C_hat <= 0.9 + get_rel_tol(),
            f"map #{index}: certified constant {estimate.C_hat!r} above 0.9",
        )
        subsets = list(enumerate_class(n, m))
        x0 = rng.standard_normal(n)
        try:
            solved = banach_solve(T, x0, Y, m, eps, max_iter, estimate=estimate)
        except ConvergenceError as exc:
            result.check(False, f"map #{index}: {exc}")
            continue
        result.check(
            solved.converged and max(solved.residual_per_subset.values()) <= 1e-8,
            f"map #{index}: not converged to residual 1e-8 after {solved.iterations} iterations",
        )
        oracle = fixed_point_oracle(T.A, T.b)
        error = _error(solved.solution, oracle, Y, subsets)
        worst_error = max(worst_error, error)
        result.check(error <= 1e-6, f"map #{index}: distance {error:.3e} to the linear-solve oracle")

        slack = get_rel_tol() * (1.0 + solved.first_step_bound)
        x = x0
        for k, bound in enumerate(solved.apriori_bound_trace, start=1):
            x = T(x)
            if not result.check(
                _error(x, oracle, Y, subsets) <= bound + slack,
                f"map #{index}: a-priori bound {bound:.3e} below the true error at iteration {k}",
            ):
                break

        starts = [rng.standard_normal(n) * 10.0 for _ in range(4)]
        probe = uniqueness_probe(T, starts, Y, m, eps, max_iter, estimate=estimate)
        result.check(
            probe.status == 'pass' and probe.max_distance <= 1e-7,
            f"map #{index}: uniqueness probe {probe.status} with spread {probe.max_distance:.3e}",
        )
    result.details = {'maps': maps, 'eps': eps, 'worst_oracle_distance': _finite(worst_error)}
    return result


def equivalence_suite(seed, samples=None):
    """Equivalence bounds for (n, p) in {2,3,4} x {1, 1.5, 2, 3}, plus the worked (3, 4) instance."""
    samples = samples or 1000
    result = SuiteResult('equivalence')
    tightest = math.inf
    for n, p in itertools.product((2, 3, 4), (1.0, 1.5, 2.0, 3.0)):
        report = verify_equivalence_batch(n, p, samples, seed)
        for check, failures in report.failures.items():
            result.check(failures == 0, f"n={n} p={p:g}: {failures} {check} failures")
            result.check(
                report.max_slack[check] >= -get_rel_tol(),
                f"n={n} p={p:g}: {check} slack {report.max_slack[check]:.3e}",
            )
            tightest = min(tightest, report.max_slack[check])
        result.check(report.chain_failures == 0, f"n={n} p={p:g}: {report.chain_failures} chain failures")

    Y = AnchorSet.standard(2)
    theorem = check_theorem_equivalent([3.0, 4.0], Y, 2.0)
    prop = check_prop1([3.0, 4.0], Y, 2.0)
    for label, entry, expected in (
        ('theorem', theorem, (5.0 / 3.0, 5.0, 10.0)),
        ('prop', prop, (5.0, 7.0, 5.0 * math.sqrt(2.0))),
    ):
        got = (entry.lower, entry.mid, entry.upper)
        result.check(
            all(abs(a - b) <= 1e-12 for a, b in zip(got, expected)),
            f"worked instance {label}: got {got}, expected {expected}",
        )
    result.details = {'samples_per_dimension': samples, 'max_slack': _finite(tightest)}
    return result


SUITES = (
    ('axioms', axiom_suite),
    ('oracles', oracle_suite),
    ('quotient', quotient_suite),
    ('covering', covering_suite),
    ('propagation', propagation_suite),
    ('fixed_point', fixed_point_suite),
    ('equivalence', equivalence_suite),
)


def verify_all(seed, samples=None, only=None):
    """
    Run the property suites in a fixed order.

    Args:
        seed: The run seed.
        samples: Optional sample count overriding every suite's default.
        only: Optional iterable of suite names to run.

    Returns:
        VerificationReport
    """
    selected = [(name, suite) for name, suite in SUITES if only is None or name in only]
    results = []
    for name, suite in selected:
        logger.info(f"Running {name} suite (seed={seed})")
        outcome = suite(seed, samples)
        logger.info(f"Suite {name}: {'passed' if outcome.passed else 'FAILED'} ({outcome.checks} checks)")
        results.append(outcome)
    return VerificationReport(seed=seed, suites=results)
