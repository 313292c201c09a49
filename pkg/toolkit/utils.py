import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from django.conf import settings
from rest_framework.renderers import JSONRenderer

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-12


def get_rel_tol():
    return getattr(settings, 'NNORM_REL_TOL', DEFAULT_REL_TOL)


def get_abs_tol():
    return getattr(settings, 'NNORM_ABS_TOL', DEFAULT_ABS_TOL)


def get_default_seed():
    return getattr(settings, 'NNORM_DEFAULT_SEED', 7)


def split_count(total, shards):
    """Split ``total`` samples into ``shards`` near-equal counts, larger counts first."""
    base, extra = divmod(total, shards)
    return [base + (1 if index < extra else 0) for index in range(shards)]


def shard_generators(seed, shards=None):
    """
    Derive one independent generator per shard from a single seed.

    Args:
        seed: The run seed; the only source of randomness.
        shards: Number of shards, defaults to ``NNORM_SHARDS``.

    Returns:
        list: ``numpy.random.Generator`` objects, one per shard, in shard order.
    """
    if shards is None:
        shards = getattr(settings, 'NNORM_SHARDS', 4)
    children = np.random.SeedSequence(seed).spawn(shards)
    return [np.random.default_rng(child) for child in children]


def run_sharded(task, total, seed, shards=None, workers=None):
    """
    Run ``task(rng, count, shard_index)`` over deterministic shards.

    Shards may execute on a thread pool, but results are always returned in
    shard order, so the merged output does not depend on scheduling.
    """
    generators = shard_generators(seed, shards)
    counts = split_count(total, len(generators))
    if workers is None:
        workers = getattr(settings, 'NNORM_WORKERS', 1)

    if workers <= 1 or len(generators) == 1:
        return [task(rng, count, index) for index, (rng, count) in enumerate(zip(generators, counts))]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(task, rng, count, index)
            for index, (rng, count) in enumerate(zip(generators, counts))
        ]
        return [future.result() for future in futures]


def relative_excess(value, bound, scale):
    """How far ``value`` exceeds ``bound``, relative to ``scale`` (0 when within)."""
    excess = value - bound
    if excess <= 0:
        return 0.0
    return float(excess / scale) if scale > 0 else float(excess)


def render_json(data):
    """Render report data as indented, strict JSON text."""
    return JSONRenderer().render(data, renderer_context={'indent': 2}).decode('utf-8')
