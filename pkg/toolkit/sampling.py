import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError
from .nnorm_core import as_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DomainSampler:
    """
    Draws points from the box ``center +- radius`` and rays out of ``center``.

    ``radii()`` lists the shrinking radii used by the continuity probe:
    ``radius * shrink**k`` for k = levels-1 down to 0, ascending.
    """

    center: np.ndarray
    radius: float = 1.0
    shrink: float = 0.5
    levels: int = 24
    rays: int = 32

    def __post_init__(self):
        object.__setattr__(self, 'center', as_vector(self.center))
        if not self.radius > 0:
            raise InvalidParameterError(f"radius must be positive, got {self.radius}")
        if not 0 < self.shrink < 1:
            raise InvalidParameterError(f"shrink must lie in (0, 1), got {self.shrink}")
        if self.levels < 1 or self.rays < 0:
            raise InvalidParameterError("levels must be positive and rays nonnegative")

    @property
    def d(self):
        return self.center.shape[0]

    def radii(self):
        return self.radius * self.shrink ** np.arange(self.levels - 1, -1, -1, dtype=float)

    def points(self, count, rng):
        """``count`` points uniform in the box, shape (count, d)."""
        return self.center + self.radius * rng.uniform(-1.0, 1.0, size=(count, self.d))

    def pairs(self, count, rng):
        """Two arrays of ``count`` points each; coincident pairs are redrawn."""
        first = self.points(count, rng)
        second = self.points(count, rng)
        same = np.all(first == second, axis=1)
        while np.any(same):
            second[same] = self.points(int(same.sum()), rng)
            same = np.all(first == second, axis=1)
        return first, second

    def directions(self, rng, count=None):
        """Unit (Euclidean) directions, shape (count, d)."""
        count = self.rays if count is None else count
        raw = rng.standard_normal((count, self.d))
        lengths = np.linalg.norm(raw, axis=1)
        keep = lengths > 0
        return raw[keep] / lengths[keep, np.newaxis]
