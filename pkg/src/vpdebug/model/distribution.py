from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMALIZATION_TOL = 1e-9


class InvalidDistributionError(ValueError):
    pass


def validate_probs(probs, size: int | None = None) -> np.ndarray:
    """Return ``probs`` as a float array, or raise if it is not a distribution."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidDistributionError("probabilities must be a non-empty vector")
    if size is not None and p.size != size:
        raise InvalidDistributionError(f"expected {size} probabilities, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise InvalidDistributionError("probabilities must be finite")
    if np.any(p < 0):
        raise InvalidDistributionError("probabilities must be non-negative")
    total = float(p.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
    return p


@dataclass(frozen=True, eq=False)
class TokenDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = validate_probs(self.probs)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size
