"""Instance weights on (0, 1] computed from performance inter-onset intervals.

proximity
    ``exp(-span / tau)`` where span is the first-to-last onset distance.
periodicity
    ``min(ioi) / max(ioi)``; 1 for a single interval.
resonance
    Geometric mean over IOIs of ``exp(-log2(ioi / p0)**2 / (2 sigma**2))``,
    a log-Gaussian preference curve peaking at ``p0`` seconds.

An instance of length 1 has no IOIs and weighs 1 under every scheme.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "WeightError",
    "WeightScheme",
    "SCHEMES",
    "iois",
    "weight_none",
    "weight_proximity",
    "weight_periodicity",
    "weight_resonance",
    "resonance_curve",
]

SCHEMES = ("none", "proximity", "periodicity", "resonance")

# Floor for results that would underflow; keeps every weight strictly positive.
_TINY = sys.float_info.min


class WeightError(ValueError):
    pass


@dataclass(frozen=True)
class WeightScheme:
    kind: str = "none"
    tau: float = 1.0
    p0: float = 0.5
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise WeightError(f"unknown weighting {self.kind!r} (expected one of {', '.join(SCHEMES)})")
        for name in ("tau", "p0", "sigma"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise WeightError(f"{name} must be a positive number, got {value}")

    @property
    def needs_performance(self) -> bool:
        return self.kind != "none"

    def params(self) -> dict:
        """Only the parameters that affect this scheme."""
        return {"proximity": {"tau": self.tau},
                "resonance": {"p0": self.p0, "sigma": self.sigma}}.get(self.kind, {})

    def __str__(self):
        extra = ",".join(f"{k}={v:g}" for k, v in self.params().items())
        return f"{self.kind}({extra})" if extra else self.kind

    def __call__(self, onsets: Optional[Sequence[float]]) -> float:
        """Weight of an instance given its performance onsets."""
        if self.kind == "none":
            return 1.0
        if onsets is None:
            raise WeightError(f"{self.kind} weighting needs performance times")
        gaps = iois(onsets)
        if self.kind == "proximity":
            return weight_proximity(gaps, self.tau)
        if self.kind == "periodicity":
            return weight_periodicity(gaps)
        return weight_resonance(gaps, self.p0, self.sigma)

    def weigh_array(self, onsets: np.ndarray, idx: np.ndarray) -> Optional[np.ndarray]:
        """Weights of every row of index array ``idx`` (None for ``none``)."""
        if self.kind == "none":
            return None
        t = onsets[idx]
        if idx.shape[1] < 2:
            return np.ones(len(idx))
        if self.kind == "proximity":
            span = t[:, -1] - t[:, 0]
            if len(span) and span.min() < 0:
                raise _gap_error(span.min())
            return np.maximum(np.exp(-span / self.tau), _TINY)
        gaps = np.diff(t, axis=1)
        if len(gaps) and not gaps.min() > 0:
            raise _gap_error(gaps.min())
        if self.kind == "periodicity":
            return gaps.min(axis=1) / gaps.max(axis=1)
        d = np.log2(gaps / self.p0)
        acc = (d * d).sum(axis=1)
        return np.maximum(np.exp(-acc / (2.0 * self.sigma * self.sigma * gaps.shape[1])), _TINY)


def _gap_error(x):
    return WeightError(f"inter-onset intervals must be positive, got {x}")


def iois(onsets: Sequence[float]) -> tuple:
    return tuple(b - a for a, b in zip(onsets, onsets[1:]))


def _check(ioi, strict=True):
    if ioi is None:
        raise WeightError("missing performance times")
    for x in ioi:
        if not (x > 0 if strict else x >= 0):
            raise _gap_error(x)


def weight_none(instance=None) -> float:
    return 1.0


def weight_proximity(ioi: Sequence[float], tau: float = 1.0) -> float:
    _check(ioi, strict=False)
    return max(math.exp(-math.fsum(ioi) / tau), _TINY)


def weight_periodicity(ioi: Sequence[float]) -> float:
    _check(ioi)
    if not ioi:
        return 1.0
    return min(ioi) / max(ioi)


def resonance_curve(x: float, p0: float = 0.5, sigma: float = 1.0) -> float:
    d = math.log2(x / p0)
    return max(math.exp(-d * d / (2.0 * sigma * sigma)), _TINY)


def weight_resonance(ioi: Sequence[float], p0: float = 0.5, sigma: float = 1.0) -> float:
    _check(ioi)
    if not ioi:
        return 1.0
    # Geometric mean, taken in log space.
    acc = 0.0
    for x in ioi:
        d = math.log2(x / p0)
        acc += d * d
    return max(math.exp(-acc / (2.0 * sigma * sigma * len(ioi))), _TINY)
