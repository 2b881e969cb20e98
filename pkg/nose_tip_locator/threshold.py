"""
Bi-level thresholding of a depth map with Otsu's criterion.

Valid depths are quantized linearly into 256 gray levels over their own [min, max] range.
The threshold t is the last background level: a valid pixel is foreground (face, closest
to the camera) iff its level is > t.

The criterion is evaluated in exact integer arithmetic. Maximizing the between-class
variance w0 * w1 * (mu0 - mu1)^2 is the same as maximizing
(s0 * n1 - s1 * n0)^2 / (n0 * n1), with n the class counts and s the level sums, so
candidate thresholds are compared by cross-multiplying Python ints and exact ties resolve
to the smallest t.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BinaryMask, DepthMap
from .errors import EmptyDepthMapError, InvalidParameterError

LEVELS = 256


@dataclass(frozen=True, eq=False)
class Histogram:
    bins: np.ndarray
    min_depth: float
    max_depth: float

    def __post_init__(self):
        bins = np.array(self.bins, dtype=np.int64, copy=True)
        if bins.shape != (LEVELS,):
            raise InvalidParameterError(f"histogram needs {LEVELS} bins, got shape {bins.shape}")
        if np.any(bins < 0):
            raise InvalidParameterError("histogram counts must be non-negative")
        if self.min_depth > self.max_depth:
            raise InvalidParameterError(f"min_depth {self.min_depth} > max_depth {self.max_depth}")
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)

    @classmethod
    def from_counts(cls, counts, min_depth: float = 0.0, max_depth: float = 255.0) -> "Histogram":
        bins = np.zeros(LEVELS, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        bins[: counts.size] = counts
        return cls(bins=bins, min_depth=min_depth, max_depth=max_depth)

    @property
    def total(self) -> int:
        return int(self.bins.sum())

    def levels(self, depths: np.ndarray) -> np.ndarray:
        """Gray level of each depth, floor(255 * (d - min) / (max - min)), clipped to 0..255."""
        depths = np.asarray(depths, dtype=np.float64)
        span = self.max_depth - self.min_depth
        if span <= 0:
            return np.zeros(depths.shape, dtype=np.int64)
        scaled = np.floor((LEVELS - 1) * (depths - self.min_depth) / span)
        return np.clip(scaled, 0, LEVELS - 1).astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return (
            np.array_equal(self.bins, other.bins)
            and self.min_depth == other.min_depth
            and self.max_depth == other.max_depth
        )

    __hash__ = None


def build_histogram(depth_map: DepthMap) -> Histogram:
    depths = depth_map.valid_depths()
    if depths.size == 0:
        raise EmptyDepthMapError("cannot build a histogram from a map with no valid pixels")

    hist = Histogram(
        bins=np.zeros(LEVELS, dtype=np.int64),
        min_depth=float(depths.min()),
        max_depth=float(depths.max()),
    )
    bins = np.bincount(hist.levels(depths), minlength=LEVELS)
    return Histogram(bins=bins, min_depth=hist.min_depth, max_depth=hist.max_depth)


def _class_stats(counts: list[int], t: int) -> tuple[int, int, int, int]:
    n0 = sum(counts[: t + 1])
    n1 = sum(counts[t + 1 :])
    s0 = sum(i * c for i, c in enumerate(counts[: t + 1]))
    s1 = sum(i * c for i, c in enumerate(counts[t + 1 :], start=t + 1))
    return n0, n1, s0, s1


def between_class_variance(hist: Histogram, t: int) -> Fraction:
    """w0 * w1 * (mu0 - mu1)^2 for classes {levels <= t} and {levels > t}; 0 if a class is empty."""
    counts = hist.bins.tolist()
    n0, n1, s0, s1 = _class_stats(counts, t)
    if n0 == 0 or n1 == 0:
        return Fraction(0)
    total = n0 + n1
    return Fraction((s0 * n1 - s1 * n0) ** 2, n0 * n1 * total * total)


def within_class_variance(hist: Histogram, t: int) -> Fraction:
    """w0 * var0 + w1 * var1 for classes {levels <= t} and {levels > t}."""
    counts = hist.bins.tolist()
    total = sum(counts)
    if total == 0:
        raise EmptyDepthMapError("histogram has no counts")

    result = Fraction(0)
    for lo, hi in ((0, t + 1), (t + 1, LEVELS)):
        n = sum(counts[lo:hi])
        if n == 0:
            continue
        s = sum(i * counts[i] for i in range(lo, hi))
        sq = sum(i * i * counts[i] for i in range(lo, hi))
        result += Fraction(sq * n - s * s, n * total)
    return result


def otsu_threshold(hist: Histogram) -> int:
    counts = hist.bins.tolist()
    total = sum(counts)
    if total == 0:
        raise EmptyDepthMapError("histogram has no counts")

    total_sum = sum(i * c for i, c in enumerate(counts))
    occupied = [i for i, c in enumerate(counts) if c]
    if len(occupied) == 1:
        return occupied[0]

    best_t = None
    best_num, best_den = 0, 1
    n0 = s0 = 0
    for t in range(LEVELS - 1):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_sum - s0
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den

    return best_t


def binarize(depth_map: DepthMap, t: int, hist: Histogram) -> BinaryMask:
    if not 0 <= t < LEVELS:
        raise InvalidParameterError(f"threshold must be a level in 0..{LEVELS - 1}, got {t}")
    levels = hist.levels(np.where(depth_map.valid, depth_map.depth, hist.min_depth))
    return BinaryMask(depth_map.valid & (levels > t))


def otsu_mask(depth_map: DepthMap) -> tuple[BinaryMask, int, Histogram]:
    """Histogram, Otsu threshold and foreground mask in one step."""
    hist = build_histogram(depth_map)
    t = otsu_threshold(hist)
    return binarize(depth_map, t, hist), t, hist
