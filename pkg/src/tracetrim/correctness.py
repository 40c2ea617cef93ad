"""Screenshot comparison: the pixel-diff count decides page correctness.

A mutated page passes when its load sentinel appeared and its screenshot
differs from the oracle screenshot by at most a calibrated pixel count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DimensionMismatch
from .pngio import read_png, write_png


@dataclass(frozen=True, slots=True)
class Screenshot:
    width: int
    height: int
    pixels: bytes  # row-major RGBA

    def __post_init__(self):
        expected = self.width * self.height * 4
        if len(self.pixels) != expected:
            raise ValueError(
                f"pixel buffer is {len(self.pixels)} bytes, expected {expected}"
            )

    @classmethod
    def from_png(cls, data: bytes) -> "Screenshot":
        width, height, rgba = read_png(data)
        return cls(width=width, height=height, pixels=rgba)

    def to_png(self) -> bytes:
        return write_png(self.width, self.height, self.pixels)


@dataclass(frozen=True, slots=True)
class CorrectnessVerdict:
    loaded: bool
    pixel_diff: int
    threshold: int
    passed: bool


def pixel_diff(a: Screenshot, b: Screenshot, fuzz: int = 0) -> int:
    """Count pixel positions whose RGBA channels differ (exact by default).

    ``fuzz`` is a per-channel tolerance; a pixel counts as different only
    when some channel differs by more than ``fuzz``.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"{a.width}x{a.height} vs {b.width}x{b.height}"
        )
    if a.pixels == b.pixels:
        return 0
    count = 0
    pa, pb = a.pixels, b.pixels
    if fuzz == 0:
        for i in range(0, len(pa), 4):
            if pa[i : i + 4] != pb[i : i + 4]:
                count += 1
    else:
        for i in range(0, len(pa), 4):
            if (
                abs(pa[i] - pb[i]) > fuzz
                or abs(pa[i + 1] - pb[i + 1]) > fuzz
                or abs(pa[i + 2] - pb[i + 2]) > fuzz
                or abs(pa[i + 3] - pb[i + 3]) > fuzz
            ):
                count += 1
    return count


def calibrate_threshold(
    oracle_a: Screenshot,
    oracle_b: Screenshot,
    multiplier: float,
    floor: int,
) -> int:
    """Threshold = multiplier x the diff between two oracle captures, floored.

    Two captures of the unmodified page measure acceptable variability; any
    candidate may differ from the oracle by at most a multiple of that.
    """
    if multiplier < 1:
        raise ValueError("multiplier must be >= 1")
    if floor < 0:
        raise ValueError("floor must be >= 0")
    base = pixel_diff(oracle_a, oracle_b)
    return max(math.ceil(multiplier * base), floor)


def judge(
    oracle: Screenshot,
    candidate: Screenshot,
    threshold: int,
    loaded: bool,
    fuzz: int = 0,
) -> CorrectnessVerdict:
    """Pass iff the sentinel appeared and the diff is within threshold.

    A dimension mismatch counts as maximal difference (automatic fail).
    """
    try:
        diff = pixel_diff(oracle, candidate, fuzz=fuzz)
    except DimensionMismatch:
        diff = oracle.width * oracle.height
        return CorrectnessVerdict(
            loaded=loaded, pixel_diff=diff, threshold=threshold, passed=False
        )
    return CorrectnessVerdict(
        loaded=loaded,
        pixel_diff=diff,
        threshold=threshold,
        passed=bool(loaded and diff <= threshold),
    )
