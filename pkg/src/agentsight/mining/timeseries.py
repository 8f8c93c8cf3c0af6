"""Time binning and change-point detection.

Change points come from greedy binary segmentation on mean shift: repeatedly
split the segment whose best split yields the largest drop in squared error,
stopping at the penalty (and an optional cap on the number of points).
"""

from __future__ import annotations

from ..errors import MiningError
from .types import ChangePoints, TimeSeries

DAY = 86400.0
BIN_SECONDS = {"hour": 3600.0, "day": DAY, "week": 7 * DAY}


def bin_timestamps(timestamps: list[float], bin_width: float | str = "day") -> TimeSeries:
    """Fixed-width UTC bins covering [min ts, max ts]. Bins anchor at the
    floor of the first timestamp by min(width, one day), so weekly bins
    start at the first day's midnight rather than an epoch-aligned week."""
    if not timestamps:
        raise MiningError("no timestamps to bin")
    width = BIN_SECONDS.get(bin_width, bin_width) if isinstance(bin_width, str) else float(bin_width)
    if not isinstance(width, float) or width <= 0:
        raise MiningError(f"bad bin width {bin_width!r}")
    anchor = min(width, DAY)
    start = (min(timestamps) // anchor) * anchor
    n_bins = int((max(timestamps) - start) // width) + 1
    values = [0.0] * n_bins
    for ts in timestamps:
        values[int((ts - start) // width)] += 1.0
    edges = tuple(start + i * width for i in range(n_bins + 1))
    return TimeSeries(bin_edges=edges, values=tuple(values))


def rebin(series: TimeSeries, factor: int) -> TimeSeries:
    """Aggregate consecutive groups of `factor` bins (last group may be short)."""
    if factor < 1:
        raise MiningError("rebin factor must be >= 1")
    values = []
    edges = [series.bin_edges[0]]
    for i in range(0, len(series.values), factor):
        chunk = series.values[i:i + factor]
        values.append(float(sum(chunk)))
        edges.append(series.bin_edges[min(i + factor, len(series.values))])
    return TimeSeries(bin_edges=tuple(edges), values=tuple(values))


def _prefix_sums(values: tuple[float, ...]) -> tuple[list[float], list[float]]:
    s1, s2 = [0.0], [0.0]
    for v in values:
        s1.append(s1[-1] + v)
        s2.append(s2[-1] + v * v)
    return s1, s2


def _sse(s1, s2, a: int, b: int) -> float:
    """Squared error of values[a:b] around their mean."""
    n = b - a
    if n <= 0:
        return 0.0
    total = s1[b] - s1[a]
    return (s2[b] - s2[a]) - total * total / n


def _best_split(s1, s2, a: int, b: int, min_segment: int) -> tuple[float, int]:
    best_gain, best_t = 0.0, -1
    parent = _sse(s1, s2, a, b)
    for t in range(a + min_segment, b - min_segment + 1):
        gain = parent - _sse(s1, s2, a, t) - _sse(s1, s2, t, b)
        if gain > best_gain + 1e-12:
            best_gain, best_t = gain, t
    return best_gain, best_t


def binary_segmentation(values: tuple[float, ...], penalty: float = 0.0,
                        min_segment: int = 2,
                        max_changepoints: int | None = None) -> list[int]:
    """Indices t such that a new segment starts at t; strictly increasing."""
    if min_segment < 1:
        raise MiningError("min_segment must be >= 1")
    s1, s2 = _prefix_sums(values)
    segments: list[tuple[int, int]] = [(0, len(values))]
    cps: list[int] = []
    while True:
        if max_changepoints is not None and len(cps) >= max_changepoints:
            break
        best = (0.0, -1, -1)  # gain, t, segment index
        for si, (a, b) in enumerate(segments):
            gain, t = _best_split(s1, s2, a, b, min_segment)
            if t >= 0 and gain > best[0]:
                best = (gain, t, si)
        gain, t, si = best
        if t < 0 or gain <= penalty:
            break
        a, b = segments.pop(si)
        segments.append((a, t))
        segments.append((t, b))
        cps.append(t)
    return sorted(cps)


def change_point(series: TimeSeries, penalty: float = 0.0, min_segment: int = 2,
                 max_changepoints: int | None = None) -> ChangePoints:
    if len(series.values) < 2 * min_segment:
        return ChangePoints(indices=(), series=series,
                            segment_means=(sum(series.values) / max(len(series.values), 1),))
    cps = binary_segmentation(series.values, penalty, min_segment, max_changepoints)
    bounds = [0] + cps + [len(series.values)]
    means = tuple(sum(series.values[a:b]) / (b - a) for a, b in zip(bounds, bounds[1:]))
    return ChangePoints(indices=tuple(cps), series=series, segment_means=means)
