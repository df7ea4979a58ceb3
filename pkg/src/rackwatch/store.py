"""In-memory time-series store keyed by (measurement, sorted tag set)."""

from __future__ import annotations

import threading
from bisect import bisect_left
from typing import Iterator

from .lineproto import MetricSample

SeriesKey = tuple[str, tuple[tuple[str, str], ...]]


def series_key(measurement: str, tags: dict[str, str]) -> SeriesKey:
    """Canonical key: equal series always map to the same tuple."""
    return (measurement, tuple(sorted(tags.items())))


class _Series:
    __slots__ = ("tags", "numeric", "latest")

    def __init__(self, tags: dict[str, str]):
        self.tags = dict(tags)
        # field -> ([timestamps], [values]); strictly increasing timestamps
        self.numeric: dict[str, tuple[list[int], list[float]]] = {}
        # non-numeric fields keep only the most recent value
        self.latest: dict[str, tuple[int, object]] = {}


class TimeSeriesStore:
    """One writer / many readers; the RLock makes batch inserts and query
    evaluation mutually atomic (a query never sees half a batch)."""

    def __init__(self):
        self.lock = threading.RLock()
        self._series: dict[SeriesKey, _Series] = {}
        self._by_measurement: dict[str, list[_Series]] = {}
        self.ingested_points = 0

    def insert(self, sample: MetricSample) -> None:
        with self.lock:
            self._insert(sample)

    def insert_many(self, samples: list[MetricSample]) -> int:
        with self.lock:
            for s in samples:
                self._insert(s)
        return len(samples)

    def _insert(self, sample: MetricSample) -> None:
        key = series_key(sample.measurement, sample.tags)
        series = self._series.get(key)
        if series is None:
            series = _Series(sample.tags)
            self._series[key] = series
            self._by_measurement.setdefault(sample.measurement, []).append(series)
        ts = sample.timestamp
        for name, value in sample.fields.items():
            self.ingested_points += 1
            if type(value) is float or type(value) is int:
                fs = series.numeric.get(name)
                if fs is None:
                    fs = ([], [])
                    series.numeric[name] = fs
                ts_list, vals = fs
                if not ts_list or ts > ts_list[-1]:
                    ts_list.append(ts)
                    vals.append(float(value))
                elif ts == ts_list[-1]:
                    vals[-1] = float(value)
                else:
                    i = bisect_left(ts_list, ts)
                    if i < len(ts_list) and ts_list[i] == ts:
                        vals[i] = float(value)
                    else:
                        ts_list.insert(i, ts)
                        vals.insert(i, float(value))
            else:
                prev = series.latest.get(name)
                if prev is None or ts >= prev[0]:
                    series.latest[name] = (ts, value)

    def measurements(self) -> list[str]:
        with self.lock:
            return sorted(self._by_measurement)

    def series_for(self, measurement: str) -> list[_Series]:
        """Live series objects; hold the lock while reading them."""
        return self._by_measurement.get(measurement, [])

    def range_points(
        self, measurement: str, field: str, t0: int | None, t1: int | None
    ) -> Iterator[tuple[dict[str, str], list[int], list[float]]]:
        """Yield (tags, timestamps, values) slices per series, bounds inclusive."""
        for series in self._by_measurement.get(measurement, []):
            fs = series.numeric.get(field)
            if fs is None:
                continue
            ts_list, vals = fs
            lo = 0 if t0 is None else bisect_left(ts_list, t0)
            hi = len(ts_list) if t1 is None else bisect_left(ts_list, t1 + 1)
            if lo < hi:
                yield series.tags, ts_list[lo:hi], vals[lo:hi]

    def point_count(self) -> int:
        with self.lock:
            return sum(
                len(fs[0]) for series in self._series.values() for fs in series.numeric.values()
            )

    def prune(self, cutoff_ns: int) -> int:
        """Drop numeric points older than cutoff; returns points removed."""
        removed = 0
        with self.lock:
            for series in self._series.values():
                for name, (ts_list, vals) in list(series.numeric.items()):
                    i = bisect_left(ts_list, cutoff_ns)
                    if i:
                        del ts_list[:i]
                        del vals[:i]
                        removed += i
        return removed
