"""Transform benchmark harness: DFT-matrix vs FFT, reduced vs full path.

Measures median and interquartile wall time of a forward+inverse pair per
(resolution, backend, path) cell, after warmup, on identical seeded
inputs, and cross-checks every cell against the first cell of the same
resolution.  The harness reports timings; it asserts nothing about which
backend is faster (that is hardware-dependent).
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .equivariance import CSV_HEADER_COMMENT, random_coefficients
from .transforms import FOURIER_BACKENDS, SYMMETRY_PATHS, TransformConfig, forward, inverse
from .wigner import compute_delta

CROSS_CHECK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class BenchSpec:
    resolutions: tuple = (64, 128, 256)
    backends: tuple = FOURIER_BACKENDS
    paths: tuple = SYMMETRY_PATHS
    repetitions: int = 5
    warmup: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "resolutions", tuple(int(n) for n in self.resolutions))
        object.__setattr__(self, "backends", tuple(self.backends))
        object.__setattr__(self, "paths", tuple(self.paths))
        if self.repetitions < 3:
            raise ValueError(f"repetitions must be >= 3 for a meaningful median, got {self.repetitions}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be nonnegative, got {self.warmup}")
        for n in self.resolutions:
            if n < 2 or n % 2:
                raise ValueError(f"resolutions must be even integers >= 2, got {n}")
        for b in self.backends:
            if b not in FOURIER_BACKENDS:
                raise ValueError(f"unknown backend {b!r}")
        for p in self.paths:
            if p not in SYMMETRY_PATHS:
                raise ValueError(f"unknown path {p!r}")


@dataclass(frozen=True)
class BenchRow:
    resolution: int
    backend: str
    path: str
    repetitions: int
    median_s: float
    iqr_s: float
    cross_check: float
    status: str = "ok"

    @property
    def passed(self) -> bool:
        return self.status == "ok" and self.cross_check <= CROSS_CHECK_TOLERANCE


def run_bench(spec: BenchSpec) -> list[BenchRow]:
    rows = []
    for n in spec.resolutions:
        try:
            rows.extend(_bench_resolution(n, spec))
        except MemoryError:
            for backend in spec.backends:
                for path in spec.paths:
                    rows.append(BenchRow(n, backend, path, spec.repetitions, np.nan, np.nan, np.nan, "oom"))
    return rows


def _bench_resolution(n: int, spec: BenchSpec) -> list[BenchRow]:
    L = n // 2
    tables = compute_delta(L)
    rng = np.random.default_rng(spec.seed)  # same inputs for every cell
    coeffs = random_coefficients(rng, 1, np.array([0, 1]), L)
    reference_samples = None
    reference_coeffs = None
    rows = []
    for backend in spec.backends:
        for path in spec.paths:
            config = TransformConfig(fourier_backend=backend, symmetry_path=path)
            try:
                signal, back, times = _time_cell(coeffs, tables, config, spec)
            except MemoryError:
                rows.append(BenchRow(n, backend, path, spec.repetitions, np.nan, np.nan, np.nan, "oom"))
                continue
            if reference_samples is None:
                reference_samples, reference_coeffs = signal.samples, back.coeffs
            cross = max(
                _rel(signal.samples, reference_samples),
                _rel(back.coeffs, reference_coeffs),
            )
            q1, med, q3 = np.percentile(times, [25, 50, 75])
            rows.append(BenchRow(n, backend, path, spec.repetitions, float(med), float(q3 - q1), float(cross)))
    return rows


def _time_cell(coeffs, tables, config, spec):
    signal = back = None
    times = []
    for it in range(spec.warmup + spec.repetitions):
        start = time.perf_counter()
        signal = inverse(coeffs, tables, config)
        back = forward(signal, tables, config)
        elapsed = time.perf_counter() - start
        if it >= spec.warmup:
            times.append(elapsed)
    return signal, back, np.asarray(times)


def _rel(a, b):
    scale = np.abs(b).max()
    return float(np.abs(a - b).max() / scale) if scale > 0 else float(np.abs(a - b).max())


def write_bench_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER_COMMENT + "\n")
        writer = csv.writer(fh)
        writer.writerow(
            ["n", "backend", "path", "repetitions", "median_s", "iqr_s", "cross_check_max_rel", "status", "pass"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.resolution,
                    r.backend,
                    r.path,
                    r.repetitions,
                    f"{r.median_s:.6e}",
                    f"{r.iqr_s:.6e}",
                    f"{r.cross_check:.6e}",
                    r.status,
                    r.passed,
                ]
            )
