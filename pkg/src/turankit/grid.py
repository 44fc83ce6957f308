"""Abscissa grids and grid-parallel evaluation."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["interior_grid", "half_grid", "enriched_half_grid", "thread_count", "map_grid"]

THREADS_ENV = "TURANKIT_THREADS"


def interior_grid(m: int, spacing: str = "chebyshev") -> np.ndarray:
    """``m`` increasing points strictly inside ``(-1, 1)``.

    ``chebyshev`` gives ``cos((2k-1) pi / (2m))``; ``uniform`` gives the
    interior points of ``linspace(-1, 1, m + 2)``. Both contain 0 for odd ``m``.
    """
    if m < 1:
        raise ValueError("grid needs at least one point")
    if spacing == "chebyshev":
        k = np.arange(m, 0, -1)
        x = np.cos((2 * k - 1) * np.pi / (2 * m))
        if m % 2:
            x[m // 2] = 0.0
        return x
    if spacing == "uniform":
        return np.linspace(-1.0, 1.0, m + 2)[1:-1]
    raise ValueError(f"unknown spacing {spacing!r}")


def half_grid(m: int, spacing: str = "chebyshev") -> np.ndarray:
    """``m`` increasing points on ``[0, 1]`` including both endpoints."""
    if m < 2:
        raise ValueError("grid needs at least two points")
    if spacing == "chebyshev":
        x = np.cos(np.linspace(np.pi / 2, 0.0, m))
        x[0], x[-1] = 0.0, 1.0
        return x
    if spacing == "uniform":
        return np.linspace(0.0, 1.0, m)
    raise ValueError(f"unknown spacing {spacing!r}")


def enriched_half_grid(m: int, N: int, extra: int = 10) -> np.ndarray:
    """Chebyshev-spaced ``[0, 1]`` plus ``cos(k / N)`` for ``k = 1..extra``.

    The added points resolve the first zeros of ``P_N`` near ``x = 1``.
    """
    pts = np.concatenate((half_grid(m), np.cos(np.arange(1, extra + 1) / N)))
    return np.unique(pts)


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV, "")
        threads = int(env) if env.strip().isdigit() else (os.cpu_count() or 1)
    return max(1, int(threads))


def map_grid(fn, x: np.ndarray, threads: int | None = None, min_chunk: int = 64) -> np.ndarray:
    """Evaluate ``fn(x_chunk) -> array[..., len(chunk)]`` over chunks of ``x``.

    ``fn`` must act pointwise in its last axis; results are concatenated in
    order so the output does not depend on the worker count.
    """
    x = np.asarray(x, dtype=float)
    workers = min(thread_count(threads), max(1, x.size // min_chunk))
    if workers == 1:
        return fn(x)
    chunks = np.array_split(x, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(fn, chunks))
    return np.concatenate(parts, axis=-1)
