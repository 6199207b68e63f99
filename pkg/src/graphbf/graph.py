"""Bilateral-filter graph over the pixels of an image.

Each pixel is a node. Pixels ``i`` and ``j`` inside a square window are linked
with weight

    w_ij = exp(-|p_i - p_j|^2 / (2 sigma_d^2)) * exp(-(x_i - x_j)^2 / (2 sigma_r^2))

so every node carries a unit self-loop and one bilateral filter pass is
``D^-1 W x``. The weights are computed once from the input image and never
updated.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np
import scipy.sparse as sp

from .imageio import ImageGrid

__all__ = [
    "GraphParams",
    "BilateralGraph",
    "PassCounter",
    "build_graph",
    "apply_bf",
    "apply_randomwalk_laplacian",
    "apply_normalized_laplacian",
    "normalize_signal",
    "denormalize_signal",
    "count_sparse_passes",
]

GraphMode = Literal["bilateral", "gaussian"]


@dataclass(frozen=True)
class GraphParams:
    """Weight parameters.

    ``sigma_d`` is in pixels, ``sigma_r`` in intensity units. ``radius``
    defaults to ``ceil(2 * sigma_d)``. In ``"gaussian"`` mode the range factor
    is dropped and ``sigma_r`` is ignored.
    """

    sigma_d: float = 2.0
    sigma_r: float = 0.035
    radius: int | None = None
    mode: GraphMode = "bilateral"

    def __post_init__(self):
        if not (self.sigma_d > 0 and math.isfinite(self.sigma_d)):
            raise ValueError(f"sigma_d must be > 0, got {self.sigma_d}")
        if self.mode not in ("bilateral", "gaussian"):
            raise ValueError(f"unknown graph mode {self.mode!r}")
        if self.mode == "bilateral" and not (self.sigma_r > 0 and math.isfinite(self.sigma_r)):
            raise ValueError(f"sigma_r must be > 0, got {self.sigma_r}")
        if self.radius is None:
            object.__setattr__(self, "radius", math.ceil(2.0 * self.sigma_d))
        if int(self.radius) != self.radius or self.radius < 1:
            raise ValueError(f"window radius must be an integer >= 1, got {self.radius}")
        object.__setattr__(self, "radius", int(self.radius))


@dataclass(frozen=True, eq=False)
class BilateralGraph:
    """Sparse symmetric adjacency (CSR, both triangles stored) plus degrees."""

    adjacency: sp.csr_matrix
    params: GraphParams
    shape: tuple[int, int]
    degree: np.ndarray = field(init=False)
    inv_degree: np.ndarray = field(init=False, repr=False)
    sqrt_degree: np.ndarray = field(init=False, repr=False)
    inv_sqrt_degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        deg = np.asarray(self.adjacency.sum(axis=1)).ravel()
        derived = {
            "degree": deg,
            "inv_degree": 1.0 / deg,
            "sqrt_degree": np.sqrt(deg),
            "inv_sqrt_degree": 1.0 / np.sqrt(deg),
        }
        for name, arr in derived.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def dense_adjacency(self) -> np.ndarray:
        return self.adjacency.toarray()


class PassCounter:
    """Number of sparse ``W @ x`` products performed inside a counting block."""

    def __init__(self):
        self.count = 0

    def __repr__(self):
        return f"PassCounter(count={self.count})"


_active_counter: ContextVar[PassCounter | None] = ContextVar("graphbf_pass_counter", default=None)


@contextmanager
def count_sparse_passes() -> Iterator[PassCounter]:
    """Count sparse matrix-vector products made in this context.

    >>> with count_sparse_passes() as c:
    ...     y = apply_bf(g, x)
    >>> c.count
    1
    """
    counter = PassCounter()
    token = _active_counter.set(counter)
    try:
        yield counter
    finally:
        _active_counter.reset(token)


def _sparse_pass(graph: BilateralGraph, x: np.ndarray) -> np.ndarray:
    counter = _active_counter.get()
    if counter is not None:
        counter.count += 1
    return graph.adjacency @ x


def _window_offsets(radius: int) -> list[tuple[int, int]]:
    return [(dy, dx) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)]


def build_graph(img: ImageGrid, params: GraphParams) -> BilateralGraph:
    """Build the fixed bilateral (or spatial-only Gaussian) graph of ``img``.

    The square window is clipped at the image border; nothing is padded.
    Every in-window pair is stored unless its weight underflows to 0.0.
    """
    h, w = img.shape
    values = img.data
    index = np.arange(h * w).reshape(h, w)
    two_sd2 = 2.0 * params.sigma_d ** 2
    two_sr2 = 2.0 * params.sigma_r ** 2
    rows, cols, vals = [], [], []
    for dy, dx in _window_offsets(params.radius):
        if abs(dy) >= h or abs(dx) >= w:
            continue
        # source rows/cols whose neighbour at (dy, dx) lies inside the image
        src = (slice(max(0, -dy), h - max(0, dy)), slice(max(0, -dx), w - max(0, dx)))
        dst = (slice(max(0, dy), h - max(0, -dy)), slice(max(0, dx), w - max(0, -dx)))
        i_idx = index[src]
        spatial = math.exp(-(dy * dy + dx * dx) / two_sd2)
        if params.mode == "bilateral":
            diff = values[src] - values[dst]
            weight = spatial * np.exp(-(diff * diff) / two_sr2)
        else:
            weight = np.full(i_idx.shape, spatial)
        rows.append(i_idx.ravel())
        cols.append(index[dst].ravel())
        vals.append(weight.ravel())
    n = h * w
    adjacency = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    # only float64 underflow (exactly 0.0) is dropped; tiny weights stay
    adjacency.eliminate_zeros()
    adjacency.sort_indices()
    return BilateralGraph(adjacency=adjacency, params=params, shape=(h, w))


def _check_length(graph: BilateralGraph, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (graph.n,):
        raise ValueError(f"signal length mismatch: expected ({graph.n},), got {x.shape}")
    return x


def apply_bf(graph: BilateralGraph, x: np.ndarray) -> np.ndarray:
    """One bilateral filter pass, ``D^-1 W x``."""
    x = _check_length(graph, x)
    return graph.inv_degree * _sparse_pass(graph, x)


def apply_randomwalk_laplacian(graph: BilateralGraph, x: np.ndarray) -> np.ndarray:
    """``L_r x = x - D^-1 W x``."""
    x = _check_length(graph, x)
    return x - graph.inv_degree * _sparse_pass(graph, x)


def apply_normalized_laplacian(graph: BilateralGraph, x: np.ndarray) -> np.ndarray:
    """``x - D^-1/2 W D^-1/2 x``."""
    x = _check_length(graph, x)
    s = graph.inv_sqrt_degree
    return x - s * _sparse_pass(graph, s * x)


def normalize_signal(graph: BilateralGraph, x: np.ndarray) -> np.ndarray:
    """Map a pixel-domain signal to the normalized domain, ``D^1/2 x``."""
    return graph.sqrt_degree * _check_length(graph, x)


def denormalize_signal(graph: BilateralGraph, xhat: np.ndarray) -> np.ndarray:
    return _check_length(graph, xhat) / graph.sqrt_degree
