"""Dense spectral ground truth for small blocks.

Everything here diagonalizes the normalized Laplacian explicitly, which is
O(n^3). It exists to check the fast polynomial paths in :mod:`graphbf.engine`,
not to filter full images.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .graph import BilateralGraph

__all__ = [
    "MAX_ORACLE_NODES",
    "DenseSpectrum",
    "dense_normalized_laplacian",
    "dense_bf_operator",
    "eigendecompose",
    "gft",
    "igft",
    "exact_spectral_filter",
    "empirical_spectral_response",
    "energy_compaction",
]

MAX_ORACLE_NODES = 8192


@dataclass(frozen=True, eq=False)
class DenseSpectrum:
    """Eigenpairs of the normalized Laplacian, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degree: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _check_size(graph: BilateralGraph) -> None:
    if graph.n > MAX_ORACLE_NODES:
        raise ValueError(f"dense oracle is capped at {MAX_ORACLE_NODES} nodes, graph has {graph.n}")


def dense_normalized_laplacian(graph: BilateralGraph) -> np.ndarray:
    _check_size(graph)
    s = graph.inv_sqrt_degree
    lap = -(s[:, None] * graph.dense_adjacency() * s[None, :])
    lap[np.diag_indices_from(lap)] += 1.0
    return lap


def dense_bf_operator(graph: BilateralGraph) -> np.ndarray:
    """``D^-1 W`` as a dense matrix."""
    _check_size(graph)
    return graph.inv_degree[:, None] * graph.dense_adjacency()


def eigendecompose(graph: BilateralGraph) -> DenseSpectrum:
    """Full symmetric eigendecomposition of ``I - D^-1/2 W D^-1/2``.

    Uses LAPACK ``syevd`` (Householder tridiagonalization plus divide and
    conquer). Ties in the ascending sort keep LAPACK's column order.
    """
    lap = dense_normalized_laplacian(graph)
    lam, vecs = scipy.linalg.eigh(lap, driver="evd", check_finite=True)
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    vecs = vecs[:, order]
    for arr in (lam, vecs):
        arr.setflags(write=False)
    return DenseSpectrum(eigenvalues=lam, eigenvectors=vecs, degree=graph.degree)


def _check_vec(spectrum: DenseSpectrum, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (spectrum.n,):
        raise ValueError(f"length mismatch: expected ({spectrum.n},), got {v.shape}")
    return v


def gft(spectrum: DenseSpectrum, xhat: np.ndarray) -> np.ndarray:
    """Graph Fourier coefficients ``U^T xhat`` of a normalized signal."""
    return spectrum.eigenvectors.T @ _check_vec(spectrum, xhat)


def igft(spectrum: DenseSpectrum, coeffs: np.ndarray) -> np.ndarray:
    return spectrum.eigenvectors @ _check_vec(spectrum, coeffs)


def exact_spectral_filter(
    spectrum: DenseSpectrum, response: Callable[[np.ndarray], np.ndarray], xhat: np.ndarray
) -> np.ndarray:
    """``U h(Lambda) U^T xhat`` for any vectorized response (kernel or PolyFilter)."""
    gains = np.asarray(response(spectrum.eigenvalues), dtype=np.float64)
    return igft(spectrum, gains * gft(spectrum, xhat))


def empirical_spectral_response(
    graph: BilateralGraph,
    operator: np.ndarray | None = None,
    spectrum: DenseSpectrum | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-eigenvector gain of a pixel-domain operator.

    ``operator`` defaults to one bilateral pass ``D^-1 W``. It is moved to the
    normalized domain, ``B = D^1/2 H D^-1/2``, and ``h_i = u_i^T B u_i`` is
    returned alongside the eigenvalues ``lambda_i``.
    """
    if spectrum is None:
        spectrum = eigendecompose(graph)
    if operator is None:
        operator = dense_bf_operator(graph)
    operator = np.asarray(operator, dtype=np.float64)
    if operator.shape != (graph.n, graph.n):
        raise ValueError(f"operator must be {graph.n}x{graph.n}, got {operator.shape}")
    b = graph.sqrt_degree[:, None] * operator * graph.inv_sqrt_degree[None, :]
    u = spectrum.eigenvectors
    gains = np.einsum("ij,ij->j", u, b @ u)
    return spectrum.eigenvalues, gains


def energy_compaction(spectrum: DenseSpectrum, xhat: np.ndarray) -> np.ndarray:
    """``E_k`` for k = 1..n: energy share of the k lowest-frequency components."""
    coeffs = gft(spectrum, xhat)
    cumulative = np.cumsum(coeffs * coeffs)
    if cumulative[-1] == 0.0:
        raise ValueError("energy compaction is undefined for a zero signal")
    return cumulative / cumulative[-1]
