"""Spectral responses h(lambda) on [0, 2] and their polynomial realizations.

A :class:`PolyFilter` is either a product form ``r0 * prod(1 - r_i * lambda)``
(complex ``r_i`` in conjugate pairs) or a Chebyshev series in
``t = lambda - 1``, which maps the spectral interval [0, 2] onto [-1, 1].
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.special import expit

__all__ = [
    "SpectralKernel",
    "PolyFilter",
    "eval_kernel",
    "constant_kernel",
    "bf_kernel",
    "iterated_bf_kernel",
    "polynomial_kernel",
    "power_penalty",
    "make_regularized_kernel",
    "denoise_kernel",
    "make_sharp_lowpass",
    "tabulated_kernel",
    "fit_chebyshev",
    "poly_sup_error",
    "eval_poly",
    "roots_to_coeffs",
    "LAMBDA_MAX",
]

LAMBDA_MAX = 2.0
_RANGE_SLACK = 1e-12


def _check_lambda(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(~np.isfinite(lam)) or np.any(lam < -_RANGE_SLACK) or np.any(lam > LAMBDA_MAX + _RANGE_SLACK):
        raise ValueError("lambda must lie in [0, 2]")
    return lam


# --------------------------------------------------------------------------
# polynomial filters
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolyFilter:
    """Polynomial spectral response, in root (product) or Chebyshev form.

    Use :meth:`from_roots` or :meth:`from_chebyshev` rather than the
    constructor.
    """

    form: Literal["roots", "chebyshev"]
    scale: float = 1.0
    roots: tuple[complex, ...] = ()
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(1))

    @classmethod
    def from_roots(cls, scale: float, roots: Sequence[complex] = ()) -> "PolyFilter":
        roots = tuple(complex(r) for r in roots)
        if not math.isfinite(scale):
            raise ValueError("scale r0 must be finite")
        if any(not (math.isfinite(r.real) and math.isfinite(r.imag)) for r in roots):
            raise ValueError("roots must be finite")
        upper = Counter(r for r in roots if r.imag > 0)
        lower = Counter(r.conjugate() for r in roots if r.imag < 0)
        if upper != lower:
            raise ValueError("complex roots must come in exact conjugate pairs")
        return cls(form="roots", scale=float(scale), roots=roots)

    @classmethod
    def from_chebyshev(cls, coeffs: Sequence[float]) -> "PolyFilter":
        c = np.array(coeffs, dtype=np.float64).ravel()
        if c.size == 0:
            raise ValueError("need at least one Chebyshev coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("Chebyshev coefficients must be finite")
        c.setflags(write=False)
        return cls(form="chebyshev", coeffs=c)

    @property
    def degree(self) -> int:
        if self.form == "roots":
            return len(self.roots)
        return len(self.coeffs) - 1

    def stages(self) -> list[tuple[float, ...]]:
        """Cascade stages in listed order.

        A real root gives ``(r,)``; a conjugate pair ``a +/- bi`` gives
        ``(a, b)`` with ``b > 0``, placed at the position of its first member.
        """
        if self.form != "roots":
            raise ValueError("only root-form filters have cascade stages")
        pending = Counter()
        out: list[tuple[float, ...]] = []
        for r in self.roots:
            if r.imag == 0:
                out.append((r.real,))
                continue
            key = r if r.imag > 0 else r.conjugate()
            if pending[key] > 0:
                pending[key] -= 1
            else:
                pending[key] += 1
                out.append((key.real, key.imag))
        return out

    def __call__(self, lam) -> np.ndarray:
        return _eval_unchecked(self, np.asarray(lam, dtype=np.float64))


def eval_poly(filt: PolyFilter, lam) -> np.ndarray | float:
    """Value of the polynomial at ``lam`` (scalar or array in [0, 2]).

    Root form is evaluated as a real product over stages; Chebyshev form by
    Clenshaw's recurrence.
    """
    out = _eval_unchecked(filt, _check_lambda(lam))
    return out if np.ndim(lam) else float(out)


def _eval_unchecked(filt: PolyFilter, lam_arr: np.ndarray) -> np.ndarray:
    if filt.form == "roots":
        out = np.full(lam_arr.shape, filt.scale)
        for stage in filt.stages():
            if len(stage) == 1:
                out = out * (1.0 - stage[0] * lam_arr)
            else:
                a, b = stage
                out = out * (1.0 - 2.0 * a * lam_arr + (a * a + b * b) * lam_arr * lam_arr)
    else:
        out = _clenshaw(filt.coeffs, lam_arr - 1.0)
    return out


def _clenshaw(c: np.ndarray, t: np.ndarray) -> np.ndarray:
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for cj in c[:0:-1]:
        b1, b2 = 2.0 * t * b1 - b2 + cj, b1
    return t * b1 - b2 + c[0]


def roots_to_coeffs(filt: PolyFilter) -> PolyFilter:
    """Chebyshev-form equivalent of a root-form filter."""
    if filt.form != "roots":
        raise ValueError("expected a root-form filter")
    c = np.array([filt.scale])
    for stage in filt.stages():
        if len(stage) == 1:
            r = stage[0]
            # 1 - r*lambda with lambda = 1 + t
            factor = np.array([1.0 - r, -r])
        else:
            a, b = stage
            q = a * a + b * b
            # 1 - 2a(1+t) + q(1+t)^2 in the power basis of t
            power = np.array([1.0 - 2.0 * a + q, 2.0 * q - 2.0 * a, q])
            factor = npcheb.poly2cheb(power)
        c = npcheb.chebmul(c, factor)
    # chebmul trims trailing zeros; keep the nominal degree
    out = np.zeros(filt.degree + 1)
    out[: len(c)] = c
    return PolyFilter.from_chebyshev(out)


# --------------------------------------------------------------------------
# spectral kernels
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralKernel:
    """Named spectral response. ``poly`` is set when the kernel is exactly a polynomial."""

    kind: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    params: dict = field(default_factory=dict)
    poly: PolyFilter | None = field(default=None, repr=False)

    def __call__(self, lam) -> np.ndarray:
        return np.asarray(self.func(np.asarray(lam, dtype=np.float64)), dtype=np.float64)


def eval_kernel(kernel: SpectralKernel, lam) -> np.ndarray | float:
    lam_arr = _check_lambda(lam)
    out = kernel(lam_arr)
    return out if np.ndim(lam) else float(out)


def polynomial_kernel(filt: PolyFilter, kind: str = "polynomial", **params) -> SpectralKernel:
    return SpectralKernel(kind=kind, func=filt, params=params, poly=filt)


def constant_kernel(c: float) -> SpectralKernel:
    return polynomial_kernel(PolyFilter.from_roots(c), kind="constant", value=c)


def bf_kernel() -> SpectralKernel:
    """Response of one bilateral pass, ``1 - lambda``."""
    return polynomial_kernel(PolyFilter.from_roots(1.0, [1.0]), kind="bf-linear")


def iterated_bf_kernel(k: int) -> SpectralKernel:
    """``(1 - lambda)^k``, the response of ``k`` fixed-weight passes."""
    if k < 0 or int(k) != k:
        raise ValueError(f"iteration count must be a non-negative integer, got {k}")
    return polynomial_kernel(PolyFilter.from_roots(1.0, [1.0] * int(k)), kind="iterated-bf", k=int(k))


def power_penalty(p: float) -> Callable[[np.ndarray], np.ndarray]:
    """Penalty ``h_p(lambda) = lambda ** p`` (non-decreasing for ``p >= 0``)."""
    # clamp round-off negatives so fractional powers stay real
    return lambda lam: np.power(np.maximum(lam, 0.0), p)


def make_regularized_kernel(h_p: Callable, rho: float, **params) -> SpectralKernel:
    """Denoising response ``1 / (1 + rho * h_p(lambda)^2)``.

    ``h_p`` is sampled on 1001 points of [0, 2] and rejected unless it is
    finite, non-negative and non-decreasing there.
    """
    if not (rho > 0 and math.isfinite(rho)):
        raise ValueError(f"rho must be > 0, got {rho}")
    grid = np.linspace(0.0, LAMBDA_MAX, 1001)
    samples = np.asarray(h_p(grid), dtype=np.float64)
    if not np.all(np.isfinite(samples)) or np.any(samples < 0):
        raise ValueError("penalty h_p must be finite and non-negative on [0, 2]")
    if np.any(np.diff(samples) < 0):
        raise ValueError("penalty h_p must be non-decreasing on [0, 2]")

    def func(lam):
        hp = np.asarray(h_p(lam), dtype=np.float64)
        return 1.0 / (1.0 + rho * hp * hp)

    return SpectralKernel(kind="regularized", func=func, params={"rho": rho, **params})


def denoise_kernel(exponent: float = 1.0, rho: float = 1.0) -> SpectralKernel:
    """Regularized denoiser with ``h_p(lambda) = lambda ** exponent``.

    The default (exponent 1) is ``1 / (1 + lambda^2)``; exponent 2 gives
    ``1 / (1 + lambda^4)``.
    """
    return make_regularized_kernel(power_penalty(exponent), rho, exponent=exponent)


def make_sharp_lowpass(cutoff: float = 0.2, steepness: float = 50.0) -> SpectralKernel:
    """Logistic step ``1 / (1 + exp(steepness * (lambda - cutoff)))``."""
    if not (0.0 < cutoff < LAMBDA_MAX):
        raise ValueError(f"cutoff must lie in (0, 2), got {cutoff}")
    if not (steepness > 0 and math.isfinite(steepness)):
        raise ValueError(f"steepness must be > 0, got {steepness}")
    return SpectralKernel(
        kind="sharp-lowpass",
        func=lambda lam: expit(-steepness * (lam - cutoff)),
        params={"cutoff": cutoff, "steepness": steepness},
    )


def tabulated_kernel(lams: Sequence[float], values: Sequence[float]) -> SpectralKernel:
    """Piecewise-linear response through ``(lams[i], values[i])``.

    The table must be strictly increasing in lambda and span [0, 2].
    """
    lams = np.asarray(lams, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if lams.ndim != 1 or lams.shape != values.shape or lams.size < 2:
        raise ValueError("table needs at least two (lambda, h) pairs")
    if not (np.all(np.isfinite(lams)) and np.all(np.isfinite(values))):
        raise ValueError("table entries must be finite")
    if np.any(np.diff(lams) <= 0):
        raise ValueError("table lambdas must be strictly increasing")
    if lams[0] > 0.0 or lams[-1] < LAMBDA_MAX:
        raise ValueError("table must cover the whole interval [0, 2]")
    return SpectralKernel(
        kind="tabulated",
        func=lambda lam: np.interp(lam, lams, values),
        params={"table": list(zip(lams.tolist(), values.tolist()))},
    )


# --------------------------------------------------------------------------
# Chebyshev fitting
# --------------------------------------------------------------------------


def fit_chebyshev(kernel: Callable, degree: int) -> PolyFilter:
    """Truncated Chebyshev series of ``kernel`` on [0, 2], up to ``degree``.

    Coefficients come from Gauss-Chebyshev quadrature on ``max(64, 4 * degree)``
    cosine nodes. ``c[0]`` is already halved, so ``p(t) = sum_j c_j T_j(t)``.
    """
    if degree < 0 or int(degree) != degree:
        raise ValueError(f"degree must be a non-negative integer, got {degree}")
    degree = int(degree)
    n_nodes = max(64, 4 * degree)
    theta = np.pi * (np.arange(n_nodes) + 0.5) / n_nodes
    samples = np.asarray(kernel(1.0 + np.cos(theta)), dtype=np.float64)
    j = np.arange(degree + 1)
    c = (2.0 / n_nodes) * (np.cos(np.outer(j, theta)) @ samples)
    c[0] *= 0.5
    return PolyFilter.from_chebyshev(c)


def poly_sup_error(kernel: Callable, filt: PolyFilter, grid_points: int = 10001) -> float:
    """Largest ``|h(lambda) - p(lambda)|`` over a uniform grid on [0, 2]."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    grid = np.linspace(0.0, LAMBDA_MAX, grid_points)
    return float(np.max(np.abs(np.asarray(kernel(grid)) - _eval_unchecked(filt, grid))))

