"""Parse kernel descriptions from key-value text.

A kernel file holds one ``key = value`` pair per line (``#`` starts a
comment)::

    kind = regularized
    h_p = 1        # penalty lambda ** h_p
    rho = 1

The same keys can be given inline on the command line as
``kind:key=value,key=value``, e.g. ``iterated-bf:k=20``.

Supported kinds and their keys:

============== =====================================================
bf             (none) response 1 - lambda
iterated-bf    k
regularized    h_p (exponent of lambda, default 1), rho (default 1)
denoise        alias for regularized with h_p=1, rho=1
sharp-lowpass  cutoff (default 0.2), steepness (default 50)
tabulated      table = "l0,h0; l1,h1; ..." (linear interpolation)
roots          r0 (default 1), roots = "r1 r2 ..." (Python complex syntax)
constant       value
============== =====================================================
"""
from __future__ import annotations

import os
import re

from .kernels import (
    PolyFilter,
    SpectralKernel,
    bf_kernel,
    constant_kernel,
    denoise_kernel,
    iterated_bf_kernel,
    make_sharp_lowpass,
    polynomial_kernel,
    tabulated_kernel,
)

__all__ = ["KernelSpecError", "parse_kernel_text", "parse_inline", "kernel_from_mapping", "load_kernel"]

_ALLOWED = {
    "bf": set(),
    "bf-linear": set(),
    "iterated-bf": {"k"},
    "regularized": {"h_p", "rho"},
    "denoise": set(),
    "sharp-lowpass": {"cutoff", "steepness"},
    "tabulated": {"table"},
    "roots": {"r0", "roots"},
    "constant": {"value"},
}


_INLINE_SPLIT = re.compile(r",(?=\s*[A-Za-z_][\w-]*\s*=)")


class KernelSpecError(ValueError):
    pass


def parse_kernel_text(text: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise KernelSpecError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in fields:
            raise KernelSpecError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value
    return fields


def parse_inline(arg: str) -> dict[str, str]:
    kind, _, rest = arg.partition(":")
    fields = {"kind": kind.strip()}
    # split only at commas that start a new key, so table values may contain commas
    for item in filter(None, (s.strip() for s in _INLINE_SPLIT.split(rest))):
        key, sep, value = item.partition("=")
        if not sep:
            raise KernelSpecError(f"inline kernel parameter {item!r} is not key=value")
        fields[key.strip()] = value.strip()
    return fields


def _num(fields, key, default=None) -> float:
    if key not in fields:
        if default is None:
            raise KernelSpecError(f"missing required key {key!r}")
        return default
    try:
        return float(fields[key])
    except ValueError:
        raise KernelSpecError(f"{key} must be a number, got {fields[key]!r}") from None


def _table(value: str) -> tuple[list[float], list[float]]:
    lams, vals = [], []
    for pair in filter(None, (p.strip() for p in value.split(";"))):
        parts = [p for p in re.split(r"[,\s]+", pair) if p]
        if len(parts) != 2:
            raise KernelSpecError(f"table entry {pair!r} is not a 'lambda,h' pair")
        lams.append(float(parts[0]))
        vals.append(float(parts[1]))
    return lams, vals


def kernel_from_mapping(fields: dict[str, str]) -> SpectralKernel:
    kind = fields.get("kind")
    if kind not in _ALLOWED:
        raise KernelSpecError(f"unknown kernel kind {kind!r}; choose from {', '.join(sorted(_ALLOWED))}")
    extra = set(fields) - {"kind"} - _ALLOWED[kind]
    if extra:
        raise KernelSpecError(f"kernel kind {kind!r} does not take {', '.join(sorted(extra))}")
    try:
        if kind in ("bf", "bf-linear"):
            return bf_kernel()
        if kind == "iterated-bf":
            k = _num(fields, "k")
            if k != int(k):
                raise KernelSpecError(f"k must be an integer, got {fields['k']!r}")
            return iterated_bf_kernel(int(k))
        if kind == "denoise":
            return denoise_kernel()
        if kind == "regularized":
            return denoise_kernel(_num(fields, "h_p", 1.0), _num(fields, "rho", 1.0))
        if kind == "sharp-lowpass":
            return make_sharp_lowpass(_num(fields, "cutoff", 0.2), _num(fields, "steepness", 50.0))
        if kind == "tabulated":
            if "table" not in fields:
                raise KernelSpecError("tabulated kernel needs a 'table' key")
            return tabulated_kernel(*_table(fields["table"]))
        if kind == "roots":
            roots = [complex(tok) for tok in re.split(r"[,\s]+", fields.get("roots", "")) if tok]
            return polynomial_kernel(PolyFilter.from_roots(_num(fields, "r0", 1.0), roots), kind="roots")
        return constant_kernel(_num(fields, "value"))
    except KernelSpecError:
        raise
    except ValueError as exc:
        raise KernelSpecError(str(exc)) from None


def load_kernel(arg: str) -> SpectralKernel:
    """Kernel from a file path if one exists, otherwise from inline syntax."""
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return kernel_from_mapping(parse_kernel_text(fh.read()))
    return kernel_from_mapping(parse_inline(arg))
