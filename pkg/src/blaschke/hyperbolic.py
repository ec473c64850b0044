"""Hyperbolic geometry of the unit disk.

Conventions: the hyperbolic density is 1/(1-|z|^2), so the metric has
constant curvature -4 and the distance is atanh of the pseudo-hyperbolic
distance.  All maps are holomorphic self-maps of the open disk, presented
either as objects with an ``eval_with_deriv`` method or as plain callables
returning ``(value, derivative)``.
"""

from __future__ import annotations

import math
from typing import Protocol, runtime_checkable

from .errors import DomainError

# Strict interior margin: points with |z| >= 1 - DISK_MARGIN are rejected so
# finite-difference stencils and Mobius quotients stay inside the disk.
DISK_MARGIN = 1e-15


@runtime_checkable
class EvaluableMap(Protocol):
    """A holomorphic self-map of the disk exposing value and derivative."""

    def eval_with_deriv(self, z: complex) -> tuple[complex, complex]: ...


def disk_point(z: complex, margin: float = DISK_MARGIN) -> complex:
    """Validate that ``z`` lies strictly inside the unit disk.

    Raises DomainError for |z| >= 1 - margin.
    """
    z = complex(z)
    if abs(z) >= 1.0 - margin:
        raise DomainError(f"point {z} is not strictly inside the unit disk")
    return z


def moebius(w: complex, z: complex) -> complex:
    """The involutive disk automorphism T_w(z) = (w - z)/(1 - conj(w) z).

    T_w swaps 0 and w and is its own inverse.
    """
    w = disk_point(w)
    z = disk_point(z)
    return (w - z) / (1.0 - w.conjugate() * z)


def hyp_dist(a: complex, b: complex) -> float:
    """Hyperbolic distance atanh(|T_a(b)|) in the curvature -4 normalization."""
    a = disk_point(a)
    b = disk_point(b)
    rho = abs(moebius(a, b))
    # rho < 1 is guaranteed for interior points; clamp for roundoff safety.
    return math.atanh(min(rho, 1.0 - 1e-17))


def _value_and_deriv(f, z: complex) -> tuple[complex, complex]:
    if hasattr(f, "eval_with_deriv"):
        return f.eval_with_deriv(z)
    return f(z)


def hyp_distortion(f, z: complex) -> float:
    """Hyperbolic distortion (1-|z|^2)|f'(z)| / (1-|f(z)|^2).

    Lies in [0, 1] for holomorphic self-maps (Schwarz-Pick), with equality
    to 1 exactly for disk automorphisms.
    """
    z = disk_point(z)
    val, der = _value_and_deriv(f, z)
    return (1.0 - abs(z) ** 2) * abs(der) / (1.0 - abs(val) ** 2)


def schwarz_lower_bound(d0: float, r: float) -> float:
    """Lower bound r*(1 - (1-d0)(1+r)/(1-r)) for |H(z)| on |z| = r.

    Valid for self-maps H with H(0) = 0 and |H'(0)| = d0, on the range
    r < d0.  May be negative; callers clamp at 0.
    """
    if not (0.0 <= d0 <= 1.0):
        raise DomainError(f"d0 must lie in [0, 1], got {d0}")
    if not (0.0 <= r < 1.0):
        raise DomainError(f"r must lie in [0, 1), got {r}")
    if r >= d0:
        raise DomainError(f"bound requires r < d0, got r={r}, d0={d0}")
    return r * (1.0 - (1.0 - d0) * (1.0 + r) / (1.0 - r))
