"""McLaughlin's two-condition characterization of indestructible Blaschke
products, and its numerical verification along forward iterates.

For a finite Blaschke product both conditions hold exactly; the residuals
measure only numerical error.  For iterate sequences the residual table
witnesses the finite evidence (condition values settling along n) without
claiming a verdict about the infinite-degree limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegreeCapError, DomainError, InconclusiveError
from .hyperbolic import disk_point
from .iteration import MapSequence, _order_from_coeffs
from .products import (
    DEGREE_CAP,
    compose_explicit,
    make_explicit,
    preimages,
    taylor_coeffs,
)

NONZERO_VALUE = "nonzero_value_a"
ZERO_VALUE = "zero_value"


@dataclass
class McLaughlinReport:
    """One evaluated McLaughlin condition."""

    lhs: float
    rhs: float
    residual: float
    condition: str
    a: complex | None = None
    truncation_note: str | None = None
    n: int | None = None

    def __post_init__(self):
        if not (-1e-12 <= self.lhs <= 1.0 + 1e-9 and -1e-12 <= self.rhs <= 1.0 + 1e-9):
            raise DomainError(f"condition values outside [0, 1]: {self.lhs}, {self.rhs}")


def mclaughlin_nonzero(B, a: complex) -> McLaughlinReport:
    """Condition at a regular value: |(f(0) - a)/(1 - conj(a) f(0))| must
    equal the modulus product over the fiber f^{-1}(a).

    Requires a != f(0); that case is the zero-value condition.
    """
    B = make_explicit(B)
    a = disk_point(a)
    f0 = complex(B.eval(0.0))
    if abs(a - f0) <= 1e-10:
        raise DomainError("a coincides with f(0); use mclaughlin_zero instead")
    lhs = abs((f0 - a) / (1.0 - np.conj(a) * f0))
    rhs = 1.0
    for z, m in preimages(B, a):
        rhs *= abs(z) ** m
    return McLaughlinReport(lhs=float(lhs), rhs=float(rhs), residual=abs(float(lhs) - rhs),
                            condition=NONZERO_VALUE, a=a)


def mclaughlin_zero(B, taylor_tol: float = 1e-8) -> McLaughlinReport:
    """Condition at the critical value f(0): |fhat(k)|/(1 - |f(0)|^2) must
    equal the modulus product over Z_f(0) with origin points removed.

    The order k comes from the Cauchy-coefficient scan and is cross-checked
    against the fiber's multiplicity at the origin; disagreement means the
    numerics are inconsistent and raises InconclusiveError.
    """
    B = make_explicit(B)
    f0 = complex(B.eval(0.0))
    coeffs = taylor_coeffs(lambda z: B.eval(z) - f0, 64)
    k = _order_from_coeffs(coeffs, taylor_tol)

    fiber = preimages(B, f0)
    k_fiber = sum(m for p, m in fiber if abs(p) <= 1e-12)
    if k != k_fiber:
        raise InconclusiveError(
            f"order of zero disagrees: coefficients say {k}, fiber says {k_fiber}"
        )
    lhs = abs(coeffs[k]) / (1.0 - abs(f0) ** 2)
    rhs = 1.0
    for z, m in fiber:
        if abs(z) > 1e-12:
            rhs *= abs(z) ** m
    return McLaughlinReport(lhs=float(lhs), rhs=float(rhs), residual=abs(float(lhs) - rhs),
                            condition=ZERO_VALUE)


def verify_stability_ibp(
    seq: MapSequence,
    a_samples,
    n_list,
    cap: int = DEGREE_CAP,
    taylor_tol: float = 1e-8,
) -> list[McLaughlinReport]:
    """Residual table of both McLaughlin conditions along the iterates B_n.

    For each requested n (explicit form permitting) the zero-value condition
    and the regular-value condition at every sample point are evaluated.
    Probes that collide with B_n(0) are skipped.  When the degree cap stops
    the table early, the last emitted row carries a truncation note; no
    verdict is implied for the un-examined tail.
    """
    a_samples = [disk_point(a) for a in a_samples]
    rows: list[McLaughlinReport] = []
    note = None
    explicit = None
    done = 0
    for n in sorted(set(int(n) for n in n_list)):
        try:
            # Extend the running explicit composition instead of rebuilding.
            while done < n:
                nxt = seq[done + 1]
                explicit = nxt if explicit is None else compose_explicit(nxt, explicit, cap=cap)
                done += 1
        except DegreeCapError:
            note = f"degree cap {cap} reached before n={n}; table truncated"
            break
        row = mclaughlin_zero(explicit, taylor_tol=taylor_tol)
        row.n = n
        rows.append(row)
        b0 = complex(explicit.eval(0.0))
        for a in a_samples:
            if abs(a - b0) <= 1e-10:
                continue
            row = mclaughlin_nonzero(explicit, a)
            row.n = n
            rows.append(row)
    if note and rows:
        rows[-1].truncation_note = note
    elif note and not rows:
        raise DegreeCapError(note)
    return rows
