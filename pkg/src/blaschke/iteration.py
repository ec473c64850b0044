"""Forward iteration F_n = f_n o ... o f_1 of map sequences.

Covers convergence detection with the nonconstancy criterion (summability of
1 - D_h f_n(a)), sequence normalization to fix the origin, tail maps, the
order-of-zero tracker, zero-multiset monotonicity along iterates, and the
argument-principle covering certificate for origin-fixing maps.

Convergence reports are certificates at a finite resolution (grid, lags,
tolerance), never proofs: locally-uniform limits are not decidable from
finitely many samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlaschkeError, DomainError, InconclusiveError, NonconvergenceError
from .hyperbolic import disk_point, hyp_dist, hyp_distortion, moebius
from .multiset import TAU_CLUSTER, PointMultiset
from .products import (
    CompositionChain,
    FiniteBlaschke,
    compose_explicit,
    make_explicit,
    taylor_coeffs,
    zero_multiset,
)

# Cauchy lags checked by the convergence detector.
_LAGS = (1, 2, 5, 10)
# Default threshold under which the criterion series counts as bounded.
SERIES_TAIL_TOL = 1e-5


class MapSequence:
    """A replayable sequence of finite Blaschke products, indexed from 1.

    The generator must be pure: repeated queries for the same index return
    identical maps (results are cached).  ``length`` is the declared finite
    length, or None for unbounded-with-cutoff sequences.
    """

    def __init__(self, generator, length: int | None = None, name: str = "custom"):
        self._generator = generator
        self._cache: dict[int, FiniteBlaschke] = {}
        self.length = length
        self.name = name

    def map_at(self, n: int) -> FiniteBlaschke:
        if n < 1:
            raise DomainError(f"sequence index must be >= 1, got {n}")
        if self.length is not None and n > self.length:
            raise DomainError(f"index {n} beyond declared length {self.length}")
        if n not in self._cache:
            self._cache[n] = self._generator(n)
        return self._cache[n]

    def __getitem__(self, n: int) -> FiniteBlaschke:
        return self.map_at(n)

    def __repr__(self):
        span = "unbounded" if self.length is None else f"length {self.length}"
        return f"MapSequence({self.name}, {span})"


# -- canned families --------------------------------------------------------


def squaring_family() -> MapSequence:
    """f_n(z) = z^2 for every n; iterates collapse to 0."""
    sq = FiniteBlaschke.power_map(2)
    return MapSequence(lambda n: sq, name="squaring")


def tangential_family(rate: float = 2.0) -> MapSequence:
    """f_n(z) = z (r_n + z)/(1 + r_n z) with r_n = 1 - rate^-n.

    The distortion at the origin is r_n, so the nonconstancy criterion series
    converges; iterates have a nonconstant limit.
    """
    if rate <= 1.0:
        raise DomainError("rate must exceed 1")

    def gen(n):
        r = 1.0 - rate ** (-n)
        return FiniteBlaschke(-1.0, PointMultiset([0.0, -r]))

    return MapSequence(gen, name=f"tangential(rate={rate})")


def rotation_family(angle: float = 1.0) -> MapSequence:
    """f_n(z) = exp(i angle) z; iterates never settle unless angle = 0 mod 2pi."""
    rot = FiniteBlaschke.rotation(angle)
    return MapSequence(lambda n: rot, name=f"rotation(angle={angle})")


def moebius_family(w: complex) -> MapSequence:
    """Constant sequence of the involution T_w."""
    t = FiniteBlaschke.automorphism(w)
    return MapSequence(lambda n: t, name="moebius")


def explicit_sequence(maps) -> MapSequence:
    maps = list(maps)
    return MapSequence(lambda n: maps[n - 1], length=len(maps), name="explicit")


# -- forward evaluation ------------------------------------------------------


def forward_eval(seq: MapSequence, n: int, z: complex) -> complex:
    """F_n(z) with F_n = f_n o ... o f_1."""
    if n < 1:
        raise DomainError("n must be >= 1")
    w = disk_point(z)
    for k in range(1, n + 1):
        w = complex(seq[k].eval(w))
    return w


def forward_chain(seq: MapSequence, n: int) -> CompositionChain:
    """The composition chain for F_n (factors applied first-to-last)."""
    return CompositionChain([seq[k] for k in range(1, n + 1)])


def tail_map(seq: MapSequence, N: int, n: int) -> CompositionChain:
    """The tail chain h_{N,n} = f_{N+n} o ... o f_{N+1}, so that
    F_{N+n} = h_{N,n} o F_N."""
    if N < 0 or n < 1:
        raise DomainError("tail map needs N >= 0 and n >= 1")
    return CompositionChain([seq[N + k] for k in range(1, n + 1)])


def criterion_partial_sums(seq: MapSequence, a: complex, N: int) -> np.ndarray:
    """Partial sums s_k = sum_{n<=k} (1 - D_h f_n(a)) for k = 1..N.

    Each term lies in [0, 1]; boundedness of the sums is the nonconstancy
    criterion for the limit of the forward iterates.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    a = disk_point(a)
    terms = np.empty(N)
    for n in range(1, N + 1):
        terms[n - 1] = max(0.0, 1.0 - hyp_distortion(seq[n], a))
    return np.cumsum(terms)


def normalize_sequence(seq: MapSequence, a: complex) -> MapSequence:
    """Conjugated sequence T_{F_n(a)} o f_n o T_{F_{n-1}(a)} (F_0 = id).

    Every returned map fixes the origin, and the normalized iterates relate
    to the originals by T_{F_n(a)} o F_n o T_a.
    """
    a = disk_point(a)
    orbit = {0: a}

    def orbit_at(n):
        top = max(orbit)
        for k in range(top + 1, n + 1):
            orbit[k] = complex(seq[k].eval(orbit[k - 1]))
        return orbit[n]

    def gen(n):
        t_out = FiniteBlaschke.automorphism(orbit_at(n))
        t_in = FiniteBlaschke.automorphism(orbit_at(n - 1))
        return compose_explicit(t_out, compose_explicit(seq[n], t_in))

    return MapSequence(gen, length=seq.length, name=f"normalized({seq.name})")


def equisummability_bounds(seq: MapSequence, a: complex, n: int) -> tuple[float, float, float]:
    """Two-sided exponential bracket for the term ratio
    (1 - D_h f_n(F_{n-1}(a))) / (1 - D_h f_n(a)).

    Returns (lower, upper, ratio) with lower = exp(-4 d), upper = exp(4 d),
    d = hyp_dist(a, F_{n-1}(a)).  The factor 4 is the bracket's exponent
    translated into this library's curvature -4 distance normalization.
    Degenerate denominators (automorphism-like f_n at a) are rejected.
    """
    a = disk_point(a)
    if n < 1:
        raise DomainError("n must be >= 1")
    b = a if n == 1 else forward_eval(seq, n - 1, a)
    f = seq[n]
    denom = 1.0 - hyp_distortion(f, a)
    if denom < 1e-14:
        raise DomainError(f"degenerate input: 1 - D_h f_n(a) = {denom:.3g}")
    ratio = (1.0 - hyp_distortion(f, b)) / denom
    d = hyp_dist(a, b)
    lower, upper = math.exp(-4.0 * d), math.exp(4.0 * d)
    if not (lower - 1e-10 <= ratio <= upper + 1e-10):
        raise BlaschkeError(
            f"equisummability bracket violated: ratio={ratio}, bounds=({lower}, {upper})"
        )
    return lower, upper, ratio


# -- convergence detection ----------------------------------------------------

CONVERGED_NONCONSTANT = "converged_nonconstant"
CONVERGED_CONSTANT = "converged_constant"
NOT_CONVERGED = "not_converged_at_cutoff"


@dataclass
class ConvergenceReport:
    """Certificate of grid convergence at a finite resolution."""

    status: str
    criterion_partial_sums: list[float]
    grid_cauchy_gap: float
    limit_samples: list[complex]
    n_used: int
    diagnostics: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        """Flat record with documented field names."""
        s = self.criterion_partial_sums
        return {
            "status": self.status,
            "n_used": self.n_used,
            "grid_cauchy_gap": self.grid_cauchy_gap,
            "criterion_sum_final": s[-1] if s else 0.0,
            "criterion_sum_half": s[len(s) // 2 - 1] if len(s) >= 2 else 0.0,
            "limit_variation": self.diagnostics.get("variation", 0.0),
            "series_bounded": self.diagnostics.get("series_bounded", False),
            "grid_size": len(self.limit_samples),
        }


def default_grid(radii=(0.3, 0.6, 0.9), n_angles: int = 20) -> list[complex]:
    """60-point default grid: three concentric circles, 20 angles each."""
    return [
        r * complex(math.cos(2 * math.pi * j / n_angles), math.sin(2 * math.pi * j / n_angles))
        for r in radii
        for j in range(n_angles)
    ]


def detect_convergence(
    seq: MapSequence,
    grid,
    n_max: int = 200,
    tol: float = 1e-9,
    series_tol: float = SERIES_TAIL_TOL,
    anchor: complex = 0.0,
) -> ConvergenceReport:
    """Classify the forward iterates on a grid.

    Convergence is certified when each Cauchy lag in {1, 2, 5, 10} moves every
    grid point by less than ``tol`` at some n.  The constant/nonconstant split
    requires two independent signals to agree: the criterion partial sums look
    bounded (tail below ``series_tol``) and the sampled limit varies by more
    than 10 * tol across the grid.  Disagreement is reported as inconclusive,
    not forced either way.
    """
    grid = [disk_point(z) for z in grid]
    if not grid:
        raise DomainError("grid must be nonempty")
    if any(abs(z) > 0.9 + 1e-12 for z in grid):
        raise DomainError("grid must be contained in |z| <= 0.9")
    if n_max < 2:
        raise DomainError("n_max must be >= 2")

    pts = np.array(grid, dtype=complex)
    orbits = np.empty((n_max + 1, pts.size), dtype=complex)
    orbits[0] = pts
    for k in range(1, n_max + 1):
        orbits[k] = seq[k].eval(orbits[k - 1])

    # Lags are capped by the cutoff: near n_max only the shorter lags are
    # testable, and a certificate there rests on those alone.
    n_used, gap = 0, float("inf")
    for n in range(1, n_max):
        lags = [m for m in _LAGS if n + m <= n_max]
        g = max(float(np.max(np.abs(orbits[n + m] - orbits[n]))) for m in lags)
        if g < tol:
            n_used, gap = n, g
            break
        if g < gap:
            gap = g

    sums = criterion_partial_sums(seq, anchor, n_max)
    tail = float(sums[-1] - sums[n_max // 2 - 1])
    series_bounded = tail < series_tol

    limit_row = orbits[min(n_used + max(_LAGS), n_max)] if n_used else orbits[n_max]
    variation = float(np.max(np.abs(limit_row[:, None] - limit_row[None, :])))
    varied = variation > 10.0 * tol

    if n_used == 0:
        status = NOT_CONVERGED
    elif series_bounded and varied:
        status = CONVERGED_NONCONSTANT
    elif not series_bounded and not varied:
        status = CONVERGED_CONSTANT
    else:
        status = NOT_CONVERGED

    return ConvergenceReport(
        status=status,
        criterion_partial_sums=[float(s) for s in sums],
        grid_cauchy_gap=float(gap if n_used else gap),
        limit_samples=[complex(v) for v in limit_row],
        n_used=n_used if n_used else n_max,
        diagnostics={
            "series_tail": tail,
            "series_bounded": series_bounded,
            "variation": variation,
            "cauchy_found": bool(n_used),
        },
    )


# -- order of zero and fiber monotonicity -------------------------------------


def order_of_zero(seq: MapSequence, n: int, tol: float = 1e-8, max_order: int = 64) -> int:
    """Order K_n of the zero of F_n - F_n(0) at the origin.

    Scans Cauchy-integral Taylor coefficients with hysteresis: the order is
    the first coefficient above 10 * tol, provided all earlier ones are below
    tol.  A coefficient inside the ambiguous band, or no coefficient above
    threshold up to ``max_order``, raises InconclusiveError.
    """
    chain = forward_chain(seq, n)
    v0 = complex(chain.eval(0.0))
    coeffs = taylor_coeffs(lambda z: chain.eval(z) - v0, max_order)
    return _order_from_coeffs(coeffs, tol)


def _order_from_coeffs(coeffs, tol: float) -> int:
    for k in range(1, len(coeffs)):
        mag = abs(coeffs[k])
        if mag > 10.0 * tol:
            return k
        if mag > tol:
            raise InconclusiveError(
                f"coefficient {k} has magnitude {mag:.3g}, inside the hysteresis band"
            )
    raise InconclusiveError(f"no coefficient above threshold up to order {len(coeffs) - 1}")


def zero_monotonicity_check(
    seq: MapSequence, c: complex, n: int, cap: int | None = None
) -> tuple[bool, float, float]:
    """Check Z_n subset of Z_{n+1} for the fibers Z_k = Z_{F_k}(c), and return
    the fiber products prod_{z in Z_k, z != 0} |z| for k = n, n+1.

    Needs explicit forms for F_n and F_{n+1} (degree cap applies).  The
    product over the growing fibers is nonincreasing; a violation beyond
    1e-9 raises, since it signals a root-finding failure.
    """
    c = disk_point(c)
    kwargs = {} if cap is None else {"cap": cap}
    f_n = make_explicit(forward_chain(seq, n), **kwargs)
    f_next = make_explicit(forward_chain(seq, n + 1), **kwargs)
    z_n = zero_multiset(f_n, c)
    z_next = zero_multiset(f_next, c)
    included = z_next.contains(z_n, TAU_CLUSTER)
    p_n = _fiber_product(z_n)
    p_next = _fiber_product(z_next)
    if p_next > p_n + 1e-9:
        raise BlaschkeError(f"fiber product increased: {p_n} -> {p_next}")
    return included, p_n, p_next


def _fiber_product(fiber: PointMultiset) -> float:
    """Product of |z| over the fiber with origin points removed; empty = 1."""
    out = 1.0
    for p, m in fiber:
        if abs(p) > 1e-12:
            out *= abs(p) ** m
    return out


# -- covering certificate ------------------------------------------------------


def covering_certificate(
    H, epsilon: float, samples: int = 4096, n_probes: int = 8
) -> tuple[float, bool]:
    """Certify that H covers the disk of radius 1 - 3 sqrt(eps) by the image
    of the disk of radius 1 - sqrt(eps).

    Requires H(0) = 0 and |H'(0)| > 1 - eps.  Samples H on the circle
    |z| = 1 - sqrt(eps), reports the minimum modulus, and computes discrete
    winding numbers of the image curve about the origin and ``n_probes``
    interior probe points.  ``covered`` asserts the minimum modulus exceeds
    1 - 3 sqrt(eps) (up to 1e-9) and every winding number is >= 1.
    """
    if not (0.0 < epsilon < 1.0 / 9.0):
        raise DomainError(f"epsilon must lie in (0, 1/9), got {epsilon}")
    v0, d0 = H.eval_with_deriv(0.0)
    if abs(v0) > 1e-10:
        raise DomainError(f"H must fix the origin, got H(0) = {v0}")
    if abs(d0) <= 1.0 - epsilon:
        raise DomainError(f"|H'(0)| = {abs(d0):.6g} <= 1 - eps = {1.0 - epsilon:.6g}")

    root_eps = math.sqrt(epsilon)
    r_in = 1.0 - root_eps
    r_target = 1.0 - 3.0 * root_eps
    probe_pts = [0.0 + 0.0j] + [
        0.5 * r_target * complex(math.cos(2 * math.pi * j / n_probes),
                                 math.sin(2 * math.pi * j / n_probes))
        for j in range(n_probes)
    ]

    m = samples
    for attempt in range(2):
        theta = 2.0 * np.pi * np.arange(m) / m
        curve = np.asarray(H.eval(r_in * np.exp(1j * theta)), dtype=complex)
        try:
            windings = [_winding(curve, p) for p in probe_pts]
            break
        except _UnstableWinding:
            m *= 2
    else:
        raise NonconvergenceError("winding computation unstable after refinement")

    min_modulus = float(np.min(np.abs(curve)))
    covered = min_modulus >= r_target - 1e-9 and all(w >= 1 for w in windings)
    return min_modulus, covered


class _UnstableWinding(Exception):
    pass


def _winding(curve: np.ndarray, about: complex) -> int:
    rel = curve - about
    ang = np.angle(rel)
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + np.pi) % (2.0 * np.pi) - np.pi
    if np.max(np.abs(d)) > np.pi / 2.0:
        raise _UnstableWinding
    return int(round(float(np.sum(d)) / (2.0 * np.pi)))
