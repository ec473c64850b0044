"""Finite Blaschke products: representation, evaluation, composition,
preimage fibers, critical sets and Taylor coefficients.

A finite Blaschke product is stored as a unimodular constant ``eta`` plus a
finite zero multiset in the open disk; each zero ``a`` contributes a factor

    (|a|/a) * (a - z) / (1 - conj(a) z),

with the convention |a|/a := 1 at a = 0 (so a zero at the origin contributes
the factor -z).  Degree-d products are proper self-maps of the disk: every
value is attained exactly d times and the critical set has d - 1 points.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DegreeCapError, DomainError, RootFindingError
from .hyperbolic import disk_point, moebius
from .multiset import TAU_CLUSTER, PointMultiset
from .roots import clustered_roots, polyder, polymul, raw_roots

# Explicit polynomial coefficients are kept only up to this degree; beyond
# it, coefficient conditioning degrades and only lazy chains are offered.
DEGREE_CAP = 64

# Fixed probe points used to pin unimodular constants when composing.
_PROBES = (0.137 + 0.229j, -0.311 + 0.083j, 0.091 - 0.367j, -0.153 - 0.271j, 0.419 + 0.055j)


class TaylorTailWarning(UserWarning):
    """The discretized Cauchy integral's tail estimate is not negligible."""


def _unimodular_factor(a: complex) -> complex:
    return 1.0 if a == 0.0 else abs(a) / a


class FiniteBlaschke:
    """A finite Blaschke product of degree >= 1."""

    __slots__ = ("eta", "zeros", "_poly_cache")

    def __init__(self, eta: complex, zeros: PointMultiset):
        eta = complex(eta)
        if abs(abs(eta) - 1.0) > 1e-6:
            raise DomainError(f"eta must be unimodular, got |eta| = {abs(eta)}")
        self.eta = eta / abs(eta)
        if not isinstance(zeros, PointMultiset):
            zeros = PointMultiset(zeros)
        if zeros.cardinality < 1:
            raise DomainError("a finite Blaschke product needs at least one zero")
        # The per-factor constant |a|/a is discontinuous at a = 0; roundoff
        # noise in a zero's position would pick an arbitrary phase.  Snap
        # roundoff-level zeros to the origin so the a = 0 branch applies.
        if any(0.0 < abs(p) <= 1e-12 for p, _ in zeros):
            zeros = PointMultiset.from_pairs(
                (0.0 if abs(p) <= 1e-12 else p, m) for p, m in zeros
            )
        for p, _ in zeros:
            disk_point(p)
        self.zeros = zeros
        self._poly_cache = None

    # -- constructors -------------------------------------------------

    @classmethod
    def from_zeros(cls, points, eta: complex = 1.0) -> "FiniteBlaschke":
        return cls(eta, PointMultiset(points))

    @classmethod
    def power_map(cls, d: int) -> "FiniteBlaschke":
        """The map z -> z^d."""
        if d < 1:
            raise DomainError("degree must be >= 1")
        return cls((-1.0) ** d, PointMultiset([0.0], [d]))

    @classmethod
    def automorphism(cls, w: complex) -> "FiniteBlaschke":
        """The involution T_w(z) = (w - z)/(1 - conj(w) z)."""
        w = disk_point(w)
        eta = 1.0 if w == 0.0 else w / abs(w)
        return cls(eta, PointMultiset([w]))

    @classmethod
    def rotation(cls, theta: float) -> "FiniteBlaschke":
        """The map z -> exp(i theta) z."""
        return cls(-np.exp(1j * theta), PointMultiset([0.0]))

    # -- basic structure ----------------------------------------------

    @property
    def degree(self) -> int:
        return self.zeros.cardinality

    def __repr__(self):
        return f"FiniteBlaschke(eta={self.eta:.6g}, zeros={self.zeros!r})"

    # -- evaluation ----------------------------------------------------

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Evaluate factor-by-factor; accepts scalars or numpy arrays."""
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.eta, dtype=complex)
        for a, m in self.zeros:
            u = _unimodular_factor(a)
            out = out * (u * (a - z) / (1.0 - np.conj(a) * z)) ** m
        return complex(out) if out.ndim == 0 else out

    def eval_with_deriv(self, z):
        """Value and analytic derivative (closed-form product rule)."""
        z_arr = np.asarray(z, dtype=complex)
        scalar = z_arr.ndim == 0
        zv = np.atleast_1d(z_arr)

        val = np.full(zv.shape, self.eta, dtype=complex)
        logsum = np.zeros(zv.shape, dtype=complex)
        bad = np.zeros(zv.shape, dtype=bool)
        for a, m in self.zeros:
            u = _unimodular_factor(a)
            den = 1.0 - np.conj(a) * zv
            g = u * (a - zv) / den
            gp = u * (abs(a) ** 2 - 1.0) / den**2
            val = val * g**m
            small = np.abs(g) < 1e-8
            bad |= small
            with np.errstate(all="ignore"):
                contrib = m * gp / g
            logsum = logsum + np.where(small, 0.0, contrib)
        der = val * logsum
        if bad.any():
            idx = np.nonzero(bad)
            for i in zip(*idx):
                der[i] = self._deriv_at(complex(zv[i]))
        if scalar:
            return complex(val[0]), complex(der[0])
        return val, der

    def deriv(self, z):
        """Analytic derivative of the product."""
        return self.eval_with_deriv(z)[1]

    def _deriv_at(self, z: complex) -> complex:
        """Exact product-rule derivative at one point (safe at zeros)."""
        factors = []
        dfactors = []
        for a, m in self.zeros:
            u = _unimodular_factor(a)
            den = 1.0 - a.conjugate() * z
            g = u * (a - z) / den
            gp = u * (abs(a) ** 2 - 1.0) / den**2
            factors.append(g**m)
            dfactors.append(m * g ** (m - 1) * gp)
        r = len(factors)
        prefix = [1.0 + 0j] * (r + 1)
        suffix = [1.0 + 0j] * (r + 1)
        for i in range(r):
            prefix[i + 1] = prefix[i] * factors[i]
            suffix[r - 1 - i] = suffix[r - i] * factors[r - 1 - i]
        return self.eta * sum(dfactors[i] * prefix[i] * suffix[i + 1] for i in range(r))

    # -- polynomial form -----------------------------------------------

    def polynomials(self):
        """Numerator and denominator coefficients (ascending), so that
        B = Num/Den with Num = C * prod (a - z)^m, Den = prod (1 - conj(a) z)^m."""
        if self._poly_cache is None:
            if self.degree > DEGREE_CAP:
                raise DegreeCapError(
                    f"degree {self.degree} exceeds the explicit-coefficient cap {DEGREE_CAP}"
                )
            lead = self.eta
            num = np.array([1.0 + 0j])
            den = np.array([1.0 + 0j])
            for a, m in self.zeros:
                lead *= _unimodular_factor(a) ** m
                for _ in range(m):
                    num = polymul(num, np.array([a, -1.0], dtype=complex))
                    den = polymul(den, np.array([1.0, -a.conjugate()], dtype=complex))
            self._poly_cache = (lead * num, den)
        return self._poly_cache

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "eta": [self.eta.real, self.eta.imag],
            "zeros": [[p.real, p.imag, m] for p, m in self.zeros],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteBlaschke":
        eta = complex(data["eta"][0], data["eta"][1])
        pts = [complex(re, im) for re, im, _ in data["zeros"]]
        mults = [int(m) for _, _, m in data["zeros"]]
        return cls(eta, PointMultiset(pts, mults))


class CompositionChain:
    """An ordered composition of finite Blaschke products.

    Factors are applied first-to-last: the chain [f1, f2, f3] evaluates
    f3(f2(f1(z))).  Keeps high-degree compositions evaluable without
    coefficient blowup.
    """

    __slots__ = ("factors",)

    def __init__(self, factors):
        factors = tuple(factors)
        if not factors:
            raise DomainError("a composition chain needs at least one factor")
        self.factors = factors

    @property
    def degree(self) -> int:
        d = 1
        for f in self.factors:
            d *= f.degree
        return d

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        w = np.asarray(z, dtype=complex)
        for f in self.factors:
            w = f.eval(w)
        return w

    def eval_with_deriv(self, z):
        w = np.asarray(z, dtype=complex)
        d = np.ones_like(w)
        for f in self.factors:
            w, fp = f.eval_with_deriv(w)
            d = d * fp
        if np.ndim(z) == 0 and np.ndim(w) == 0:
            return complex(w), complex(d)
        return w, d

    def __repr__(self):
        return f"CompositionChain({len(self.factors)} factors, degree {self.degree})"


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def blaschke_sum(points: PointMultiset) -> float:
    """Sum of multiplicity * (1 - |point|) over the multiset."""
    return float(sum(m * (1.0 - abs(p)) for p, m in points))


def taylor_coeff(f, k: int, radius: float = 0.5, max_k: int = 64) -> complex:
    """k-th Taylor coefficient at the origin via a discretized Cauchy
    integral on |z| = radius.

    Uses M = max(256, 8k) uniform samples; warns (TaylorTailWarning) when
    the aliasing-tail bound for a disk self-map exceeds 1e-12.
    """
    value, err = _taylor_with_error(f, k, radius, max_k)
    if err > 1e-12:
        warnings.warn(
            f"tail estimate {err:.3g} for coefficient {k} at radius {radius}",
            TaylorTailWarning,
            stacklevel=2,
        )
    return value


def _taylor_with_error(f, k, radius, max_k=64):
    if not (0.0 < radius < 1.0):
        raise DomainError(f"radius must lie in (0, 1), got {radius}")
    if k < 0 or k > max_k:
        raise DomainError(f"coefficient index {k} outside [0, {max_k}]")
    m = max(256, 8 * k)
    coeffs = taylor_coeffs(f, k, radius=radius, samples=m)
    err = radius**m / (1.0 - radius**m)
    return complex(coeffs[k]), err


def taylor_coeffs(f, kmax: int, radius: float = 0.5, samples: int | None = None) -> np.ndarray:
    """Taylor coefficients 0..kmax in one FFT pass over the sample circle."""
    if not (0.0 < radius < 1.0):
        raise DomainError(f"radius must lie in (0, 1), got {radius}")
    m = samples if samples is not None else max(256, 8 * kmax)
    theta = 2.0 * np.pi * np.arange(m) / m
    ring = radius * np.exp(1j * theta)
    vals = np.asarray(_apply(f, ring), dtype=complex)
    hat = np.fft.fft(vals) / m
    ks = np.arange(kmax + 1)
    return hat[: kmax + 1] / radius**ks


def _apply(f, z):
    if hasattr(f, "eval"):
        return f.eval(z)
    return f(z)


def preimages(B: FiniteBlaschke, a: complex) -> PointMultiset:
    """The full fiber of ``a``: the degree-many solutions of B(z) = a in the
    disk, with multiplicity.

    Solves Num - a*Den = 0 via companion-matrix eigenvalues.  The raw
    eigenvalues are polished on the rational equation B(z) = a itself
    before clustering: for high-degree products with near-boundary zeros
    the monomial coefficients are ill-conditioned and raw eigenvalues can
    be far from any true root, while the rational Newton map is not.
    """
    a = disk_point(a)
    num, den = B.polynomials()
    width = max(len(num), len(den))
    p = np.zeros(width, dtype=complex)
    p[: len(num)] += num
    p[: len(den)] -= a * den
    starts = [_polish_rational(B, a, z) for z in raw_roots(p)]
    pairs = clustered_roots(p, initial=starts)
    fiber = PointMultiset.from_pairs(pairs)
    if fiber.cardinality != B.degree:
        raise RootFindingError(
            f"fiber has total multiplicity {fiber.cardinality}, expected {B.degree}",
            offender=fiber,
        )
    for z, _ in fiber:
        if abs(z) >= 1.0:
            raise RootFindingError(f"fiber point {z} escaped the disk", offender=z)
        if abs(complex(B.eval(z)) - a) > 1e-9:
            raise RootFindingError(f"fiber residual too large at {z}", offender=z)
    return fiber


def _polish_rational(B, a, z, steps=40):
    """Damped Newton on B(z) - a = 0 until the residual stops improving."""
    fz = abs(complex(B.eval(z)) - a)
    for _ in range(steps):
        if fz < 1e-15:
            break
        val, der = B.eval_with_deriv(z)
        if der == 0.0:
            break
        step = (val - a) / der
        moved = False
        for _ in range(12):
            cand = z - step
            fc = abs(complex(B.eval(cand)) - a)
            if fc < fz:
                z, fz, moved = cand, fc, True
                break
            step *= 0.5
        if not moved:
            break
    return z


def zero_multiset(B: FiniteBlaschke, c: complex) -> PointMultiset:
    """Zeros of B - B(c), i.e. the fiber through ``c``; contains ``c``."""
    c = disk_point(c)
    return preimages(B, complex(B.eval(c)))


def critical_set(B: FiniteBlaschke) -> PointMultiset:
    """Zeros of B' inside the disk, counted with multiplicity.

    A degree-d product has exactly d - 1 critical points in the disk; the
    count is validated and a mismatch raises RootFindingError.
    """
    num, den = B.polynomials()
    numerator = _critical_poly(num, den)
    if np.max(np.abs(numerator)) == 0.0:
        raise RootFindingError("derivative numerator vanished identically")
    inside = [(z, m) for z, m in clustered_roots(numerator) if abs(z) < 1.0]
    crit = PointMultiset.from_pairs(inside) if inside else PointMultiset.empty()
    if crit.cardinality != B.degree - 1:
        raise RootFindingError(
            f"critical multiplicity {crit.cardinality}, expected {B.degree - 1}",
            offender=crit,
        )
    return crit


def _critical_poly(num, den):
    """Numerator of B' = (Num' Den - Num Den')/Den^2, trimmed."""
    p = polymul(polyder(num), den)
    q = polymul(num, polyder(den))
    width = max(len(p), len(q))
    out = np.zeros(width, dtype=complex)
    out[: len(p)] += p
    out[: len(q)] -= q
    return out


def compose_explicit(B1: FiniteBlaschke, B2: FiniteBlaschke, cap: int = DEGREE_CAP) -> FiniteBlaschke:
    """Explicit product form of B1 o B2.

    Zeros are the B2-preimages of the zeros of B1 (multiplicities multiply);
    the unimodular constant is pinned by matching a probe evaluation of the
    chained map, then verified at an independent probe.
    """
    d = B1.degree * B2.degree
    if d > cap:
        raise DegreeCapError(f"composition degree {d} exceeds cap {cap}")
    pairs = []
    for alpha, m_alpha in B1.zeros:
        for z, m in preimages(B2, alpha):
            pairs.append((z, m_alpha * m))
    zeros = PointMultiset.from_pairs(pairs)

    base = FiniteBlaschke(1.0, zeros)
    probe_iter = iter(_PROBES)
    for probe in probe_iter:
        b = complex(base.eval(probe))
        if abs(b) > 1e-6:
            chained = complex(B1.eval(complex(B2.eval(probe))))
            eta = chained / b
            break
    else:  # pragma: no cover - probes are generic
        raise RootFindingError("all probes landed on zeros of the composition")
    if abs(abs(eta) - 1.0) > 1e-6:
        raise RootFindingError(f"composition constant not unimodular: |eta| = {abs(eta)}")
    result = FiniteBlaschke(eta, zeros)

    check = next(probe_iter)
    mismatch = abs(complex(result.eval(check)) - complex(B1.eval(complex(B2.eval(check)))))
    if mismatch > 1e-9:
        raise RootFindingError(f"composition probe mismatch {mismatch:.3g}")
    return result


def make_explicit(chain, cap: int = DEGREE_CAP) -> FiniteBlaschke:
    """Fold a composition chain into one explicit product (degree-capped)."""
    if isinstance(chain, FiniteBlaschke):
        return chain
    out = chain.factors[0]
    for f in chain.factors[1:]:
        out = compose_explicit(f, out, cap=cap)
    return out


def map_distance(f, g, probes) -> float:
    """sup over probes of the pseudo-hyperbolic gap |T_{f(z)}(g(z))|."""
    worst = 0.0
    for z in probes:
        fv = complex(_apply(f, z))
        gv = complex(_apply(g, z))
        worst = max(worst, abs(moebius(fv, gv)))
    return worst


def default_probe_grid(n_circles: int = 3, n_angles: int = 20, radii=(0.3, 0.6, 0.9)) -> list[complex]:
    """The standard 60-point probe grid: concentric circles x uniform angles."""
    pts = []
    for r in radii[:n_circles]:
        for j in range(n_angles):
            pts.append(r * np.exp(2j * np.pi * j / n_angles))
    return pts
