"""Maximal Blaschke products: prescribed critical sets, the Schwarz-Pick
density lambda_f = |f'|/(1-|f|^2), pseudometric curvature, and the
decomposition checks built on the auxiliary sigma construction.

The solver inverts the zeros -> critical-points map.  Its residual is the
vector of Taylor coefficients of orders 1..m at each prescribed point (so
multiplicities are encoded smoothly, with no root matching inside the
Newton loop), and the starting point is exact: for the polynomial
z * prod(z - a_i) the prescribed-critical-point problem is solved by
integrating prod(z - c_j)^{m_j}.  A continuation parameter then turns on
the Blaschke denominators.  The final residual is an independent check:
the computed product's critical set is re-extracted by root finding and
matched against the target by optimal assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlaschkeError, DegreeCapError, DomainError, NonconvergenceError
from .hyperbolic import disk_point, moebius
from .multiset import TAU_CLUSTER, PointMultiset
from .products import (
    DEGREE_CAP,
    CompositionChain,
    FiniteBlaschke,
    compose_explicit,
    critical_set,
    make_explicit,
    preimages,
)
from .roots import clustered_roots, poly_from_roots

# Probes for pinning unimodular constants (shared convention with products).
_PROBES = (0.137 + 0.229j, -0.311 + 0.083j, 0.091 - 0.367j, -0.153 - 0.271j)


# ---------------------------------------------------------------------------
# Densities and pseudometric fields
# ---------------------------------------------------------------------------


def lambda_values(f, z):
    """The density |f'(z)|/(1 - |f(z)|^2); vectorized over z."""
    val, der = f.eval_with_deriv(z)
    return np.abs(der) / (1.0 - np.abs(val) ** 2)


def lambda_callable(f):
    return lambda z: lambda_values(f, z)


@dataclass(frozen=True)
class PseudometricField:
    """Samples of a conformal pseudometric density on a square lattice
    clipped to |z| <= r_max, together with its declared zero multiset."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(y), len(x)); NaN outside the clip disk
    spacing: float
    zero_set: PointMultiset
    r_max: float

    def grid(self) -> np.ndarray:
        return self.x[None, :] + 1j * self.y[:, None]

    def __post_init__(self):
        if self.spacing <= 0:
            raise DomainError("spacing must be positive")
        finite = self.values[np.isfinite(self.values)]
        if finite.size and finite.min() < 0:
            raise DomainError("density values must be nonnegative")


def _lattice(r_max: float, spacing: float):
    n = int(math.floor(r_max / spacing))
    axis = spacing * np.arange(-n, n + 1)
    return axis, axis


def lambda_field(
    f, r_max: float = 0.8, spacing: float = 0.02, zero_set: PointMultiset | None = None
) -> PseudometricField:
    """Sample lambda_f on a lattice.  For an explicit product the zero set
    defaults to its critical set; chains may pass one explicitly."""
    if not (0.0 < r_max < 1.0):
        raise DomainError("r_max must lie in (0, 1)")
    x, y = _lattice(r_max, spacing)
    zz = x[None, :] + 1j * y[:, None]
    # Lattice corners fall outside the disk; evaluate anyway, mask after.
    with np.errstate(all="ignore"):
        vals = lambda_values(f, zz)
    vals = np.where(np.abs(zz) <= r_max, vals, np.nan)
    if zero_set is None:
        zero_set = critical_set(f) if isinstance(f, FiniteBlaschke) else PointMultiset.empty()
    return PseudometricField(x=x, y=y, values=vals, spacing=spacing, zero_set=zero_set, r_max=r_max)


def curvature(field: PseudometricField) -> np.ndarray:
    """Gaussian curvature -Laplacian(log lambda)/lambda^2 on the lattice.

    The declared zero set's harmonic part sum m_j log|z - z_j| is subtracted
    before differencing; this leaves the Laplacian unchanged but removes the
    log singularities that would otherwise dominate the five-point stencil
    near the zeros.  Excluded points (outside the disk, within 3h of the
    boundary or the zero set, or with vanishing density) are NaN.
    """
    h = field.spacing
    zz = field.grid()
    ok = np.isfinite(field.values) & (field.values > 1e-300)
    ok &= np.abs(zz) <= field.r_max - 3.0 * h
    for p, _ in field.zero_set:
        ok &= np.abs(zz - p) >= 3.0 * h

    with np.errstate(all="ignore"):
        u = np.log(np.maximum(field.values, 1e-300))
        for p, m in field.zero_set:
            u = u - m * np.log(np.abs(zz - p))

    lap = np.full_like(u, np.nan)
    lap[1:-1, 1:-1] = (
        u[1:-1, 2:] + u[1:-1, :-2] + u[2:, 1:-1] + u[:-2, 1:-1] - 4.0 * u[1:-1, 1:-1]
    ) / h**2
    interior = np.zeros_like(ok)
    interior[1:-1, 1:-1] = ok[1:-1, 1:-1] & ok[1:-1, 2:] & ok[1:-1, :-2] & ok[2:, 1:-1] & ok[:-2, 1:-1]
    kappa = np.where(interior, -lap / field.values**2, np.nan)
    return kappa


def curvature_probe(lam, z: complex, h: float = 1e-3, zero_set=()) -> float:
    """Pointwise curvature via the regularized five-point Laplacian with one
    Richardson extrapolation step (spacings h and h/2).

    ``lam`` is a vectorized density callable; ``zero_set`` is an iterable of
    (point, multiplicity) pairs whose harmonic log part is subtracted.
    """
    lam0 = float(lam(np.asarray(z)))
    if lam0 <= 0.0:
        raise DomainError("density vanishes at the probe; curvature undefined on the zero set")

    def lap(step):
        pts = np.array([z, z + step, z - step, z + 1j * step, z - 1j * step])
        u = np.log(np.asarray(lam(pts), dtype=float))
        for p, m in zero_set:
            u = u - m * np.log(np.abs(pts - p))
        return (u[1] + u[2] + u[3] + u[4] - 4.0 * u[0]) / step**2

    l_h = lap(h)
    l_half = lap(h / 2.0)
    return float(-(4.0 * l_half - l_h) / 3.0 / lam0**2)


# ---------------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------------


def canonicalize(B: FiniteBlaschke) -> FiniteBlaschke:
    """Orbit representative under postcomposition with automorphisms:
    value 0 at the origin, lowest-order Taylor coefficient positive real.

    The result is rho * (T_{B(0)} o B); its zeros are the fiber of B over
    B(0), and critical sets are unchanged.
    """
    z0 = complex(B.eval(0.0))
    zeros = preimages(B, z0)
    shifted = FiniteBlaschke(1.0, zeros)
    for probe in _PROBES:
        base = complex(shifted.eval(probe))
        if abs(base) > 1e-6:
            eta = moebius(z0, complex(B.eval(probe))) / base
            break
    else:  # pragma: no cover - probes are generic
        raise BlaschkeError("all probes landed on zeros while canonicalizing")
    shifted = FiniteBlaschke(eta, shifted.zeros)
    k, low = _lowest_coeff(shifted)
    rho = abs(low) / low
    return FiniteBlaschke(rho * shifted.eta, shifted.zeros)


def _lowest_coeff(B: FiniteBlaschke) -> tuple[int, complex]:
    """Order and value of the lowest nonvanishing Taylor coefficient at 0
    for a product vanishing at the origin (exact from the factor form)."""
    k = 0
    low = B.eta
    for p, m in B.zeros:
        if p == 0.0:
            k += m
            low *= (-1.0) ** m
        else:
            low *= abs(p) ** m
    if k == 0:
        raise DomainError("canonical lowest coefficient needs a zero at the origin")
    return k, low


# ---------------------------------------------------------------------------
# Prescribed-critical-set solver
# ---------------------------------------------------------------------------


@dataclass
class SolverResult:
    product: FiniteBlaschke
    residual: float
    homotopy_steps: int
    newton_iters: int
    diagnostics: dict = field(default_factory=dict)


def solve_maximal(
    C,
    residual_tol: float = 1e-9,
    newton_tol: float = 1e-11,
    fd_step: float = 1e-7,
    max_newton: int = 80,
    min_step: float = 1e-6,
    cap: int = DEGREE_CAP,
) -> SolverResult:
    """Maximal Blaschke product (canonical form) with critical set ``C``.

    ``C`` is a PointMultiset (or point iterable) of N targets counted with
    multiplicity; the result has degree N + 1 and residual below
    ``residual_tol`` measured as the assignment-matched distance between its
    recomputed critical set and ``C``.
    """
    if not isinstance(C, PointMultiset):
        C = PointMultiset(C)
    for p, _ in C:
        disk_point(p)
    n_targets = C.cardinality
    if n_targets + 1 > cap:
        raise DegreeCapError(f"degree {n_targets + 1} exceeds cap {cap}")
    if n_targets == 0:
        product = FiniteBlaschke(-1.0, PointMultiset([0.0]))  # the identity map z
        return SolverResult(product=product, residual=0.0, homotopy_steps=0, newton_iters=0)

    targets = list(C.entries)
    avec = _polynomial_base(targets)
    avec, steps, iters = _continuation(avec, targets, newton_tol, fd_step, max_newton, min_step)

    for a in avec:
        if abs(a) >= 1.0 - 1e-13:
            raise NonconvergenceError(
                f"solver zero {a} left the disk; prescribed set may be too close to the boundary",
                last=avec,
            )
    product = canonicalize(_wrap_zeros(avec))
    achieved = critical_set(product)
    residual = achieved.assignment_cost(C)
    if not residual <= residual_tol:
        raise NonconvergenceError(
            f"critical-set matching cost {residual:.3g} above tolerance {residual_tol:.3g}",
            last=SolverResult(product, residual, steps, iters),
        )
    return SolverResult(product=product, residual=float(residual), homotopy_steps=steps,
                        newton_iters=iters)


def _polynomial_base(targets):
    """Exact solution of the continuation's flat (tau = 0) problem: nonzero
    roots of the antiderivative of prod (z - c)^m."""
    q = poly_from_roots([c for c, m in targets for _ in range(m)])
    antider = np.concatenate([[0.0], q / np.arange(1, len(q) + 1)])
    roots = [z for z, m in clustered_roots(antider) for _ in range(m)]
    pinned = min(range(len(roots)), key=lambda i: abs(roots[i]))
    roots.pop(pinned)
    return np.array(roots, dtype=complex)


def _wrap_zeros(avec) -> FiniteBlaschke:
    """Package solver zeros {0} + {a_i} as a FiniteBlaschke with eta pinned
    so the map equals z * prod (z - a)/(1 - conj(a) z)."""
    zeros = PointMultiset([0.0, *avec])
    base = FiniteBlaschke(1.0, zeros)
    for probe in _PROBES:
        b = complex(base.eval(probe))
        if abs(b) > 1e-6:
            want = probe * np.prod([(probe - a) / (1.0 - np.conj(a) * probe) for a in avec])
            return FiniteBlaschke(complex(want) / b, zeros)
    raise BlaschkeError("all probes landed on zeros while wrapping")  # pragma: no cover


def _taylor_conditions(avec, tau, targets):
    """Taylor coefficients 1..m_j of z * prod (z-a)/(1 - tau conj(a) z) at
    each target c_j: the residual vector of the solve (zero at a solution)."""
    out = []
    for c, m in targets:
        s = np.zeros(m + 1, dtype=complex)
        s[0] = c
        if m >= 1:
            s[1] = 1.0
        for a in avec:
            d = 1.0 - tau * np.conj(a) * c
            r = tau * np.conj(a) / d
            geom = r ** np.arange(m + 1) / d
            fac = (c - a) * geom
            fac[1:] += geom[:-1]
            s = _mul_trunc(s, fac, m)
        out.extend(s[1 : m + 1])
    return np.array(out, dtype=complex)


def _mul_trunc(a, b, mmax):
    out = np.zeros(mmax + 1, dtype=complex)
    for i in range(mmax + 1):
        if a[i] != 0.0:
            out[i:] += a[i] * b[: mmax + 1 - i]
    return out


def _continuation(avec, targets, newton_tol, fd_step, max_newton, min_step):
    tau, dt = 0.0, 1.0
    steps = iters = 0
    while tau < 1.0:
        t_next = min(1.0, tau + dt)
        sol, ok, nit = _newton(avec, t_next, targets, newton_tol, fd_step, max_newton)
        steps += 1
        iters += nit
        if ok:
            avec, tau = sol, t_next
            dt = min(1.0, 2.0 * dt)
        else:
            dt *= 0.5
            if dt < min_step:
                raise NonconvergenceError(
                    f"continuation stalled at tau = {tau} (step {dt:.2g})", last=avec
                )
    return avec, steps, iters


def _newton(avec, tau, targets, tol, fd_step, max_iter):
    x = np.concatenate([avec.real, avec.imag])
    n = avec.size

    def resid(xv):
        a = xv[:n] + 1j * xv[n:]
        r = _taylor_conditions(a, tau, targets)
        return np.concatenate([r.real, r.imag])

    f = resid(x)
    nit = 0
    for _ in range(max_iter):
        norm = np.linalg.norm(f, np.inf)
        if norm < tol:
            return x[:n] + 1j * x[n:], True, nit
        jac = np.empty((x.size, x.size))
        for j in range(x.size):
            xp = x.copy()
            xp[j] += fd_step
            jac[:, j] = (resid(xp) - f) / fd_step
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, f, rcond=None)[0]
        damp, accepted = 1.0, False
        for _ in range(20):
            xn = x - damp * step
            fn = resid(xn)
            if np.linalg.norm(fn, np.inf) < norm * (1.0 - 1e-4 * damp) + 1e-16:
                x, f, accepted = xn, fn, True
                break
            damp *= 0.5
        nit += 1
        if not accepted:
            return x[:n] + 1j * x[n:], False, nit
    return x[:n] + 1j * x[n:], bool(np.linalg.norm(f, np.inf) < tol), nit


# ---------------------------------------------------------------------------
# Maximality verification and the sigma construction
# ---------------------------------------------------------------------------


def verify_maximal(B: FiniteBlaschke, C, competitors, grid_points,
                   tol: float = TAU_CLUSTER) -> tuple[float, list]:
    """Largest density violation max(lambda_f - lambda_B) over the grid and
    the admitted competitors.

    Competitors must have critical sets containing ``C``: explicit products
    are checked by root extraction; chains whose first-applied factor is
    ``B`` itself satisfy the containment by construction.  Others that fit
    the degree cap are folded explicit and checked; the rest are rejected
    and listed.  Maximality evidence is max violation <= 1e-9.
    """
    if not isinstance(C, PointMultiset):
        C = PointMultiset(C)
    probes = [disk_point(z) for z in grid_points]
    zz = np.array(probes, dtype=complex)
    lam_b = lambda_values(B, zz)

    per_competitor = []
    worst = -np.inf
    for i, f in enumerate(competitors):
        status = _admit_competitor(f, B, C, tol)
        if status is not None:
            per_competitor.append({"index": i, "status": f"rejected: {status}", "violation": None})
            continue
        violation = float(np.max(lambda_values(f, zz) - lam_b))
        worst = max(worst, violation)
        per_competitor.append({"index": i, "status": "ok", "violation": violation})
    if worst == -np.inf:
        raise DomainError("no competitor was admitted")
    return worst, per_competitor


def _admit_competitor(f, B, C, tol) -> str | None:
    """None when admitted, otherwise the rejection reason."""
    if isinstance(f, CompositionChain) and f.factors and f.factors[0] is B:
        return None  # critical chain rule: C_{A o B} contains C_B
    try:
        explicit = make_explicit(f)
    except DegreeCapError:
        return "degree cap prevents critical-set validation"
    if not critical_set(explicit).contains(C, tol):
        return "critical set does not contain the prescribed set"
    return None


def sigma_values(A1, A2, B, z):
    """The auxiliary density sigma = lambda_A * lambda_B / lambda_{A2} with
    A = A1 o A2; vectorized over z."""
    lam_a = lambda_values(CompositionChain([A2, A1]), z)
    lam_a2 = lambda_values(A2, z)
    lam_b = lambda_values(B, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        return lam_a * (lam_b / lam_a2)


def sigma_field(
    A1: FiniteBlaschke,
    A2: FiniteBlaschke,
    B: FiniteBlaschke,
    r_max: float = 0.6,
    spacing: float = 0.02,
    check_tol: float = 1e-9,
) -> PseudometricField:
    """Lattice samples of sigma, with the two pointwise inequalities behind
    its curvature bound asserted on the way:

        lambda_B / lambda_{A2} >= 1    (B maximal for the critical set of A2)
        lambda_{A2} / lambda_A >= 1    (Schwarz-Pick through A1)

    Requires the critical sets of B and A2 to agree (at the multiset
    tolerance).  The field's declared zero set is the critical set of A.
    """
    c_a2 = critical_set(A2)
    if critical_set(B).assignment_cost(c_a2) > TAU_CLUSTER:
        raise DomainError("B must have exactly the critical set of A2")

    a_explicit = compose_explicit(A1, A2)
    c_a = critical_set(a_explicit)

    x, y = _lattice(r_max, spacing)
    zz = x[None, :] + 1j * y[:, None]
    inside = np.abs(zz) <= r_max
    margin = np.ones_like(inside)
    for p, _ in c_a:
        margin &= np.abs(zz - p) >= 3.0 * spacing

    with np.errstate(all="ignore"):
        lam_a = lambda_values(a_explicit, zz)
        lam_a2 = lambda_values(A2, zz)
        lam_b = lambda_values(B, zz)

    sel = inside & margin & (lam_a2 > 1e-280) & (lam_a > 1e-280)
    ratio_b = lam_b[sel] / lam_a2[sel]
    ratio_a = lam_a2[sel] / lam_a[sel]
    if ratio_b.size and float(ratio_b.min()) < 1.0 - check_tol:
        raise BlaschkeError(f"lambda_B/lambda_A2 dips to {float(ratio_b.min())}")
    if ratio_a.size and float(ratio_a.min()) < 1.0 - check_tol:
        raise BlaschkeError(f"lambda_A2/lambda_A dips to {float(ratio_a.min())}")

    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = lam_a * (lam_b / lam_a2)
    sigma = np.where(inside & margin, sigma, np.nan)
    return PseudometricField(x=x, y=y, values=sigma, spacing=spacing, zero_set=c_a, r_max=r_max)


@dataclass
class DecompositionReport:
    """Density gaps between each factor (and the composite) and the solved
    maximal product for its critical set."""

    gap_a1: float
    gap_a2: float
    gap_composite: float
    degree_composite: int
    solver_results: dict

    @property
    def gaps(self) -> tuple[float, float, float]:
        return (self.gap_a1, self.gap_a2, self.gap_composite)


def decomposition_check(
    A1: FiniteBlaschke,
    A2: FiniteBlaschke,
    grid_points,
    cap: int = DEGREE_CAP,
    **solver_opts,
) -> DecompositionReport:
    """Solve the prescribed-critical-set problem for the critical sets of
    A1, A2 and A = A1 o A2, and report sup |lambda_solved - lambda_given|
    on the grid for each.

    For finite Blaschke inputs all three gaps vanish up to solver accuracy:
    the factors and the composite are each maximal for their own critical
    sets.  Solver failures propagate with the partial gap report attached.
    """
    a_explicit = compose_explicit(A1, A2, cap=cap)
    zz = np.array([disk_point(z) for z in grid_points], dtype=complex)
    partial = {}

    def gap_for(g, label):
        solved = solve_maximal(critical_set(g), cap=cap, **solver_opts)
        partial[label] = solved
        return float(np.max(np.abs(lambda_values(solved.product, zz) - lambda_values(g, zz))))

    try:
        gap_a1 = gap_for(A1, "a1")
        gap_a2 = gap_for(A2, "a2")
        gap_a = gap_for(a_explicit, "composite")
    except NonconvergenceError as exc:
        exc.last = partial
        raise
    return DecompositionReport(
        gap_a1=gap_a1,
        gap_a2=gap_a2,
        gap_composite=gap_a,
        degree_composite=a_explicit.degree,
        solver_results=partial,
    )
