"""Polynomial root extraction with multiplicity-aware clustering.

Roots come from the companion matrix (``np.roots``); eigenvalue scatter for
an m-fold root scales like eps^(1/m), which exceeds the multiset tolerance
already at m = 3.  Candidate clusters are therefore verified and refined:
a size-m cluster is accepted as one m-fold root only if Newton on the
(m-1)-st derivative converges to a point where all lower derivatives vanish
at backward-error level; the refined center is then accurate to roundoff.
Rejected clusters fall back to individually polished simple roots.

Coefficients are ascending (c[k] multiplies z^k) throughout.
"""

from __future__ import annotations

import numpy as np

from .errors import RootFindingError
from .multiset import TAU_CLUSTER

# Relative floor below which a derivative value counts as exactly zero in
# the multiple-root backward-error test (well above evaluation roundoff).
_ACCEPT_FLOOR = 1e-13
# Coarse-to-fine linkage scales tried before the final TAU_CLUSTER merge.
# The widest scales only matter for very high multiplicities, whose
# eigenvalue clouds are wide; false groupings there fail the test below.
_SCALES = (3e-1, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4, 1e-5, 1e-6)


def polyval(coeffs, z):
    return np.polynomial.polynomial.polyval(z, np.asarray(coeffs))


def polyder(coeffs):
    return np.polynomial.polynomial.polyder(np.asarray(coeffs))


def polymul(a, b):
    return np.polynomial.polynomial.polymul(np.asarray(a), np.asarray(b))


def poly_from_roots(roots, lead: complex = 1.0):
    """Expand prod (z - r) by incremental convolution of linear factors."""
    coeffs = np.array([lead], dtype=complex)
    for r in roots:
        coeffs = polymul(coeffs, np.array([-r, 1.0], dtype=complex))
    return coeffs


def trim(coeffs, rel_tol: float = 1e-13):
    """Drop leading (highest-order) coefficients that are negligible
    relative to the largest one."""
    c = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        raise RootFindingError("zero polynomial has no well-defined roots")
    last = c.size - 1
    while last > 0 and abs(c[last]) <= rel_tol * scale:
        last -= 1
    return c[: last + 1]


def raw_roots(coeffs):
    """Companion-matrix eigenvalues of the trimmed polynomial."""
    c = trim(coeffs)
    if c.size == 1:
        return np.array([], dtype=complex)
    # Exact zero roots split off first: they are common (powers of z) and
    # should not pass through the eigensolver.
    nzero = 0
    while nzero < c.size - 1 and c[nzero] == 0.0:
        nzero += 1
    inner = c[nzero:]
    r = np.roots(inner[::-1]) if inner.size > 1 else np.array([], dtype=complex)
    return np.concatenate([np.zeros(nzero, dtype=complex), r])


def _newton_poly(coeffs, dcoeffs, z0, steps=60, tol=1e-15):
    """Damped Newton iteration on a polynomial; returns the final iterate.

    Steps are halved until |p| decreases, so far-off starting points (raw
    companion eigenvalues can be badly wrong for ill-conditioned
    coefficients) still converge instead of oscillating.
    """
    z = complex(z0)
    fz = abs(complex(polyval(coeffs, z)))
    for _ in range(steps):
        d = complex(polyval(dcoeffs, z))
        if d == 0.0 or fz == 0.0:
            break
        step = complex(polyval(coeffs, z)) / d
        moved = False
        for _ in range(12):
            cand = z - step
            fc = abs(complex(polyval(coeffs, cand)))
            if fc < fz:
                z, fz, moved = cand, fc, True
                break
            step *= 0.5
        if not moved or abs(step) < tol * max(1.0, abs(z)):
            break
    return z


def _coeff_scale(coeffs, z):
    w = max(1.0, abs(z))
    return float(np.sum(np.abs(coeffs) * w ** np.arange(len(coeffs))))


def _is_multiple_root(deriv_chain, z, m, spread):
    """Backward-error test: derivatives of order < m all vanish at ``z``.

    Note k = m - 1 is nearly vacuous (``z`` is refined as a root of the
    (m-1)-st derivative), so the informative conditions are k <= m - 2.
    The threshold shrinks with the observed cluster spread: m genuinely
    separate roots at distance d leave a residue ~ d^(m-k) in the k-th
    derivative, while a true m-fold root leaves only roundoff.
    """
    for k in range(m):
        ck = deriv_chain[k]
        scale = _coeff_scale(ck, z)
        if scale == 0.0:
            continue
        tol = max(_ACCEPT_FLOOR, (spread / 50.0) ** (m - k))
        if abs(complex(polyval(ck, z))) > tol * scale:
            return False
    return True


def _single_linkage(points, tau):
    """Union-find clustering of indices at linkage distance ``tau``."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) <= tau:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def clustered_roots(coeffs, cluster_tol: float = TAU_CLUSTER, initial=None):
    """All roots of the polynomial as ``[(root, multiplicity), ...]``.

    Exact multiple roots are recovered at full accuracy; genuinely distinct
    roots closer than ``cluster_tol`` merge (multiplicities add).  The total
    multiplicity always equals the trimmed degree.  ``initial`` overrides
    the companion-matrix starting points (callers that can polish roots on
    a better-conditioned equation pass the polished set).
    """
    c = trim(coeffs)
    n = c.size - 1
    if n == 0:
        return []
    chain = [c]
    for _ in range(n):
        chain.append(polyder(chain[-1]))

    free = list(raw_roots(c)) if initial is None else [complex(z) for z in initial]
    if len(free) != n:
        raise RootFindingError(f"expected {n} starting points, got {len(free)}")
    frozen: list[tuple[complex, int]] = []

    for tau in _SCALES:
        if len(free) < 2:
            break
        remaining = []
        for idx_group in _single_linkage(free, tau):
            members = [free[i] for i in idx_group]
            m = len(members)
            if m < 2:
                remaining.extend(members)
                continue
            centroid = sum(members) / m
            z = _newton_poly(chain[m - 1], chain[m], centroid)
            spread = max(abs(p - centroid) for p in members)
            if abs(z - centroid) <= 4.0 * spread + 1e-9 and _is_multiple_root(chain, z, m, spread):
                frozen.append((z, m))
            else:
                remaining.extend(members)
        free = remaining

    # Leftover simple roots: Newton polish on the polynomial itself.
    for z in free:
        frozen.append((_newton_poly(chain[0], chain[1], z), 1))

    merged = _merge(frozen, cluster_tol)
    total = sum(m for _, m in merged)
    if total != n:
        raise RootFindingError(
            f"root multiplicities sum to {total}, expected degree {n}", offender=merged
        )
    return merged


def _merge(pairs, tol):
    out: list[list] = []
    for p, m in sorted(pairs, key=lambda pm: (pm[0].real, pm[0].imag)):
        for slot in out:
            if abs(slot[0] - p) <= tol:
                tot = slot[1] + m
                slot[0] = (slot[0] * slot[1] + p * m) / tot
                slot[1] = tot
                break
        else:
            out.append([p, m])
    return [(complex(p), int(m)) for p, m in sorted(out, key=lambda pm: (pm[0].real, pm[0].imag))]
