"""Seeded random corpora for verification suites.

Everything is driven by a numpy Generator so a 64-bit seed fully determines
each corpus.  Distinct generated points keep a minimum separation: companion-
matrix root extraction cannot distinguish accidental near-collisions from
true multiple roots, so corpora avoid manufacturing them.
"""

from __future__ import annotations

import numpy as np

from .multiset import PointMultiset
from .products import FiniteBlaschke, compose_explicit
from .iteration import MapSequence, explicit_sequence


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def random_disk_point(rng, r_max: float = 0.85) -> complex:
    """Uniform over the disk of radius r_max."""
    r = r_max * np.sqrt(rng.uniform())
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return complex(r * np.cos(phi), r * np.sin(phi))


def separated_points(rng, count: int, r_max: float = 0.7, min_sep: float = 0.05) -> list[complex]:
    pts: list[complex] = []
    while len(pts) < count:
        z = random_disk_point(rng, r_max)
        if all(abs(z - p) >= min_sep for p in pts):
            pts.append(z)
    return pts


def random_blaschke(
    rng, max_degree: int = 8, min_degree: int = 1, r_max: float = 0.7, min_sep: float = 0.05
) -> FiniteBlaschke:
    d = int(rng.integers(min_degree, max_degree + 1))
    eta = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
    return FiniteBlaschke(eta, PointMultiset(separated_points(rng, d, r_max, min_sep)))


def random_automorphism(rng, r_max: float = 0.8) -> FiniteBlaschke:
    """eta * T_w for random w and unimodular eta."""
    t = FiniteBlaschke.automorphism(random_disk_point(rng, r_max))
    return FiniteBlaschke(t.eta * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi)), t.zeros)


def random_critical_targets(rng, size: int, r_max: float = 0.6, min_sep: float = 0.05) -> PointMultiset:
    return PointMultiset(separated_points(rng, size, r_max, min_sep))


def random_sequence(rng, length: int = 10, degree_budget: int = 64, r_max: float = 0.6) -> MapSequence:
    """Random explicit sequence whose cumulative composition degree stays
    within ``degree_budget`` (degree-2 factors until the budget forces
    automorphisms)."""
    maps = []
    total = 1
    for _ in range(length):
        if 2 * total <= degree_budget and rng.uniform() < 0.7:
            deg = 2
            total *= 2
        else:
            deg = 1
        eta = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        maps.append(FiniteBlaschke(eta, PointMultiset(separated_points(rng, deg, r_max))))
    return explicit_sequence(maps)


def random_origin_fixing_map(rng, epsilon: float, factors: int = 2) -> FiniteBlaschke:
    """H with H(0) = 0 and |H'(0)| > 1 - epsilon, built by composing maps
    z * (r + phase*z)/(1 + r*conj(phase)*z) whose origin distortions
    multiply to just above 1 - epsilon."""
    # Each factor contributes |H_i'(0)| = r_i; split the budget evenly.
    target = (1.0 - 0.5 * epsilon) ** (1.0 / factors)
    out = None
    for _ in range(factors):
        r = target + (1.0 - target) * rng.uniform(0.0, 0.5)
        phase = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        f = FiniteBlaschke(-phase, PointMultiset([0.0, -r * phase]))
        out = f if out is None else compose_explicit(f, out)
    return out
