import numpy as np
import pytest

from blaschke.errors import RootFindingError
from blaschke.roots import clustered_roots, poly_from_roots, raw_roots, trim


def as_pairs(roots_with_mult):
    return sorted(roots_with_mult, key=lambda rm: (rm[0].real, rm[0].imag))


def test_simple_roots_recovered():
    roots = [0.3, -0.5 + 0.2j, 0.1 - 0.7j]
    found = clustered_roots(poly_from_roots(roots))
    assert sum(m for _, m in found) == 3
    for r in roots:
        assert min(abs(r - z) for z, _ in found) < 1e-12


@pytest.mark.parametrize("mult", [2, 3, 5, 8])
def test_multiple_root_collapses_to_one_entry(mult):
    # companion eigenvalues scatter like eps^(1/m); the refinement must
    # still report a single m-fold root at full accuracy
    p = poly_from_roots([0.4 - 0.1j] * mult + [-0.6])
    found = clustered_roots(p)
    assert (any(m == mult and abs(z - (0.4 - 0.1j)) < 1e-10 for z, m in found))
    assert sum(m for _, m in found) == mult + 1


def test_pure_power():
    found = clustered_roots(np.array([0, 0, 0, 0, 0, 0, 0, 1.0], dtype=complex))
    assert found == [(0j, 7)]


def test_two_genuinely_close_roots_stay_separate():
    # separation 1e-4 is resolvable and must not be merged into a double root
    p = poly_from_roots([0.3, 0.3 + 1e-4, -0.5])
    found = clustered_roots(p)
    assert sum(m for _, m in found) == 3
    assert all(m == 1 for _, m in found)


def test_sub_tolerance_pair_merges():
    # closer than the multiset tolerance: reported as one double point
    p = poly_from_roots([0.3, 0.3 + 1e-9, -0.5])
    found = clustered_roots(p)
    assert any(m == 2 for _, m in found)


def test_mixed_cluster_multiple_plus_far_simple():
    p = poly_from_roots([0.2 + 0.2j] * 3 + [0.21 + 0.2j * 1.05, -0.4])
    found = clustered_roots(p)
    assert sum(m for _, m in found) == 5


def test_trim_rejects_zero_polynomial():
    with pytest.raises(RootFindingError):
        trim(np.zeros(4, dtype=complex))


def test_raw_roots_degree():
    assert raw_roots(np.array([1.0], dtype=complex)).size == 0
    assert raw_roots(poly_from_roots([0.5, -0.5])).size == 2


def test_random_polynomials_roundtrip(rng):
    for _ in range(30):
        n = int(rng.integers(1, 9))
        roots = []
        while len(roots) < n:
            z = complex(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9))
            if all(abs(z - r) > 0.05 for r in roots):
                roots.append(z)
        found = clustered_roots(poly_from_roots(roots, lead=1.7 - 0.3j))
        assert sum(m for _, m in found) == n
        for r in roots:
            assert min(abs(r - z) for z, _ in found) < 1e-9
