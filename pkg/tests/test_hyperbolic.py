import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke import (
    DomainError,
    FiniteBlaschke,
    compose_explicit,
    disk_point,
    hyp_dist,
    hyp_distortion,
    moebius,
    schwarz_lower_bound,
)

# Polar-coordinate strategy for points well inside the disk.
disk_points = st.builds(
    lambda r, phi: complex(r * math.cos(phi), r * math.sin(phi)),
    st.floats(0.0, 0.95),
    st.floats(0.0, 2.0 * math.pi),
)


class TestDiskPoint:
    def test_interior_accepted(self):
        assert disk_point(0.3 + 0.1j) == 0.3 + 0.1j

    @pytest.mark.parametrize("z", [1.0, -1.0, 1.0j, 2.0, 1.0 - 1e-16])
    def test_boundary_and_outside_rejected(self, z):
        with pytest.raises(DomainError):
            disk_point(z)


class TestMoebius:
    def test_sends_origin_to_w(self):
        w = 0.3 + 0.1j
        assert moebius(w, 0.0) == pytest.approx(w)

    def test_w_zero_is_negation(self):
        assert moebius(0.0, 0.5) == pytest.approx(-0.5)

    def test_involution_roundtrip(self):
        w, z = 0.3 + 0.1j, -0.2 + 0.4j
        assert abs(moebius(w, moebius(w, z)) - z) < 1e-14

    @given(w=disk_points, z=disk_points)
    @settings(max_examples=150, deadline=None)
    def test_involution_property(self, w, z):
        assert abs(moebius(w, moebius(w, z)) - z) < 1e-13


class TestHypDist:
    def test_zero_at_coincident_points(self):
        assert hyp_dist(0.0, 0.0) == 0.0

    def test_atanh_of_half(self):
        # closed form: atanh of the pseudo-hyperbolic distance
        assert hyp_dist(0.0, 0.5) == pytest.approx(0.5493061443340548, abs=1e-14)

    def test_symmetry(self):
        a, b = 0.2 + 0.3j, -0.4 + 0.1j
        assert hyp_dist(a, b) == pytest.approx(hyp_dist(b, a), abs=1e-14)

    @given(w=disk_points, a=disk_points, b=disk_points)
    @settings(max_examples=150, deadline=None)
    def test_moebius_invariance(self, w, a, b):
        d1 = hyp_dist(a, b)
        d2 = hyp_dist(moebius(w, a), moebius(w, b))
        assert abs(d1 - d2) < 1e-11


class TestHypDistortion:
    def test_automorphism_has_unit_distortion(self):
        t = FiniteBlaschke.automorphism(0.3 + 0.1j)
        for z in (0.0, 0.5, -0.2 + 0.6j):
            assert hyp_distortion(t, z) == pytest.approx(1.0, abs=1e-12)

    def test_squaring_at_origin(self):
        assert hyp_distortion(FiniteBlaschke.power_map(2), 0.0) == 0.0

    def test_squaring_at_half(self):
        # direct formula 2|z|/(1+|z|^2)
        assert hyp_distortion(FiniteBlaschke.power_map(2), 0.5) == pytest.approx(0.8, abs=1e-14)

    @given(z=disk_points, w=disk_points, r=st.floats(0.05, 0.9))
    @settings(max_examples=150, deadline=None)
    def test_schwarz_pick_bound(self, z, w, r):
        f = FiniteBlaschke(1.0, [w, r * 1j if abs(r * 1j - w) > 1e-3 else -r])
        assert hyp_distortion(f, z) <= 1.0 + 1e-12

    def test_chain_rule_is_equality(self, rng):
        g = FiniteBlaschke(np.exp(0.7j), [0.2 - 0.3j, -0.1 + 0.4j])
        f = FiniteBlaschke(np.exp(-0.4j), [0.5, 0.1j])
        gf = compose_explicit(g, f)
        for _ in range(25):
            z = 0.8 * np.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            fz = complex(f.eval(z))
            lhs = hyp_distortion(gf, z)
            rhs = hyp_distortion(g, fz) * hyp_distortion(f, z)
            assert abs(lhs - rhs) < 1e-11


class TestSchwarzLowerBound:
    def test_unit_derivative_gives_radius(self):
        assert schwarz_lower_bound(1.0, 0.5) == pytest.approx(0.5)

    def test_epsilon_arithmetic(self):
        # d0 = 1 - 0.01, r = 1 - sqrt(0.01): 0.9 (1 - 0.01 * 19) = 0.729
        assert schwarz_lower_bound(0.99, 0.9) == pytest.approx(0.729, abs=1e-12)
        assert schwarz_lower_bound(0.99, 0.9) >= 1.0 - 3.0 * 0.1

    def test_rejects_radius_at_or_beyond_d0(self):
        with pytest.raises(DomainError):
            schwarz_lower_bound(0.5, 0.5)
        with pytest.raises(DomainError):
            schwarz_lower_bound(0.5, 0.7)

    def test_sampling_oracle_on_conjugated_squarings(self, rng):
        # H = u_{w1} o u_{w2} with u_w = T_{w^2} o square o T_w fixes 0;
        # the bound must undercut min |H| on each sampled circle.
        circle = np.exp(2j * np.pi * np.arange(360) / 360)
        for _ in range(100):
            ws = [
                0.6 * np.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(0, 2 * np.pi))
                for _ in range(2)
            ]
            factors = [
                compose_explicit(
                    FiniteBlaschke.automorphism(w * w),
                    compose_explicit(FiniteBlaschke.power_map(2), FiniteBlaschke.automorphism(w)),
                )
                for w in ws
            ]
            h = compose_explicit(factors[0], factors[1])
            _, d0 = h.eval_with_deriv(0.0)
            d0 = abs(d0)
            if d0 < 0.05:
                continue
            r = 0.8 * d0
            sampled_min = float(np.min(np.abs(h.eval(r * circle))))
            assert sampled_min >= schwarz_lower_bound(d0, r) - 1e-10
