import math

import numpy as np
import pytest

from blaschke import (
    CONVERGED_CONSTANT,
    CONVERGED_NONCONSTANT,
    NOT_CONVERGED,
    BlaschkeError,
    DomainError,
    FiniteBlaschke,
    InconclusiveError,
    PointMultiset,
    covering_certificate,
    criterion_partial_sums,
    default_grid,
    detect_convergence,
    equisummability_bounds,
    explicit_sequence,
    forward_eval,
    hyp_dist,
    hyp_distortion,
    lambda_values,
    moebius,
    moebius_family,
    normalize_sequence,
    order_of_zero,
    rotation_family,
    squaring_family,
    tail_map,
    tangential_family,
    zero_monotonicity_check,
)
from blaschke.corpus import random_sequence, rng_from_seed
from conftest import random_disk


class TestForwardEval:
    def test_double_negation(self):
        seq = moebius_family(0.0)  # T_0(z) = -z
        assert forward_eval(seq, 2, 0.4) == pytest.approx(0.4)

    def test_squaring_tower(self):
        assert forward_eval(squaring_family(), 3, 0.9) == pytest.approx(0.9**8)

    def test_mixed_chain_by_hand(self):
        seq = explicit_sequence([FiniteBlaschke.power_map(2), FiniteBlaschke.automorphism(0.5)])
        assert forward_eval(seq, 2, 0.0) == pytest.approx(0.5)


class TestTailMap:
    def test_full_chain_when_n_zero(self, rng):
        seq = random_sequence(rng_from_seed(3), length=6)
        tail = tail_map(seq, 0, 4)
        for _ in range(5):
            z = random_disk(rng, 0.8)
            assert abs(complex(tail.eval(z)) - forward_eval(seq, 4, z)) < 1e-13

    def test_single_factor(self):
        seq = squaring_family()
        tail = tail_map(seq, 2, 1)
        assert len(tail.factors) == 1
        assert complex(tail.eval(0.3)) == pytest.approx(0.09)

    def test_splice_identity(self, rng):
        seq = random_sequence(rng_from_seed(11), length=8)
        n_base, n_tail = 3, 4
        tail = tail_map(seq, n_base, n_tail)
        for _ in range(20):
            z = random_disk(rng, 0.85)
            spliced = complex(tail.eval(forward_eval(seq, n_base, z)))
            assert abs(spliced - forward_eval(seq, n_base + n_tail, z)) < 1e-12


class TestCriterionSums:
    def test_automorphisms_contribute_nothing(self):
        seq = moebius_family(0.3 + 0.2j)
        sums = criterion_partial_sums(seq, 0.1 - 0.4j, 12)
        assert sums[-1] == pytest.approx(0.0, abs=1e-12)

    def test_squaring_at_origin_grows_linearly(self):
        sums = criterion_partial_sums(squaring_family(), 0.0, 15)
        assert sums[-1] == pytest.approx(15.0)

    def test_tangential_closed_form(self):
        # terms 1 - r_n = 2^-n since f_n'(0) = r_n
        for n_total in (5, 12):
            sums = criterion_partial_sums(tangential_family(), 0.0, n_total)
            assert sums[-1] == pytest.approx(1.0 - 2.0**-n_total, abs=1e-14)

    def test_nondecreasing(self):
        sums = criterion_partial_sums(tangential_family(), 0.2 + 0.1j, 20)
        assert np.all(np.diff(sums) >= -1e-15)


class TestNormalizeSequence:
    def test_fixes_origin(self, rng):
        seq = random_sequence(rng_from_seed(5), length=8)
        norm = normalize_sequence(seq, 0.3 - 0.2j)
        for n in range(1, 9):
            assert abs(complex(norm[n].eval(0.0))) < 1e-12

    def test_origin_fixing_input_gets_sign_convention(self, rng):
        # with a = 0 and f(0) = 0: T_0 o f o T_0, i.e. z -> -f(-z)
        f = FiniteBlaschke(-1.0, PointMultiset([0.0, -0.5]))
        norm = normalize_sequence(explicit_sequence([f]), 0.0)
        for _ in range(10):
            z = random_disk(rng, 0.8)
            assert abs(complex(norm[1].eval(z)) - (-complex(f.eval(-z)))) < 1e-12

    def test_conjugation_identity_on_samples(self, rng):
        # normalized iterates equal T_{F_n(a)} o F_n o T_a pointwise
        seq = random_sequence(rng_from_seed(9), length=10)
        a = 0.25 + 0.15j
        norm = normalize_sequence(seq, a)
        for n in (1, 3, 7, 10):
            fna = forward_eval(seq, n, a)
            for _ in range(5):
                z = random_disk(rng, 0.8)
                lhs = forward_eval(norm, n, z)
                rhs = moebius(fna, forward_eval(seq, n, moebius(a, z)))
                assert abs(lhs - rhs) < 1e-11


class TestEquisummability:
    def test_origin_fixed_sequence_has_unit_ratio(self):
        lo, hi, ratio = equisummability_bounds(squaring_family(), 0.0, 3)
        assert lo == hi == ratio == 1.0

    def test_squaring_example_brackets(self):
        lo, hi, ratio = equisummability_bounds(squaring_family(), 0.3, 2)
        # independent recomputation of the ratio
        f = FiniteBlaschke.power_map(2)
        expect = (1 - hyp_distortion(f, 0.09)) / (1 - hyp_distortion(f, 0.3))
        assert ratio == pytest.approx(expect, abs=1e-14)
        d = hyp_dist(0.3, 0.09)
        assert lo == pytest.approx(math.exp(-4 * d))
        assert hi == pytest.approx(math.exp(4 * d))
        assert lo - 1e-10 <= ratio <= hi + 1e-10

    def test_automorphisms_are_degenerate(self):
        with pytest.raises(DomainError):
            equisummability_bounds(moebius_family(0.3), 0.2, 2)

    def test_random_sequences_stay_in_bracket(self):
        rng = rng_from_seed(21)
        seq = random_sequence(rng, length=10)
        a = 0.35 - 0.2j
        for n in range(1, 11):
            try:
                lo, hi, ratio = equisummability_bounds(seq, a, n)
            except DomainError:
                continue
            assert lo - 1e-10 <= ratio <= hi + 1e-10


class TestDetectConvergence:
    def test_squaring_converges_to_constant(self):
        rep = detect_convergence(squaring_family(), default_grid(), n_max=30, tol=1e-9)
        assert rep.status == CONVERGED_CONSTANT
        assert max(abs(v) for v in rep.limit_samples) < 1e-9

    def test_tangential_converges_nonconstant(self):
        rep = detect_convergence(tangential_family(), default_grid(), n_max=40, tol=1e-9)
        assert rep.status == CONVERGED_NONCONSTANT
        assert rep.grid_cauchy_gap < 1e-9

    def test_rotations_do_not_converge(self):
        rep = detect_convergence(rotation_family(1.0), default_grid(), n_max=40, tol=1e-9)
        assert rep.status == NOT_CONVERGED

    def test_partial_sums_nondecreasing_in_report(self):
        rep = detect_convergence(tangential_family(), default_grid(), n_max=25, tol=1e-9)
        assert np.all(np.diff(rep.criterion_partial_sums) >= -1e-15)
        assert rep.grid_cauchy_gap >= 0.0

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            detect_convergence(squaring_family(), [], n_max=10, tol=1e-9)
        with pytest.raises(DomainError):
            detect_convergence(squaring_family(), [0.95], n_max=10, tol=1e-9)


class TestOrderOfZero:
    def test_squaring_tower_order(self):
        assert order_of_zero(squaring_family(), 3) == 8

    def test_moebius_is_simple(self):
        assert order_of_zero(moebius_family(0.3 + 0.1j), 1) == 1

    def test_stabilizes_after_initial_squaring(self):
        # f_1 = z^2 and then maps with f_n'(0) != 0: K_n = 2 for all n >= 1
        maps = [FiniteBlaschke.power_map(2)] + [
            FiniteBlaschke(-1.0, PointMultiset([0.0, -0.6 + 0.1j * k])) for k in range(1, 5)
        ]
        seq = explicit_sequence(maps)
        assert order_of_zero(seq, 5) == 2

    def test_nondecreasing_along_random_sequences(self):
        for seed in range(12):
            seq = random_sequence(rng_from_seed(100 + seed), length=6, degree_budget=32)
            orders = [order_of_zero(seq, n) for n in range(1, 7)]
            assert all(b >= a for a, b in zip(orders, orders[1:]))

    def test_inconclusive_beyond_cap(self):
        with pytest.raises(InconclusiveError):
            order_of_zero(squaring_family(), 7)  # order 128 > cap 64


class TestZeroMonotonicity:
    def test_squaring_fibers_nest(self):
        included, p1, p2 = zero_monotonicity_check(squaring_family(), 0.5, 1)
        assert included
        assert p1 == pytest.approx(0.25, abs=1e-10)
        assert p2 == pytest.approx(0.0625, abs=1e-10)

    def test_automorphism_fibers_are_singletons(self):
        included, p1, p2 = zero_monotonicity_check(moebius_family(0.4), 0.3, 2)
        assert included
        # fiber = {c}; the product over nonzero entries is |c| at every stage
        assert p1 == pytest.approx(0.3, abs=1e-12)
        assert p2 == pytest.approx(0.3, abs=1e-12)

    def test_origin_base_point_empty_product(self):
        included, p1, _ = zero_monotonicity_check(squaring_family(), 0.0, 1)
        assert included
        assert p1 == 1.0

    def test_random_sequences_nest_and_shrink(self):
        for seed in range(8):
            seq = random_sequence(rng_from_seed(200 + seed), length=5, degree_budget=32)
            c = random_disk(rng_from_seed(300 + seed), 0.6)
            prev = None
            for n in range(1, 5):
                included, p_n, p_next = zero_monotonicity_check(seq, c, n)
                assert included
                assert p_next <= p_n + 1e-9
                if prev is not None:
                    assert p_n == pytest.approx(prev, abs=1e-8)
                prev = p_next


class TestMonotoneDistortionFields:
    def test_lambda_fields_nonincreasing_for_normalized_sequences(self):
        # lambda_{n+1} = lambda_n * D_h f_{n+1}(F_n) <= lambda_n
        grid = np.array(default_grid((0.3, 0.6), 10), dtype=complex)
        for seed in range(6):
            seq = random_sequence(rng_from_seed(400 + seed), length=12)
            norm = normalize_sequence(seq, 0.1 + 0.2j)
            prev = None
            w = grid.copy()
            deriv = np.ones_like(grid)
            for n in range(1, 13):
                val, dfn = norm[n].eval_with_deriv(w)
                deriv = deriv * dfn
                w = val
                lam = np.abs(deriv) / (1.0 - np.abs(w) ** 2)
                if prev is not None:
                    assert np.all(lam <= prev + 1e-11)
                prev = lam


class TestCoveringCertificate:
    def test_identity_map(self):
        ident = FiniteBlaschke(-1.0, PointMultiset([0.0]))
        min_mod, covered = covering_certificate(ident, 0.01)
        assert min_mod == pytest.approx(0.9, abs=1e-12)
        assert min_mod >= 1 - 3 * 0.1
        assert covered

    def test_near_rotation_degree_two(self):
        r = 0.999
        h = FiniteBlaschke(-1.0, PointMultiset([0.0, -r]))  # z (r+z)/(1+rz)
        _, d0 = h.eval_with_deriv(0.0)
        assert abs(d0) == pytest.approx(r)
        _, covered = covering_certificate(h, 0.04)
        assert covered

    def test_rejects_vanishing_derivative(self):
        with pytest.raises(DomainError):
            covering_certificate(FiniteBlaschke.power_map(2), 0.01)

    def test_rejects_bad_epsilon(self):
        ident = FiniteBlaschke(-1.0, PointMultiset([0.0]))
        with pytest.raises(DomainError):
            covering_certificate(ident, 0.2)

    def test_rejects_nonfixing_map(self):
        with pytest.raises(DomainError):
            covering_certificate(FiniteBlaschke.automorphism(0.5), 0.01)
