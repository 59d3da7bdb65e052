from fractions import Fraction

import numpy as np
import pytest

from jetsuff.errors import InvalidInputError
from jetsuff.germ import GermPair, PolyGermMap, ZSpec
from jetsuff.lojasiewicz import (LojasiewiczReport, ViolationSequence,
                                 check_corollary_hypotheses, estimate_condition,
                                 find_violation_sequence, fit_exponent)
from jetsuff.poly import Poly

RADII = [0.5, 0.25, 0.125, 0.0625]
Z_HYP = ZSpec(n=2, variant="analytic", form="subspace", coords=(1,))
Z_ORIGIN = ZSpec(n=2, variant="analytic", form="subspace", coords=(1, 2))


def power_germ(p, k=2):
    return PolyGermMap(2, 1, k, [Poly(2, {(p, 0): Fraction(1)})])


class TestEstimate:
    def test_x2_ratio_is_two(self):
        rep = estimate_condition(power_germ(2), Z_HYP, 2, RADII, 512, 0)
        assert rep.verdict == "holds"
        assert rep.C_hat == pytest.approx(2.0, abs=0.01)

    def test_sum_of_squares_point_singularity(self):
        f = PolyGermMap(2, 1, 2, [Poly(2, {(2, 0): 1, (0, 2): 1})])
        rep = estimate_condition(f, Z_ORIGIN, 2, RADII, 512, 0)
        assert rep.verdict == "holds"
        assert rep.C_hat == pytest.approx(2.0, abs=0.01)

    def test_x3_with_k2_fails_linearly(self):
        rep = estimate_condition(power_germ(3), Z_HYP, 2, RADII, 512, 0)
        assert rep.verdict == "fails"
        # minima track the closed-form ratio 3|x|: halving with the radius
        for a, b in zip(rep.minima, rep.minima[1:]):
            assert b / a == pytest.approx(0.5, rel=1e-9)

    def test_bad_radii_rejected(self):
        with pytest.raises(InvalidInputError):
            estimate_condition(power_germ(2), Z_HYP, 2, [0.5, 0.25, 0.125], 512, 0)
        with pytest.raises(InvalidInputError):
            estimate_condition(power_germ(2), Z_HYP, 2, RADII, 100, 0)

    def test_density_stability(self):
        a = estimate_condition(power_germ(2), Z_HYP, 2, RADII, 512, 0)
        b = estimate_condition(power_germ(2), Z_HYP, 2, RADII, 1024, 0)
        assert abs(a.C_hat - b.C_hat) < 0.01 * a.C_hat

    def test_verdict_stable_across_seeds(self):
        verdicts = {estimate_condition(power_germ(2), Z_HYP, 2, RADII, 512, s).verdict
                    for s in range(10)}
        assert verdicts == {"holds"}

    def test_report_roundtrip(self, tmp_path):
        rep = estimate_condition(power_germ(2), Z_HYP, 2, RADII, 512, 0)
        rep.write_json(tmp_path / "r.json")
        rep.write_csv(tmp_path / "r.csv")
        assert (tmp_path / "r.json").exists()
        lines = (tmp_path / "r.csv").read_text().strip().splitlines()
        assert lines[0].startswith("annulus,radius,min_ratio")
        assert len(lines) == 1 + len(RADII)


class TestFitExponent:
    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_power_germs(self, p):
        theta = fit_exponent(power_germ(p), Z_HYP, RADII, 512, 0)
        assert theta == pytest.approx(p - 1, abs=0.05)

    def test_radial_quadratic(self):
        f = PolyGermMap(2, 1, 2, [Poly(2, {(2, 0): 1, (0, 2): 1})])
        theta = fit_exponent(f, Z_ORIGIN, RADII, 512, 0)
        assert theta == pytest.approx(1.0, abs=0.05)


class TestViolationSequence:
    def test_x3_produces_decaying_sequence(self):
        seq = find_violation_sequence(power_germ(3), Z_HYP, 2, 0)
        assert seq is not None
        assert len(seq.points) >= 3
        # invariants re-checked here on top of the constructor's own checks
        for d0, d1 in zip(seq.dists, seq.dists[1:]):
            assert d1 < 0.5 * d0
        for r0, r1 in zip(seq.ratios, seq.ratios[1:]):
            assert r1 < r0
        # the closed-form minimizer sits near the Z hyperplane
        for p_, r_ in zip(seq.points, seq.ratios):
            assert r_ == pytest.approx(3 * abs(p_[0]), rel=1e-9)

    def test_x2_has_no_violation(self):
        assert find_violation_sequence(power_germ(2), Z_HYP, 2, 0) is None

    def test_invariant_enforcement(self):
        with pytest.raises(InvalidInputError):
            ViolationSequence(points=((0.1, 0), (0.06, 0)),
                              ratios=(1.0, 0.9), dists=(0.1, 0.06))


class TestCorollary:
    def pair(self, extra_terms):
        f = power_germ(2)
        terms = {(2, 0): Fraction(1), **extra_terms}
        f1 = PolyGermMap(2, 1, 2, [Poly(2, terms)])
        return GermPair(f=f, f1=f1, z=Z_HYP)

    def test_quartic_perturbation_passes(self):
        rep = check_corollary_hypotheses(self.pair({(4, 0): Fraction(1)}),
                                         [0.25, 0.125, 0.0625, 0.03125], 512, 0)
        assert rep.passes and not rep.diverges
        assert rep.C == pytest.approx(2.0, abs=0.01)
        assert rep.C2 < 0.5

    def test_identical_pair_trivially_passes(self):
        rep = check_corollary_hypotheses(self.pair({}), RADII, 512, 0)
        assert rep.passes
        assert rep.C1 == 0.0 and rep.C2 == 0.0

    def test_linear_perturbation_diverges(self):
        rep = check_corollary_hypotheses(self.pair({(1, 0): Fraction(1)}),
                                         RADII, 512, 0)
        assert not rep.passes
        assert rep.diverges
