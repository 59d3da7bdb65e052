from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import brentq

from jetsuff.errors import (CoveringViolationError, InvalidInputError)
from jetsuff.germ import GermPair, PolyGermMap, ZSpec
from jetsuff.lojasiewicz import estimate_condition
from jetsuff.poly import Poly
from jetsuff.sampling import ball_sample
from jetsuff.trivializer import (TrivializationConstants, VectorFieldW,
                                 build_F, calibrate_constants, eval_W, flow,
                                 gronwall_check, isotopy)

Z_HYP = ZSpec(n=2, variant="analytic", form="subspace", coords=(1,))
RADII = [0.5, 0.25, 0.125, 0.0625]


def make_pair(p_terms):
    f = PolyGermMap(2, 1, 2, [Poly(2, {(2, 0): Fraction(1)})])
    f1 = PolyGermMap(2, 1, 2, [Poly(2, {(2, 0): Fraction(1), **p_terms})])
    return GermPair(f=f, f1=f1, z=Z_HYP)


@pytest.fixture(scope="module")
def cubic_setup():
    pair = make_pair({(3, 0): Fraction(1)})
    rep = estimate_condition(pair.f, pair.z, 2, RADII, 512, 0)
    consts = calibrate_constants(pair, rep)
    vf = VectorFieldW(build_F(pair), consts)
    return pair, rep, consts, vf


class TestBuildF:
    def test_values(self, cubic_setup):
        pair, _, _, _ = cubic_setup
        F = build_F(pair)
        assert F.eval(1.0, [0.1, 0.0]) == pytest.approx([0.011])
        assert F.eval(0.0, [0.1, 0.0]) == pytest.approx(pair.f.eval([0.1, 0.0]))
        np.testing.assert_allclose(F.d_x(1.0, [0.1, 0.0]).entries, [[0.23, 0.0]])

    def test_rejects_distinct_jets(self):
        bad = make_pair({(2, 1): Fraction(1)})  # x^2 y changes the 2-jet on Z
        with pytest.raises(InvalidInputError):
            build_F(bad)


class TestCalibration:
    def test_cubic_radius_matches_hand_bound(self, cubic_setup):
        # |P| = |x|^3 <= (C/3)|x|^2 and |dP| = 3x^2 <= (C/3)|x| with C = 2
        # force radius <= 2/9; the sampled radius sits just below it
        _, _, consts, _ = cubic_setup
        assert consts.C == pytest.approx(2.0, abs=0.01)
        assert 0.15 < consts.U_radius <= 2.0 / 9.0 + 1e-12
        assert consts.C_dprime == pytest.approx(
            2 * 1 * consts.C * np.sqrt(2) / (3 * consts.C_prime), rel=1e-12)
        assert consts.r0 == pytest.approx(consts.U_radius * np.exp(-consts.C_dprime))

    def test_zero_perturbation_keeps_radius(self):
        pair = make_pair({})
        rep = estimate_condition(pair.f, pair.z, 2, RADII, 512, 0)
        consts = calibrate_constants(pair, rep)
        assert consts.U_radius == 1.0
        assert consts.C_dprime > 0

    def test_requires_holds_verdict(self):
        f3 = PolyGermMap(2, 1, 2, [Poly(2, {(3, 0): Fraction(1)})])
        pair = GermPair(f=f3, f1=f3, z=Z_HYP)
        rep = estimate_condition(f3, Z_HYP, 2, RADII, 512, 0)
        with pytest.raises(InvalidInputError):
            calibrate_constants(pair, rep)


class TestVectorField:
    def test_hand_cramer_single_minor(self, cubic_setup):
        # m = 1: (2a + 3 xi a^2) w = -a^3 along the x-axis
        _, _, _, vf = cubic_setup
        for xi, a in [(0.0, 0.1), (1.0, 0.05), (-1.5, -0.08)]:
            w = eval_W(vf, xi, [a, 0.0])
            assert w[1] == 0.0
            assert w[0] == pytest.approx(-a ** 3 / (2 * a + 3 * xi * a ** 2), rel=1e-12)

    def test_zero_on_Z(self, cubic_setup):
        _, _, _, vf = cubic_setup
        np.testing.assert_array_equal(eval_W(vf, 0.7, [0.0, 0.12]), [0.0, 0.0])

    def test_field_bound_on_samples(self, cubic_setup):
        _, _, consts, vf = cubic_setup
        pts = ball_sample(2, 2048, 1, radius=consts.U_radius)
        rng = np.random.default_rng(1)
        for x in pts:
            d = Z_HYP.distance(x)
            if d < 1e-12:
                continue
            xi = rng.uniform(0.0, 1.0)
            w = eval_W(vf, xi, x)
            assert np.linalg.norm(w) <= consts.C_dprime * d * (1 + 1e-6)

    def test_linear_system_residual(self, cubic_setup):
        # eval_W guards this internally; check the residual directly too
        pair, _, _, vf = cubic_setup
        F = vf.F
        for x in ([0.1, 0.03], [-0.05, 0.1], [0.02, -0.14]):
            for xi in (0.0, 0.5, 1.0):
                w = eval_W(vf, xi, x)
                resid = F.d_x(xi, x).entries @ w + F.P.eval(x)
                assert np.linalg.norm(resid) <= 1e-9 * (1 + np.linalg.norm(F.P.eval(x)))

    def test_covering_violation_reported(self, cubic_setup):
        pair, _, consts, _ = cubic_setup
        inflated = TrivializationConstants(
            C=consts.C, C_prime=1e6, C_dprime=consts.C_dprime,
            U_radius=consts.U_radius, r0=consts.r0)
        vf_bad = VectorFieldW(build_F(pair, check_jets=False), inflated)
        with pytest.raises(CoveringViolationError):
            vf_bad.eval(0.0, [0.1, 0.0])


class TestFlow:
    def test_start_on_Z_is_constant(self, cubic_setup):
        _, _, _, vf = cubic_setup
        traj = flow(vf, [0.0, 0.1])
        assert np.all(traj.states == np.array([0.0, 0.1]))

    def test_endpoint_solves_conservation_equation(self, cubic_setup):
        _, _, _, vf = cubic_setup
        traj = flow(vf, [0.1, 0.0], tol=1e-10)
        h = brentq(lambda t: t * t + t ** 3 - 0.01, 0.05, 0.15, xtol=1e-15)
        assert traj.endpoint[0] == pytest.approx(h, abs=1e-5)
        assert traj.endpoint[1] == 0.0

    def test_zero_perturbation_identity_flow(self):
        pair = make_pair({})
        rep = estimate_condition(pair.f, pair.z, 2, RADII, 512, 0)
        consts = calibrate_constants(pair, rep)
        vf = VectorFieldW(build_F(pair), consts)
        traj = flow(vf, [0.1, 0.05], tol=1e-9)
        assert np.max(np.abs(traj.states - np.array([0.1, 0.05]))) <= 1e-9


@pytest.fixture(scope="module")
def result(cubic_setup):
    _, _, consts, vf = cubic_setup
    grid = ball_sample(2, 30, 0, radius=0.15)
    grid = np.vstack([grid, [[0.0, 0.05], [0.0, -0.12]]])
    return grid, isotopy(vf, grid, tol=1e-9)


class TestIsotopy:
    def test_identity_at_t0(self, result):
        grid, res = result
        np.testing.assert_array_equal(res.forward[:, 0, :], grid)

    def test_Z_points_fixed_exactly(self, result):
        grid, res = result
        on_z = np.abs(grid[:, 0]) == 0.0
        assert np.all(res.forward[on_z] == grid[on_z][:, None, :])
        assert np.all(res.inverse_residuals[on_z] == 0.0)

    def test_conservation_and_inverse(self, result):
        _, res = result
        assert res.max_conservation <= 1e-6
        assert res.max_inverse_residual <= 1e-6

    def test_endpoint_injective_on_grid(self, result):
        _, res = result
        ends = res.forward[:, -1, :]
        d = np.linalg.norm(ends[:, None, :] - ends[None, :, :], axis=2)
        np.fill_diagonal(d, np.inf)
        assert d.min() > 0

    def test_gronwall_band(self, result, cubic_setup):
        _, _, consts, _ = cubic_setup
        _, res = result
        rep = gronwall_check(res, consts, Z_HYP)
        assert rep.ok

    def test_serialization(self, result, tmp_path):
        _, res = result
        res.write_json(tmp_path / "iso.json")
        res.write_csv(tmp_path / "iso.csv")
        lines = (tmp_path / "iso.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + res.grid.shape[0] * len(res.times)
