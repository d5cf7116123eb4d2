import math

import numpy as np
import pytest

from nsreg.criteria import (
    CriterionSpec,
    Target,
    blowup_from_series,
    blowup_indicator,
    builtin_bkm_classic,
    builtin_paper_criterion,
    builtin_serrin,
    evaluate,
    instantaneous_series,
    norm_equivalence_probe,
    report_from_series,
    theta_from_p,
)
from nsreg.errors import InsufficientDataError, InvalidExponentError, InvalidScalingError
from nsreg.fields import gen_beltrami, to_physical, zeros
from nsreg.norms import NormSpec, SpatialKind, TimeSeries, Verdict, lp_norm
from nsreg.operators import b1_apply
from nsreg.solver import SolverConfig, Trajectory, run

NU = 0.1
VOL = (2 * math.pi) ** 3


class TestThetaFromP:
    def test_paper_endpoint(self):
        # omega in L^2((0,T); H^{-1,inf})
        assert theta_from_p(math.inf, 1.0) == 2.0

    def test_serrin_as_stated(self):
        # 2/theta + n/p = 2 with n = 3, p = inf
        assert theta_from_p(math.inf, 2.0) == 1.0

    def test_algebra(self):
        assert theta_from_p(5, 1.0) == pytest.approx(5.0, rel=1e-15)

    @pytest.mark.parametrize("p", [3, 2, 1.5])
    def test_p_must_exceed_three(self, p):
        with pytest.raises(InvalidExponentError):
            theta_from_p(p, 1.0)

    def test_nonpositive_denominator(self):
        with pytest.raises(InvalidScalingError):
            theta_from_p(4, 0.75)


class TestBuiltins:
    def test_paper(self):
        s = builtin_paper_criterion(math.inf)
        assert s.theta == 2 and s.target is Target.VORTICITY
        assert s.norm.spatial_kind is SpatialKind.NEG_SOBOLEV and s.norm.sobolev_order == -1
        assert s.scaling_sum == 1

    def test_bkm(self):
        s = builtin_bkm_classic()
        assert s.theta == 1 and s.target is Target.VORTICITY
        assert s.norm.spatial_kind is SpatialKind.LEBESGUE and math.isinf(s.p)

    def test_serrin(self):
        s = builtin_serrin(6)
        assert s.theta == pytest.approx(4 / 3, rel=1e-15) and s.target is Target.VELOCITY

    @pytest.mark.parametrize("factory", [builtin_paper_criterion, builtin_serrin])
    def test_rejects_p3(self, factory):
        with pytest.raises(InvalidExponentError):
            factory(3)

    def test_scaling_invariant(self):
        with pytest.raises(InvalidScalingError):
            CriterionSpec("x", Target.VELOCITY, NormSpec(SpatialKind.LEBESGUE, 4.0), 2.0, 1.0)

    def test_classical_serrin_sum_one(self):
        s = CriterionSpec("lps", Target.VELOCITY, NormSpec(SpatialKind.LEBESGUE, 6.0), 4.0, 1.0)
        assert s.theta == theta_from_p(6, 1.0)


def closed_form_integral(theta, rate):
    """(int_0^1 e^{-rate theta t} dt)^{1/theta}."""
    return ((1 - math.exp(-rate * theta)) / (rate * theta)) ** (1 / theta)


class TestEvaluate:
    def test_paper_criterion_beltrami(self, beltrami_run):
        r = evaluate(beltrami_run, builtin_paper_criterion())
        t = r.instantaneous.times
        np.testing.assert_allclose(r.instantaneous.values, np.exp(-NU * t), rtol=1e-10)
        assert r.final_value == pytest.approx(math.sqrt((1 - math.exp(-0.2)) / 0.2), abs=1e-4)
        assert r.final_value == pytest.approx(0.952023, abs=1e-4)
        assert r.verdict is Verdict.FINITE

    def test_bkm_beltrami(self, beltrami_run):
        # |omega| = |u| = e^{-nu t} pointwise for k = 1
        r = evaluate(beltrami_run, builtin_bkm_classic())
        assert r.final_value == pytest.approx(closed_form_integral(1, NU), abs=1e-4)

    def test_serrin_beltrami(self, beltrami_run):
        s = builtin_serrin(6)
        r = evaluate(beltrami_run, s)
        # ||u(t)||_6 = e^{-nu t} |Omega|^{1/6}
        expect = VOL ** (1 / 6) * closed_form_integral(s.theta, NU)
        assert r.final_value == pytest.approx(expect, rel=1e-4)

    def test_recomputed_matches_recorded(self, beltrami_run):
        spec = builtin_paper_criterion()
        stripped = Trajectory(beltrami_run.config, beltrami_run.snapshots, {})
        a = evaluate(beltrami_run, spec)
        b = evaluate(stripped, spec)
        np.testing.assert_allclose(a.instantaneous.values, b.instantaneous.values, rtol=1e-14)

    def test_running_integral_invariants(self, beltrami_run):
        for spec in (builtin_paper_criterion(), builtin_bkm_classic(), builtin_serrin(6), builtin_paper_criterion(5)):
            r = evaluate(beltrami_run, spec)
            run_int = r.running_integral.values
            assert run_int[0] == 0 and np.all(np.diff(run_int) >= 0)
            assert r.final_value**spec.theta == pytest.approx(run_int[-1], rel=1e-12)

    def test_shift_at_every_snapshot(self, beltrami_run):
        r = evaluate(beltrami_run, builtin_paper_criterion(4))
        for u, val in zip(beltrami_run.snapshots, r.instantaneous.values):
            b1 = lp_norm(to_physical(b1_apply(u)), 4)
            assert val == pytest.approx(b1, rel=1e-10)
            assert val == pytest.approx(lp_norm(to_physical(u), 4), rel=1e-10)

    def test_rest_state(self, grid8):
        traj = run(SolverConfig(grid8, 0.1, 1e-2, 0.1), zeros(grid8), [builtin_paper_criterion()])
        r = evaluate(traj, builtin_paper_criterion())
        assert r.final_value == 0.0 and r.verdict is Verdict.FINITE
        assert not np.any(r.running_integral.values)

    def test_diverged_propagates(self):
        spec = builtin_paper_criterion()
        series = TimeSeries.from_samples([0, 0.1, 0.2, 0.3], [1.0, 2.0, 5.0, math.inf])
        r = report_from_series(spec, series)
        assert r.verdict is Verdict.DIVERGED and r.final_value is Verdict.DIVERGED
        assert len(r.running_integral) == 3
        assert r.running_integral.values[-1] == pytest.approx(0.05 * (1 + 4) + 0.05 * (4 + 25))

    def test_no_snapshots(self, beltrami_run):
        with pytest.raises(InsufficientDataError):
            evaluate(Trajectory(beltrami_run.config), builtin_bkm_classic())

    def test_taylor_green_both_finite(self, taylor_green_run):
        for spec in (builtin_paper_criterion(), builtin_bkm_classic()):
            r = evaluate(taylor_green_run, spec)
            assert r.verdict is Verdict.FINITE and math.isfinite(r.final_value)


class TestBlowupIndicator:
    def test_beltrami_constant(self, beltrami_run):
        ind = blowup_indicator(beltrami_run)
        np.testing.assert_allclose(ind.running_sup.values, 1.0, rtol=1e-12)

    def test_rest_state(self, grid8):
        traj = run(SolverConfig(grid8, 0.1, 1e-2, 0.1), zeros(grid8))
        assert not np.any(blowup_indicator(traj).running_sup.values)

    def test_nondecreasing_and_diverged(self):
        s = TimeSeries.from_samples([0, 1, 2, 3, 4], [1, 3, 2, 7, math.nan])
        ind = blowup_from_series(s)
        assert list(ind.running_sup.values) == [1, 3, 3, 7]
        assert ind.diverged


class TestEquivalenceProbe:
    def test_beltrami_ratio_one(self, grid16):
        for k in (1, 2, 5):
            probe = norm_equivalence_probe(gen_beltrami(grid16, k), [2, 4, 8, math.inf])
            np.testing.assert_allclose(probe.ratios, 1.0, rtol=1e-12)
            assert probe.identity_residual <= 1e-10

    def test_corpus_l2_contraction(self, corpus16):
        for u in corpus16:
            probe = norm_equivalence_probe(u, [2])
            assert probe.ratios[0] <= 1 + 1e-12

    def test_corpus_regression_statistics(self, corpus16):
        ratios = np.array([norm_equivalence_probe(u, [4, math.inf]).ratios for u in corpus16])
        assert np.all(np.isfinite(ratios)) and np.all(ratios > 0)
        for u in corpus16:
            assert norm_equivalence_probe(u, [2, 4, math.inf]).identity_residual <= 1e-10
