"""Nonescape curves, barrier flux, and regime fits."""

import math

import numpy as np
import pytest

from gamow_lab.decay_analysis import (
    DecayCurve,
    POINTS_PER_DECADE,
    fit_exponential,
    fit_tail_exponent,
    flux_derivative,
    geometric_times,
    nonescape_curve,
    regime_report,
)
from gamow_lab.exceptions import (
    GridTooCoarse,
    WindowBeforeCrossover,
    WindowTooSmall,
)
from gamow_lab.potential_model import WellParameters
from gamow_lab.profiles import box_mode, truncated_gaussian
from gamow_lab.gamow_expansion import evolve_rotated
from gamow_lab.spectral_evolution import (
    WaveState,
    evolve_direct,
    resonances,
    well_grid,
)

W100 = WellParameters(lam=100.0)
W10 = WellParameters(lam=10.0)


def tau1(w):
    return resonances(w, 40.0)[0].tau


class TestGeometricTimes:
    def test_density(self):
        t = geometric_times(1.0, 100.0)
        assert t.size == 2 * POINTS_PER_DECADE + 1
        assert t[0] == 1.0 and t[-1] == pytest.approx(100.0, rel=1e-12)
        ratios = np.diff(np.log(t))
        assert np.allclose(ratios, ratios[0])

    def test_rejects_bad_range(self):
        with pytest.raises(ValueError):
            geometric_times(5.0, 1.0)


class TestDecayCurve:
    def test_invariants_over_exponential_era(self):
        w = W100
        times = np.concatenate([[0.0], np.linspace(0.3, 5.0, 12) * tau1(w)])
        curve = nonescape_curve(box_mode(1), times, w)
        assert curve.P[0] == 1.0
        assert np.all(np.diff(curve.P) <= 1e-8)
        assert np.all(curve.P >= 0.0)
        assert curve.methods[0] == "direct"
        assert curve.methods[-1] == "rotated"

    def test_rejects_unsorted_times(self):
        with pytest.raises(ValueError):
            DecayCurve(times=np.array([1.0, 0.5]), P=np.array([0.5, 0.4]),
                       methods=("rotated", "rotated"), w=W10,
                       profile=box_mode(1))

    def test_rejects_nonunit_start(self):
        with pytest.raises(ValueError):
            DecayCurve(times=np.array([0.0, 1.0]), P=np.array([0.9, 0.5]),
                       methods=("direct", "rotated"), w=W10,
                       profile=box_mode(1))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_policies_agree(self):
        w = W100
        t = np.array([tau1(w)])
        p_dir = nonescape_curve(box_mode(1), t, w, policy="direct")
        p_rot = nonescape_curve(box_mode(1), t, w, policy="rotated")
        assert p_dir.P[0] == pytest.approx(p_rot.P[0], rel=1e-6)


class TestFluxDerivative:
    @pytest.mark.parametrize("p", [box_mode(1), box_mode(2),
                                   truncated_gaussian(0.5, 0.08)])
    def test_vanishes_at_t_zero(self, p):
        grid = well_grid(W100, 1025)
        ws = evolve_direct(p, 0.0, grid, W100)
        assert abs(flux_derivative(ws, W100)) < 1e-8

    def test_matches_exponential_rate(self):
        w = W100
        r1 = resonances(w, 4.0)[0]
        t = r1.tau
        ws = evolve_rotated(box_mode(1), t, well_grid(w, 1025), w).total
        expect = -r1.gamma * math.exp(-1.0)
        assert flux_derivative(ws, w) == pytest.approx(expect, rel=0.03)

    def test_integrates_back_to_norm_loss(self):
        w = W100
        t1 = tau1(w)
        ts = np.linspace(t1, 2.0 * t1, 9)
        grid = well_grid(w, 1025)
        flux = [flux_derivative(evolve_rotated(box_mode(1), t, grid, w).total,
                                w) for t in ts]
        total = float(np.trapezoid(flux, ts))
        curve = nonescape_curve(box_mode(1), np.array([t1, 2.0 * t1]), w)
        dP = curve.P[1] - curve.P[0]
        assert total == pytest.approx(dP, rel=0.01)

    def test_zero_state_gives_zero(self):
        grid = well_grid(W10, 1025)
        ws = WaveState(x=grid, psi=np.zeros_like(grid, dtype=complex),
                       t=1.0, method="rotated")
        assert flux_derivative(ws, W10) == 0.0

    def test_coarse_grid_rejected(self):
        grid = well_grid(W10, 65)
        ws = evolve_direct(box_mode(1), 0.0, grid, W10)
        with pytest.raises(GridTooCoarse):
            flux_derivative(ws, W10)


class TestSyntheticFits:
    def _curve(self, times, P):
        return DecayCurve(times=times, P=P,
                          methods=("synthetic",) * times.size, w=W10,
                          profile=box_mode(1))

    def test_exponential_fit_exact(self):
        t = np.linspace(1.0, 50.0, 20)
        curve = self._curve(t, 0.9 * np.exp(-0.01 * t))
        rate, c, resid = fit_exponential(curve, (1.0, 50.0))
        assert rate == pytest.approx(0.01, rel=1e-10)
        assert c == pytest.approx(0.9, rel=1e-10)
        assert resid < 1e-12

    def test_tail_fit_exact(self):
        t = np.geomspace(100.0, 1000.0, 20)
        curve = self._curve(t, t ** -3)
        s, resid = fit_tail_exponent(curve, (100.0, 1000.0), crossover=50.0)
        assert s == pytest.approx(-3.0, abs=1e-12)
        assert resid < 1e-12

    def test_window_too_small(self):
        t = np.linspace(1.0, 50.0, 20)
        curve = self._curve(t, 0.9 * np.exp(-0.01 * t))
        with pytest.raises(WindowTooSmall):
            fit_exponential(curve, (1.0, 2.0))

    def test_window_before_crossover(self):
        t = np.geomspace(100.0, 1000.0, 20)
        curve = self._curve(t, t ** -3)
        with pytest.raises(WindowBeforeCrossover):
            fit_tail_exponent(curve, (100.0, 1000.0), crossover=500.0)


class TestPhysicalFits:
    def test_second_mode_decays_eight_times_faster(self):
        w = W100
        rs = resonances(w, 8.0)
        times = np.linspace(0.2, 1.0, 10) * rs[1].tau * 5.0
        c2 = nonescape_curve(box_mode(2), times, w)
        rate, _, _ = fit_exponential(c2, (times[0], times[-1]))
        assert rate == pytest.approx(rs[1].gamma, rel=0.02)
        assert rs[1].gamma / rs[0].gamma == pytest.approx(8.0, rel=0.05)

    def test_memory_loss_of_initial_profile(self):
        # after a couple of lifetimes the decay rate no longer depends on
        # the initial state, only on the longest-lived resonance
        w = W100
        t1 = tau1(w)
        times = np.linspace(2.0 * t1, 5.0 * t1, 12)
        rates = []
        for p in (box_mode(1), truncated_gaussian(0.5, 0.08)):
            c = nonescape_curve(p, times, w)
            rate, _, _ = fit_exponential(c, (times[0], times[-1]))
            rates.append(rate)
        assert rates[0] == pytest.approx(rates[1], rel=0.02)


class TestRegimeReport:
    def test_lambda100(self):
        rep = regime_report(box_mode(1), W100)
        assert rep.gamma_fit == pytest.approx(rep.gamma1_exact, rel=0.02)
        assert rep.c_fit == pytest.approx(1.0, rel=0.05)
        assert rep.s_fit == pytest.approx(-3.0, abs=0.15)
        assert rep.t_star_measured > 10.0 * rep.tau1
        d = rep.as_dict()
        assert d["gamma_fit"] == rep.gamma_fit
        assert "t_star_measured" in d

    def test_requires_metastable(self):
        with pytest.raises(ValueError):
            regime_report(box_mode(1), WellParameters(lam=3.0))
