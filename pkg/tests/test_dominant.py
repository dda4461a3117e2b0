import json
import math

import numpy as np
import pytest
from scipy import stats

from mmwcov.dominant import (
    _corrected_gain_ratio_pdf_g2space,
    _rejected_variant_gain_ratio_pdf_p2,
    build_discrepancy_report,
    coverage_dom_p2,
    coverage_dom_p3,
    distance_ratio_ccdf_p3,
    distance_ratio_pdf_p3,
    gain_fade_ratio_ccdf_p3,
    gain_fade_ratio_pdf_p3,
    gain_ratio_ccdf_p2,
    gain_ratio_pdf_p2,
    lemma_bracket_constant,
    mainlobe_pair_probability,
    pathloss_fade_ratio_ccdf_p2,
    pathloss_fade_ratio_pdf_p2,
    uniform_mainlobe_gain_cdf,
    uniform_mainlobe_gain_pdf,
)
from mmwcov.montecarlo import SimPlan, sample_statistic
from mmwcov.numerics import QuadratureSpec, integrate_1d
from mmwcov.radio import gain_approx
from conftest import ks_distance


def _stat(params, statistic, n=200_000, seed=99):
    plan = SimPlan(params=params, policy="P3", thresholds_db=(0.0,),
                   n_trials=n, master_seed=seed)
    return sample_statistic(plan, statistic, n_workers=4)


class TestMainlobePairProbability:
    def test_closed_form_value(self, params):
        a = params.density * params.r_los**2 * params.antenna.phi_a
        expected = 1.0 - math.exp(-a) - a * math.exp(-a)
        assert mainlobe_pair_probability(params) == pytest.approx(expected, rel=1e-12)

    def test_matches_acceptance_rate(self, params):
        _, acc = _stat(params, "G_ratio_p2")
        # sampled acceptance also includes the (tiny) at-least-two-points event
        p2 = 1.0 - math.exp(-params.mean_count) - params.mean_count * math.exp(-params.mean_count)
        assert acc == pytest.approx(mainlobe_pair_probability(params) * p2, abs=0.002)


class TestGainRatioLawP2:
    def test_support(self, params):
        cfg = params.antenna
        assert gain_ratio_pdf_p2(0.5, params) == 0.0
        assert gain_ratio_pdf_p2(cfg.g_max / cfg.g_s * 1.01, params) == 0.0
        assert gain_ratio_pdf_p2(cfg.g_max / cfg.g_s * 0.999, params) < 1e-5

    def test_unit_mass(self, params):
        cfg = params.antenna
        mass = integrate_1d(lambda g: gain_ratio_pdf_p2(g, params),
                            1.0, cfg.g_max / cfg.g_s,
                            QuadratureSpec(rel_tol=1e-6, abs_tol=1e-9, max_subdivisions=20_000))
        assert mass == pytest.approx(1.0, abs=1e-4)

    def test_ccdf_boundary_values(self, params):
        cfg = params.antenna
        assert gain_ratio_ccdf_p2(1.0, params) == pytest.approx(1.0, abs=1e-9)
        assert gain_ratio_ccdf_p2(cfg.g_max / cfg.g_s, params) == pytest.approx(0.0, abs=1e-12)

    def test_angle_and_gain_space_routes_agree(self, params):
        # gain-space route clips a ~1e-6 sliver at its endpoint divergence
        for g in (1.5, 4.0, 30.0, 300.0):
            assert gain_ratio_pdf_p2(g, params) == pytest.approx(
                _corrected_gain_ratio_pdf_g2space(g, params), rel=1e-5)

    def test_ks_against_simulation(self, params):
        samples, _ = _stat(params, "G_ratio_p2")
        samples = np.sort(samples)
        cdf = 1.0 - gain_ratio_ccdf_p2(samples, params)
        assert ks_distance(samples, cdf) < 0.006

    def test_rejected_variant_fails_normalization(self, params):
        cfg = params.antenna
        mass = integrate_1d(
            np.vectorize(lambda g: _rejected_variant_gain_ratio_pdf_p2(float(g), params)),
            1.0, cfg.g_max / cfg.g_s,
            QuadratureSpec(rel_tol=1e-3, abs_tol=1e-6, max_subdivisions=20_000))
        assert abs(mass - 1.0) > 0.5


class TestPathlossFadeRatioLawP2:
    def test_unit_mass(self, params):
        mass = integrate_1d(
            np.vectorize(lambda w: pathloss_fade_ratio_pdf_p2(float(w), params)),
            0.0, math.inf, QuadratureSpec(rel_tol=1e-6, abs_tol=1e-9, max_subdivisions=20_000))
        assert mass == pytest.approx(1.0, abs=1e-4)

    def test_component_against_direct_convolution(self, params):
        # marginal of fade * distance**-alpha, cross-checked at five points
        ch = params.channel
        r_l, alpha, m = params.r_los, ch.alpha_l, ch.m_s

        def direct(w):
            def integrand(y):
                f_y = np.where(y >= r_l ** (-alpha),
                               2.0 * y ** (-(alpha + 2.0) / alpha) / (alpha * r_l**2), 0.0)
                h = w / y
                f_h = m**m * h ** (m - 1) * np.exp(-m * h) / math.gamma(m)
                return f_y * f_h / y

            return integrate_1d(integrand, r_l ** (-alpha), math.inf)

        from mmwcov.dominant import _special
        for w in (1e-4, 1e-3, 5e-3, 0.05, 0.5):
            a = 2.0 / alpha + m
            component = (2.0 * m ** (-2.0 / alpha) * w ** (-2.0 / alpha - 1.0)
                         * _special.gammainc(a, m * w * r_l**alpha) * math.gamma(a)
                         / (alpha * r_l**2 * math.gamma(m)))
            assert component == pytest.approx(direct(w), rel=1e-7)

    def test_ccdf_consistent_with_pdf(self, params):
        for t in (5e-4, 5e-3, 0.05):
            tail = integrate_1d(
                np.vectorize(lambda w: pathloss_fade_ratio_pdf_p2(float(w), params)),
                t, math.inf, QuadratureSpec(rel_tol=1e-6, abs_tol=1e-10, max_subdivisions=20_000))
            assert pathloss_fade_ratio_ccdf_p2(t, params) == pytest.approx(tail, rel=1e-4)

    def test_median_is_one_for_equal_shapes(self, params):
        # W is a ratio of i.i.d. variables when m_s == m_x
        assert pathloss_fade_ratio_ccdf_p2(1.0, params) == pytest.approx(0.5, abs=1e-9)

    def test_ks_against_model_draws(self, params):
        samples, _ = _stat(params, "W_ratio_p2")
        samples = np.sort(samples)
        grid_cdf = 1.0 - pathloss_fade_ratio_ccdf_p2(
            samples[:: max(1, samples.size // 512)], params)
        sub = samples[:: max(1, samples.size // 512)]
        emp = np.searchsorted(samples, sub, side="right") / samples.size
        assert np.max(np.abs(emp - (1.0 - pathloss_fade_ratio_ccdf_p2(sub, params)))) < 0.006


class TestCoverageDomP2:
    def test_certain_at_zero(self, params):
        assert coverage_dom_p2(0.0, params) == 1.0

    def test_monotone(self, params):
        vals = [coverage_dom_p2(10.0 ** (g / 10.0), params) for g in (-5.0, 0.0, 5.0)]
        assert vals[0] >= vals[1] >= vals[2]

    def test_matches_simulation(self, params):
        samples, _ = _stat(params, "SIR_dom_p2")
        for g_db in (-5.0, 0.0, 5.0):
            gamma = 10.0 ** (g_db / 10.0)
            mc = (samples > gamma).mean()
            se = math.sqrt(mc * (1.0 - mc) / samples.size)
            assert coverage_dom_p2(gamma, params) == pytest.approx(mc, abs=0.015 + 3.0 * se)


class TestUniformMainlobeGainLaw:
    def test_unit_mass(self, params):
        cfg = params.antenna
        mass = integrate_1d(lambda g: uniform_mainlobe_gain_pdf(g, params),
                            cfg.g_s, cfg.g_max * (1.0 - 1e-14),
                            QuadratureSpec(rel_tol=1e-9, abs_tol=1e-13, max_subdivisions=20_000))
        # closed-form remainder of the clipped sliver at the divergence
        assert mass == pytest.approx(1.0, abs=1e-6)

    def test_cdf_quadrature_consistency(self, params):
        cfg = params.antenna
        for g in (0.5 * (cfg.g_s + cfg.g_max), 0.9 * cfg.g_max):
            mass = integrate_1d(lambda x: uniform_mainlobe_gain_pdf(x, params), cfg.g_s, g)
            assert uniform_mainlobe_gain_cdf(g, params) == pytest.approx(mass, abs=1e-8)

    def test_ks_against_uniform_offset_draws(self, params, rng):
        cfg = params.antenna
        phi = rng.uniform(0.0, cfg.phi_a, 200_000)
        g = np.sort(gain_approx(phi, cfg))
        assert ks_distance(g, uniform_mainlobe_gain_cdf(g, params)) < 0.006


class TestGainFadeRatioLawP3:
    def test_unit_mass(self, params):
        mass = integrate_1d(lambda g: gain_fade_ratio_pdf_p3(g, params), 0.0, math.inf,
                            QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12))
        assert mass == pytest.approx(1.0, abs=1e-6)

    def test_ccdf_pdf_consistency(self, params):
        for g in (0.5, 2.0, 20.0):
            tail = integrate_1d(lambda x: gain_fade_ratio_pdf_p3(x, params), g, math.inf,
                                QuadratureSpec(rel_tol=1e-9, abs_tol=1e-13))
            assert gain_fade_ratio_ccdf_p3(g, params) == pytest.approx(tail, rel=1e-6)

    def test_ks_against_simulation(self, params):
        samples, _ = _stat(params, "G_p3")
        samples = np.sort(samples)
        cdf = 1.0 - gain_fade_ratio_ccdf_p3(samples, params)
        assert ks_distance(samples, cdf) < 0.006


class TestDistanceRatioLawP3:
    def test_support(self, params):
        assert distance_ratio_pdf_p3(0.99, params) == 0.0
        assert distance_ratio_pdf_p3(1.0, params) == pytest.approx(1.0)  # 2/alpha at w=1

    def test_unit_mass_corrected(self, params):
        mass = integrate_1d(lambda w: distance_ratio_pdf_p3(w, params), 1.0, math.inf)
        assert mass == pytest.approx(1.0, rel=1e-8)

    def test_rejected_constant_reported(self, params):
        bracket = lemma_bracket_constant(params)
        assert abs(bracket / 2.0 - 1.0) > 1.0   # wildly off unit mass
        mass = integrate_1d(lambda w: distance_ratio_pdf_p3(w, params, form="bracket"),
                            1.0, math.inf)
        assert mass == pytest.approx(bracket / 2.0, rel=1e-8)

    def test_ks_against_simulation(self, params):
        samples, _ = _stat(params, "W_p3")
        samples = np.sort(samples)
        cdf = 1.0 - distance_ratio_ccdf_p3(samples, params)
        assert ks_distance(samples, cdf) < 0.006

    def test_log_log_slope(self, params):
        # density ~ w**-2 for the square-law pathloss exponent
        samples, _ = _stat(params, "W_p3", n=400_000)
        edges = np.logspace(0.0, np.log10(50.0), 40)
        hist, _ = np.histogram(samples, bins=edges, density=True)
        mids = np.sqrt(edges[:-1] * edges[1:])
        keep = hist > 0
        slope = stats.linregress(np.log(mids[keep]), np.log(hist[keep])).slope
        assert slope == pytest.approx(-2.0, abs=0.02)


class TestCoverageDomP3:
    def test_certain_at_zero(self, params):
        assert coverage_dom_p3(0.0, params) == 1.0

    def test_matches_simulation(self, params):
        samples, _ = _stat(params, "SIR_dom_p3")
        for g_db in (-5.0, 0.0, 5.0):
            gamma = 10.0 ** (g_db / 10.0)
            mc = (samples > gamma).mean()
            se = math.sqrt(mc * (1.0 - mc) / samples.size)
            assert coverage_dom_p3(gamma, params) == pytest.approx(mc, abs=0.015 + 3.0 * se)

    def test_rejected_pairing_is_degenerate_below_one(self, params):
        assert coverage_dom_p3(0.5, params, pairing="self") == 1.0
        assert coverage_dom_p3(0.5, params, pairing="product") < 0.99


class TestDiscrepancyReport:
    def test_structure_and_verdicts(self, params):
        report = build_discrepancy_report(params, seed=5, n_trials=30_000,
                                          include_regions=False)
        ids = {entry["id"] for entry in report}
        assert ids == {"p2-gain-ratio-density", "p3-distance-ratio-constant",
                       "p3-dominant-sir-pairing"}
        json.dumps(report)   # machine readable
        by_id = {e["id"]: e for e in report}
        gain = by_id["p2-gain-ratio-density"]["evidence"]
        assert abs(gain["implemented_mass"] - 1.0) < 0.01
        assert abs(gain["rejected_mass"] - 1.0) > 0.5
        assert gain["ks_implemented_vs_mc"] < 0.02
        dist = by_id["p3-distance-ratio-constant"]["evidence"]
        assert abs(dist["rejected_total_mass"] - 1.0) > 1.0
        pair = by_id["p3-dominant-sir-pairing"]["evidence"]["coverage"]["+0dB"]
        assert abs(pair["product_pairing"] - pair["mc"]) < 0.02
        assert pair["self_pairing"] == 1.0
