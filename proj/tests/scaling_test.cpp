#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clipscale/error.hpp"
#include "clipscale/scaling.hpp"
#include "oracles.hpp"

using namespace clipscale;

namespace {

ComputePoint at_log(double log10c, double err, std::size_t id) { return {std::pow(10.0, log10c), err, id}; }

std::vector<ComputePoint> random_points(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> x(lo, hi), e(5.0, 60.0);
    std::vector<ComputePoint> pts;
    for (int i = 0; i < n; ++i) pts.push_back(at_log(x(rng), e(rng), static_cast<std::size_t>(i)));
    return pts;
}

}  // namespace

TEST(BinCompute, SinglePointSingleBin) {
    std::vector<ComputePoint> pts = {at_log(11.5, 30, 0)};
    auto bins = bin_compute(pts, BinSpec::spanning(pts, 1));
    ASSERT_EQ(bins.size(), 1u);
    EXPECT_EQ(bins[0].points.size(), 1u);
}

TEST(BinCompute, TwoBinsOnHandEdges) {
    std::vector<ComputePoint> pts = {at_log(11.0, 40, 0), at_log(11.4, 35, 1), at_log(12.9, 30, 2)};
    auto bins = bin_compute(pts, BinSpec{2, 11.0, 13.0});
    ASSERT_EQ(bins.size(), 2u);
    EXPECT_EQ(bins[0].index, 0);
    ASSERT_EQ(bins[0].points.size(), 2u);
    EXPECT_EQ(bins[0].points[0].source_record, 0u);
    EXPECT_EQ(bins[0].points[1].source_record, 1u);
    EXPECT_EQ(bins[1].points.size(), 1u);
}

TEST(BinCompute, UpperBoundGoesToLastBinAndOutsideThrows) {
    std::vector<ComputePoint> pts = {at_log(13.0, 10, 0)};
    auto bins = bin_compute(pts, BinSpec{4, 11.0, 13.0});
    ASSERT_EQ(bins.size(), 1u);
    EXPECT_EQ(bins[0].index, 3);
    std::vector<ComputePoint> out = {at_log(13.5, 10, 7)};
    try {
        bin_compute(out, BinSpec{4, 11.0, 13.0});
        FAIL();
    } catch (const RangeError& e) {
        EXPECT_NE(std::string(e.what()).find("record 7"), std::string::npos);
    }
    EXPECT_THROW(bin_compute(pts, BinSpec{0, 11.0, 13.0}), RangeError);
    EXPECT_THROW(bin_compute(pts, BinSpec{2, 13.0, 11.0}), RangeError);
}

TEST(BinCompute, MatchesEdgeComparisonOracle) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        auto pts = random_points(rng, 50, 10.0, 14.0);
        // Put some points exactly on interior edges.
        const int k = 1 + trial % 9;
        BinSpec spec = BinSpec::spanning(pts, k);
        for (int e = 1; e < k && e < 5; ++e) pts.push_back(at_log(spec.edge(e), 20, 100 + e));
        auto bins = bin_compute(pts, spec);
        for (const auto& b : bins)
            for (const auto& p : b.points)
                EXPECT_EQ(b.index, oracle::bin_by_edges(std::log10(p.compute_gmac), spec.lo, spec.hi, k));
    }
}

TEST(ParetoFrontier, MinimumPerBinWithTieBreaks) {
    std::vector<Bin> one = {{0, {at_log(11, 33.5, 0), at_log(11.1, 30.1, 1), at_log(11.2, 31.2, 2)}}};
    auto f = pareto_frontier(one);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].error_percent, 30.1);

    std::vector<Bin> tie = {{0, {{2e11, 25.0, 0}, {1e11, 25.0, 1}}}};
    EXPECT_EQ(pareto_frontier(tie)[0].compute_gmac, 1e11);

    std::vector<Bin> same = {{0, {{1e11, 25.0, 4}, {1e11, 25.0, 5}}}};
    EXPECT_EQ(pareto_frontier(same)[0].source_record, 4u);

    std::vector<Bin> empty;
    EXPECT_THROW(pareto_frontier(empty), DegeneracyError);
}

TEST(ParetoFrontier, MatchesExhaustiveScanAndIsSubset) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto pts = random_points(rng, 5 + trial % 40, 10.0, 13.0);
        // Coarse errors produce ties.
        for (auto& p : pts) p.error_percent = std::round(p.error_percent / 5.0) * 5.0;
        const int k = 1 + trial % 8;
        auto spec = BinSpec::spanning(pts, k);
        auto bins = bin_compute(pts, spec);
        auto frontier = pareto_frontier(bins);
        auto expected = oracle::frontier_by_scan(pts, spec.lo, spec.hi, k);
        ASSERT_EQ(frontier.size(), expected.size());
        ASSERT_EQ(frontier.size(), bins.size());
        for (std::size_t i = 0; i < frontier.size(); ++i) EXPECT_EQ(frontier[i].source_record, expected[i]);
    }
}

TEST(FitPowerLaw, ExactPowerLaw) {
    std::vector<ComputePoint> pts;
    for (double c : {1e2, 1e4, 1e6}) pts.push_back({c, 2.0 * std::pow(c, -0.5), 0});
    auto fit = fit_power_law(pts);
    EXPECT_NEAR(fit.alpha, -0.5, 1e-12);
    EXPECT_NEAR(fit.beta, 2.0, 1e-12);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    EXPECT_EQ(fit.n_points, 3u);
    EXPECT_EQ(fit.domain_lo, 1e2);
    EXPECT_EQ(fit.domain_hi, 1e6);
    for (const auto& p : pts) EXPECT_NEAR(predict_error(fit, p.compute_gmac).predicted_error, p.error_percent, 1e-12);
}

TEST(FitPowerLaw, OpenAiClipImageNet) {
    std::vector<ComputePoint> pts = {{7.40 * 13e9, 100 - 63.35, 0}, {20.57 * 13e9, 100 - 68.33, 1},
                                     {87.73 * 13e9, 100 - 75.54, 2}};
    EXPECT_NEAR(fit_power_law(pts).alpha, -0.16, 0.02);
}

TEST(FitPowerLaw, MatchesClosedFormOls) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ComputePoint> pts;
        std::vector<double> xs, ys;
        std::uniform_real_distribution<double> x(9.0, 14.0);
        for (int i = 0; i < 20; ++i) {
            double lx = x(rng);
            double err = 3000.0 * std::pow(10.0, -0.12 * lx + noise(rng));
            pts.push_back({std::pow(10.0, lx), err, static_cast<std::size_t>(i)});
            xs.push_back(std::log10(pts.back().compute_gmac));
            ys.push_back(std::log10(err));
        }
        auto fit = fit_power_law(pts);
        auto ref = oracle::closed_form_ols(xs, ys);
        EXPECT_NEAR(fit.alpha, ref.slope, 1e-10);
        EXPECT_NEAR(std::log10(fit.beta), ref.intercept, 1e-10);
        EXPECT_GE(fit.r_squared, 0.0);
        EXPECT_LE(fit.r_squared, 1.0);

        double sum = 0;
        for (double r : log_residuals(fit, pts)) sum += r;
        EXPECT_NEAR(sum, 0.0, 1e-9);
    }
}

TEST(FitPowerLaw, ScaleInvarianceOfAlpha) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        auto pts = random_points(rng, 12, 10.0, 13.0);
        auto base_spec = BinSpec::spanning(pts, 6);
        auto base_frontier = pareto_frontier(bin_compute(pts, base_spec));
        auto base = fit_power_law(base_frontier);
        for (double k : {3.0, 1e-3, 6.02}) {
            auto scaled = pts;
            for (auto& p : scaled) p.compute_gmac *= k;
            auto spec = BinSpec::spanning(scaled, 6);
            auto frontier = pareto_frontier(bin_compute(scaled, spec));
            ASSERT_EQ(frontier.size(), base_frontier.size());
            for (std::size_t i = 0; i < frontier.size(); ++i)
                EXPECT_EQ(frontier[i].source_record, base_frontier[i].source_record);
            auto fit = fit_power_law(frontier);
            EXPECT_NEAR(fit.alpha, base.alpha, 1e-10);
            EXPECT_NEAR(fit.beta / (base.beta * std::pow(k, -base.alpha)), 1.0, 1e-9);
        }
    }
}

TEST(FitPowerLaw, Errors) {
    std::vector<ComputePoint> one = {{1e10, 20, 0}};
    std::vector<ComputePoint> same = {{1e10, 20, 0}, {1e10, 25, 1}};
    std::vector<ComputePoint> zero = {{1e10, 20, 0}, {1e11, 0.0, 1}};
    EXPECT_THROW(fit_power_law(one), DegeneracyError);
    EXPECT_THROW(fit_power_law(same), DegeneracyError);
    EXPECT_THROW(fit_power_law(zero), DomainError);
}

TEST(PredictError, ArithmeticAndFlags) {
    PowerLawFit fit{-0.5, 2.0, 3, 1.0, 1.0, 100.0};
    auto p = predict_error(fit, 4.0);
    EXPECT_DOUBLE_EQ(p.predicted_error, 1.0);
    EXPECT_DOUBLE_EQ(p.predicted_metric, 99.0);
    EXPECT_FALSE(p.extrapolated);
    EXPECT_TRUE(predict_error(fit, 1000.0).extrapolated);
    EXPECT_TRUE(predict_error(fit, 0.5).extrapolated);
    EXPECT_THROW(predict_error(fit, 0.0), DomainError);
    EXPECT_THROW(predict_error(fit, -3.0), DomainError);
}

TEST(ScalingEfficiency, FormulaCases) {
    std::vector<ThroughputSample> perfect;
    for (int n : {1, 4, 16, 64, 256}) perfect.push_back({n, 1000.0 * n});
    for (const auto& e : scaling_efficiency(perfect)) EXPECT_DOUBLE_EQ(e.percent, 100.0);

    std::vector<ThroughputSample> s = {{1, 1000.0}, {256, 230400.0}};
    auto eff = scaling_efficiency(s);
    EXPECT_EQ(eff[0].percent, 100.0);
    EXPECT_EQ(eff[1].percent, 90.0);

    std::vector<ThroughputSample> nodes = {{4, 4000.0}, {8, 7200.0}};
    EXPECT_DOUBLE_EQ(scaling_efficiency(nodes)[1].percent, 90.0);
    EXPECT_THROW(scaling_efficiency(nodes, 1), LookupError);
}

TEST(ScalingEfficiency, InvariantToCommonRescale) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> t(100.0, 1e6);
    std::vector<ThroughputSample> s;
    for (int n : {4, 8, 32, 128, 1024}) s.push_back({n, t(rng)});
    auto base = scaling_efficiency(s);
    for (auto& x : s) x.throughput *= 3.7;
    auto scaled = scaling_efficiency(s);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(scaled[i].percent, base[i].percent, 1e-10);
}
