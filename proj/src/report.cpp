#include "clipscale/report.hpp"

#include <cmath>
#include <sstream>

#include "clipscale/error.hpp"
#include "clipscale/text.hpp"
#include "json.hpp"

namespace clipscale {

using ojson = nlohmann::ordered_json;

FitReport fit_family(std::span<const ExperimentRecord> records, const std::string& task, Family family,
                     const ArchRegistry& registry, const FitOptions& options,
                     std::span<const PredictionTarget> targets) {
    FitReport report;
    report.task = task;
    report.family = family;
    report.points = to_points(records, task, family, registry, options.convention);
    if (report.points.empty())
        throw DegeneracyError("no points for task '" + task + "' and family '" +
                              std::string(to_string(family)) + "'");

    report.bins = BinSpec::spanning(report.points, options.num_bins);
    if (options.lo) report.bins.lo = *options.lo;
    if (options.hi) report.bins.hi = *options.hi;
    report.bins.validate();

    auto bins = bin_compute(report.points, report.bins);
    report.frontier = pareto_frontier(bins);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const auto& b = bins[i];
        report.bin_summaries.push_back(
            {b.index, report.bins.edge(b.index), report.bins.edge(b.index + 1), b.points.size(), report.frontier[i]});
    }
    report.fit = fit_power_law(report.frontier);
    for (const auto& t : targets) report.predictions.push_back(predict_target(report.fit, t, registry));
    return report;
}

ReportPrediction predict_target(const PowerLawFit& fit, const PredictionTarget& target,
                                const ArchRegistry& registry) {
    if (target.samples_seen == 0) throw RangeError("prediction target: samples_seen must be positive");
    double compute = registry.at(target.arch).gmacs_per_sample * static_cast<double>(target.samples_seen);
    return {target.arch, target.samples_seen, predict_error(fit, compute)};
}

std::vector<PredictionTarget> extrapolation_grid() {
    std::vector<PredictionTarget> out;
    for (std::uint64_t samples : {3'000'000'000ULL, 13'000'000'000ULL, 34'000'000'000ULL, 68'000'000'000ULL})
        for (const char* arch : {"ViT-H/14", "ViT-g/14", "ViT-G/14"}) out.push_back({arch, samples});
    return out;
}

namespace {

ojson prediction_object(const ReportPrediction& p) {
    ojson o;
    o["arch"] = p.arch;
    o["samples_seen"] = p.samples_seen;
    o["compute_gmac"] = p.prediction.compute_gmac;
    o["metric"] = p.prediction.predicted_metric;
    o["extrapolated"] = p.prediction.extrapolated;
    return o;
}

}  // namespace

std::string fit_report_json(const FitReport& report) {
    ojson o;
    o["task"] = report.task;
    o["family"] = std::string(to_string(report.family));
    o["alpha"] = report.fit.alpha;
    o["beta"] = report.fit.beta;
    o["r_squared"] = report.fit.r_squared;
    o["n_points"] = report.fit.n_points;
    o["fit_domain"] = ojson::array({report.fit.domain_lo, report.fit.domain_hi});
    auto bins = ojson::array();
    for (const auto& b : report.bin_summaries) {
        ojson bo;
        bo["index"] = b.index;
        bo["lo_log10"] = b.lo_log10;
        bo["hi_log10"] = b.hi_log10;
        bo["n_points"] = b.n_points;
        bo["best_compute_gmac"] = b.best.compute_gmac;
        bo["best_error"] = b.best.error_percent;
        bins.push_back(std::move(bo));
    }
    o["bins"] = std::move(bins);
    auto preds = ojson::array();
    for (const auto& p : report.predictions) preds.push_back(prediction_object(p));
    o["predictions"] = std::move(preds);
    return o.dump(2) + "\n";
}

FitReport parse_fit_report(std::string_view json_text) {
    ojson doc;
    try {
        doc = ojson::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("fit report: ") + e.what());
    }
    FitReport r;
    try {
        r.task = doc.at("task").get<std::string>();
        r.family = parse_family(doc.at("family").get<std::string>());
        r.fit.alpha = doc.at("alpha").get<double>();
        r.fit.beta = doc.at("beta").get<double>();
        r.fit.r_squared = doc.at("r_squared").get<double>();
        r.fit.n_points = doc.at("n_points").get<std::size_t>();
        const auto& dom = doc.at("fit_domain");
        if (!dom.is_array() || dom.size() != 2) throw ParseError("fit report: fit_domain must be [lo, hi]");
        r.fit.domain_lo = dom[0].get<double>();
        r.fit.domain_hi = dom[1].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fit report: ") + e.what());
    }
    if (!(r.fit.beta > 0.0) || !std::isfinite(r.fit.alpha))
        throw ParseError("fit report: beta must be positive and alpha finite");
    if (!(r.fit.domain_lo > 0.0 && r.fit.domain_lo <= r.fit.domain_hi))
        throw ParseError("fit report: fit_domain must be positive and ordered");
    return r;
}

std::string prediction_json(const ReportPrediction& p) { return prediction_object(p).dump(2) + "\n"; }

std::string plot_data_csv(const FitReport& report, int curve_samples) {
    if (curve_samples < 2) throw RangeError("plot data: need at least 2 curve samples");
    std::ostringstream out;
    out << "log10_compute,error,is_frontier,fitted_error\n";
    auto on_frontier = [&](const ComputePoint& p) {
        for (const auto& f : report.frontier)
            if (f.source_record == p.source_record) return true;
        return false;
    };
    for (const auto& p : report.points) {
        out << text::format_double(std::log10(p.compute_gmac)) << ',' << text::format_double(p.error_percent) << ','
            << (on_frontier(p) ? 1 : 0) << ',' << text::format_double(report.fit.error_at(p.compute_gmac)) << '\n';
    }
    const double lo = std::log10(report.fit.domain_lo);
    const double hi = std::log10(report.fit.domain_hi);
    for (int i = 0; i < curve_samples; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(curve_samples - 1);
        out << text::format_double(x) << ",,0," << text::format_double(report.fit.error_at(std::pow(10.0, x)))
            << '\n';
    }
    return out.str();
}

}  // namespace clipscale
