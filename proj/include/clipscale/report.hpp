#pragma once

// End-to-end scaling analysis over a record set: select one (task, family),
// pool all its points, bin, take the frontier, fit, and extrapolate.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clipscale/records.hpp"
#include "clipscale/scaling.hpp"

namespace clipscale {

struct PredictionTarget {
    std::string arch;
    std::uint64_t samples_seen = 0;
};

struct ReportPrediction {
    std::string arch;
    std::uint64_t samples_seen = 0;
    Prediction prediction;
};

struct BinSummary {
    int index = 0;
    double lo_log10 = 0.0;
    double hi_log10 = 0.0;
    std::size_t n_points = 0;
    ComputePoint best;
};

struct FitReport {
    std::string task;
    Family family = Family::OpenClipLaion;
    PowerLawFit fit;
    BinSpec bins;
    std::vector<BinSummary> bin_summaries;
    std::vector<ComputePoint> points;    // every selected point, input order
    std::vector<ComputePoint> frontier;  // ascending bin order
    std::vector<ReportPrediction> predictions;
};

struct FitOptions {
    int num_bins = BinSpec::kDefaultBins;
    // Explicit log10 bounds; derived from the data range when absent.
    std::optional<double> lo;
    std::optional<double> hi;
    ErrorConvention convention = ErrorConvention::Complement;
};

// Throws DegeneracyError("no points ...") when the selection is empty.
FitReport fit_family(std::span<const ExperimentRecord> records, const std::string& task, Family family,
                     const ArchRegistry& registry, const FitOptions& options = {},
                     std::span<const PredictionTarget> targets = {});

ReportPrediction predict_target(const PowerLawFit& fit, const PredictionTarget& target,
                                const ArchRegistry& registry);

// Extrapolation grid: H/14, g/14, G/14 at 3B, 13B, 34B, 68B.
std::vector<PredictionTarget> extrapolation_grid();

// JSON with the fixed key order
// {task, family, alpha, beta, r_squared, n_points, fit_domain, bins, predictions}.
std::string fit_report_json(const FitReport& report);

// Reads back what fit_report_json wrote (task, family, fit parameters and domain).
FitReport parse_fit_report(std::string_view json_text);

std::string prediction_json(const ReportPrediction& p);

// CSV "log10_compute,error,is_frontier,fitted_error": one row per selected
// point (input order), then `curve_samples` rows sampling the fitted curve
// evenly in log10 compute across the fit domain with an empty error field.
std::string plot_data_csv(const FitReport& report, int curve_samples = 64);

}  // namespace clipscale
