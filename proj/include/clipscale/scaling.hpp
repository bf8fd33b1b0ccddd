#pragma once

// Compute binning, Pareto frontier, log-log power-law fitting and
// extrapolation, plus the distributed-training efficiency metric.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "clipscale/records.hpp"

namespace clipscale {

// Equal-width bins over [lo, hi] in log10 GMAC; both ends inclusive.
struct BinSpec {
    int num_bins = 8;
    double lo = 0.0;
    double hi = 1.0;

    static constexpr int kDefaultBins = 8;

    // Spans the log10 range of `points`. A single distinct compute is padded
    // by half a decade on each side.
    static BinSpec spanning(std::span<const ComputePoint> points, int num_bins = kDefaultBins);

    void validate() const;
    double width() const { return (hi - lo) / num_bins; }
    // Left edge of bin k; edge(num_bins) == hi.
    double edge(int k) const;
    // Throws RangeError when x lies outside [lo, hi].
    int index_of(double log10_compute) const;
};

struct Bin {
    int index = 0;
    std::vector<ComputePoint> points;  // input order
};

// Non-empty bins in ascending index order.
std::vector<Bin> bin_compute(std::span<const ComputePoint> points, const BinSpec& spec);

// Minimum-error point of every non-empty bin; ties go to the smaller compute,
// then to the earlier input position. Throws DegeneracyError if all bins are
// empty.
std::vector<ComputePoint> pareto_frontier(std::span<const Bin> bins);

struct PowerLawFit {
    double alpha = 0.0;  // exponent
    double beta = 1.0;   // coefficient, E = beta * C^alpha
    std::size_t n_points = 0;
    double r_squared = 0.0;
    double domain_lo = 0.0;  // smallest fitted compute
    double domain_hi = 0.0;  // largest fitted compute

    double error_at(double compute_gmac) const;
};

// Ordinary least squares of log10 E on log10 C.
PowerLawFit fit_power_law(std::span<const ComputePoint> points);

// log10 E_i - (intercept + alpha log10 C_i) per point.
std::vector<double> log_residuals(const PowerLawFit& fit, std::span<const ComputePoint> points);

struct Prediction {
    double compute_gmac = 0.0;
    double predicted_error = 0.0;
    double predicted_metric = 0.0;
    bool extrapolated = false;
};

Prediction predict_error(const PowerLawFit& fit, double compute_gmac);

struct ThroughputSample {
    int n_gpus = 1;
    double throughput = 0.0;  // images per second
};

struct Efficiency {
    int n_gpus = 0;
    double percent = 0.0;
};

// E(N) = 100 * T(N) / ((N / b) * T(b)) for baseline unit b, which defaults
// to the smallest n_gpus present. With b = 1 this is 100 T(N) / (N T(1)).
std::vector<Efficiency> scaling_efficiency(std::span<const ThroughputSample> samples,
                                           std::optional<int> baseline_gpus = std::nullopt);

}  // namespace clipscale
