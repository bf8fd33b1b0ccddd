#include "clipscale/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "clipscale/error.hpp"
#include "clipscale/text.hpp"

namespace clipscale {

namespace {

std::string describe(const ComputePoint& p) {
    return "(C=" + text::format_double(p.compute_gmac) + ", E=" + text::format_double(p.error_percent) +
           ", record " + std::to_string(p.source_record) + ")";
}

}  // namespace

BinSpec BinSpec::spanning(std::span<const ComputePoint> points, int num_bins) {
    if (points.empty()) throw DegeneracyError("cannot derive bins from zero points");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : points) {
        if (!(p.compute_gmac > 0.0)) throw DomainError("non-positive compute at point " + describe(p));
        double x = std::log10(p.compute_gmac);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    BinSpec spec{num_bins, lo, hi};
    spec.validate();
    return spec;
}

void BinSpec::validate() const {
    if (num_bins < 1) throw RangeError("bin count must be at least 1");
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw RangeError("bin bounds must satisfy lo < hi");
}

double BinSpec::edge(int k) const {
    if (k >= num_bins) return hi;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(num_bins);
}

int BinSpec::index_of(double x) const {
    if (!(x >= lo && x <= hi))
        throw RangeError("log10 compute " + text::format_double(x) + " outside [" + text::format_double(lo) +
                         ", " + text::format_double(hi) + "]");
    int idx = static_cast<int>(std::floor((x - lo) / width()));
    idx = std::clamp(idx, 0, num_bins - 1);
    // The division can land one bin off near an edge; settle against the
    // edges themselves.
    while (idx > 0 && x < edge(idx)) --idx;
    while (idx < num_bins - 1 && x >= edge(idx + 1)) ++idx;
    return idx;
}

std::vector<Bin> bin_compute(std::span<const ComputePoint> points, const BinSpec& spec) {
    spec.validate();
    std::map<int, std::vector<ComputePoint>> bins;
    for (const auto& p : points) {
        if (!(p.compute_gmac > 0.0)) throw DomainError("non-positive compute at point " + describe(p));
        int idx = 0;
        try {
            idx = spec.index_of(std::log10(p.compute_gmac));
        } catch (const RangeError& e) {
            throw RangeError(std::string("point ") + describe(p) + ": " + e.what());
        }
        bins[idx].push_back(p);
    }
    std::vector<Bin> out;
    out.reserve(bins.size());
    for (auto& [idx, pts] : bins) out.push_back({idx, std::move(pts)});
    return out;
}

std::vector<ComputePoint> pareto_frontier(std::span<const Bin> bins) {
    std::vector<ComputePoint> out;
    for (const auto& bin : bins) {
        if (bin.points.empty()) continue;
        const ComputePoint* best = &bin.points.front();
        for (const auto& p : bin.points) {
            if (p.error_percent < best->error_percent ||
                (p.error_percent == best->error_percent && p.compute_gmac < best->compute_gmac))
                best = &p;
        }
        out.push_back(*best);
    }
    if (out.empty()) throw DegeneracyError("pareto_frontier: no non-empty bin");
    return out;
}

double PowerLawFit::error_at(double compute_gmac) const { return beta * std::pow(compute_gmac, alpha); }

PowerLawFit fit_power_law(std::span<const ComputePoint> points) {
    std::set<double> distinct;
    for (const auto& p : points) {
        if (!(p.compute_gmac > 0.0)) throw DomainError("fit_power_law: non-positive compute at " + describe(p));
        if (!(p.error_percent > 0.0))
            throw DomainError("fit_power_law: error must be positive for a log fit, got " + describe(p));
        distinct.insert(p.compute_gmac);
    }
    if (distinct.size() < 2)
        throw DegeneracyError("fit_power_law: need at least 2 distinct computes, got " +
                              std::to_string(distinct.size()));

    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += std::log10(p.compute_gmac);
        my += std::log10(p.error_percent);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        double dx = std::log10(p.compute_gmac) - mx;
        double dy = std::log10(p.error_percent) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }

    PowerLawFit fit;
    fit.alpha = sxy / sxx;
    const double intercept = my - fit.alpha * mx;
    fit.beta = std::pow(10.0, intercept);
    fit.n_points = points.size();
    fit.domain_lo = *distinct.begin();
    fit.domain_hi = *distinct.rbegin();

    double ss_res = 0.0;
    for (const auto& p : points) {
        double r = std::log10(p.error_percent) - (intercept + fit.alpha * std::log10(p.compute_gmac));
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

std::vector<double> log_residuals(const PowerLawFit& fit, std::span<const ComputePoint> points) {
    const double intercept = std::log10(fit.beta);
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points)
        out.push_back(std::log10(p.error_percent) - (intercept + fit.alpha * std::log10(p.compute_gmac)));
    return out;
}

Prediction predict_error(const PowerLawFit& fit, double compute_gmac) {
    if (!(compute_gmac > 0.0) || !std::isfinite(compute_gmac))
        throw DomainError("predict_error: compute must be positive, got " + text::format_double(compute_gmac));
    Prediction p;
    p.compute_gmac = compute_gmac;
    p.predicted_error = fit.error_at(compute_gmac);
    p.predicted_metric = 100.0 - p.predicted_error;
    p.extrapolated = compute_gmac < fit.domain_lo || compute_gmac > fit.domain_hi;
    return p;
}

std::vector<Efficiency> scaling_efficiency(std::span<const ThroughputSample> samples,
                                           std::optional<int> baseline_gpus) {
    if (samples.empty()) throw DegeneracyError("scaling_efficiency: no samples");
    std::set<int> seen;
    for (const auto& s : samples) {
        if (s.n_gpus < 1) throw RangeError("scaling_efficiency: n_gpus must be >= 1");
        if (!(s.throughput > 0.0) || !std::isfinite(s.throughput))
            throw RangeError("scaling_efficiency: throughput must be positive at N=" + std::to_string(s.n_gpus));
        if (!seen.insert(s.n_gpus).second)
            throw DegeneracyError("scaling_efficiency: duplicate sample for N=" + std::to_string(s.n_gpus));
    }
    const int base = baseline_gpus.value_or(*seen.begin());
    auto it = std::find_if(samples.begin(), samples.end(), [&](const auto& s) { return s.n_gpus == base; });
    if (it == samples.end())
        throw LookupError("scaling_efficiency: missing baseline sample for N=" + std::to_string(base));
    const double base_throughput = it->throughput;

    std::vector<Efficiency> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        double units = static_cast<double>(s.n_gpus) / static_cast<double>(base);
        out.push_back({s.n_gpus, 100.0 * s.throughput / (units * base_throughput)});
    }
    return out;
}

}  // namespace clipscale
