#pragma once

// Experiment records, the architecture registry, and compute accounting.
//
// Records hold metrics in percent exactly as transcribed from result tables.
// Total compute is forward-pass GMACs per sample times samples seen; no
// backward-pass multiplier is applied (a constant factor only rescales the
// fitted coefficient, never the exponent).

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clipscale {

enum class Family { OpenClipLaion, ClipWit };

std::string_view to_string(Family f);
Family parse_family(std::string_view s);  // throws ParseError

enum class Format { Csv, Json };

Format parse_format(std::string_view s);
// Picks Json for a ".json" suffix, Csv otherwise.
Format format_from_path(std::string_view path);

struct ArchSpec {
    std::string name;
    int image_width = 0;
    int text_width = 0;
    int embed_dim = 0;
    int image_depth = 0;
    int text_depth = 0;
    double params_millions = 0.0;
    double gmacs_per_sample = 0.0;
};

class ArchRegistry {
public:
    ArchRegistry() = default;
    explicit ArchRegistry(std::vector<ArchSpec> specs);

    // Throws RangeError on non-positive fields, ParseError on a repeated name.
    void add(ArchSpec spec);

    // Throws LookupError for unknown names.
    const ArchSpec& at(std::string_view name) const;
    bool contains(std::string_view name) const;
    std::size_t size() const { return specs_.size(); }
    const std::vector<ArchSpec>& specs() const { return specs_; }

private:
    std::vector<ArchSpec> specs_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

// The six ViT configurations with their per-sample forward GMACs.
ArchRegistry default_registry();

ArchRegistry parse_arch_registry(std::string_view csv_text);
std::string serialize_arch_registry(const ArchRegistry& registry);

struct ExperimentRecord {
    std::string arch;
    Family family = Family::OpenClipLaion;
    std::string pretrain_dataset;
    std::uint64_t samples_seen = 0;
    std::string task;
    double metric_percent = 0.0;

    friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

// CSV header: arch,family,pretrain_dataset,samples_seen,task,metric_percent.
// Lines starting with '#' are comments. JSON is an array of objects with the
// same keys. Errors name the line (CSV) or element index (JSON) and field.
std::vector<ExperimentRecord> parse_records(std::string_view text, Format format);
std::string serialize_records(std::span<const ExperimentRecord> records, Format format);

// Loads and concatenates several record files, checking key uniqueness across
// all of them.
std::vector<ExperimentRecord> load_records(std::span<const std::string> paths);

double total_compute(const ExperimentRecord& record, const ArchRegistry& registry);

// Unweighted mean of metric_percent over `tasks`. Every task must appear
// exactly once among `records`; records of other tasks are ignored.
double aggregate_mean(std::span<const ExperimentRecord> records,
                      std::span<const std::string> tasks);

struct ComputePoint {
    double compute_gmac = 0.0;   // C
    double error_percent = 0.0;  // E
    std::size_t source_record = 0;  // index into the record list given to to_points
};

enum class ErrorConvention {
    Complement,  // error = 100 - metric (accuracy and Recall@K alike)
    Identity,    // metric already is an error rate
};

std::vector<ComputePoint> to_points(std::span<const ExperimentRecord> records,
                                    std::string_view task, Family family,
                                    const ArchRegistry& registry,
                                    ErrorConvention convention = ErrorConvention::Complement);

}  // namespace clipscale
