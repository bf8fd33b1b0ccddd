#include "clipscale/records.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "clipscale/error.hpp"
#include "clipscale/text.hpp"
#include "json.hpp"

namespace clipscale {

namespace {

constexpr std::string_view kRecordHeader =
    "arch,family,pretrain_dataset,samples_seen,task,metric_percent";
constexpr std::string_view kArchHeader =
    "name,image_width,text_width,embed_dim,image_depth,text_depth,params_millions,gmacs_per_sample";

constexpr std::array<std::string_view, 6> kRecordFields = {
    "arch", "family", "pretrain_dataset", "samples_seen", "task", "metric_percent"};

std::string where_line(std::size_t line, std::string_view field) {
    return "line " + std::to_string(line) + ", field '" + std::string(field) + "'";
}

std::string where_element(std::size_t idx, std::string_view field) {
    return "record " + std::to_string(idx) + ", field '" + std::string(field) + "'";
}

void check_identifier(std::string_view value, const std::string& where) {
    if (value.empty()) throw ParseError(where + ": empty value");
    if (value.find_first_of(",\n\r\"") != std::string_view::npos)
        throw ParseError(where + ": identifier contains a reserved character");
}

void check_record(const ExperimentRecord& r, const std::string& where_samples,
                  const std::string& where_metric) {
    if (r.samples_seen == 0) throw RangeError(where_samples + ": samples_seen must be positive");
    if (!(r.metric_percent >= 0.0 && r.metric_percent <= 100.0))
        throw RangeError(where_metric + ": metric_percent " + text::format_double(r.metric_percent) +
                         " outside [0, 100]");
}

using RecordKey = std::tuple<std::string, std::string, std::uint64_t, std::string>;

RecordKey key_of(const ExperimentRecord& r) {
    return {r.arch, r.pretrain_dataset, r.samples_seen, r.task};
}

// `labels[i]` names the source position of records[i] for error messages.
void check_unique(std::span<const ExperimentRecord> records, const std::vector<std::string>& labels) {
    std::map<RecordKey, std::size_t> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] = seen.emplace(key_of(records[i]), i);
        if (!inserted) {
            const auto& r = records[i];
            throw ParseError("duplicate record (" + r.arch + ", " + r.pretrain_dataset + ", " +
                             std::to_string(r.samples_seen) + ", " + r.task + ") at " +
                             labels[it->second] + " and " + labels[i]);
        }
    }
}

std::vector<ExperimentRecord> parse_csv(std::string_view text, std::vector<std::string>& labels) {
    auto lines = text::data_lines(text);
    std::vector<ExperimentRecord> out;
    if (lines.empty()) throw ParseError("records CSV: missing header");
    auto header = text::split(lines.front().content, ',');
    if (header.size() != kRecordFields.size() ||
        !std::equal(header.begin(), header.end(), kRecordFields.begin()))
        throw ParseError("records CSV line " + std::to_string(lines.front().number) +
                         ": expected header '" + std::string(kRecordHeader) + "'");

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto& line = lines[li];
        auto fields = text::split(line.content, ',');
        if (fields.size() != kRecordFields.size())
            throw ParseError("line " + std::to_string(line.number) + ": expected " +
                             std::to_string(kRecordFields.size()) + " fields, found " +
                             std::to_string(fields.size()));
        ExperimentRecord r;
        check_identifier(fields[0], where_line(line.number, "arch"));
        r.arch = std::string(fields[0]);
        try {
            r.family = parse_family(fields[1]);
        } catch (const ParseError& e) {
            throw ParseError(where_line(line.number, "family") + ": " + e.what());
        }
        check_identifier(fields[2], where_line(line.number, "pretrain_dataset"));
        r.pretrain_dataset = std::string(fields[2]);
        auto samples = text::parse_u64(fields[3]);
        if (!samples) throw ParseError(where_line(line.number, "samples_seen") + ": not an unsigned integer");
        r.samples_seen = *samples;
        check_identifier(fields[4], where_line(line.number, "task"));
        r.task = std::string(fields[4]);
        auto metric = text::parse_double(fields[5]);
        if (!metric || !std::isfinite(*metric))
            throw ParseError(where_line(line.number, "metric_percent") + ": not a number");
        r.metric_percent = *metric;
        check_record(r, where_line(line.number, "samples_seen"), where_line(line.number, "metric_percent"));
        out.push_back(std::move(r));
        labels.push_back("line " + std::to_string(line.number));
    }
    return out;
}

std::vector<ExperimentRecord> parse_json(std::string_view text, std::vector<std::string>& labels) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("records JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError("records JSON: top level must be an array");

    std::vector<ExperimentRecord> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& obj = doc[i];
        if (!obj.is_object()) throw ParseError("record " + std::to_string(i) + ": not an object");
        auto str_field = [&](std::string_view name) {
            auto it = obj.find(std::string(name));
            if (it == obj.end() || !it->is_string())
                throw ParseError(where_element(i, name) + ": missing or not a string");
            auto value = it->get<std::string>();
            check_identifier(value, where_element(i, name));
            return value;
        };
        ExperimentRecord r;
        r.arch = str_field("arch");
        try {
            r.family = parse_family(str_field("family"));
        } catch (const ParseError& e) {
            throw ParseError(where_element(i, "family") + ": " + e.what());
        }
        r.pretrain_dataset = str_field("pretrain_dataset");
        auto samples = obj.find("samples_seen");
        if (samples == obj.end() || !samples->is_number_unsigned())
            throw ParseError(where_element(i, "samples_seen") + ": missing or not an unsigned integer");
        r.samples_seen = samples->get<std::uint64_t>();
        r.task = str_field("task");
        auto metric = obj.find("metric_percent");
        if (metric == obj.end() || !metric->is_number())
            throw ParseError(where_element(i, "metric_percent") + ": missing or not a number");
        r.metric_percent = metric->get<double>();
        check_record(r, where_element(i, "samples_seen"), where_element(i, "metric_percent"));
        out.push_back(std::move(r));
        labels.push_back("record " + std::to_string(i));
    }
    return out;
}

}  // namespace

std::string_view to_string(Family f) {
    switch (f) {
        case Family::OpenClipLaion: return "openclip-laion";
        case Family::ClipWit: return "clip-wit";
    }
    return "unknown";
}

Family parse_family(std::string_view s) {
    if (s == "openclip-laion") return Family::OpenClipLaion;
    if (s == "clip-wit") return Family::ClipWit;
    throw ParseError("unknown family '" + std::string(s) + "' (expected openclip-laion or clip-wit)");
}

Format parse_format(std::string_view s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw ParseError("unknown format '" + std::string(s) + "' (expected csv or json)");
}

Format format_from_path(std::string_view path) {
    return path.ends_with(".json") ? Format::Json : Format::Csv;
}

ArchRegistry::ArchRegistry(std::vector<ArchSpec> specs) {
    for (auto& s : specs) add(std::move(s));
}

void ArchRegistry::add(ArchSpec spec) {
    if (spec.name.empty()) throw ParseError("architecture with empty name");
    if (spec.image_width <= 0 || spec.text_width <= 0 || spec.embed_dim <= 0 ||
        spec.image_depth <= 0 || spec.text_depth <= 0 || !(spec.params_millions > 0.0) ||
        !(spec.gmacs_per_sample > 0.0))
        throw RangeError("architecture '" + spec.name + "': all numeric fields must be positive");
    if (index_.contains(spec.name)) throw ParseError("duplicate architecture '" + spec.name + "'");
    index_.emplace(spec.name, specs_.size());
    specs_.push_back(std::move(spec));
}

const ArchSpec& ArchRegistry::at(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("unknown architecture '" + std::string(name) + "'");
    return specs_[it->second];
}

bool ArchRegistry::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

ArchRegistry default_registry() {
    return ArchRegistry({
        {"ViT-B/32", 768, 512, 512, 12, 12, 151.0, 7.40},
        {"ViT-B/16", 768, 512, 512, 12, 12, 150.0, 20.57},
        {"ViT-L/14", 1024, 768, 768, 24, 12, 428.0, 87.73},
        {"ViT-H/14", 1280, 1024, 1024, 32, 24, 986.0, 190.97},
        {"ViT-g/14", 1408, 1024, 1024, 40, 24, 1370.0, 290.74},
        {"ViT-G/14", 1664, 1280, 1280, 48, 32, 2540.0, 532.92},
    });
}

ArchRegistry parse_arch_registry(std::string_view csv_text) {
    auto lines = text::data_lines(csv_text);
    if (lines.empty()) throw ParseError("architecture CSV: missing header");
    if (text::trim(lines.front().content) != kArchHeader)
        throw ParseError("architecture CSV line " + std::to_string(lines.front().number) +
                         ": expected header '" + std::string(kArchHeader) + "'");
    static constexpr std::array<std::string_view, 8> names = {
        "name", "image_width", "text_width", "embed_dim", "image_depth", "text_depth",
        "params_millions", "gmacs_per_sample"};
    ArchRegistry reg;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto& line = lines[li];
        auto f = text::split(line.content, ',');
        if (f.size() != names.size())
            throw ParseError("line " + std::to_string(line.number) + ": expected 8 fields, found " +
                             std::to_string(f.size()));
        auto as_int = [&](std::size_t i) {
            auto v = text::parse_i64(f[i]);
            if (!v) throw ParseError(where_line(line.number, names[i]) + ": not an integer");
            return static_cast<int>(*v);
        };
        auto as_real = [&](std::size_t i) {
            auto v = text::parse_double(f[i]);
            if (!v) throw ParseError(where_line(line.number, names[i]) + ": not a number");
            return *v;
        };
        ArchSpec s;
        check_identifier(f[0], where_line(line.number, "name"));
        s.name = std::string(f[0]);
        s.image_width = as_int(1);
        s.text_width = as_int(2);
        s.embed_dim = as_int(3);
        s.image_depth = as_int(4);
        s.text_depth = as_int(5);
        s.params_millions = as_real(6);
        s.gmacs_per_sample = as_real(7);
        try {
            reg.add(std::move(s));
        } catch (const Error& e) {
            throw ParseError("line " + std::to_string(line.number) + ": " + e.what());
        }
    }
    return reg;
}

std::string serialize_arch_registry(const ArchRegistry& registry) {
    std::ostringstream out;
    out << kArchHeader << '\n';
    for (const auto& s : registry.specs()) {
        out << s.name << ',' << s.image_width << ',' << s.text_width << ',' << s.embed_dim << ','
            << s.image_depth << ',' << s.text_depth << ',' << text::format_double(s.params_millions)
            << ',' << text::format_double(s.gmacs_per_sample) << '\n';
    }
    return out.str();
}

std::vector<ExperimentRecord> parse_records(std::string_view text, Format format) {
    std::vector<std::string> labels;
    auto records = format == Format::Csv ? parse_csv(text, labels) : parse_json(text, labels);
    check_unique(records, labels);
    return records;
}

std::string serialize_records(std::span<const ExperimentRecord> records, Format format) {
    if (format == Format::Json) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& r : records) {
            nlohmann::ordered_json o;
            o["arch"] = r.arch;
            o["family"] = std::string(to_string(r.family));
            o["pretrain_dataset"] = r.pretrain_dataset;
            o["samples_seen"] = r.samples_seen;
            o["task"] = r.task;
            o["metric_percent"] = r.metric_percent;
            arr.push_back(std::move(o));
        }
        return arr.dump(2) + "\n";
    }
    std::ostringstream out;
    out << kRecordHeader << '\n';
    for (const auto& r : records) {
        out << r.arch << ',' << to_string(r.family) << ',' << r.pretrain_dataset << ','
            << r.samples_seen << ',' << r.task << ',' << text::format_double(r.metric_percent) << '\n';
    }
    return out.str();
}

std::vector<ExperimentRecord> load_records(std::span<const std::string> paths) {
    std::vector<ExperimentRecord> all;
    std::vector<std::string> labels;
    for (const auto& path : paths) {
        std::vector<ExperimentRecord> part;
        try {
            part = parse_records(text::read_file(path), format_from_path(path));
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what());
        } catch (const RangeError& e) {
            throw RangeError(path + ": " + e.what());
        }
        for (std::size_t i = 0; i < part.size(); ++i) labels.push_back(path + " row " + std::to_string(i + 1));
        all.insert(all.end(), part.begin(), part.end());
    }
    check_unique(all, labels);
    return all;
}

double total_compute(const ExperimentRecord& record, const ArchRegistry& registry) {
    return registry.at(record.arch).gmacs_per_sample * static_cast<double>(record.samples_seen);
}

double aggregate_mean(std::span<const ExperimentRecord> records, std::span<const std::string> tasks) {
    if (tasks.empty()) throw DegeneracyError("aggregate_mean: empty task set");
    double sum = 0.0;
    for (const auto& task : tasks) {
        const ExperimentRecord* found = nullptr;
        for (const auto& r : records) {
            if (r.task != task) continue;
            if (found) throw DegeneracyError("aggregate_mean: task '" + task + "' appears more than once");
            found = &r;
        }
        if (!found) throw LookupError("aggregate_mean: missing task '" + task + "'");
        sum += found->metric_percent;
    }
    return sum / static_cast<double>(tasks.size());
}

std::vector<ComputePoint> to_points(std::span<const ExperimentRecord> records, std::string_view task,
                                    Family family, const ArchRegistry& registry,
                                    ErrorConvention convention) {
    std::vector<ComputePoint> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.task != task || r.family != family) continue;
        double error = convention == ErrorConvention::Complement ? 100.0 - r.metric_percent : r.metric_percent;
        out.push_back({total_compute(r, registry), error, i});
    }
    return out;
}

}  // namespace clipscale
