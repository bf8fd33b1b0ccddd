// clipscale: command-line front end for the scaling, evaluation, loss and
// deduplication tools. Summaries go to stdout; artifacts only to --out.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "clipscale/dedup.hpp"
#include "clipscale/error.hpp"
#include "clipscale/evalproto.hpp"
#include "clipscale/lossim.hpp"
#include "clipscale/records.hpp"
#include "clipscale/report.hpp"
#include "clipscale/scaling.hpp"
#include "clipscale/text.hpp"

namespace {

using namespace clipscale;
using ojson = nlohmann::ordered_json;

std::string fmt(double v) { return text::format_double(v); }

void emit(const std::optional<std::string>& out, const std::string& content) {
    if (out) text::write_file(*out, content);
}

// One non-negative integer per data line; a non-numeric first line is a header.
std::vector<std::size_t> load_index_column(const std::string& path) {
    const std::string content = text::read_file(path);
    std::vector<std::size_t> out;
    bool first = true;
    for (const auto& [line_no, line] : text::data_lines(content)) {
        const auto v = text::parse_u64(text::trim(line));
        if (v) {
            out.push_back(static_cast<std::size_t>(*v));
        } else if (!first) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected an integer");
        }
        first = false;
    }
    return out;
}

ArchRegistry load_registry(const std::optional<std::string>& path) {
    return path ? parse_arch_registry(text::read_file(*path)) : default_registry();
}

PredictionTarget parse_target(const std::string& spec) {
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos) throw ParseError("--predict expects ARCH:SAMPLES, got '" + spec + "'");
    const auto samples = text::parse_u64(std::string_view(spec).substr(colon + 1));
    if (!samples) throw ParseError("--predict: bad sample count in '" + spec + "'");
    return {spec.substr(0, colon), *samples};
}

struct ScalingArgs {
    std::vector<std::string> records;
    std::optional<std::string> archs;
    std::string task;
    std::string family = "openclip-laion";
    int bins = BinSpec::kDefaultBins;
    std::optional<double> lo, hi;
    bool identity_metric = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--records", records, "Record files (CSV or JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--archs", archs, "Architecture registry CSV (built-in table if omitted)")
            ->check(CLI::ExistingFile);
        cmd->add_option("--task", task, "Task to fit")->required();
        cmd->add_option("--family", family, "openclip-laion or clip-wit");
        cmd->add_option("--bins", bins, "Number of log10 compute bins");
        cmd->add_option("--lo", lo, "Lower log10 compute bound");
        cmd->add_option("--hi", hi, "Upper log10 compute bound");
        cmd->add_flag("--error-metric", identity_metric, "Metric already is an error rate");
    }

    FitReport run(std::span<const PredictionTarget> targets) const {
        const auto recs = load_records(records);
        FitOptions opts;
        opts.num_bins = bins;
        opts.lo = lo;
        opts.hi = hi;
        opts.convention = identity_metric ? ErrorConvention::Identity : ErrorConvention::Complement;
        return fit_family(recs, task, parse_family(family), load_registry(archs), opts, targets);
    }
};

void print_prediction(const ReportPrediction& p) {
    std::cout << p.arch << " @ " << p.samples_seen << " samples: C=" << fmt(p.prediction.compute_gmac)
              << " GMAC, metric=" << fmt(p.prediction.predicted_metric)
              << (p.prediction.extrapolated ? " (extrapolated)" : "") << "\n";
}

std::string bins_csv(const FitReport& r) {
    std::string out = "bin,lo_log10,hi_log10,n_points,best_compute_gmac,best_error\n";
    for (const auto& b : r.bin_summaries)
        out += std::to_string(b.index) + "," + fmt(b.lo_log10) + "," + fmt(b.hi_log10) + "," +
               std::to_string(b.n_points) + "," + fmt(b.best.compute_gmac) + "," + fmt(b.best.error_percent) + "\n";
    return out;
}

std::string index_json(std::span<const std::size_t> v) { return ojson(std::vector<std::size_t>(v.begin(), v.end())).dump(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scaling-law fitting and CLIP evaluation toolkit"};
    app.require_subcommand(1);
    std::optional<std::string> out;
    std::uint64_t seed = 0;

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit a power law to the compute frontier of one task and family");
    ScalingArgs fit_args;
    fit_args.attach(fit_cmd);
    std::vector<std::string> predict_specs;
    bool grid = false;
    std::string format = "json";
    fit_cmd->add_option("--predict", predict_specs, "Extrapolation target ARCH:SAMPLES (repeatable)");
    fit_cmd->add_flag("--grid", grid, "Add the H/14, g/14, G/14 x 3B..68B extrapolation grid");
    fit_cmd->add_option("--format", format, "Artifact format")->check(CLI::IsMember({"json", "csv"}));
    fit_cmd->add_option("--out", out, "Write the fit report here");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Evaluate a saved fit at an architecture and sample count");
    std::string fit_path, arch;
    std::uint64_t samples = 0;
    std::optional<std::string> predict_archs;
    predict_cmd->add_option("--fit", fit_path, "Fit report JSON")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--arch", arch, "Architecture name")->required();
    predict_cmd->add_option("--samples", samples, "Samples seen")->required();
    predict_cmd->add_option("--archs", predict_archs, "Architecture registry CSV")->check(CLI::ExistingFile);
    predict_cmd->add_option("--out", out, "Write prediction JSON here");

    // plotdata
    auto* plot_cmd = app.add_subcommand("plotdata", "Emit points, frontier flags and the fitted curve as CSV");
    ScalingArgs plot_args;
    plot_args.attach(plot_cmd);
    int curve_samples = 64;
    plot_cmd->add_option("--samples", curve_samples, "Fitted-curve sample count")->check(CLI::PositiveNumber);
    plot_cmd->add_option("--out", out, "Output CSV")->required();

    // efficiency
    auto* eff_cmd = app.add_subcommand("efficiency", "Scaling efficiency from n_gpus,throughput samples");
    std::string throughput_path;
    std::optional<int> baseline;
    eff_cmd->add_option("--input", throughput_path, "CSV n_gpus,throughput")->required()->check(CLI::ExistingFile);
    eff_cmd->add_option("--baseline", baseline, "Baseline GPU count (smallest present by default)");
    eff_cmd->add_option("--out", out, "Write CSV n_gpus,efficiency_percent here");

    // eval-zeroshot
    auto* zs_cmd = app.add_subcommand("eval-zeroshot", "Prompt-ensemble zero-shot classification");
    std::string images_path, prompts_path, prompt_labels_path, truth_path;
    zs_cmd->add_option("--images", images_path, "Image embeddings")->required()->check(CLI::ExistingFile);
    zs_cmd->add_option("--prompts", prompts_path, "Prompt embeddings")->required()->check(CLI::ExistingFile);
    zs_cmd->add_option("--prompt-labels", prompt_labels_path, "Label index of each prompt row")
        ->required()
        ->check(CLI::ExistingFile);
    zs_cmd->add_option("--truth", truth_path, "Ground-truth label of each image")->required()->check(CLI::ExistingFile);
    zs_cmd->add_option("--out", out, "Write predictions JSON here");

    // eval-retrieval
    auto* rt_cmd = app.add_subcommand("eval-retrieval", "Recall@K retrieval");
    std::string queries_path, candidates_path, pairs_path;
    std::size_t k = kDefaultRecallK;
    rt_cmd->add_option("--queries", queries_path, "Query embeddings")->required()->check(CLI::ExistingFile);
    rt_cmd->add_option("--candidates", candidates_path, "Candidate embeddings")->required()->check(CLI::ExistingFile);
    rt_cmd->add_option("--truth", pairs_path, "CSV query_index,candidate_index")->required()->check(CLI::ExistingFile);
    rt_cmd->add_option("--k", k, "Cutoff K");
    rt_cmd->add_option("--out", out, "Write result JSON here");

    // probe
    auto* probe_cmd = app.add_subcommand("probe", "Linear probe sweep over cached features");
    std::string train_x, train_y, eval_x, eval_y;
    ProbeConfig probe_cfg;
    std::optional<std::size_t> shots;
    probe_cmd->add_option("--train-features", train_x, "Training features")->required()->check(CLI::ExistingFile);
    probe_cmd->add_option("--train-labels", train_y, "Training labels")->required()->check(CLI::ExistingFile);
    probe_cmd->add_option("--eval-features", eval_x, "Held-out features")->required()->check(CLI::ExistingFile);
    probe_cmd->add_option("--eval-labels", eval_y, "Held-out labels")->required()->check(CLI::ExistingFile);
    probe_cmd->add_option("--lr", probe_cfg.learning_rates, "Learning rates to sweep");
    probe_cmd->add_option("--epochs", probe_cfg.epochs, "Epoch counts to sweep");
    probe_cmd->add_option("--batch-size", probe_cfg.batch_size, "Mini-batch size");
    probe_cmd->add_option("--shots", shots, "Keep this many training examples per label");
    probe_cmd->add_option("--seed", seed, "Random seed");
    probe_cmd->add_option("--out", out, "Write probe result JSON here");

    // loss-check
    auto* loss_cmd = app.add_subcommand("loss-check", "Compare full and sharded InfoNCE loss and gradients");
    std::optional<std::string> u_path, v_path;
    std::size_t batch_n = 64, dim = 16, workers = 4;
    double tau = ContrastiveBatch::kDefaultTau;
    bool interleaved = false;
    loss_cmd->add_option("--images", u_path, "Image embeddings (random batch if omitted)")->check(CLI::ExistingFile);
    loss_cmd->add_option("--texts", v_path, "Text embeddings")->check(CLI::ExistingFile);
    loss_cmd->add_option("--n", batch_n, "Random batch size");
    loss_cmd->add_option("--dim", dim, "Random embedding dimension");
    loss_cmd->add_option("--tau", tau, "Temperature");
    loss_cmd->add_option("--workers", workers, "Virtual worker count K");
    loss_cmd->add_flag("--interleaved", interleaved, "Assign pairs to workers round-robin");
    loss_cmd->add_option("--seed", seed, "Random seed");
    loss_cmd->add_option("--out", out, "Write report JSON here");

    // dedup
    auto* dedup_cmd = app.add_subcommand("dedup", "Perceptual-hash duplicate detection");
    dedup_cmd->require_subcommand(1);
    auto* hash_cmd = dedup_cmd->add_subcommand("hash", "Hash P5/P6 images into id,hash_hex CSV");
    std::vector<std::string> image_paths;
    hash_cmd->add_option("images", image_paths, "PNM images")->required()->check(CLI::ExistingFile);
    hash_cmd->add_option("--out", out, "Output hash CSV")->required();
    auto* overlap_cmd = dedup_cmd->add_subcommand("overlap", "Share of B within threshold of some hash in A");
    std::string hashes_a, hashes_b;
    int threshold = kDefaultMatchThreshold;
    bool use_index = false;
    overlap_cmd->add_option("--a", hashes_a, "Reference hash CSV")->required()->check(CLI::ExistingFile);
    overlap_cmd->add_option("--b", hashes_b, "Query hash CSV")->required()->check(CLI::ExistingFile);
    overlap_cmd->add_option("--threshold", threshold, "Maximum Hamming distance");
    overlap_cmd->add_flag("--index", use_index, "Use the chunked multi-index instead of a full scan");
    overlap_cmd->add_option("--out", out, "Write report JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit_cmd) {
            std::vector<PredictionTarget> targets;
            if (grid) targets = extrapolation_grid();
            for (const auto& s : predict_specs) targets.push_back(parse_target(s));
            const auto r = fit_args.run(targets);
            std::cout << "task " << r.task << ", family " << to_string(r.family) << "\n"
                      << "alpha " << fmt(r.fit.alpha) << ", beta " << fmt(r.fit.beta) << ", r^2 "
                      << fmt(r.fit.r_squared) << ", frontier points " << r.fit.n_points << " of "
                      << r.points.size() << "\n";
            for (const auto& p : r.predictions) print_prediction(p);
            emit(out, format == "csv" ? bins_csv(r) : fit_report_json(r));
        } else if (*predict_cmd) {
            const auto report = parse_fit_report(text::read_file(fit_path));
            const auto p = predict_target(report.fit, {arch, samples}, load_registry(predict_archs));
            print_prediction(p);
            emit(out, prediction_json(p));
        } else if (*plot_cmd) {
            const auto r = plot_args.run({});
            text::write_file(*out, plot_data_csv(r, curve_samples));
            std::cout << r.points.size() << " points, " << r.frontier.size() << " on the frontier, "
                      << curve_samples << " curve samples\n";
        } else if (*eff_cmd) {
            const std::string content = text::read_file(throughput_path);
            std::vector<ThroughputSample> samples_in;
            for (const auto& [line_no, line] : text::data_lines(content)) {
                const auto f = text::split(line, ',');
                const auto where = throughput_path + ": line " + std::to_string(line_no);
                if (f.size() != 2) throw ParseError(where + ": expected n_gpus,throughput");
                if (text::trim(f[0]) == "n_gpus") continue;
                const auto n = text::parse_i64(text::trim(f[0]));
                const auto t = text::parse_double(text::trim(f[1]));
                if (!n || !t) throw ParseError(where + ": expected n_gpus,throughput");
                samples_in.push_back({static_cast<int>(*n), *t});
            }
            std::string csv = "n_gpus,efficiency_percent\n";
            for (const auto& e : scaling_efficiency(samples_in, baseline)) {
                std::cout << e.n_gpus << " GPUs: " << fmt(e.percent) << "%\n";
                csv += std::to_string(e.n_gpus) + "," + fmt(e.percent) + "\n";
            }
            emit(out, csv);
        } else if (*zs_cmd) {
            const auto prompts = load_embedding(prompts_path);
            const auto prompt_labels = load_index_column(prompt_labels_path);
            const auto labels = build_label_embeddings(group_prompts(prompts, prompt_labels));
            const auto truth = load_index_column(truth_path);
            const auto r = zero_shot_classify(load_embedding(images_path), labels, truth);
            std::cout << "zero-shot top-1 " << fmt(r.accuracy_percent) << "% over " << truth.size() << " images, "
                      << labels.labels() << " labels\n";
            emit(out, "{\"accuracy_percent\": " + fmt(r.accuracy_percent) +
                          ", \"predicted\": " + index_json(r.predicted) + "}\n");
        } else if (*rt_cmd) {
            const auto queries = load_embedding(queries_path);
            const auto truth = relevance_from_pairs(parse_index_pairs(text::read_file(pairs_path)), queries.rows());
            const double recall = recall_at_k(queries, load_embedding(candidates_path), truth, k);
            std::cout << "Recall@" << k << " " << fmt(recall) << "% over " << queries.rows() << " queries\n";
            ojson j;
            j["k"] = k;
            j["recall_percent"] = recall;
            emit(out, j.dump(2) + "\n");
        } else if (*probe_cmd) {
            probe_cfg.seed = seed;
            const auto train_features = load_embedding(train_x);
            auto train_labels = load_index_column(train_y);
            const auto eval_features = load_embedding(eval_x);
            const auto eval_labels = load_index_column(eval_y);
            EmbeddingMatrix subset = train_features;
            if (shots) {
                const auto keep = few_shot_indices(train_labels, *shots, seed);
                Matrix m(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(train_features.dim()));
                std::vector<std::size_t> kept_labels;
                for (std::size_t i = 0; i < keep.size(); ++i) {
                    m.row(static_cast<Eigen::Index>(i)) = train_features.row(keep[i]);
                    kept_labels.push_back(train_labels[keep[i]]);
                }
                subset = EmbeddingMatrix(m);
                train_labels = std::move(kept_labels);
            }
            const auto r = train_linear_probe({subset, train_labels}, {eval_features, eval_labels}, probe_cfg);
            std::cout << "best lr " << fmt(r.learning_rate) << ", epochs " << r.epochs << ": train "
                      << fmt(r.train_accuracy_percent) << "%, eval " << fmt(r.eval_accuracy_percent) << "%\n";
            ojson j;
            j["learning_rate"] = r.learning_rate;
            j["epochs"] = r.epochs;
            j["train_accuracy_percent"] = r.train_accuracy_percent;
            j["eval_accuracy_percent"] = r.eval_accuracy_percent;
            j["epoch_losses"] = r.epoch_losses;
            ojson w = ojson::array();
            for (Eigen::Index i = 0; i < r.weights.rows(); ++i) {
                std::vector<double> row(r.weights.row(i).begin(), r.weights.row(i).end());
                w.push_back(row);
            }
            j["weights"] = w;
            emit(out, j.dump(2) + "\n");
        } else if (*loss_cmd) {
            ContrastiveBatch batch;
            if (u_path || v_path) {
                if (!u_path || !v_path) throw ShapeError("loss-check needs both --images and --texts");
                batch = {load_embedding(*u_path).values(), load_embedding(*v_path).values(), tau};
            } else {
                batch = random_batch(batch_n, dim, tau, seed);
            }
            const double full = infonce_loss(batch);
            const auto g = infonce_grad(batch);
            const auto r = sharded_loss_grad(batch, {workers, interleaved ? Assignment::Interleaved
                                                                          : Assignment::Contiguous});
            const double max_diff = std::max((r.grads.d_images - g.d_images).cwiseAbs().maxCoeff(),
                                             (r.grads.d_texts - g.d_texts).cwiseAbs().maxCoeff());
            std::cout << "N " << batch.size() << ", K " << workers << ", tau " << fmt(batch.tau) << "\n"
                      << "full loss " << fmt(full) << ", sharded loss " << fmt(r.loss) << "\n"
                      << "max gradient difference " << fmt(max_diff) << "\n"
                      << "similarity entries per worker " << r.per_worker_similarity_entries << " vs full "
                      << r.full_matrix_entries << "\n";
            ojson j;
            j["n"] = batch.size();
            j["workers"] = workers;
            j["tau"] = batch.tau;
            j["full_loss"] = full;
            j["sharded_loss"] = r.loss;
            j["max_gradient_difference"] = max_diff;
            j["per_worker_similarity_entries"] = r.per_worker_similarity_entries;
            j["full_matrix_entries"] = r.full_matrix_entries;
            emit(out, j.dump(2) + "\n");
        } else if (*hash_cmd) {
            std::vector<HashEntry> entries;
            for (const auto& p : image_paths) entries.push_back({p, phash(load_pnm(p))});
            text::write_file(*out, serialize_hash_file(entries));
            std::cout << "hashed " << entries.size() << " images\n";
        } else if (*overlap_cmd) {
            auto codes = [](const std::string& path) {
                std::vector<HashCode> v;
                for (const auto& e : parse_hash_file(text::read_file(path))) v.push_back(e.hash);
                return v;
            };
            const auto a = codes(hashes_a), b = codes(hashes_b);
            const auto r = overlap_report(a, b, threshold, use_index ? MatchStrategy::ChunkIndex
                                                                    : MatchStrategy::Exhaustive);
            std::cout << r.matched_b << " of " << r.total_b << " within " << threshold << " bits ("
                      << fmt(r.overlap_percent) << "%)\n";
            emit(out, overlap_report_json(r));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
