#include "clipscale/evalproto.hpp"

#include <algorithm>
#include <cmath>

#include "clipscale/error.hpp"
#include "clipscale/text.hpp"

namespace clipscale {

LabelEmbeddings::LabelEmbeddings(EmbeddingMatrix rows) : rows_(std::move(rows)) {
    if (rows_.rows() < 2)
        throw DegeneracyError("label embeddings: need at least 2 labels, got " + std::to_string(rows_.rows()));
    rows_.require_normalized("label embeddings");
}

LabelEmbeddings build_label_embeddings(std::span<const EmbeddingMatrix> prompt_groups) {
    if (prompt_groups.empty()) throw DegeneracyError("build_label_embeddings: no labels");
    const auto dim = prompt_groups.front().dim();
    Matrix out(static_cast<Eigen::Index>(prompt_groups.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < prompt_groups.size(); ++j) {
        const auto& g = prompt_groups[j];
        if (g.rows() == 0) throw DegeneracyError("label " + std::to_string(j) + " has no prompt embeddings");
        if (g.dim() != dim)
            throw ShapeError("label " + std::to_string(j) + ": prompt dim " + std::to_string(g.dim()) +
                             " differs from " + std::to_string(dim));
        Eigen::RowVectorXd mean = g.values().colwise().sum() / static_cast<double>(g.rows());
        double n = mean.norm();
        if (!(n > 0.0)) throw DegeneracyError("label " + std::to_string(j) + ": mean prompt embedding has zero norm");
        out.row(static_cast<Eigen::Index>(j)) = mean / n;
    }
    return LabelEmbeddings(EmbeddingMatrix(std::move(out)));
}

std::vector<EmbeddingMatrix> group_prompts(const EmbeddingMatrix& prompts, std::span<const std::size_t> label_of_row) {
    if (label_of_row.size() != prompts.rows())
        throw ShapeError("group_prompts: " + std::to_string(prompts.rows()) + " prompt rows but " +
                         std::to_string(label_of_row.size()) + " label assignments");
    std::size_t n_labels = 0;
    for (auto l : label_of_row) n_labels = std::max(n_labels, l + 1);
    std::vector<std::vector<Eigen::Index>> members(n_labels);
    for (std::size_t r = 0; r < label_of_row.size(); ++r)
        members[label_of_row[r]].push_back(static_cast<Eigen::Index>(r));
    std::vector<EmbeddingMatrix> groups;
    for (std::size_t j = 0; j < n_labels; ++j) {
        if (members[j].empty()) throw DegeneracyError("label " + std::to_string(j) + " has no prompt embeddings");
        Matrix g(static_cast<Eigen::Index>(members[j].size()), static_cast<Eigen::Index>(prompts.dim()));
        for (std::size_t i = 0; i < members[j].size(); ++i)
            g.row(static_cast<Eigen::Index>(i)) = prompts.values().row(members[j][i]);
        groups.emplace_back(std::move(g));
    }
    return groups;
}

std::vector<std::size_t> zero_shot_predict(const EmbeddingMatrix& images, const LabelEmbeddings& labels) {
    if (images.dim() != labels.dim())
        throw ShapeError("zero-shot: image dim " + std::to_string(images.dim()) + " vs label dim " +
                         std::to_string(labels.dim()));
    const Matrix scores = images.values() * labels.matrix().values().transpose();
    std::vector<std::size_t> out(images.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < scores.cols(); ++j)
            if (scores(i, j) > scores(i, best)) best = j;
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
}

ZeroShotResult zero_shot_classify(const EmbeddingMatrix& images, const LabelEmbeddings& labels,
                                  std::span<const std::size_t> truth) {
    if (truth.size() != images.rows())
        throw ShapeError("zero-shot: " + std::to_string(images.rows()) + " images but " +
                         std::to_string(truth.size()) + " ground-truth labels");
    ZeroShotResult r;
    r.predicted = zero_shot_predict(images, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) correct += r.predicted[i] == truth[i] ? 1 : 0;
    r.accuracy_percent = truth.empty() ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
    return r;
}

RelevanceMap relevance_from_pairs(std::span<const std::pair<std::size_t, std::size_t>> pairs, std::size_t n_queries) {
    RelevanceMap truth(n_queries);
    for (const auto& [q, c] : pairs) {
        if (q >= n_queries)
            throw LookupError("relevance pair references query " + std::to_string(q) + " of " +
                              std::to_string(n_queries));
        truth[q].push_back(c);
    }
    return truth;
}

double recall_at_k(const EmbeddingMatrix& queries, const EmbeddingMatrix& candidates, const RelevanceMap& truth,
                   std::size_t k) {
    if (k == 0) throw RangeError("recall_at_k: k must be at least 1");
    if (queries.dim() != candidates.dim())
        throw ShapeError("recall_at_k: query dim " + std::to_string(queries.dim()) + " vs candidate dim " +
                         std::to_string(candidates.dim()));
    if (truth.size() != queries.rows())
        throw ShapeError("recall_at_k: " + std::to_string(queries.rows()) + " queries but " +
                         std::to_string(truth.size()) + " relevance entries");
    if (queries.rows() == 0) throw DegeneracyError("recall_at_k: no queries");
    const auto n_cand = candidates.rows();
    k = std::min(k, n_cand);

    const auto q_unit = queries.normalized();
    const auto c_unit = candidates.normalized();
    const Matrix scores = q_unit.values() * c_unit.values().transpose();

    std::size_t hits = 0;
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        const auto& relevant = truth[q];
        if (relevant.empty()) throw DegeneracyError("recall_at_k: query " + std::to_string(q) + " has no relevant candidate");
        auto row = scores.row(static_cast<Eigen::Index>(q));
        std::size_t best_rank = n_cand;
        for (auto c : relevant) {
            if (c >= n_cand)
                throw LookupError("recall_at_k: query " + std::to_string(q) + " references candidate " +
                                  std::to_string(c) + " of " + std::to_string(n_cand));
            const double s = row(static_cast<Eigen::Index>(c));
            // Candidates ranked ahead of c: higher score, or equal score and lower index.
            std::size_t rank = 0;
            for (std::size_t j = 0; j < n_cand; ++j) {
                double sj = row(static_cast<Eigen::Index>(j));
                if (sj > s || (sj == s && j < c)) ++rank;
            }
            best_rank = std::min(best_rank, rank);
        }
        if (best_rank < k) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(queries.rows());
}

std::vector<double> interpolate_weights(std::span<const double> w_zero, std::span<const double> w_fine, double mix) {
    if (w_zero.size() != w_fine.size())
        throw ShapeError("interpolate_weights: lengths " + std::to_string(w_zero.size()) + " and " +
                         std::to_string(w_fine.size()) + " differ");
    if (!(mix >= 0.0 && mix <= 1.0))
        throw DomainError("interpolate_weights: mix " + text::format_double(mix) + " outside [0, 1]");
    std::vector<double> out(w_zero.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        // (1 - mix) w0 + mix w1; exact at both endpoints and for w0 == w1.
        out[i] = mix == 1.0 ? w_fine[i] : w_zero[i] + mix * (w_fine[i] - w_zero[i]);
    }
    return out;
}

}  // namespace clipscale
