#pragma once

// Evaluation mathematics over precomputed embeddings: prompt-ensemble
// zero-shot classification, Recall@K retrieval, linear probing and
// weight-space patching.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clipscale/embedding.hpp"

namespace clipscale {

// One unit-norm embedding per label (row j is c_j).
class LabelEmbeddings {
public:
    // Throws DegeneracyError with fewer than two labels, ShapeError on
    // non-unit rows.
    explicit LabelEmbeddings(EmbeddingMatrix rows);

    std::size_t labels() const { return rows_.rows(); }
    std::size_t dim() const { return rows_.dim(); }
    const EmbeddingMatrix& matrix() const { return rows_; }

private:
    EmbeddingMatrix rows_;
};

// Per label: mean of its prompt embeddings, then L2-normalized. Each group is
// a (prompts x dim) matrix.
LabelEmbeddings build_label_embeddings(std::span<const EmbeddingMatrix> prompt_groups);

// Groups the rows of `prompts` by the label index assigned to each row.
std::vector<EmbeddingMatrix> group_prompts(const EmbeddingMatrix& prompts,
                                           std::span<const std::size_t> label_of_row);

struct ZeroShotResult {
    std::vector<std::size_t> predicted;
    double accuracy_percent = 0.0;  // against the supplied truth
};

// argmax_j <x_i, c_j>, lowest label index on ties. Only the direction of each
// image row matters, so rows need not be normalized.
std::vector<std::size_t> zero_shot_predict(const EmbeddingMatrix& images, const LabelEmbeddings& labels);
ZeroShotResult zero_shot_classify(const EmbeddingMatrix& images, const LabelEmbeddings& labels,
                                  std::span<const std::size_t> truth);

// truth[q] lists the relevant candidate indices of query q.
using RelevanceMap = std::vector<std::vector<std::size_t>>;

RelevanceMap relevance_from_pairs(std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                  std::size_t n_queries);

inline constexpr std::size_t kDefaultRecallK = 5;

// Percentage of queries with a relevant candidate among the top k by cosine
// score (descending, lower candidate index first on ties). k larger than the
// candidate count is clamped.
double recall_at_k(const EmbeddingMatrix& queries, const EmbeddingMatrix& candidates, const RelevanceMap& truth,
                   std::size_t k = kDefaultRecallK);

struct ProbeConfig {
    std::vector<double> learning_rates{0.1, 0.01, 0.001};
    std::vector<int> epochs{10, 20, 40};
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ProbeResult {
    Matrix weights;  // dim x labels
    double learning_rate = 0.0;
    int epochs = 0;
    double train_accuracy_percent = 0.0;
    double eval_accuracy_percent = 0.0;
    std::vector<double> epoch_losses;  // mean training loss after each epoch of the chosen run
};

struct LabeledFeatures {
    const EmbeddingMatrix& features;
    std::span<const std::size_t> labels;
};

// Softmax cross-entropy of W^T x averaged over the rows of `x`, with its
// gradient (dim x labels).
struct LossAndGrad {
    double loss = 0.0;
    Matrix grad;
};
LossAndGrad softmax_cross_entropy(const Matrix& weights, const Matrix& x, std::span<const std::size_t> labels);

// Trains every (learning rate, epochs) member of the sweep with mini-batch
// Adam and returns the one with the best eval accuracy (earliest sweep member
// on ties). Deterministic for a given seed.
ProbeResult train_linear_probe(LabeledFeatures train, LabeledFeatures eval, const ProbeConfig& config);

double probe_accuracy(const Matrix& weights, const EmbeddingMatrix& features, std::span<const std::size_t> labels);

// Stratified few-shot subset: after a seeded shuffle of all indices, keeps the
// first `shots` indices of every label. Returned indices are sorted.
std::vector<std::size_t> few_shot_indices(std::span<const std::size_t> labels, std::size_t shots,
                                          std::uint64_t seed);

// (1 - mix) * w_zero + mix * w_fine, elementwise.
std::vector<double> interpolate_weights(std::span<const double> w_zero, std::span<const double> w_fine,
                                        double mix);

}  // namespace clipscale
