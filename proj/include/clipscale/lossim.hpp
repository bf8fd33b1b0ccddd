#pragma once

// Symmetric InfoNCE over paired image/text embeddings, its analytic gradient,
// and a sequential simulation of the sharded computation in which each worker
// only materializes its local-versus-global similarity blocks.
//
// With logits s_ij = <u_i, v_j> / tau the loss is
//   L = 1/2 [ 1/N sum_i CE(row i, i) + 1/N sum_j CE(column j, j) ].
// Larger batches tighten the mutual-information bound I(X;Y) >= log N - L.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "clipscale/embedding.hpp"

namespace clipscale {

struct ContrastiveBatch {
    Matrix images;  // U, N x d, unit rows
    Matrix texts;   // V, N x d, unit rows
    double tau = 0.07;

    static constexpr double kDefaultTau = 0.07;

    // Throws ShapeError on mismatched shapes or non-unit rows, DomainError on
    // tau <= 0.
    void validate() const;
    std::size_t size() const { return static_cast<std::size_t>(images.rows()); }
};

struct GradientPair {
    Matrix d_images;
    Matrix d_texts;
};

double infonce_loss(const ContrastiveBatch& batch);
GradientPair infonce_grad(const ContrastiveBatch& batch);

// The same loss and its gradient with respect to a precomputed N x N logit
// matrix (no temperature involved).
double infonce_loss_from_logits(const Matrix& logits);
Matrix infonce_logit_grad(const Matrix& logits);

enum class Assignment { Contiguous, Interleaved };

struct ShardLayout {
    std::size_t workers = 1;  // K
    Assignment assignment = Assignment::Contiguous;

    // Local batch n = N / K; throws LayoutError unless K >= 1 divides N.
    std::size_t local_size(std::size_t batch_size) const;
    // Global indices owned by `worker`, ascending.
    std::vector<std::size_t> members(std::size_t worker, std::size_t batch_size) const;
};

struct ShardReport {
    double loss = 0.0;
    GradientPair grads;
    std::uint64_t per_worker_similarity_entries = 0;  // 2 n N
    std::uint64_t full_matrix_entries = 0;            // N^2
};

// Each worker w forms U_w V^T and V_w U^T (two n x N blocks), takes the row
// cross-entropies of its own pairs, and back-propagates into all embeddings,
// as a differentiable all-gather would. Worker contributions are summed in
// worker order.
ShardReport sharded_loss_grad(const ContrastiveBatch& batch, const ShardLayout& layout);

struct SimilarityMemory {
    std::uint64_t full_matrix_entries = 0;
    std::uint64_t per_worker_entries = 0;
    std::uint64_t full_matrix_bytes = 0;
    std::uint64_t per_worker_bytes = 0;
};

// Similarity-matrix footprint for global batch N and local batch n.
SimilarityMemory similarity_memory(std::uint64_t global_batch, std::uint64_t local_batch,
                                   std::uint64_t bytes_per_real = 4);

// N pairs of random unit rows; texts are noisy copies of the images.
// Deterministic for a given seed.
ContrastiveBatch random_batch(std::size_t n, std::size_t dim, double tau, std::uint64_t seed);

}  // namespace clipscale
