#include "clipscale/lossim.hpp"

#include <cmath>
#include <random>

#include "clipscale/error.hpp"
#include "clipscale/text.hpp"

namespace clipscale {

namespace {

// Sequential dot product; dot(a, b) and dot(b, a) are bitwise equal, which the
// K = 1 equivalence with the full computation relies on.
double dot(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
    return s;
}

double log_sum_exp(const double* v, Eigen::Index n, Eigen::Index stride) {
    double m = v[0];
    for (Eigen::Index j = 1; j < n; ++j) m = std::max(m, v[j * stride]);
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += std::exp(v[j * stride] - m);
    return m + std::log(s);
}

void require_finite(const Matrix& logits) {
    if (!logits.allFinite()) throw NumericError("InfoNCE: non-finite similarity logits");
}

struct Partial {
    double row_sum = 0.0;  // sum of image->text cross-entropies
    double col_sum = 0.0;  // sum of text->image cross-entropies
};

// Row pass over one block: `block` row r holds the logits of global pair
// owner[r] against all N counterparts; `anchor` holds the rows that produced
// the block and `other` the counterparts. Accumulates gradient into d_anchor
// (rows owner[r]) and d_other (all rows).
double block_pass(const Matrix& block, const std::vector<std::size_t>& owner, const Matrix& anchor, const Matrix& other,
                  double tau, double coef, Matrix& d_anchor, Matrix& d_other) {
    double sum = 0.0;
    const Eigen::Index n_all = block.cols();
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
        const auto i = static_cast<Eigen::Index>(owner[static_cast<std::size_t>(r)]);
        const double* row = block.data() + r * n_all;
        const double lse = log_sum_exp(row, n_all, 1);
        sum += lse - row[i];
        for (Eigen::Index j = 0; j < n_all; ++j) {
            double g = coef * (std::exp(row[j] - lse) - (i == j ? 1.0 : 0.0)) / tau;
            for (Eigen::Index k = 0; k < anchor.cols(); ++k) {
                d_anchor(i, k) += g * other(j, k);
                d_other(j, k) += g * anchor(i, k);
            }
        }
    }
    return sum;
}

Matrix similarity_block(const Matrix& local_from, const std::vector<std::size_t>& rows, const Matrix& all, double tau) {
    Matrix block(static_cast<Eigen::Index>(rows.size()), all.rows());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (Eigen::Index j = 0; j < all.rows(); ++j)
            block(static_cast<Eigen::Index>(r), j) = dot(local_from, static_cast<Eigen::Index>(rows[r]), all, j) / tau;
    return block;
}

// Forms both n x N blocks for the pairs in `owned` and accumulates their loss
// sums and gradient contributions.
Partial worker_contribution(const ContrastiveBatch& batch, const std::vector<std::size_t>& owned, GradientPair& grads) {
    const double coef = 0.5 / static_cast<double>(batch.size());
    Partial p;
    Matrix image_block = similarity_block(batch.images, owned, batch.texts, batch.tau);
    require_finite(image_block);
    p.row_sum = block_pass(image_block, owned, batch.images, batch.texts, batch.tau, coef, grads.d_images, grads.d_texts);
    image_block.resize(0, 0);
    Matrix text_block = similarity_block(batch.texts, owned, batch.images, batch.tau);
    require_finite(text_block);
    p.col_sum = block_pass(text_block, owned, batch.texts, batch.images, batch.tau, coef, grads.d_texts, grads.d_images);
    return p;
}

GradientPair zero_grads(const ContrastiveBatch& batch) {
    return {Matrix::Zero(batch.images.rows(), batch.images.cols()), Matrix::Zero(batch.texts.rows(), batch.texts.cols())};
}

double combine(const Partial& p, std::size_t n) {
    const double dn = static_cast<double>(n);
    return 0.5 * (p.row_sum / dn + p.col_sum / dn);
}

Matrix full_logits(const ContrastiveBatch& batch) {
    const auto n = batch.images.rows();
    Matrix s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) s(i, j) = dot(batch.images, i, batch.texts, j) / batch.tau;
    require_finite(s);
    return s;
}

}  // namespace

void ContrastiveBatch::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("contrastive batch: tau must be positive");
    if (images.rows() != texts.rows() || images.cols() != texts.cols())
        throw ShapeError("contrastive batch: image and text matrices differ in shape");
    if (images.rows() == 0 || images.cols() == 0) throw ShapeError("contrastive batch: empty batch");
    if (!images.allFinite() || !texts.allFinite()) throw NumericError("contrastive batch: non-finite embeddings");
    EmbeddingMatrix(images).require_normalized("contrastive batch images");
    EmbeddingMatrix(texts).require_normalized("contrastive batch texts");
}

double infonce_loss_from_logits(const Matrix& logits) {
    if (logits.rows() != logits.cols() || logits.rows() == 0) throw ShapeError("InfoNCE: logits must be square and non-empty");
    require_finite(logits);
    const auto n = logits.rows();
    Partial p;
    for (Eigen::Index i = 0; i < n; ++i) p.row_sum += log_sum_exp(logits.data() + i * n, n, 1) - logits(i, i);
    for (Eigen::Index j = 0; j < n; ++j) p.col_sum += log_sum_exp(logits.data() + j, n, n) - logits(j, j);
    return combine(p, static_cast<std::size_t>(n));
}

Matrix infonce_logit_grad(const Matrix& logits) {
    if (logits.rows() != logits.cols() || logits.rows() == 0) throw ShapeError("InfoNCE: logits must be square and non-empty");
    require_finite(logits);
    const auto n = logits.rows();
    const double coef = 0.5 / static_cast<double>(n);
    Matrix g = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lse = log_sum_exp(logits.data() + i * n, n, 1);
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) += coef * (std::exp(logits(i, j) - lse) - (i == j ? 1.0 : 0.0));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const double lse = log_sum_exp(logits.data() + j, n, n);
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) += coef * (std::exp(logits(i, j) - lse) - (i == j ? 1.0 : 0.0));
    }
    return g;
}

double infonce_loss(const ContrastiveBatch& batch) {
    batch.validate();
    return infonce_loss_from_logits(full_logits(batch));
}

GradientPair infonce_grad(const ContrastiveBatch& batch) {
    batch.validate();
    const Matrix s = full_logits(batch);
    const auto n = s.rows();
    const double coef = 0.5 / static_cast<double>(n);
    GradientPair grads = zero_grads(batch);

    std::vector<std::size_t> all(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    // Image->text rows of S, then text->image rows of S^T.
    block_pass(s, all, batch.images, batch.texts, batch.tau, coef, grads.d_images, grads.d_texts);
    const Matrix st = s.transpose();
    block_pass(st, all, batch.texts, batch.images, batch.tau, coef, grads.d_texts, grads.d_images);
    return grads;
}

std::size_t ShardLayout::local_size(std::size_t batch_size) const {
    if (workers < 1) throw LayoutError("shard layout: need at least one worker");
    if (batch_size % workers != 0)
        throw LayoutError("shard layout: " + std::to_string(workers) + " workers do not divide batch size " +
                          std::to_string(batch_size));
    return batch_size / workers;
}

std::vector<std::size_t> ShardLayout::members(std::size_t worker, std::size_t batch_size) const {
    const auto n = local_size(batch_size);
    if (worker >= workers) throw LayoutError("shard layout: worker index out of range");
    std::vector<std::size_t> out(n);
    for (std::size_t r = 0; r < n; ++r)
        out[r] = assignment == Assignment::Contiguous ? worker * n + r : r * workers + worker;
    return out;
}

ShardReport sharded_loss_grad(const ContrastiveBatch& batch, const ShardLayout& layout) {
    batch.validate();
    const auto big_n = batch.size();
    const auto n = layout.local_size(big_n);

    ShardReport report;
    report.grads = zero_grads(batch);
    Partial total;
    for (std::size_t w = 0; w < layout.workers; ++w) {
        GradientPair local = zero_grads(batch);
        Partial p = worker_contribution(batch, layout.members(w, big_n), local);
        total.row_sum += p.row_sum;
        total.col_sum += p.col_sum;
        report.grads.d_images += local.d_images;
        report.grads.d_texts += local.d_texts;
    }
    report.loss = combine(total, big_n);
    report.per_worker_similarity_entries = 2ULL * n * big_n;
    report.full_matrix_entries = static_cast<std::uint64_t>(big_n) * big_n;
    return report;
}

SimilarityMemory similarity_memory(std::uint64_t global_batch, std::uint64_t local_batch, std::uint64_t bytes_per_real) {
    if (local_batch == 0 || global_batch % local_batch != 0)
        throw LayoutError("similarity_memory: local batch must divide the global batch");
    SimilarityMemory m;
    m.full_matrix_entries = global_batch * global_batch;
    m.per_worker_entries = 2 * local_batch * global_batch;
    m.full_matrix_bytes = m.full_matrix_entries * bytes_per_real;
    m.per_worker_bytes = m.per_worker_entries * bytes_per_real;
    return m;
}

ContrastiveBatch random_batch(std::size_t n, std::size_t dim, double tau, std::uint64_t seed) {
    if (n == 0 || dim == 0) throw ShapeError("random_batch: empty shape");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    Matrix v(u.rows(), u.cols());
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        for (Eigen::Index k = 0; k < u.cols(); ++k) u(i, k) = normal(rng);
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index k = 0; k < v.cols(); ++k) v(i, k) = u(i, k) + 0.5 * normal(rng);
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        u.row(i).normalize();
        v.row(i).normalize();
    }
    return {std::move(u), std::move(v), tau};
}

}  // namespace clipscale
