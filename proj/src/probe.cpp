#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "clipscale/error.hpp"
#include "clipscale/evalproto.hpp"
#include "clipscale/text.hpp"

namespace clipscale {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-8;

// Fisher-Yates driven by raw engine output.
void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

std::string describe(double lr, int epochs) {
    return "lr=" + text::format_double(lr) + ", epochs=" + std::to_string(epochs);
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

}  // namespace

void ProbeConfig::validate() const {
    if (learning_rates.empty() || epochs.empty()) throw RangeError("probe sweep sets must be non-empty");
    for (double lr : learning_rates)
        if (!(lr > 0.0)) throw RangeError("probe learning rates must be positive");
    for (int e : epochs)
        if (e < 1) throw RangeError("probe epoch counts must be positive");
    if (batch_size < 1) throw RangeError("probe batch size must be positive");
}

LossAndGrad softmax_cross_entropy(const Matrix& weights, const Matrix& x, std::span<const std::size_t> labels) {
    if (x.cols() != weights.rows()) throw ShapeError("softmax_cross_entropy: feature dim does not match weights");
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ShapeError("softmax_cross_entropy: label count mismatch");
    if (x.rows() == 0) throw DegeneracyError("softmax_cross_entropy: empty batch");
    const Matrix logits = x * weights;
    Matrix probs(logits.rows(), logits.cols());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
        if (y >= logits.cols()) throw LookupError("softmax_cross_entropy: label out of range");
        const double m = logits.row(i).maxCoeff();
        double z = 0.0;
        for (Eigen::Index j = 0; j < logits.cols(); ++j) z += std::exp(logits(i, j) - m);
        const double lse = m + std::log(z);
        loss += lse - logits(i, y);
        for (Eigen::Index j = 0; j < logits.cols(); ++j) probs(i, j) = std::exp(logits(i, j) - lse);
        probs(i, y) -= 1.0;
    }
    const double n = static_cast<double>(x.rows());
    return {loss / n, x.transpose() * probs / n};
}

double probe_accuracy(const Matrix& weights, const EmbeddingMatrix& features, std::span<const std::size_t> labels) {
    if (labels.size() != features.rows()) throw ShapeError("probe_accuracy: label count mismatch");
    if (labels.empty()) return 0.0;
    const Matrix logits = features.values() * weights;
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < logits.cols(); ++j)
            if (logits(i, j) > logits(i, best)) best = j;
        correct += static_cast<std::size_t>(best) == labels[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

namespace {

struct RunOutcome {
    Matrix weights;
    std::vector<double> epoch_losses;
};

RunOutcome train_one(const Matrix& x, std::span<const std::size_t> y, std::size_t n_labels, double lr, int epochs,
                     const ProbeConfig& config) {
    Matrix w = Matrix::Zero(x.cols(), static_cast<Eigen::Index>(n_labels));
    Matrix m = Matrix::Zero(w.rows(), w.cols());
    Matrix v = Matrix::Zero(w.rows(), w.cols());
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> batch_labels;
    long step = 0;
    RunOutcome out;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        seeded_shuffle(order, rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto end = std::min(order.size(), start + config.batch_size);
            std::span<const std::size_t> idx(order.data() + start, end - start);
            batch_labels.clear();
            for (auto i : idx) batch_labels.push_back(y[i]);
            auto [loss, g] = softmax_cross_entropy(w, gather_rows(x, idx), batch_labels);
            if (!std::isfinite(loss) || !g.allFinite())
                throw DivergenceError("linear probe diverged (" + describe(lr, epochs) + ")");
            ++step;
            m = kBeta1 * m + (1.0 - kBeta1) * g;
            v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
            const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEpsilon);
        }
        const double epoch_loss = softmax_cross_entropy(w, x, y).loss;
        if (!std::isfinite(epoch_loss) || !w.allFinite())
            throw DivergenceError("linear probe diverged (" + describe(lr, epochs) + ")");
        out.epoch_losses.push_back(epoch_loss);
    }
    out.weights = std::move(w);
    return out;
}

}  // namespace

ProbeResult train_linear_probe(LabeledFeatures train, LabeledFeatures eval, const ProbeConfig& config) {
    config.validate();
    if (train.labels.size() != train.features.rows()) throw ShapeError("probe: train label count mismatch");
    if (eval.labels.size() != eval.features.rows()) throw ShapeError("probe: eval label count mismatch");
    if (eval.features.dim() != train.features.dim()) throw ShapeError("probe: train and eval dims differ");
    if (train.labels.empty()) throw DegeneracyError("probe: empty training set");

    std::size_t n_labels = 0;
    for (auto l : train.labels) n_labels = std::max(n_labels, l + 1);
    std::vector<std::size_t> distinct(train.labels.begin(), train.labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) throw DegeneracyError("probe: training labels contain a single class");
    for (auto l : eval.labels)
        if (l >= n_labels) throw LookupError("probe: eval label " + std::to_string(l) + " never seen in training");

    ProbeResult best;
    bool have = false;
    for (double lr : config.learning_rates) {
        for (int epochs : config.epochs) {
            auto run = train_one(train.features.values(), train.labels, n_labels, lr, epochs, config);
            double eval_acc = probe_accuracy(run.weights, eval.features, eval.labels);
            if (!have || eval_acc > best.eval_accuracy_percent) {
                best.weights = std::move(run.weights);
                best.learning_rate = lr;
                best.epochs = epochs;
                best.eval_accuracy_percent = eval_acc;
                best.train_accuracy_percent = probe_accuracy(best.weights, train.features, train.labels);
                best.epoch_losses = std::move(run.epoch_losses);
                have = true;
            }
        }
    }
    return best;
}

std::vector<std::size_t> few_shot_indices(std::span<const std::size_t> labels, std::size_t shots, std::uint64_t seed) {
    if (shots == 0) throw RangeError("few_shot_indices: shots must be positive");
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    seeded_shuffle(order, rng);
    std::size_t n_labels = 0;
    for (auto l : labels) n_labels = std::max(n_labels, l + 1);
    std::vector<std::size_t> taken(n_labels, 0);
    std::vector<std::size_t> out;
    for (auto i : order) {
        if (taken[labels[i]] < shots) {
            ++taken[labels[i]];
            out.push_back(i);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace clipscale
