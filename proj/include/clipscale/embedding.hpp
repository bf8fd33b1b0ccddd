#pragma once

// Dense embedding matrices (one row per item) and their fixture files.
//
// Text format: first line "rows dim", then one comma-separated row per line.
// Binary format (".bin"): the same ASCII header line terminated by '\n',
// followed by rows*dim little-endian IEEE-754 doubles in row-major order.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace clipscale {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class EmbeddingMatrix {
public:
    static constexpr double kUnitTolerance = 1e-6;

    EmbeddingMatrix() = default;
    // Throws NumericError on non-finite entries.
    explicit EmbeddingMatrix(Matrix values);

    // Copy with every row scaled to unit L2 norm; throws DegeneracyError on a
    // zero row.
    EmbeddingMatrix normalized() const;
    bool is_normalized(double tol = kUnitTolerance) const;
    // Throws ShapeError naming `what` unless every row has norm 1 +- tol.
    void require_normalized(std::string_view what, double tol = kUnitTolerance) const;

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }
    const Matrix& values() const { return values_; }
    auto row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)); }

private:
    Matrix values_;
};

EmbeddingMatrix parse_embedding_text(std::string_view text);
EmbeddingMatrix parse_embedding_binary(std::string_view bytes);
std::string serialize_embedding_text(const EmbeddingMatrix& m);
std::string serialize_embedding_binary(const EmbeddingMatrix& m);

// Dispatches on the ".bin" suffix.
EmbeddingMatrix load_embedding(const std::string& path);
void save_embedding(const std::string& path, const EmbeddingMatrix& m);

// Two-column integer CSV such as "query_index,candidate_index". A first line
// that does not parse as integers is treated as a header.
std::vector<std::pair<std::size_t, std::size_t>> parse_index_pairs(std::string_view text);
std::string serialize_index_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                  std::string_view header);

}  // namespace clipscale
