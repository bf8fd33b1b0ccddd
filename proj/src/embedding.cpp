#include "clipscale/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "clipscale/error.hpp"
#include "clipscale/text.hpp"

namespace clipscale {

static_assert(std::endian::native == std::endian::little, "binary matrices assume a little-endian host");

EmbeddingMatrix::EmbeddingMatrix(Matrix values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw NumericError("embedding matrix has non-finite entries");
}

EmbeddingMatrix EmbeddingMatrix::normalized() const {
    Matrix out = values_;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        double n = out.row(i).norm();
        if (!(n > 0.0)) throw DegeneracyError("cannot normalize zero row " + std::to_string(i));
        out.row(i) /= n;
    }
    return EmbeddingMatrix(std::move(out));
}

bool EmbeddingMatrix::is_normalized(double tol) const {
    for (Eigen::Index i = 0; i < values_.rows(); ++i)
        if (std::abs(values_.row(i).norm() - 1.0) > tol) return false;
    return true;
}

void EmbeddingMatrix::require_normalized(std::string_view what, double tol) const {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        double n = values_.row(i).norm();
        if (std::abs(n - 1.0) > tol)
            throw ShapeError(std::string(what) + ": row " + std::to_string(i) + " has norm " +
                             text::format_double(n) + ", expected unit norm");
    }
}

namespace {

std::pair<std::size_t, std::size_t> parse_header(std::string_view line) {
    std::istringstream in{std::string(line)};
    long long rows = -1, dim = -1;
    std::string extra;
    if (!(in >> rows >> dim) || (in >> extra) || rows < 0 || dim < 0)
        throw ParseError("matrix header must be 'rows dim', got '" + std::string(line) + "'");
    return {static_cast<std::size_t>(rows), static_cast<std::size_t>(dim)};
}

}  // namespace

EmbeddingMatrix parse_embedding_text(std::string_view text) {
    auto lines = text::data_lines(text);
    if (lines.empty()) throw ParseError("matrix: missing 'rows dim' header");
    auto [rows, dim] = parse_header(lines.front().content);
    if (lines.size() - 1 != rows)
        throw ParseError("matrix: header declares " + std::to_string(rows) + " rows, found " +
                         std::to_string(lines.size() - 1));
    Matrix m(rows, dim);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& line = lines[r + 1];
        auto fields = text::split(line.content, ',');
        if (fields.size() != dim)
            throw ParseError("matrix line " + std::to_string(line.number) + ": expected " + std::to_string(dim) +
                             " values, found " + std::to_string(fields.size()));
        for (std::size_t c = 0; c < dim; ++c) {
            auto v = text::parse_double(fields[c]);
            if (!v || !std::isfinite(*v))
                throw ParseError("matrix line " + std::to_string(line.number) + ", column " + std::to_string(c) +
                                 ": not a finite number");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
        }
    }
    return EmbeddingMatrix(std::move(m));
}

EmbeddingMatrix parse_embedding_binary(std::string_view bytes) {
    auto nl = bytes.find('\n');
    if (nl == std::string_view::npos) throw ParseError("binary matrix: missing header line");
    auto [rows, dim] = parse_header(bytes.substr(0, nl));
    auto payload = bytes.substr(nl + 1);
    if (payload.size() != rows * dim * sizeof(double))
        throw ParseError("binary matrix: expected " + std::to_string(rows * dim * sizeof(double)) +
                         " payload bytes, found " + std::to_string(payload.size()));
    Matrix m(rows, dim);
    if (!payload.empty()) std::memcpy(m.data(), payload.data(), payload.size());
    if (!m.allFinite()) throw ParseError("binary matrix: non-finite entries");
    return EmbeddingMatrix(std::move(m));
}

std::string serialize_embedding_text(const EmbeddingMatrix& m) {
    std::ostringstream out;
    out << m.rows() << ' ' << m.dim() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.dim(); ++c) {
            if (c) out << ',';
            out << text::format_double(m.values()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
        out << '\n';
    }
    return out.str();
}

std::string serialize_embedding_binary(const EmbeddingMatrix& m) {
    std::string out = std::to_string(m.rows()) + " " + std::to_string(m.dim()) + "\n";
    const auto* data = reinterpret_cast<const char*>(m.values().data());
    out.append(data, m.rows() * m.dim() * sizeof(double));
    return out;
}

EmbeddingMatrix load_embedding(const std::string& path) {
    auto content = text::read_file(path);
    try {
        return path.ends_with(".bin") ? parse_embedding_binary(content) : parse_embedding_text(content);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_embedding(const std::string& path, const EmbeddingMatrix& m) {
    text::write_file(path, path.ends_with(".bin") ? serialize_embedding_binary(m) : serialize_embedding_text(m));
}

std::vector<std::pair<std::size_t, std::size_t>> parse_index_pairs(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    auto lines = text::data_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto f = text::split(lines[i].content, ',');
        std::optional<std::uint64_t> a, b;
        if (f.size() == 2) {
            a = text::parse_u64(f[0]);
            b = text::parse_u64(f[1]);
        }
        if (!a || !b) {
            if (i == 0) continue;  // header
            throw ParseError("index pairs line " + std::to_string(lines[i].number) +
                             ": expected two non-negative integers");
        }
        out.emplace_back(static_cast<std::size_t>(*a), static_cast<std::size_t>(*b));
    }
    return out;
}

std::string serialize_index_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                  std::string_view header) {
    std::ostringstream out;
    out << header << '\n';
    for (const auto& [a, b] : pairs) out << a << ',' << b << '\n';
    return out.str();
}

}  // namespace clipscale
