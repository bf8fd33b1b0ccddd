#pragma once

// DCT perceptual hashing and Hamming-threshold overlap between image sets.
//
// Hash pipeline (the reference definition used throughout):
//   1. luminance: round(0.299 R + 0.587 G + 0.114 B), single-channel input as is
//   2. area-average resample to 32 x 32
//   3. orthonormal 2-D DCT-II; coefficients with |c| < 1e-6 are taken as 0
//   4. keep the top-left 8 x 8 block, row-major (DC first)
//   5. median m of the 63 non-DC coefficients (the 32nd smallest)
//   6. bit i set iff coefficient i > m; coefficient 0 lands in the most
//      significant bit

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace clipscale {

struct ImageRaster {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 (gray) or 3 (RGB)
    std::vector<std::uint8_t> pixels;  // row-major, interleaved channels

    void validate() const;  // throws ShapeError
};

struct HashCode {
    std::uint64_t bits = 0;

    friend bool operator==(HashCode, HashCode) = default;
};

inline constexpr int kHashSide = 32;
inline constexpr int kHashBlock = 8;
inline constexpr double kDctZeroTolerance = 1e-6;
inline constexpr int kDefaultMatchThreshold = 10;

std::vector<double> luminance(const ImageRaster& image);
// Area-weighted average onto a target grid; handles up- and down-sampling.
std::vector<double> area_resize(std::span<const double> gray, int width, int height, int out_w, int out_h);
// Orthonormal separable 2-D DCT-II of an n x n row-major block.
std::vector<double> dct2d(std::span<const double> block, int n);
// Steps 4-6 of the pipeline applied to a 32 x 32 coefficient array.
HashCode threshold_coefficients(std::span<const double> coefficients, int n);

HashCode phash(const ImageRaster& image);

int hamming(HashCode a, HashCode b);

std::string to_hex(HashCode h);      // 16 lower-case hex digits
HashCode parse_hash_hex(std::string_view s);  // throws ParseError

struct HashEntry {
    std::string id;
    HashCode hash;
};

// CSV "id,hash_hex".
std::vector<HashEntry> parse_hash_file(std::string_view text);
std::string serialize_hash_file(std::span<const HashEntry> entries);

struct Match {
    std::size_t index_b = 0;
    std::size_t index_a = 0;
    int distance = 0;
};

struct OverlapReport {
    std::size_t total_b = 0;
    std::size_t matched_b = 0;
    double overlap_percent = 0.0;
    int threshold = 0;
    std::vector<Match> matches;  // ascending index_b
};

// Multi-index lookup over A: each code is split into four 16-bit chunks with
// one bucket table per chunk. Any code within distance t of a query agrees
// with it to within floor(t / 4) bits on at least one chunk, so probing that
// radius finds every candidate the exhaustive scan would. Queries whose probe
// count would reach the size of A scan A directly.
class HashIndex {
public:
    explicit HashIndex(std::span<const HashCode> codes);

    // Index of the nearest code within `threshold` (lowest index on ties), or
    // -1 when none qualifies.
    long nearest_within(HashCode query, int threshold, int* distance = nullptr) const;

private:
    std::vector<HashCode> codes_;
    std::array<std::unordered_map<std::uint16_t, std::vector<std::size_t>>, 4> tables_;
};

enum class MatchStrategy { Exhaustive, ChunkIndex };

// For each b: the nearest a (first encountered on ties); b counts as matched
// when that distance is <= threshold. Throws DegeneracyError on empty B and
// RangeError for a threshold outside [0, 64].
OverlapReport overlap_report(std::span<const HashCode> hashes_a, std::span<const HashCode> hashes_b, int threshold,
                             MatchStrategy strategy = MatchStrategy::Exhaustive);

std::string overlap_report_json(const OverlapReport& report);

// Portable pixmap, binary P5 (gray) or P6 (RGB), maxval <= 255.
ImageRaster parse_pnm(std::string_view bytes);
std::string serialize_pnm(const ImageRaster& image);
ImageRaster load_pnm(const std::string& path);

}  // namespace clipscale
