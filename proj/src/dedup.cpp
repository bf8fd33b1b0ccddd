#include "clipscale/dedup.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "clipscale/error.hpp"
#include "clipscale/text.hpp"
#include "json.hpp"

namespace clipscale {

void ImageRaster::validate() const {
    if (width < 1 || height < 1) throw ShapeError("image: width and height must be at least 1");
    if (channels != 1 && channels != 3) throw ShapeError("image: channels must be 1 or 3");
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(channels))
        throw ShapeError("image: pixel buffer length does not match width * height * channels");
}

std::vector<double> luminance(const ImageRaster& image) {
    image.validate();
    const std::size_t n = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
    std::vector<double> gray(n);
    if (image.channels == 1) {
        for (std::size_t i = 0; i < n; ++i) gray[i] = image.pixels[i];
        return gray;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto* p = &image.pixels[3 * i];
        gray[i] = std::round(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
    }
    return gray;
}

namespace {

// weights[o] lists (source index, overlap length) for output cell o.
std::vector<std::vector<std::pair<int, double>>> axis_weights(int in, int out) {
    std::vector<std::vector<std::pair<int, double>>> w(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (int o = 0; o < out; ++o) {
        const double a = o * scale;
        const double b = (o + 1) * scale;
        for (int s = static_cast<int>(std::floor(a)); s < in && s < b; ++s) {
            const double overlap = std::min(b, s + 1.0) - std::max(a, static_cast<double>(s));
            if (overlap > 0.0) w[static_cast<std::size_t>(o)].emplace_back(s, overlap);
        }
    }
    return w;
}

}  // namespace

std::vector<double> area_resize(std::span<const double> gray, int width, int height, int out_w, int out_h) {
    if (gray.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw ShapeError("area_resize: buffer length does not match dimensions");
    const auto wx = axis_weights(width, out_w);
    const auto wy = axis_weights(height, out_h);
    // Horizontal pass to height x out_w, then vertical.
    std::vector<double> tmp(static_cast<std::size_t>(height) * static_cast<std::size_t>(out_w));
    for (int y = 0; y < height; ++y) {
        for (int ox = 0; ox < out_w; ++ox) {
            double acc = 0.0, total = 0.0;
            for (auto [sx, w] : wx[static_cast<std::size_t>(ox)]) {
                acc += w * gray[static_cast<std::size_t>(y) * width + sx];
                total += w;
            }
            tmp[static_cast<std::size_t>(y) * out_w + ox] = acc / total;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(out_w) * static_cast<std::size_t>(out_h));
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            double acc = 0.0, total = 0.0;
            for (auto [sy, w] : wy[static_cast<std::size_t>(oy)]) {
                acc += w * tmp[static_cast<std::size_t>(sy) * out_w + ox];
                total += w;
            }
            out[static_cast<std::size_t>(oy) * out_w + ox] = acc / total;
        }
    }
    return out;
}

std::vector<double> dct2d(std::span<const double> block, int n) {
    if (block.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw ShapeError("dct2d: block must be n x n");
    const auto un = static_cast<std::size_t>(n);
    std::vector<double> basis(un * un);
    for (int k = 0; k < n; ++k) {
        const double a = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (int i = 0; i < n; ++i)
            basis[static_cast<std::size_t>(k) * un + i] = a * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
    // rows: tmp(y, v) = sum_x X(y, x) C(v, x); then out(u, v) = sum_y C(u, y) tmp(y, v)
    std::vector<double> tmp(un * un, 0.0);
    for (std::size_t y = 0; y < un; ++y)
        for (std::size_t v = 0; v < un; ++v) {
            double s = 0.0;
            for (std::size_t x = 0; x < un; ++x) s += block[y * un + x] * basis[v * un + x];
            tmp[y * un + v] = s;
        }
    std::vector<double> out(un * un, 0.0);
    for (std::size_t u = 0; u < un; ++u)
        for (std::size_t v = 0; v < un; ++v) {
            double s = 0.0;
            for (std::size_t y = 0; y < un; ++y) s += basis[u * un + y] * tmp[y * un + v];
            out[u * un + v] = std::abs(s) < kDctZeroTolerance ? 0.0 : s;
        }
    return out;
}

HashCode threshold_coefficients(std::span<const double> coefficients, int n) {
    if (n < kHashBlock || coefficients.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw ShapeError("threshold_coefficients: expected an n x n array with n >= 8");
    std::array<double, kHashBlock * kHashBlock> low{};
    for (int u = 0; u < kHashBlock; ++u)
        for (int v = 0; v < kHashBlock; ++v)
            low[static_cast<std::size_t>(u * kHashBlock + v)] = coefficients[static_cast<std::size_t>(u) * n + v];
    std::array<double, low.size() - 1> ac{};
    std::copy(low.begin() + 1, low.end(), ac.begin());
    std::nth_element(ac.begin(), ac.begin() + ac.size() / 2, ac.end());
    const double median = ac[ac.size() / 2];
    HashCode h;
    for (std::size_t i = 0; i < low.size(); ++i)
        if (low[i] > median) h.bits |= std::uint64_t{1} << (63 - i);
    return h;
}

HashCode phash(const ImageRaster& image) {
    auto gray = luminance(image);
    auto small = area_resize(gray, image.width, image.height, kHashSide, kHashSide);
    return threshold_coefficients(dct2d(small, kHashSide), kHashSide);
}

int hamming(HashCode a, HashCode b) { return std::popcount(a.bits ^ b.bits); }

std::string to_hex(HashCode h) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 0; i < 16; ++i) s[static_cast<std::size_t>(15 - i)] = digits[(h.bits >> (4 * i)) & 0xF];
    return s;
}

HashCode parse_hash_hex(std::string_view s) {
    s = text::trim(s);
    if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
    if (s.empty() || s.size() > 16) throw ParseError("hash must be 1-16 hex digits, got '" + std::string(s) + "'");
    HashCode h;
    for (char c : s) {
        int d = 0;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else throw ParseError("invalid hex digit in hash '" + std::string(s) + "'");
        h.bits = (h.bits << 4) | static_cast<std::uint64_t>(d);
    }
    return h;
}

std::vector<HashEntry> parse_hash_file(std::string_view text) {
    auto lines = text::data_lines(text);
    std::vector<HashEntry> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto f = text::split(lines[i].content, ',');
        if (i == 0 && f.size() == 2 && f[0] == "id" && f[1] == "hash_hex") continue;
        if (f.size() != 2 || f[0].empty())
            throw ParseError("hash file line " + std::to_string(lines[i].number) + ": expected 'id,hash_hex'");
        try {
            out.push_back({std::string(f[0]), parse_hash_hex(f[1])});
        } catch (const ParseError& e) {
            throw ParseError("hash file line " + std::to_string(lines[i].number) + ": " + e.what());
        }
    }
    return out;
}

std::string serialize_hash_file(std::span<const HashEntry> entries) {
    std::ostringstream out;
    out << "id,hash_hex\n";
    for (const auto& e : entries) out << e.id << ',' << to_hex(e.hash) << '\n';
    return out.str();
}

namespace {

constexpr int kChunks = 4;

std::uint16_t chunk(HashCode h, int c) { return static_cast<std::uint16_t>(h.bits >> (16 * c)); }

// Calls f(v) for every 16-bit v within Hamming distance `radius` of `center`.
template <typename F>
void flip_from(std::uint16_t value, int first_bit, int flips_left, F& f) {
    f(value);
    if (flips_left == 0) return;
    for (int b = first_bit; b < 16; ++b)
        flip_from(static_cast<std::uint16_t>(value ^ (1u << b)), b + 1, flips_left - 1, f);
}

template <typename F>
void for_each_within(std::uint16_t center, int radius, F&& f) {
    flip_from(center, 0, std::min(radius, 16), f);
}

// Number of 16-bit keys within `radius` of a fixed key.
std::size_t ball_size(int radius) {
    std::size_t total = 0, binom = 1;
    for (int r = 0; r <= std::min(radius, 16); ++r) {
        total += binom;
        binom = binom * static_cast<std::size_t>(16 - r) / static_cast<std::size_t>(r + 1);
    }
    return total;
}

}  // namespace

HashIndex::HashIndex(std::span<const HashCode> codes) : codes_(codes.begin(), codes.end()) {
    for (std::size_t i = 0; i < codes_.size(); ++i)
        for (int c = 0; c < kChunks; ++c) tables_[static_cast<std::size_t>(c)][chunk(codes_[i], c)].push_back(i);
}

long HashIndex::nearest_within(HashCode query, int threshold, int* distance) const {
    const int radius = threshold / kChunks;
    long best = -1;
    int best_d = 65;
    auto consider = [&](std::size_t i) {
        int d = hamming(query, codes_[i]);
        if (d > threshold) return;
        if (d < best_d || (d == best_d && static_cast<long>(i) < best)) {
            best_d = d;
            best = static_cast<long>(i);
        }
    };
    if (kChunks * ball_size(radius) >= codes_.size()) {
        for (std::size_t i = 0; i < codes_.size(); ++i) consider(i);
        if (distance && best >= 0) *distance = best_d;
        return best;
    }
    for (int c = 0; c < kChunks; ++c) {
        const auto& table = tables_[static_cast<std::size_t>(c)];
        if (table.empty()) continue;
        for_each_within(chunk(query, c), radius, [&](std::uint16_t key) {
            auto it = table.find(key);
            if (it == table.end()) return;
            for (auto i : it->second) consider(i);
        });
    }
    if (distance && best >= 0) *distance = best_d;
    return best;
}

OverlapReport overlap_report(std::span<const HashCode> hashes_a, std::span<const HashCode> hashes_b, int threshold,
                             MatchStrategy strategy) {
    if (threshold < 0 || threshold > 64) throw RangeError("overlap_report: threshold must be in [0, 64]");
    if (hashes_b.empty()) throw DegeneracyError("overlap_report: B is empty, overlap ratio undefined");

    OverlapReport r;
    r.total_b = hashes_b.size();
    r.threshold = threshold;
    if (strategy == MatchStrategy::ChunkIndex) {
        HashIndex index(hashes_a);
        for (std::size_t b = 0; b < hashes_b.size(); ++b) {
            int d = 0;
            long a = index.nearest_within(hashes_b[b], threshold, &d);
            if (a >= 0) r.matches.push_back({b, static_cast<std::size_t>(a), d});
        }
    } else {
        for (std::size_t b = 0; b < hashes_b.size(); ++b) {
            std::size_t best = 0;
            int best_d = 65;
            for (std::size_t a = 0; a < hashes_a.size(); ++a) {
                int d = hamming(hashes_a[a], hashes_b[b]);
                if (d < best_d) {
                    best_d = d;
                    best = a;
                }
            }
            if (best_d <= threshold) r.matches.push_back({b, best, best_d});
        }
    }
    r.matched_b = r.matches.size();
    r.overlap_percent = 100.0 * static_cast<double>(r.matched_b) / static_cast<double>(r.total_b);
    return r;
}

std::string overlap_report_json(const OverlapReport& report) {
    nlohmann::ordered_json o;
    o["total_b"] = report.total_b;
    o["matched_b"] = report.matched_b;
    o["overlap_percent"] = report.overlap_percent;
    o["threshold"] = report.threshold;
    auto matches = nlohmann::ordered_json::array();
    for (const auto& m : report.matches) {
        nlohmann::ordered_json mo;
        mo["index_b"] = m.index_b;
        mo["index_a"] = m.index_a;
        mo["distance"] = m.distance;
        matches.push_back(std::move(mo));
    }
    o["matches"] = std::move(matches);
    return o.dump(2) + "\n";
}

}  // namespace clipscale
