#include <cctype>
#include <cmath>

#include "clipscale/dedup.hpp"
#include "clipscale/error.hpp"
#include "clipscale/text.hpp"

namespace clipscale {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

    long next_int() {
        skip_space_and_comments();
        long v = 0;
        std::size_t start = pos_;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000) throw ParseError("PNM: header value too large");
            ++pos_;
        }
        if (pos_ == start) throw ParseError("PNM: malformed header");
        return v;
    }

    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
            throw ParseError("PNM: missing whitespace before raster data");
        return pos_ + 1;
    }

    std::size_t pos_ = 2;

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
};

}  // namespace

ImageRaster parse_pnm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw ParseError("PNM: only binary P5/P6 images are supported");
    ImageRaster img;
    img.channels = bytes[1] == '5' ? 1 : 3;
    HeaderReader hr(bytes);
    img.width = static_cast<int>(hr.next_int());
    img.height = static_cast<int>(hr.next_int());
    const long maxval = hr.next_int();
    if (img.width < 1 || img.height < 1) throw ParseError("PNM: zero image dimension");
    if (maxval < 1 || maxval > 255) throw ParseError("PNM: maxval must be in [1, 255]");
    const auto offset = hr.raster_offset();
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) *
                          static_cast<std::size_t>(img.channels);
    if (bytes.size() - offset < n) throw ParseError("PNM: truncated raster");
    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = static_cast<unsigned char>(bytes[offset + i]);
        if (v > maxval) throw ParseError("PNM: sample exceeds maxval");
        img.pixels[i] = maxval == 255 ? v : static_cast<std::uint8_t>(std::lround(v * 255.0 / static_cast<double>(maxval)));
    }
    return img;
}

std::string serialize_pnm(const ImageRaster& image) {
    image.validate();
    std::string out = (image.channels == 1 ? "P5\n" : "P6\n") + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

ImageRaster load_pnm(const std::string& path) {
    try {
        return parse_pnm(text::read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace clipscale
