#include "clipscale/text.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "clipscale/error.hpp"

namespace clipscale::text {

std::vector<Line> data_lines(std::string_view text) {
    std::vector<Line> out;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++number;
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        auto t = trim(line);
        if (!t.empty() && t.front() != '#') out.push_back({number, line});
        if (end == text.size()) break;
        pos = end + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto end = s.find(sep, pos);
        if (end == std::string_view::npos) {
            out.push_back(trim(s.substr(pos)));
            break;
        }
        out.push_back(trim(s.substr(pos, end - pos)));
        pos = end + 1;
    }
    return out;
}

namespace {

template <typename T>
std::optional<T> parse_whole(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

}  // namespace

std::optional<double> parse_double(std::string_view s) { return parse_whole<double>(s); }
std::optional<std::uint64_t> parse_u64(std::string_view s) { return parse_whole<std::uint64_t>(s); }
std::optional<std::int64_t> parse_i64(std::string_view s) { return parse_whole<std::int64_t>(s); }

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw NumericError("cannot format value");
    return std::string(buf.data(), ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open file", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot write file", path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw_io("write failed", path);
}

}  // namespace clipscale::text
