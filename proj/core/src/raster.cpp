#include "growseg/raster.hpp"

#include "growseg/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace growseg {

namespace {

void require_dims(int w, int h, int bands) {
    if (w <= 0 || h <= 0 || bands <= 0) {
        throw ValueError("raster dimensions must be positive, got " + std::to_string(w) + "x" +
                         std::to_string(h) + "x" + std::to_string(bands));
    }
}

void require_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValueError("raster contains a non-finite value");
        }
    }
}

int parse_positive(std::string_view key, std::string_view value) {
    int out = 0;
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || out <= 0) {
        throw ParseError("header key '" + std::string(key) + "' expects a positive integer, got '" +
                         std::string(value) + "'");
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// Reads an unsigned decimal token from a PNM header, skipping whitespace and
// `#` comments.
std::size_t pnm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    for (;;) {
        while (pos < bytes.size() && std::isspace(bytes[pos])) {
            ++pos;
        }
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') {
                ++pos;
            }
            continue;
        }
        break;
    }
    const std::size_t start = pos;
    std::size_t value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
        value = value * 10 + (bytes[pos] - '0');
        ++pos;
    }
    if (pos == start) {
        throw ParseError("malformed PGM header");
    }
    return value;
}

}  // namespace

Band::Band(int w, int h, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

Band::Band(int w, int h, std::vector<double> values)
    : width(w), height(h), data(std::move(values)) {
    if (data.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
        throw SizeError("band data length does not match width x height");
    }
}

MultiBandRaster::MultiBandRaster(int width, int height, int bands, double fill)
    : width_(width), height_(height), bands_(bands) {
    require_dims(width, height, bands);
    data_.assign(pixel_count() * static_cast<std::size_t>(bands), fill);
}

MultiBandRaster::MultiBandRaster(int width, int height, int bands, std::vector<double> data)
    : width_(width), height_(height), bands_(bands), data_(std::move(data)) {
    require_dims(width, height, bands);
    if (data_.size() != pixel_count() * static_cast<std::size_t>(bands)) {
        throw SizeError("raster data length " + std::to_string(data_.size()) +
                        " does not match width x height x bands");
    }
    require_finite(data_);
}

std::span<const double> MultiBandRaster::band(int b) const {
    if (b < 0 || b >= bands_) {
        throw ValueError("band index " + std::to_string(b) + " out of range");
    }
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(b) * pixel_count(),
                                                  pixel_count());
}

std::span<double> MultiBandRaster::band(int b) {
    if (b < 0 || b >= bands_) {
        throw ValueError("band index " + std::to_string(b) + " out of range");
    }
    return std::span<double>(data_).subspan(static_cast<std::size_t>(b) * pixel_count(),
                                            pixel_count());
}

Band MultiBandRaster::extract_band(int b) const {
    auto values = band(b);
    return Band(width_, height_, std::vector<double>(values.begin(), values.end()));
}

void MultiBandRaster::set_band(int b, const Band& values) {
    if (values.width != width_ || values.height != height_) {
        throw SizeError("band dimensions do not match raster");
    }
    require_finite(values.data);
    std::ranges::copy(values.data, band(b).begin());
}

std::string_view dtype_name(DType t) noexcept {
    switch (t) {
        case DType::u8: return "u8";
        case DType::u16: return "u16";
        case DType::f32le: return "f32le";
    }
    return "?";
}

std::size_t dtype_size(DType t) noexcept {
    switch (t) {
        case DType::u8: return 1;
        case DType::u16: return 2;
        case DType::f32le: return 4;
    }
    return 0;
}

std::size_t RasterHeader::data_bytes() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(bands) * dtype_size(dtype);
}

RasterHeader parse_header(std::string_view text) {
    RasterHeader h;
    bool seen_w = false, seen_h = false, seen_b = false, seen_t = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto sp = line.find_first_of(" \t");
        if (sp == std::string_view::npos) {
            throw ParseError("header line " + std::to_string(line_no) + ": missing value");
        }
        const auto key = line.substr(0, sp);
        const auto value = trim(line.substr(sp));
        if (key == "width") {
            h.width = parse_positive(key, value);
            seen_w = true;
        } else if (key == "height") {
            h.height = parse_positive(key, value);
            seen_h = true;
        } else if (key == "bands") {
            h.bands = parse_positive(key, value);
            seen_b = true;
        } else if (key == "dtype") {
            if (value == "u8") {
                h.dtype = DType::u8;
            } else if (value == "u16") {
                h.dtype = DType::u16;
            } else if (value == "f32le" || value == "f32") {
                h.dtype = DType::f32le;
            } else {
                throw ParseError("unknown dtype '" + std::string(value) + "'");
            }
            seen_t = true;
        } else if (key == "band_names") {
            std::istringstream in{std::string(value)};
            h.band_names.assign(std::istream_iterator<std::string>(in), {});
        } else {
            throw ParseError("unknown header key '" + std::string(key) + "'");
        }
    }
    if (!(seen_w && seen_h && seen_b && seen_t)) {
        throw ParseError("header must define width, height, bands and dtype");
    }
    if (!h.band_names.empty() && static_cast<int>(h.band_names.size()) != h.bands) {
        throw ParseError("band_names count does not match bands");
    }
    return h;
}

std::string format_header(const RasterHeader& header) {
    std::ostringstream out;
    out << "width " << header.width << '\n'
        << "height " << header.height << '\n'
        << "bands " << header.bands << '\n'
        << "dtype " << dtype_name(header.dtype) << '\n';
    if (!header.band_names.empty()) {
        out << "band_names";
        for (const auto& n : header.band_names) {
            out << ' ' << n;
        }
        out << '\n';
    }
    return out.str();
}

MultiBandRaster decode_raster(const RasterHeader& header, std::span<const std::uint8_t> bytes) {
    if (bytes.size() != header.data_bytes()) {
        throw SizeError("data file has " + std::to_string(bytes.size()) + " bytes, header implies " +
                        std::to_string(header.data_bytes()));
    }
    const std::size_t n = header.data_bytes() / dtype_size(header.dtype);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        switch (header.dtype) {
            case DType::u8:
                values[i] = bytes[i];
                break;
            case DType::u16:
                values[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
                break;
            case DType::f32le: {
                const std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i]) |
                                           (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                                           (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                                           (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
                const float f = std::bit_cast<float>(bits);
                if (!std::isfinite(f)) {
                    throw ValueError("non-finite f32 sample at index " + std::to_string(i));
                }
                values[i] = f;
                break;
            }
        }
    }
    return MultiBandRaster(header.width, header.height, header.bands, std::move(values));
}

std::vector<std::uint8_t> encode_raster(const MultiBandRaster& raster, DType dtype) {
    const auto& values = raster.data();
    std::vector<std::uint8_t> out;
    out.reserve(values.size() * dtype_size(dtype));
    for (double v : values) {
        switch (dtype) {
            case DType::u8:
                out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)));
                break;
            case DType::u16: {
                const auto s = static_cast<std::uint16_t>(std::clamp(std::lround(v), 0L, 65535L));
                out.push_back(static_cast<std::uint8_t>(s & 0xff));
                out.push_back(static_cast<std::uint8_t>(s >> 8));
                break;
            }
            case DType::f32le: {
                const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
                for (int k = 0; k < 4; ++k) {
                    out.push_back(static_cast<std::uint8_t>((bits >> (8 * k)) & 0xff));
                }
                break;
            }
        }
    }
    return out;
}

MultiBandRaster load_raster(const std::filesystem::path& header_path,
                            const std::filesystem::path& data_path) {
    const auto header = parse_header(read_text_file(header_path));
    const auto bytes = read_file_bytes(data_path);
    return decode_raster(header, bytes);
}

void save_raster(const MultiBandRaster& raster, const std::filesystem::path& header_path,
                 const std::filesystem::path& data_path, DType dtype,
                 const std::vector<std::string>& band_names) {
    RasterHeader h{raster.width(), raster.height(), raster.bands(), dtype, band_names};
    write_text_file(header_path, format_header(h));
    write_file_bytes(data_path, encode_raster(raster, dtype));
}

MultiBandRaster round_to_f32(const MultiBandRaster& raster) {
    std::vector<double> values(raster.data().size());
    std::ranges::transform(raster.data(), values.begin(),
                           [](double v) { return static_cast<double>(static_cast<float>(v)); });
    return MultiBandRaster(raster.width(), raster.height(), raster.bands(), std::move(values));
}

std::vector<std::uint8_t> encode_label_pgm(const LabelRaster& labels) {
    const std::string header = "P5\n" + std::to_string(labels.width) + " " +
                               std::to_string(labels.height) + "\n65535\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + labels.data.size() * 2);
    for (std::uint16_t v : labels.data) {
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

LabelRaster decode_label_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw ParseError("not a binary PGM (P5) file");
    }
    std::size_t pos = 2;
    const auto w = pnm_token(bytes, pos);
    const auto h = pnm_token(bytes, pos);
    const auto maxval = pnm_token(bytes, pos);
    if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
        throw ParseError("invalid PGM dimensions or maxval");
    }
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw ParseError("malformed PGM header");
    }
    ++pos;
    const std::size_t sample = maxval > 255 ? 2 : 1;
    const std::size_t n = w * h;
    if (bytes.size() - pos != n * sample) {
        throw SizeError("PGM payload length does not match its header");
    }
    LabelRaster out(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < n; ++i) {
        out.data[i] = sample == 2
                          ? static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1])
                          : bytes[pos + i];
    }
    return out;
}

void save_label_raster(const LabelRaster& labels, const std::filesystem::path& path) {
    write_file_bytes(path, encode_label_pgm(labels));
}

LabelRaster load_label_raster(const std::filesystem::path& path) {
    return decode_label_pgm(read_file_bytes(path));
}

std::vector<ValueRange> band_ranges(const MultiBandRaster& raster) {
    std::vector<ValueRange> ranges;
    ranges.reserve(static_cast<std::size_t>(raster.bands()));
    for (int b = 0; b < raster.bands(); ++b) {
        const auto [lo, hi] = std::ranges::minmax_element(raster.band(b));
        ranges.push_back({*lo, *hi});
    }
    return ranges;
}

MultiBandRaster normalize_bands(const MultiBandRaster& raster) {
    MultiBandRaster out = raster;
    const auto ranges = band_ranges(raster);
    for (int b = 0; b < raster.bands(); ++b) {
        const auto [lo, hi] = ranges[static_cast<std::size_t>(b)];
        const double span = hi - lo;
        for (double& v : out.band(b)) {
            v = span > 0.0 ? (v - lo) / span : 0.0;
        }
    }
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

}  // namespace growseg
