#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace growseg {

/// Single-channel grid of real values, row-major.
struct Band {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Band() = default;
    Band(int w, int h, double fill = 0.0);
    Band(int w, int h, std::vector<double> values);

    std::size_t size() const noexcept { return data.size(); }
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    double& at(int x, int y) noexcept { return data[index(x, y)]; }
    double at(int x, int y) const noexcept { return data[index(x, y)]; }

    bool operator==(const Band&) const = default;
};

/// width x height x bands grid stored band-sequential: band 0 row-major,
/// then band 1, and so on.
class MultiBandRaster {
public:
    MultiBandRaster() = default;
    MultiBandRaster(int width, int height, int bands, double fill = 0.0);
    MultiBandRaster(int width, int height, int bands, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int bands() const noexcept { return bands_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    std::span<const double> band(int b) const;
    std::span<double> band(int b);
    Band extract_band(int b) const;
    void set_band(int b, const Band& values);

    double at(int x, int y, int b) const noexcept {
        return data_[static_cast<std::size_t>(b) * pixel_count() +
                     static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                     static_cast<std::size_t>(x)];
    }

    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const MultiBandRaster&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    int bands_ = 0;
    std::vector<double> data_;
};

/// Final segmentation. 0 is reserved for "unlabeled", segments use 1..65535.
struct LabelRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> data;

    LabelRaster() = default;
    LabelRaster(int w, int h, std::uint16_t fill = 0)
        : width(w), height(h),
          data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    std::uint16_t at(int x, int y) const noexcept { return data[index(x, y)]; }
    std::uint16_t& at(int x, int y) noexcept { return data[index(x, y)]; }

    bool operator==(const LabelRaster&) const = default;
};

enum class DType { u8, u16, f32le };

std::string_view dtype_name(DType t) noexcept;
std::size_t dtype_size(DType t) noexcept;

/// Sidecar text header: `key value` lines, order-insensitive, `#` comments.
struct RasterHeader {
    int width = 0;
    int height = 0;
    int bands = 0;
    DType dtype = DType::u8;
    std::vector<std::string> band_names;

    std::size_t data_bytes() const noexcept;
};

RasterHeader parse_header(std::string_view text);
std::string format_header(const RasterHeader& header);

/// Decodes band-sequential raw bytes. u8/u16 are widened without rescaling.
MultiBandRaster decode_raster(const RasterHeader& header, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_raster(const MultiBandRaster& raster, DType dtype);

MultiBandRaster load_raster(const std::filesystem::path& header_path,
                            const std::filesystem::path& data_path);
void save_raster(const MultiBandRaster& raster, const std::filesystem::path& header_path,
                 const std::filesystem::path& data_path, DType dtype,
                 const std::vector<std::string>& band_names = {});

/// Rounds every value to the nearest binary32, i.e. what an f32le
/// save/load cycle would produce.
MultiBandRaster round_to_f32(const MultiBandRaster& raster);

/// Binary PGM (P5), maxval 65535, big-endian samples.
void save_label_raster(const LabelRaster& labels, const std::filesystem::path& path);
LabelRaster load_label_raster(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_label_pgm(const LabelRaster& labels);
LabelRaster decode_label_pgm(std::span<const std::uint8_t> bytes);

/// Per-band min-max scaling to [0,1]; constant bands become all zeros.
MultiBandRaster normalize_bands(const MultiBandRaster& raster);

struct ValueRange {
    double min = 0.0;
    double max = 0.0;
};
std::vector<ValueRange> band_ranges(const MultiBandRaster& raster);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace growseg
