#pragma once

#include "growseg/prng.hpp"
#include "growseg/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace growseg {

/// Axis-aligned rectangle [x0, x1) x [y0, y1) with per-band means.
struct SyntheticRegion {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;
    std::vector<double> means;
};

/// Test-image description. Regions are painted in order over the optional
/// background; every pixel must end up covered. Truth labels are 1-based
/// class ids: the background (when present) is 1, regions follow.
struct SyntheticSpec {
    int width = 64;
    int height = 64;
    int bands = 4;
    DType dtype = DType::f32le;
    double noise_sigma = 1.0;
    std::uint64_t seed = 0;
    std::optional<std::vector<double>> background;
    std::vector<SyntheticRegion> regions;

    std::filesystem::path output_header;
    std::filesystem::path output_data;
    std::filesystem::path truth;
};

struct SyntheticImage {
    MultiBandRaster raster;
    LabelRaster truth;
};

/// Means plus Gaussian noise (Box-Muller on Prng), then rounded the way
/// `dtype` stores values, so the file and the in-memory raster agree.
SyntheticImage generate_synthetic(const SyntheticSpec& spec);

SyntheticSpec synthetic_spec_from_json(std::string_view text);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

/// Writes raster header/data and the truth PGM named in the spec.
SyntheticImage write_synthetic(const SyntheticSpec& spec);

/// Random guillotine tiling of the image into `n_regions` rectangles (each
/// side >= min_side). Per band, the region means are a shuffled ladder
/// base, base + step, ... so any two regions differ by >= step in every band.
SyntheticSpec random_tiling_spec(Prng& prng, int width, int height, int bands, int n_regions,
                                 double noise_sigma, double step, double base, int min_side = 16);

double standard_normal(Prng& prng) noexcept;

}  // namespace growseg
