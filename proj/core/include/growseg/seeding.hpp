#pragma once

#include "growseg/morphology.hpp"
#include "growseg/raster.hpp"

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace growseg {

struct PixelCoord {
    int x = 0;
    int y = 0;
    auto operator<=>(const PixelCoord&) const = default;
};

/// One 8-connected group of seed pixels. `descriptor` holds the per-band
/// mode (raw units) followed by the mean NDVI over the region.
struct SeedRegion {
    int id = 0;
    std::vector<PixelCoord> pixels;
    std::vector<double> descriptor;
    std::optional<int> cluster_label;

    bool operator==(const SeedRegion&) const = default;
};

struct SeedSet {
    int width = 0;
    int height = 0;
    std::vector<SeedRegion> regions;

    bool operator==(const SeedSet&) const = default;
};

inline constexpr int kModeBins = 256;

/// Maximal 8-connected components of the true pixels. Ids are 1..n in
/// raster-scan order of each component's first pixel; pixel lists are in
/// raster-scan order.
SeedSet connected_components(const BinaryMask& mask);

/// Drops regions with fewer than `min_seed_size` pixels and re-densifies
/// ids. Throws EmptySeedsError when nothing survives.
SeedSet prune_small(SeedSet seeds, std::size_t min_seed_size);

/// (NIR - Red) / (NIR + Red) on raw values, 0 where the denominator is 0.
Band ndvi(const MultiBandRaster& raster, int red_band, int nir_band);

/// Per-band histogram mode (kModeBins equal-width bins over the band's
/// global range, bin centre reported, ties to the lowest bin) plus the mean
/// NDVI over the region.
std::vector<double> seed_descriptor(const MultiBandRaster& raster, const SeedRegion& region,
                                    const Band& ndvi_band);
std::vector<double> seed_descriptor(const MultiBandRaster& raster, const SeedRegion& region,
                                    const Band& ndvi_band, const std::vector<ValueRange>& ranges);

/// Fills in every region's descriptor.
void describe_seeds(SeedSet& seeds, const MultiBandRaster& raster, const Band& ndvi_band,
                    unsigned threads = 1);

/// Maps a raw descriptor into [0,1]^(bands+1): spectral components by the
/// raw band ranges, NDVI from [-1,1] to [0,1].
std::vector<double> scale_descriptor(const std::vector<double>& descriptor,
                                     const std::vector<ValueRange>& ranges);

/// Rasterises the seed pixels as a mask.
BinaryMask seed_mask(const SeedSet& seeds);

std::string seeds_to_json(const SeedSet& seeds);
SeedSet seeds_from_json(std::string_view text);
void save_seeds(const SeedSet& seeds, const std::filesystem::path& path);
SeedSet load_seeds(const std::filesystem::path& path);

}  // namespace growseg
