#include "growseg/seeding.hpp"

#include "growseg/error.hpp"
#include "growseg/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace growseg {

using nlohmann::json;

SeedSet connected_components(const BinaryMask& mask) {
    SeedSet out{mask.width, mask.height, {}};
    std::vector<std::uint8_t> visited(mask.data.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < mask.data.size(); ++start) {
        if (!mask.data[start] || visited[start]) {
            continue;
        }
        SeedRegion region;
        region.id = static_cast<int>(out.regions.size()) + 1;
        visited[start] = 1;
        stack.assign(1, start);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(p % static_cast<std::size_t>(mask.width));
            const int y = static_cast<int>(p / static_cast<std::size_t>(mask.width));
            region.pixels.push_back({x, y});
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) {
                        continue;
                    }
                    const std::size_t n = mask.index(nx, ny);
                    if (mask.data[n] && !visited[n]) {
                        visited[n] = 1;
                        stack.push_back(n);
                    }
                }
            }
        }
        std::ranges::sort(region.pixels, [](const PixelCoord& a, const PixelCoord& b) {
            return std::tie(a.y, a.x) < std::tie(b.y, b.x);
        });
        out.regions.push_back(std::move(region));
    }
    return out;
}

SeedSet prune_small(SeedSet seeds, std::size_t min_seed_size) {
    if (min_seed_size < 1) {
        throw ValueError("min_seed_size must be >= 1");
    }
    std::erase_if(seeds.regions,
                  [&](const SeedRegion& r) { return r.pixels.size() < min_seed_size; });
    if (seeds.regions.empty()) {
        throw EmptySeedsError("no seed region has at least " + std::to_string(min_seed_size) +
                              " pixels");
    }
    int id = 1;
    for (auto& r : seeds.regions) {
        r.id = id++;
    }
    return seeds;
}

Band ndvi(const MultiBandRaster& raster, int red_band, int nir_band) {
    if (red_band == nir_band) {
        throw ValueError("red and NIR band indices must differ");
    }
    const auto red = raster.band(red_band);
    const auto nir = raster.band(nir_band);
    Band out(raster.width(), raster.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double denom = nir[i] + red[i];
        out.data[i] = denom == 0.0 ? 0.0 : (nir[i] - red[i]) / denom;
    }
    return out;
}

std::vector<double> seed_descriptor(const MultiBandRaster& raster, const SeedRegion& region,
                                    const Band& ndvi_band) {
    return seed_descriptor(raster, region, ndvi_band, band_ranges(raster));
}

std::vector<double> seed_descriptor(const MultiBandRaster& raster, const SeedRegion& region,
                                    const Band& ndvi_band, const std::vector<ValueRange>& ranges) {
    if (region.pixels.empty()) {
        throw ValueError("seed region " + std::to_string(region.id) + " has no pixels");
    }
    for (const auto& p : region.pixels) {
        if (p.x < 0 || p.y < 0 || p.x >= raster.width() || p.y >= raster.height()) {
            throw ValueError("seed pixel outside the raster");
        }
    }
    std::vector<double> descriptor;
    descriptor.reserve(static_cast<std::size_t>(raster.bands()) + 1);
    std::vector<std::size_t> histogram(kModeBins);
    for (int b = 0; b < raster.bands(); ++b) {
        const auto [lo, hi] = ranges[static_cast<std::size_t>(b)];
        const double span = hi - lo;
        if (!(span > 0.0)) {
            descriptor.push_back(lo);
            continue;
        }
        std::ranges::fill(histogram, 0);
        for (const auto& p : region.pixels) {
            const double t = (raster.at(p.x, p.y, b) - lo) / span * kModeBins;
            const int bin = std::clamp(static_cast<int>(std::floor(t)), 0, kModeBins - 1);
            ++histogram[static_cast<std::size_t>(bin)];
        }
        // max_element returns the first maximum: ties resolve to the lowest bin.
        const auto mode = std::distance(histogram.begin(), std::ranges::max_element(histogram));
        descriptor.push_back(lo + (static_cast<double>(mode) + 0.5) * span / kModeBins);
    }
    // Summed in raster order so the mean does not depend on pixel-list order.
    std::vector<PixelCoord> ordered = region.pixels;
    std::ranges::sort(ordered, [](const PixelCoord& a, const PixelCoord& b) {
        return std::tie(a.y, a.x) < std::tie(b.y, b.x);
    });
    double ndvi_sum = 0.0;
    for (const auto& p : ordered) {
        ndvi_sum += ndvi_band.at(p.x, p.y);
    }
    descriptor.push_back(ndvi_sum / static_cast<double>(region.pixels.size()));
    return descriptor;
}

void describe_seeds(SeedSet& seeds, const MultiBandRaster& raster, const Band& ndvi_band,
                    unsigned threads) {
    const auto ranges = band_ranges(raster);
    parallel_chunks(seeds.regions.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) {
            seeds.regions[i].descriptor = seed_descriptor(raster, seeds.regions[i], ndvi_band, ranges);
        }
    });
}

std::vector<double> scale_descriptor(const std::vector<double>& descriptor,
                                     const std::vector<ValueRange>& ranges) {
    if (descriptor.size() != ranges.size() + 1) {
        throw SizeError("descriptor length does not match band count + 1");
    }
    std::vector<double> out(descriptor.size());
    for (std::size_t b = 0; b < ranges.size(); ++b) {
        const double span = ranges[b].max - ranges[b].min;
        out[b] = span > 0.0 ? std::clamp((descriptor[b] - ranges[b].min) / span, 0.0, 1.0) : 0.0;
    }
    out.back() = std::clamp((descriptor.back() + 1.0) / 2.0, 0.0, 1.0);
    return out;
}

BinaryMask seed_mask(const SeedSet& seeds) {
    BinaryMask mask(seeds.width, seeds.height);
    for (const auto& r : seeds.regions) {
        for (const auto& p : r.pixels) {
            mask.set(p.x, p.y, true);
        }
    }
    return mask;
}

std::string seeds_to_json(const SeedSet& seeds) {
    json regions = json::array();
    for (const auto& r : seeds.regions) {
        json pixels = json::array();
        for (const auto& p : r.pixels) {
            pixels.push_back({p.x, p.y});
        }
        regions.push_back({{"id", r.id},
                           {"pixels", std::move(pixels)},
                           {"descriptor", r.descriptor},
                           {"label", r.cluster_label ? json(*r.cluster_label) : json(nullptr)}});
    }
    json doc{{"width", seeds.width}, {"height", seeds.height}, {"regions", std::move(regions)}};
    return doc.dump() + "\n";
}

SeedSet seeds_from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        SeedSet out;
        out.width = doc.at("width").get<int>();
        out.height = doc.at("height").get<int>();
        for (const auto& jr : doc.at("regions")) {
            SeedRegion r;
            r.id = jr.at("id").get<int>();
            for (const auto& jp : jr.at("pixels")) {
                r.pixels.push_back({jp.at(0).get<int>(), jp.at(1).get<int>()});
            }
            r.descriptor = jr.at("descriptor").get<std::vector<double>>();
            if (jr.contains("label") && !jr.at("label").is_null()) {
                r.cluster_label = jr.at("label").get<int>();
            }
            out.regions.push_back(std::move(r));
        }
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("seed JSON: ") + e.what());
    }
}

void save_seeds(const SeedSet& seeds, const std::filesystem::path& path) {
    write_text_file(path, seeds_to_json(seeds));
}

SeedSet load_seeds(const std::filesystem::path& path) {
    return seeds_from_json(read_text_file(path));
}

}  // namespace growseg
