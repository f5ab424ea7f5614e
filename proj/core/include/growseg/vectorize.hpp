#pragma once

#include "growseg/raster.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace growseg {

/// Pixel-corner lattice point; pixel (x,y) spans corners (x,y)-(x+1,y+1).
struct Corner {
    int x = 0;
    int y = 0;
    auto operator<=>(const Corner&) const = default;
};

/// Closed ring: front() == back().
using Ring = std::vector<Corner>;

struct Polygon {
    int label = 0;
    Ring ring;
    std::vector<Ring> holes;
    bool operator==(const Polygon&) const = default;
};

struct PolygonSet {
    std::vector<Polygon> polygons;
    bool operator==(const PolygonSet&) const = default;
};

/// Twice the shoelace area. Outer rings are positive (counter-clockwise in
/// x-right/y-up axes), holes negative.
long long signed_area2(const Ring& ring) noexcept;

/// Sum of edge lengths of a rectilinear ring.
long long ring_length(const Ring& ring) noexcept;

/// One polygon per 4-connected region of equal label: an outer ring plus its
/// holes, traced along pixel edges with collinear vertices removed. Every
/// ring starts at its lexicographically smallest corner; polygons are
/// ordered by label, then by outer-ring start corner.
PolygonSet trace_contours(const LabelRaster& labels);

std::string polygons_to_json(const PolygonSet& polygons);
PolygonSet polygons_from_json(std::string_view text);
void export_polygons(const PolygonSet& polygons, const std::filesystem::path& path);
PolygonSet load_polygons(const std::filesystem::path& path);

struct Rgb {
    std::uint8_t r = 255;
    std::uint8_t g = 255;
    std::uint8_t b = 0;
    bool operator==(const Rgb&) const = default;
};

Rgb parse_rgb(std::string_view text);

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // interleaved RGB
    Rgb at(int x, int y) const noexcept;
};

/// True where some 4-neighbour carries a different label.
std::vector<std::uint8_t> boundary_pixels(const LabelRaster& labels);

/// The three bands min-max stretched to 0..255 as RGB, boundary pixels
/// painted `color`.
RgbImage render_overlay_image(const MultiBandRaster& raster, const LabelRaster& labels,
                              std::array<int, 3> band_triplet, Rgb color = {});
std::vector<std::uint8_t> encode_ppm(const RgbImage& image);
void render_overlay(const MultiBandRaster& raster, const LabelRaster& labels,
                    std::array<int, 3> band_triplet, const std::filesystem::path& path,
                    Rgb color = {});

}  // namespace growseg
