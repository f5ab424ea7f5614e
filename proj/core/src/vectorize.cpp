#include "growseg/vectorize.hpp"

#include "growseg/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

namespace growseg {

using nlohmann::json;

namespace {

struct Edge {
    Corner from;
    Corner to;
};

int turn_rank(Corner d_in, Corner d_out) {
    // With the region on the left, prefer left turns so diagonal pinch
    // points keep 4-connected regions apart.
    const long cross = static_cast<long>(d_in.x) * d_out.y - static_cast<long>(d_in.y) * d_out.x;
    if (cross > 0) {
        return 0;
    }
    if (cross == 0) {
        return 1;
    }
    return 2;
}

Ring simplify_and_rotate(const std::vector<Corner>& loop) {
    // loop is open (last != first); drop collinear vertices.
    std::vector<Corner> kept;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Corner prev = loop[(i + n - 1) % n];
        const Corner cur = loop[i];
        const Corner next = loop[(i + 1) % n];
        const Corner a{cur.x - prev.x, cur.y - prev.y};
        const Corner b{next.x - cur.x, next.y - cur.y};
        if (static_cast<long>(a.x) * b.y - static_cast<long>(a.y) * b.x != 0) {
            kept.push_back(cur);
        }
    }
    const auto start = std::ranges::min_element(kept);
    std::ranges::rotate(kept, start);
    kept.push_back(kept.front());
    return kept;
}

std::vector<Ring> trace_region(const std::vector<std::size_t>& pixels, const std::vector<int>& region_of,
                               int region, int w, int h) {
    auto inside = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < w && y < h &&
               region_of[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                         static_cast<std::size_t>(x)] == region;
    };
    // Directed unit edges with the region on the left (positive shoelace
    // orientation), keyed by their start corner.
    std::multimap<Corner, std::size_t> outgoing;
    std::vector<Edge> edges;
    for (std::size_t p : pixels) {
        const int x = static_cast<int>(p % static_cast<std::size_t>(w));
        const int y = static_cast<int>(p / static_cast<std::size_t>(w));
        if (!inside(x, y - 1)) {
            edges.push_back({{x, y}, {x + 1, y}});
        }
        if (!inside(x + 1, y)) {
            edges.push_back({{x + 1, y}, {x + 1, y + 1}});
        }
        if (!inside(x, y + 1)) {
            edges.push_back({{x + 1, y + 1}, {x, y + 1}});
        }
        if (!inside(x - 1, y)) {
            edges.push_back({{x, y + 1}, {x, y}});
        }
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        outgoing.emplace(edges[i].from, i);
    }
    std::vector<std::uint8_t> used(edges.size(), 0);
    std::vector<std::size_t> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
        return std::tie(edges[a].from, edges[a].to) < std::tie(edges[b].from, edges[b].to);
    });

    std::vector<Ring> rings;
    for (std::size_t start : order) {
        if (used[start]) {
            continue;
        }
        std::vector<Corner> loop;
        std::size_t cur = start;
        while (!used[cur]) {
            used[cur] = 1;
            loop.push_back(edges[cur].from);
            const Corner at = edges[cur].to;
            const Corner d_in{at.x - edges[cur].from.x, at.y - edges[cur].from.y};
            std::size_t best = edges.size();
            int best_rank = 3;
            auto [lo, hi] = outgoing.equal_range(at);
            for (auto it = lo; it != hi; ++it) {
                const std::size_t cand = it->second;
                if (used[cand] && cand != start) {
                    continue;
                }
                const Corner d_out{edges[cand].to.x - at.x, edges[cand].to.y - at.y};
                const int rank = turn_rank(d_in, d_out);
                if (rank < best_rank) {
                    best_rank = rank;
                    best = cand;
                }
            }
            if (best == edges.size()) {
                throw Error("contour tracing lost its way (internal error)");
            }
            cur = best;
        }
        rings.push_back(simplify_and_rotate(loop));
    }
    return rings;
}

Ring ring_from_json(const json& j) {
    Ring r;
    for (const auto& c : j) {
        if (c.size() != 2) {
            throw ParseError("polygon JSON: corner must be [x, y]");
        }
        r.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
    }
    if (r.size() < 4 || r.front() != r.back()) {
        throw ParseError("polygon JSON: ring is not closed");
    }
    return r;
}

json ring_to_json(const Ring& r) {
    json out = json::array();
    for (const auto& c : r) {
        out.push_back({c.x, c.y});
    }
    return out;
}

std::uint8_t stretch(double v, double lo, double hi) {
    if (!(hi > lo)) {
        return 0;
    }
    return static_cast<std::uint8_t>(std::clamp(std::lround((v - lo) / (hi - lo) * 255.0), 0L, 255L));
}

}  // namespace

long long signed_area2(const Ring& ring) noexcept {
    long long s = 0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        s += static_cast<long long>(ring[i].x) * ring[i + 1].y -
             static_cast<long long>(ring[i + 1].x) * ring[i].y;
    }
    return s;
}

long long ring_length(const Ring& ring) noexcept {
    long long s = 0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        s += std::llabs(ring[i + 1].x - ring[i].x) + std::llabs(ring[i + 1].y - ring[i].y);
    }
    return s;
}

PolygonSet trace_contours(const LabelRaster& labels) {
    const int w = labels.width;
    const int h = labels.height;
    const std::size_t n = labels.data.size();
    std::vector<int> region_of(n, -1);
    std::vector<std::vector<std::size_t>> regions;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (region_of[s] >= 0) {
            continue;
        }
        const int id = static_cast<int>(regions.size());
        regions.emplace_back();
        region_of[s] = id;
        stack.assign(1, s);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            regions.back().push_back(p);
            const int x = static_cast<int>(p % static_cast<std::size_t>(w));
            const int y = static_cast<int>(p / static_cast<std::size_t>(w));
            const int nbr[4][2] = {{x, y - 1}, {x - 1, y}, {x + 1, y}, {x, y + 1}};
            for (const auto& c : nbr) {
                if (c[0] < 0 || c[1] < 0 || c[0] >= w || c[1] >= h) {
                    continue;
                }
                const std::size_t q = labels.index(c[0], c[1]);
                if (region_of[q] < 0 && labels.data[q] == labels.data[s]) {
                    region_of[q] = id;
                    stack.push_back(q);
                }
            }
        }
    }

    PolygonSet out;
    out.polygons.reserve(regions.size());
    for (std::size_t r = 0; r < regions.size(); ++r) {
        auto rings = trace_region(regions[r], region_of, static_cast<int>(r), w, h);
        Polygon poly;
        poly.label = labels.data[regions[r].front()];
        for (auto& ring : rings) {
            if (signed_area2(ring) > 0) {
                poly.ring = std::move(ring);
            } else {
                poly.holes.push_back(std::move(ring));
            }
        }
        std::ranges::sort(poly.holes, [](const Ring& a, const Ring& b) { return a.front() < b.front(); });
        out.polygons.push_back(std::move(poly));
    }
    std::ranges::sort(out.polygons, [](const Polygon& a, const Polygon& b) {
        return std::tie(a.label, a.ring.front()) < std::tie(b.label, b.ring.front());
    });
    return out;
}

std::string polygons_to_json(const PolygonSet& polygons) {
    json arr = json::array();
    for (const auto& p : polygons.polygons) {
        json holes = json::array();
        for (const auto& hole : p.holes) {
            holes.push_back(ring_to_json(hole));
        }
        arr.push_back({{"label", p.label}, {"ring", ring_to_json(p.ring)}, {"holes", std::move(holes)}});
    }
    return json{{"polygons", std::move(arr)}}.dump() + "\n";
}

PolygonSet polygons_from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        PolygonSet out;
        for (const auto& jp : doc.at("polygons")) {
            Polygon p;
            p.label = jp.at("label").get<int>();
            p.ring = ring_from_json(jp.at("ring"));
            for (const auto& jh : jp.at("holes")) {
                p.holes.push_back(ring_from_json(jh));
            }
            out.polygons.push_back(std::move(p));
        }
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("polygon JSON: ") + e.what());
    }
}

void export_polygons(const PolygonSet& polygons, const std::filesystem::path& path) {
    write_text_file(path, polygons_to_json(polygons));
}

PolygonSet load_polygons(const std::filesystem::path& path) {
    return polygons_from_json(read_text_file(path));
}

Rgb parse_rgb(std::string_view text) {
    // "r,g,b" or "#rrggbb"
    Rgb c;
    if (text.size() == 7 && text.front() == '#') {
        const auto v = std::strtoul(std::string(text.substr(1)).c_str(), nullptr, 16);
        return {static_cast<std::uint8_t>((v >> 16) & 0xff), static_cast<std::uint8_t>((v >> 8) & 0xff),
                static_cast<std::uint8_t>(v & 0xff)};
    }
    int parts[3];
    int count = 0;
    std::string token;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            if (count >= 3 || token.empty() ||
                token.find_first_not_of("0123456789") != std::string::npos) {
                throw ConfigError("bad color '" + std::string(text) + "' (expected r,g,b or #rrggbb)");
            }
            parts[count++] = std::stoi(token);
            token.clear();
        } else {
            token.push_back(text[i]);
        }
    }
    if (count != 3 || std::ranges::any_of(parts, [](int v) { return v > 255; })) {
        throw ConfigError("bad color '" + std::string(text) + "'");
    }
    c.r = static_cast<std::uint8_t>(parts[0]);
    c.g = static_cast<std::uint8_t>(parts[1]);
    c.b = static_cast<std::uint8_t>(parts[2]);
    return c;
}

Rgb RgbImage::at(int x, int y) const noexcept {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                               static_cast<std::size_t>(x));
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

std::vector<std::uint8_t> boundary_pixels(const LabelRaster& labels) {
    std::vector<std::uint8_t> out(labels.data.size(), 0);
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const auto v = labels.at(x, y);
            const bool edge = (x > 0 && labels.at(x - 1, y) != v) ||
                              (x + 1 < labels.width && labels.at(x + 1, y) != v) ||
                              (y > 0 && labels.at(x, y - 1) != v) ||
                              (y + 1 < labels.height && labels.at(x, y + 1) != v);
            out[labels.index(x, y)] = edge ? 1 : 0;
        }
    }
    return out;
}

RgbImage render_overlay_image(const MultiBandRaster& raster, const LabelRaster& labels,
                              std::array<int, 3> band_triplet, Rgb color) {
    if (labels.width != raster.width() || labels.height != raster.height()) {
        throw SizeError("label raster does not match the image");
    }
    for (int b : band_triplet) {
        if (b < 0 || b >= raster.bands()) {
            throw ValueError("overlay band index " + std::to_string(b) + " out of range");
        }
    }
    const auto ranges = band_ranges(raster);
    const auto edges = boundary_pixels(labels);
    RgbImage img{raster.width(), raster.height(), {}};
    img.pixels.resize(3 * raster.pixel_count());
    for (std::size_t p = 0; p < raster.pixel_count(); ++p) {
        if (edges[p]) {
            img.pixels[3 * p] = color.r;
            img.pixels[3 * p + 1] = color.g;
            img.pixels[3 * p + 2] = color.b;
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            const int b = band_triplet[static_cast<std::size_t>(c)];
            const auto r = ranges[static_cast<std::size_t>(b)];
            img.pixels[3 * p + static_cast<std::size_t>(c)] = stretch(raster.band(b)[p], r.min, r.max);
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& image) {
    const std::string header =
        "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.pixels.begin(), image.pixels.end());
    return out;
}

void render_overlay(const MultiBandRaster& raster, const LabelRaster& labels,
                    std::array<int, 3> band_triplet, const std::filesystem::path& path, Rgb color) {
    write_file_bytes(path, encode_ppm(render_overlay_image(raster, labels, band_triplet, color)));
}

}  // namespace growseg
