#include "growseg/morphology.hpp"

#include "growseg/error.hpp"
#include "growseg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>

namespace growseg {

namespace {

int clamp_coord(int v, int n) {
    return v < 0 ? 0 : (v >= n ? n - 1 : v);
}

template <typename Pick>
Band windowed_by_offsets(const Band& band, const StructuringElement& se, Pick pick) {
    Band out(band.width, band.height);
    for (int y = 0; y < band.height; ++y) {
        for (int x = 0; x < band.width; ++x) {
            double acc = band.at(clamp_coord(x + se.offsets().front().dx, band.width),
                                 clamp_coord(y + se.offsets().front().dy, band.height));
            for (const auto& o : se.offsets()) {
                acc = pick(acc, band.at(clamp_coord(x + o.dx, band.width),
                                        clamp_coord(y + o.dy, band.height)));
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

// A square window over replicated borders is the product of a clamped row
// interval and a clamped column interval, so min/max separates exactly.
template <typename Pick>
Band windowed_square(const Band& band, int r, unsigned threads, Pick pick) {
    if (r == 0) {
        return band;
    }
    const int w = band.width;
    const int h = band.height;
    Band rows(w, h);
    parallel_chunks(static_cast<std::size_t>(h), threads, [&](std::size_t y0, std::size_t y1, std::size_t) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
            for (int x = 0; x < w; ++x) {
                const int lo = std::max(0, x - r);
                const int hi = std::min(w - 1, x + r);
                double acc = band.at(lo, y);
                for (int xx = lo + 1; xx <= hi; ++xx) {
                    acc = pick(acc, band.at(xx, y));
                }
                rows.at(x, y) = acc;
            }
        }
    });
    Band out(w, h);
    parallel_chunks(static_cast<std::size_t>(h), threads, [&](std::size_t y0, std::size_t y1, std::size_t) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
            const int lo = std::max(0, y - r);
            const int hi = std::min(h - 1, y + r);
            for (int x = 0; x < w; ++x) {
                double acc = rows.at(x, lo);
                for (int yy = lo + 1; yy <= hi; ++yy) {
                    acc = pick(acc, rows.at(x, yy));
                }
                out.at(x, y) = acc;
            }
        }
    });
    return out;
}

constexpr auto pick_min = [](double a, double b) { return b < a ? b : a; };
constexpr auto pick_max = [](double a, double b) { return b > a ? b : a; };

}  // namespace

StructuringElement::StructuringElement(SeShape shape, int radius) : shape_(shape), radius_(radius) {
    if (radius < 0) {
        throw ValueError("structuring element radius must be non-negative");
    }
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (shape == SeShape::square || std::abs(dx) + std::abs(dy) <= radius) {
                offsets_.push_back({dx, dy});
            }
        }
    }
}

StructuringElement StructuringElement::square(int radius) {
    return StructuringElement(SeShape::square, radius);
}

StructuringElement StructuringElement::diamond(int radius) {
    return StructuringElement(SeShape::diamond, radius);
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::ranges::count_if(data, [](std::uint8_t v) { return v != 0; }));
}

namespace detail {

Band erode_by_offsets(const Band& band, const StructuringElement& se) {
    return windowed_by_offsets(band, se, pick_min);
}

Band dilate_by_offsets(const Band& band, const StructuringElement& se) {
    return windowed_by_offsets(band, se, pick_max);
}

}  // namespace detail

Band erode(const Band& band, const StructuringElement& se, unsigned threads) {
    if (se.shape() == SeShape::square) {
        return windowed_square(band, se.radius(), threads, pick_min);
    }
    return detail::erode_by_offsets(band, se);
}

Band dilate(const Band& band, const StructuringElement& se, unsigned threads) {
    if (se.shape() == SeShape::square) {
        return windowed_square(band, se.radius(), threads, pick_max);
    }
    return detail::dilate_by_offsets(band, se);
}

Band opening(const Band& band, const StructuringElement& se, unsigned threads) {
    return dilate(erode(band, se, threads), se, threads);
}

Band closing(const Band& band, const StructuringElement& se, unsigned threads) {
    return erode(dilate(band, se, threads), se, threads);
}

Band asf(const Band& band, int max_radius, unsigned threads) {
    if (max_radius < 1) {
        throw ValueError("asf max_radius must be >= 1");
    }
    Band out = band;
    for (int r = 1; r <= max_radius; ++r) {
        const auto se = StructuringElement::square(r);
        out = closing(opening(out, se, threads), se, threads);
    }
    return out;
}

Band multiscale_gradient(const MultiBandRaster& raster, int n_scales, unsigned threads) {
    if (n_scales < 1) {
        throw ValueError("multiscale gradient needs n_scales >= 1");
    }
    Band combined(raster.width(), raster.height(), 0.0);
    for (int b = 0; b < raster.bands(); ++b) {
        const Band f = raster.extract_band(b);
        Band sum(f.width, f.height, 0.0);
        for (int i = 1; i <= n_scales; ++i) {
            const auto se = StructuringElement::square(i);
            const Band dil = dilate(f, se, threads);
            const Band ero = erode(f, se, threads);
            Band diff(f.width, f.height);
            for (std::size_t p = 0; p < diff.size(); ++p) {
                diff.data[p] = dil.data[p] - ero.data[p];
            }
            const Band thinned = erode(diff, StructuringElement::square(i - 1), threads);
            for (std::size_t p = 0; p < sum.size(); ++p) {
                sum.data[p] += thinned.data[p];
            }
        }
        for (std::size_t p = 0; p < combined.size(); ++p) {
            const double g = sum.data[p] / n_scales;
            combined.data[p] = std::max(combined.data[p], g);
        }
    }
    return combined;
}

std::vector<int> quantize(const Band& band, int levels) {
    if (levels < 1) {
        throw ValueError("quantization needs at least one level");
    }
    std::vector<int> q(band.size(), 0);
    if (band.data.empty()) {
        return q;
    }
    const auto [lo, hi] = std::ranges::minmax_element(band.data);
    const double min = *lo;
    const double span = *hi - min;
    if (!(span > 0.0)) {
        return q;
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double t = (band.data[i] - min) / span * levels;
        q[i] = std::min(levels - 1, static_cast<int>(std::floor(t)));
    }
    return q;
}

BinaryMask regional_minima(const Band& band, int levels) {
    if (levels < 2) {
        throw ValueError("regional minima needs levels >= 2");
    }
    const int w = band.width;
    const int h = band.height;
    const auto q = quantize(band, levels);
    BinaryMask mask(w, h);
    std::vector<std::uint8_t> visited(q.size(), 0);
    std::vector<std::size_t> stack;
    std::vector<std::size_t> plateau;
    for (std::size_t seed = 0; seed < q.size(); ++seed) {
        if (visited[seed]) {
            continue;
        }
        const int level = q[seed];
        bool is_minimum = true;
        plateau.clear();
        stack.assign(1, seed);
        visited[seed] = 1;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            plateau.push_back(p);
            const int x = static_cast<int>(p % static_cast<std::size_t>(w));
            const int y = static_cast<int>(p / static_cast<std::size_t>(w));
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) {
                        continue;
                    }
                    const std::size_t n = mask.index(nx, ny);
                    if (q[n] < level) {
                        is_minimum = false;
                    } else if (q[n] == level && !visited[n]) {
                        visited[n] = 1;
                        stack.push_back(n);
                    }
                }
            }
        }
        if (is_minimum) {
            for (std::size_t p : plateau) {
                mask.data[p] = 1;
            }
        }
    }
    return mask;
}

}  // namespace growseg
