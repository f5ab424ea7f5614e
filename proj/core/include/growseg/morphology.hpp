#pragma once

#include "growseg/raster.hpp"

#include <cstdint>
#include <vector>

namespace growseg {

struct Offset {
    int dx = 0;
    int dy = 0;
    bool operator==(const Offset&) const = default;
};

enum class SeShape { square, diamond };

/// Flat structuring element. Radius 0 is the identity element {(0,0)}.
class StructuringElement {
public:
    static StructuringElement square(int radius);
    static StructuringElement diamond(int radius);

    SeShape shape() const noexcept { return shape_; }
    int radius() const noexcept { return radius_; }
    /// Row-major from (-r,-r) to (r,r).
    const std::vector<Offset>& offsets() const noexcept { return offsets_; }

private:
    StructuringElement(SeShape shape, int radius);

    SeShape shape_;
    int radius_;
    std::vector<Offset> offsets_;
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false)
        : width(w), height(h),
          data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0) {}

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    bool at(int x, int y) const noexcept { return data[index(x, y)] != 0; }
    void set(int x, int y, bool v) noexcept { data[index(x, y)] = v ? 1 : 0; }
    std::size_t count() const noexcept;

    bool operator==(const BinaryMask&) const = default;
};

// All morphology uses edge replication at the image border. `threads`
// parallelises over rows; results are bit-identical for any thread count.

Band erode(const Band& band, const StructuringElement& se, unsigned threads = 1);
Band dilate(const Band& band, const StructuringElement& se, unsigned threads = 1);

/// dilate(erode(b))
Band opening(const Band& band, const StructuringElement& se, unsigned threads = 1);
/// erode(dilate(b))
Band closing(const Band& band, const StructuringElement& se, unsigned threads = 1);

/// Alternating sequential filter: for r = 1..max_radius, opening then
/// closing with a square of radius r.
Band asf(const Band& band, int max_radius, unsigned threads = 1);

/// Multiscale morphological gradient, averaged over scales 1..n_scales
///   mean_i erode(dilate(f, B_i) - erode(f, B_i), B_{i-1}),  B_i square radius i
/// computed per band and combined across bands by per-pixel maximum.
Band multiscale_gradient(const MultiBandRaster& raster, int n_scales, unsigned threads = 1);

/// Equal-width quantization over [min, max] into `levels` bins (0-based).
/// A constant band quantizes to all zeros.
std::vector<int> quantize(const Band& band, int levels);

/// Marks every pixel on an 8-connected plateau of the quantized band whose
/// external boundary is strictly higher. Constant bands are one plateau.
BinaryMask regional_minima(const Band& band, int levels);

namespace detail {
/// Reference windowed min/max over the explicit offset list. The public
/// erode/dilate use a separable path for squares.
Band erode_by_offsets(const Band& band, const StructuringElement& se);
Band dilate_by_offsets(const Band& band, const StructuringElement& se);
}  // namespace detail

}  // namespace growseg
