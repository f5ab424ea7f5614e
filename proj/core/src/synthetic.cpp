#include "growseg/synthetic.hpp"

#include "growseg/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace growseg {

using nlohmann::json;

double standard_normal(Prng& prng) noexcept {
    // Box-Muller, first variate only; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - prng.uniform();
    const double u2 = prng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SyntheticImage generate_synthetic(const SyntheticSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0 || spec.bands <= 0) {
        throw ConfigError("synthetic image dimensions must be positive");
    }
    if (spec.noise_sigma < 0.0) {
        throw ConfigError("noise_sigma must be non-negative");
    }
    const std::size_t n = static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);
    std::vector<int> cls(n, -1);
    std::vector<std::vector<double>> means;
    if (spec.background) {
        if (static_cast<int>(spec.background->size()) != spec.bands) {
            throw ConfigError("background means must have one value per band");
        }
        means.push_back(*spec.background);
        std::ranges::fill(cls, 0);
    }
    for (const auto& r : spec.regions) {
        if (static_cast<int>(r.means.size()) != spec.bands) {
            throw ConfigError("region means must have one value per band");
        }
        if (r.x0 < 0 || r.y0 < 0 || r.x1 > spec.width || r.y1 > spec.height || r.x0 >= r.x1 ||
            r.y0 >= r.y1) {
            throw ConfigError("region rectangle outside the image or empty");
        }
        const int id = static_cast<int>(means.size());
        means.push_back(r.means);
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                cls[static_cast<std::size_t>(y) * static_cast<std::size_t>(spec.width) +
                    static_cast<std::size_t>(x)] = id;
            }
        }
    }
    if (std::ranges::any_of(cls, [](int c) { return c < 0; })) {
        throw ConfigError("regions do not cover the image and no background is given");
    }
    if (means.size() > 65535) {
        throw ConfigError("too many synthetic regions");
    }

    Prng prng(spec.seed);
    std::vector<double> data(n * static_cast<std::size_t>(spec.bands));
    for (int b = 0; b < spec.bands; ++b) {
        for (std::size_t p = 0; p < n; ++p) {
            double v = means[static_cast<std::size_t>(cls[p])][static_cast<std::size_t>(b)] +
                       spec.noise_sigma * standard_normal(prng);
            switch (spec.dtype) {
                case DType::u8: v = std::clamp(std::round(v), 0.0, 255.0); break;
                case DType::u16: v = std::clamp(std::round(v), 0.0, 65535.0); break;
                case DType::f32le: v = static_cast<float>(v); break;
            }
            data[static_cast<std::size_t>(b) * n + p] = v;
        }
    }
    SyntheticImage img{MultiBandRaster(spec.width, spec.height, spec.bands, std::move(data)),
                       LabelRaster(spec.width, spec.height)};
    for (std::size_t p = 0; p < n; ++p) {
        img.truth.data[p] = static_cast<std::uint16_t>(cls[p] + 1);
    }
    return img;
}

SyntheticSpec synthetic_spec_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        SyntheticSpec s;
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
        s.bands = j.at("bands").get<int>();
        if (j.contains("dtype")) {
            const auto t = j.at("dtype").get<std::string>();
            s.dtype = parse_header("width 1\nheight 1\nbands 1\ndtype " + t + "\n").dtype;
        }
        s.noise_sigma = j.value("noise_sigma", 1.0);
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("background") && !j.at("background").is_null()) {
            s.background = j.at("background").get<std::vector<double>>();
        }
        for (const auto& jr : j.at("regions")) {
            s.regions.push_back({jr.at("x0").get<int>(), jr.at("y0").get<int>(), jr.at("x1").get<int>(),
                                 jr.at("y1").get<int>(), jr.at("means").get<std::vector<double>>()});
        }
        s.output_header = j.value("output_header", std::string("synthetic.hdr"));
        s.output_data = j.value("output_data", std::string("synthetic.raw"));
        s.truth = j.value("truth", std::string("truth.pgm"));
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    }
}

std::string synthetic_spec_to_json(const SyntheticSpec& s) {
    json regions = json::array();
    for (const auto& r : s.regions) {
        regions.push_back({{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}, {"means", r.means}});
    }
    json j{{"width", s.width},
           {"height", s.height},
           {"bands", s.bands},
           {"dtype", std::string(dtype_name(s.dtype))},
           {"noise_sigma", s.noise_sigma},
           {"seed", s.seed},
           {"background", s.background ? json(*s.background) : json(nullptr)},
           {"regions", std::move(regions)},
           {"output_header", s.output_header.string()},
           {"output_data", s.output_data.string()},
           {"truth", s.truth.string()}};
    return j.dump(2) + "\n";
}

SyntheticImage write_synthetic(const SyntheticSpec& spec) {
    auto img = generate_synthetic(spec);
    save_raster(img.raster, spec.output_header, spec.output_data, spec.dtype);
    if (!spec.truth.empty()) {
        save_label_raster(img.truth, spec.truth);
    }
    return img;
}

SyntheticSpec random_tiling_spec(Prng& prng, int width, int height, int bands, int n_regions,
                                 double noise_sigma, double step, double base, int min_side) {
    struct Rect {
        int x0, y0, x1, y1;
        long area() const { return static_cast<long>(x1 - x0) * (y1 - y0); }
    };
    std::vector<Rect> rects{{0, 0, width, height}};
    while (static_cast<int>(rects.size()) < n_regions) {
        // Split the largest rectangle that can still host two min_side halves.
        std::size_t pick = rects.size();
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const auto& r = rects[i];
            const bool splittable = (r.x1 - r.x0) >= 2 * min_side || (r.y1 - r.y0) >= 2 * min_side;
            if (splittable && (pick == rects.size() || r.area() > rects[pick].area())) {
                pick = i;
            }
        }
        if (pick == rects.size()) {
            throw ConfigError("image too small for the requested number of regions");
        }
        const Rect r = rects[pick];
        const bool vertical_cut = (r.x1 - r.x0) >= (r.y1 - r.y0);
        const int len = vertical_cut ? r.x1 - r.x0 : r.y1 - r.y0;
        const int cut = min_side + static_cast<int>(prng.below(static_cast<std::uint64_t>(len - 2 * min_side + 1)));
        if (vertical_cut) {
            rects[pick] = {r.x0, r.y0, r.x0 + cut, r.y1};
            rects.push_back({r.x0 + cut, r.y0, r.x1, r.y1});
        } else {
            rects[pick] = {r.x0, r.y0, r.x1, r.y0 + cut};
            rects.push_back({r.x0, r.y0 + cut, r.x1, r.y1});
        }
    }
    SyntheticSpec spec;
    spec.width = width;
    spec.height = height;
    spec.bands = bands;
    spec.noise_sigma = noise_sigma;
    spec.seed = prng.next();
    std::vector<std::vector<double>> means(rects.size(), std::vector<double>(static_cast<std::size_t>(bands)));
    for (int b = 0; b < bands; ++b) {
        std::vector<int> ladder(rects.size());
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            ladder[i] = static_cast<int>(i);
        }
        for (std::size_t i = ladder.size(); i > 1; --i) {
            std::swap(ladder[i - 1], ladder[static_cast<std::size_t>(prng.below(i))]);
        }
        for (std::size_t i = 0; i < rects.size(); ++i) {
            means[i][static_cast<std::size_t>(b)] = base + step * ladder[i];
        }
    }
    for (std::size_t i = 0; i < rects.size(); ++i) {
        spec.regions.push_back({rects[i].x0, rects[i].y0, rects[i].x1, rects[i].y1, means[i]});
    }
    return spec;
}

}  // namespace growseg
