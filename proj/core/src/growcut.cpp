#include "growseg/growcut.hpp"

#include "growseg/error.hpp"
#include "growseg/parallel.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

namespace growseg {

namespace {

struct CellChange {
    std::size_t cell;
    std::int32_t label;
    double strength;
};

double feature_distance(const AutomatonState& s, std::size_t p, std::size_t q) noexcept {
    const double* a = s.features.data() + p * static_cast<std::size_t>(s.dims);
    const double* b = s.features.data() + q * static_cast<std::size_t>(s.dims);
    double sum = 0.0;
    for (int c = 0; c < s.dims; ++c) {
        const double d = a[c] - b[c];
        sum += d * d;
    }
    return std::sqrt(sum);
}

// The transition rule for one cell, reading generation t only. The
// strongest strictly-winning attacker takes the cell; on equal attack the
// earlier offset wins because later ones must beat it strictly. A neighbour
// whose strength does not exceed the best so far cannot win (g <= 1), so its
// distance is never computed.
bool evaluate_cell(const AutomatonState& s, std::size_t p, std::int32_t& label, double& strength) {
    const int x = static_cast<int>(p % static_cast<std::size_t>(s.width));
    const int y = static_cast<int>(p / static_cast<std::size_t>(s.width));
    label = s.labels[p];
    strength = s.strengths[p];
    bool won = false;
    for (const auto& o : s.neighborhood) {
        const int nx = x + o.dx;
        const int ny = y + o.dy;
        if (nx < 0 || ny < 0 || nx >= s.width || ny >= s.height) {
            continue;
        }
        const std::size_t q = static_cast<std::size_t>(ny) * static_cast<std::size_t>(s.width) +
                              static_cast<std::size_t>(nx);
        const double defender = strength;
        const double attacker = s.strengths[q];
        if (attacker <= defender) {
            continue;
        }
        const double force = attack_weight(feature_distance(s, p, q), s.c_bar) * attacker;
        if (force > defender) {
            strength = force;
            label = s.labels[q];
            won = true;
        }
    }
    return won;
}

std::vector<std::size_t> merge_chunks(std::vector<std::vector<std::size_t>>& parts) {
    std::size_t total = 0;
    for (const auto& p : parts) {
        total += p.size();
    }
    std::vector<std::size_t> out;
    out.reserve(total);
    for (auto& p : parts) {
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::vector<std::size_t> active_candidates(AutomatonState& s) {
    const std::size_t n = s.cell_count();
    if (!s.has_history) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) {
            all[i] = i;
        }
        return all;
    }
    if (s.mark.size() != n) {
        s.mark.assign(n, 0);
        s.mark_stamp = 0;
    }
    if (++s.mark_stamp == 0) {
        std::ranges::fill(s.mark, 0);
        s.mark_stamp = 1;
    }
    std::vector<std::size_t> cand;
    for (std::size_t c : s.changed_cells) {
        const int x = static_cast<int>(c % static_cast<std::size_t>(s.width));
        const int y = static_cast<int>(c / static_cast<std::size_t>(s.width));
        // Neighbourhoods are symmetric, so the cells attacked by c are
        // exactly c's neighbours.
        for (const auto& o : s.neighborhood) {
            const int nx = x + o.dx;
            const int ny = y + o.dy;
            if (nx < 0 || ny < 0 || nx >= s.width || ny >= s.height) {
                continue;
            }
            const std::size_t q = static_cast<std::size_t>(ny) * static_cast<std::size_t>(s.width) +
                                  static_cast<std::size_t>(nx);
            if (s.mark[q] != s.mark_stamp) {
                s.mark[q] = s.mark_stamp;
                cand.push_back(q);
            }
        }
    }
    std::ranges::sort(cand);
    return cand;
}

}  // namespace

std::string_view neighborhood_name(Neighborhood n) noexcept {
    return n == Neighborhood::moore8 ? "moore8" : "vn4";
}

Neighborhood parse_neighborhood(std::string_view name) {
    if (name == "moore8") {
        return Neighborhood::moore8;
    }
    if (name == "vn4" || name == "vonneumann4") {
        return Neighborhood::vonneumann4;
    }
    throw ConfigError("unknown neighborhood '" + std::string(name) + "' (expected moore8 or vn4)");
}

std::string_view engine_name(Engine e) noexcept {
    return e == Engine::synchronous ? "synchronous" : "active_set";
}

Engine parse_engine(std::string_view name) {
    if (name == "synchronous" || name == "sync") {
        return Engine::synchronous;
    }
    if (name == "active_set" || name == "active") {
        return Engine::active_set;
    }
    throw ConfigError("unknown engine '" + std::string(name) + "'");
}

std::vector<Offset> neighborhood_offsets(Neighborhood n) {
    std::vector<Offset> out;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) {
                continue;
            }
            if (n == Neighborhood::vonneumann4 && dx != 0 && dy != 0) {
                continue;
            }
            out.push_back({dx, dy});
        }
    }
    return out;
}

double attack_weight(double distance, double c_bar) noexcept {
    assert(c_bar > 0.0);
    assert(distance >= 0.0 && distance <= c_bar);
    const double g = 1.0 - distance / c_bar;
    return std::clamp(g, 0.0, 1.0);
}

MultiBandRaster assemble_features(const MultiBandRaster& normalized, const Band& ndvi_band) {
    if (ndvi_band.width != normalized.width() || ndvi_band.height != normalized.height()) {
        throw SizeError("NDVI band does not match the raster");
    }
    MultiBandRaster out(normalized.width(), normalized.height(), normalized.bands() + 1);
    for (int b = 0; b < normalized.bands(); ++b) {
        std::ranges::copy(normalized.band(b), out.band(b).begin());
    }
    auto last = out.band(normalized.bands());
    for (std::size_t i = 0; i < last.size(); ++i) {
        last[i] = std::clamp((ndvi_band.data[i] + 1.0) / 2.0, 0.0, 1.0);
    }
    return out;
}

double compute_c_bar(const MultiBandRaster& features, const std::vector<Offset>& neighborhood) {
    const int w = features.width();
    const int h = features.height();
    const int dims = features.bands();
    auto dist = [&](int x0, int y0, int x1, int y1) {
        double s = 0.0;
        for (int c = 0; c < dims; ++c) {
            const double d = features.at(x0, y0, c) - features.at(x1, y1, c);
            s += d * d;
        }
        return std::sqrt(s);
    };
    double c_bar = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double norm2 = 0.0;
            for (int c = 0; c < dims; ++c) {
                norm2 += features.at(x, y, c) * features.at(x, y, c);
            }
            c_bar = std::max(c_bar, std::sqrt(norm2));
            for (const auto& o : neighborhood) {
                const int nx = x + o.dx;
                const int ny = y + o.dy;
                if (nx >= 0 && ny >= 0 && nx < w && ny < h) {
                    c_bar = std::max(c_bar, dist(x, y, nx, ny));
                }
            }
        }
    }
    return c_bar > 0.0 ? c_bar : 1.0;
}

AutomatonState make_automaton(const MultiBandRaster& features, const GrowCutParams& params) {
    for (double v : features.data()) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ValueError("automaton features must be finite and non-negative");
        }
    }
    AutomatonState s;
    s.width = features.width();
    s.height = features.height();
    s.dims = features.bands();
    s.neighborhood = neighborhood_offsets(params.neighborhood);
    s.c_bar = compute_c_bar(features, s.neighborhood);
    s.threads = std::max(1u, params.threads);
    const std::size_t n = s.cell_count();
    s.features.resize(n * static_cast<std::size_t>(s.dims));
    for (int c = 0; c < s.dims; ++c) {
        const auto band = features.band(c);
        for (std::size_t p = 0; p < n; ++p) {
            s.features[p * static_cast<std::size_t>(s.dims) + static_cast<std::size_t>(c)] = band[p];
        }
    }
    s.labels.assign(n, kUnlabeled);
    s.strengths.assign(n, 0.0);
    s.next_labels.assign(n, kUnlabeled);
    s.next_strengths.assign(n, 0.0);
    return s;
}

AutomatonState init_automaton(const MultiBandRaster& features, const SeedSet& seeds,
                              const GrowCutParams& params) {
    if (seeds.width != features.width() || seeds.height != features.height()) {
        throw SizeError("seed set dimensions do not match the feature raster");
    }
    AutomatonState s = make_automaton(features, params);
    std::size_t labeled = 0;
    for (const auto& r : seeds.regions) {
        if (!r.cluster_label) {
            continue;
        }
        const int label = *r.cluster_label;
        if (label < 0 || label >= 65535) {
            throw ValueError("cluster label " + std::to_string(label) + " out of range");
        }
        for (const auto& px : r.pixels) {
            if (px.x < 0 || px.y < 0 || px.x >= s.width || px.y >= s.height) {
                throw ValueError("seed pixel outside the raster");
            }
            const std::size_t p = static_cast<std::size_t>(px.y) * static_cast<std::size_t>(s.width) +
                                  static_cast<std::size_t>(px.x);
            s.labels[p] = label;
            s.strengths[p] = 1.0;
            ++labeled;
        }
    }
    if (labeled == 0) {
        throw EmptySeedsError("no labeled seed cells to start the automaton");
    }
    return s;
}

std::size_t step_synchronous(AutomatonState& s) {
    const std::size_t n = s.cell_count();
    const std::size_t rows = static_cast<std::size_t>(s.height);
    const std::size_t w = static_cast<std::size_t>(s.width);
    std::vector<std::vector<std::size_t>> changed(chunk_count(rows, s.threads));
    parallel_chunks(rows, s.threads, [&](std::size_t y0, std::size_t y1, std::size_t chunk) {
        auto& mine = changed[chunk];
        for (std::size_t p = y0 * w; p < y1 * w; ++p) {
            if (evaluate_cell(s, p, s.next_labels[p], s.next_strengths[p])) {
                mine.push_back(p);
            }
        }
    });
    std::swap(s.labels, s.next_labels);
    std::swap(s.strengths, s.next_strengths);
    s.changed_cells = merge_chunks(changed);
    s.has_history = true;
    s.changed_last_step = s.changed_cells.size();
    s.visited_last_step = n;
    ++s.generation;
    return s.changed_last_step;
}

std::size_t step_active_set(AutomatonState& s) {
    const auto candidates = active_candidates(s);
    std::vector<std::vector<CellChange>> deltas(chunk_count(candidates.size(), s.threads));
    parallel_chunks(candidates.size(), s.threads, [&](std::size_t b, std::size_t e, std::size_t chunk) {
        auto& mine = deltas[chunk];
        for (std::size_t i = b; i < e; ++i) {
            std::int32_t label;
            double strength;
            if (evaluate_cell(s, candidates[i], label, strength)) {
                mine.push_back({candidates[i], label, strength});
            }
        }
    });
    s.changed_cells.clear();
    for (const auto& part : deltas) {
        for (const auto& d : part) {
            s.labels[d.cell] = d.label;
            s.strengths[d.cell] = d.strength;
            s.changed_cells.push_back(d.cell);
        }
    }
    s.has_history = true;
    s.changed_last_step = s.changed_cells.size();
    s.visited_last_step = candidates.size();
    ++s.generation;
    return s.changed_last_step;
}

std::size_t step(AutomatonState& state, Engine engine) {
    return engine == Engine::synchronous ? step_synchronous(state) : step_active_set(state);
}

LabelRaster output_labels(const AutomatonState& s) {
    LabelRaster out(s.width, s.height);
    for (std::size_t p = 0; p < s.cell_count(); ++p) {
        out.data[p] = s.labels[p] == kUnlabeled ? 0 : static_cast<std::uint16_t>(s.labels[p] + 1);
    }
    return out;
}

GrowCutResult run(AutomatonState& state, const GrowCutParams& params, Engine engine) {
    const int cap = params.max_iterations > 0 ? params.max_iterations : state.width + state.height;
    GrowCutResult res;
    res.engine = engine;
    const auto t0 = std::chrono::steady_clock::now();
    for (;;) {
        const std::size_t changed = step(state, engine);
        res.changed_per_generation.push_back(changed);
        res.visited_cells += state.visited_last_step;
        if (changed == 0) {
            res.converged = true;
            break;
        }
        if (++res.iterations >= cap) {
            break;
        }
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.labels = output_labels(state);
    res.strengths = Band(state.width, state.height, std::vector<double>(state.strengths));
    res.unlabeled = static_cast<std::size_t>(
        std::ranges::count(state.labels, kUnlabeled));
    return res;
}

}  // namespace growseg
