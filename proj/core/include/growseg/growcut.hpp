#pragma once

#include "growseg/morphology.hpp"
#include "growseg/raster.hpp"
#include "growseg/seeding.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace growseg {

enum class Neighborhood { moore8, vonneumann4 };
enum class Engine { synchronous, active_set };

std::string_view neighborhood_name(Neighborhood n) noexcept;
Neighborhood parse_neighborhood(std::string_view name);
std::string_view engine_name(Engine e) noexcept;
Engine parse_engine(std::string_view name);

/// Offsets in row-major order from (-1,-1) to (1,1), centre excluded. This
/// order is the attacker tie-break order.
std::vector<Offset> neighborhood_offsets(Neighborhood n);

struct GrowCutParams {
    /// 0 selects the default cap of width + height generations.
    int max_iterations = 0;
    Neighborhood neighborhood = Neighborhood::moore8;
    unsigned threads = 1;
};

inline constexpr std::int32_t kUnlabeled = -1;

/// Attack weight g(x) = 1 - x / c_bar, clamped to [0,1].
double attack_weight(double distance, double c_bar) noexcept;

/// Normalized bands followed by NDVI rescaled from [-1,1] to [0,1]: the
/// per-cell feature vectors the automaton compares.
MultiBandRaster assemble_features(const MultiBandRaster& normalized, const Band& ndvi_band);

/// Cellular automaton state. Cell p = y * width + x holds (label, strength)
/// for the current generation plus a feature vector of `dims` values.
/// The synchronous engine writes the next generation into the `next_*`
/// buffers and swaps; the active-set engine evaluates only candidate cells
/// against the current generation and applies the collected changes
/// afterwards. Both read generation t only.
struct AutomatonState {
    int width = 0;
    int height = 0;
    int dims = 0;
    /// Pixel-interleaved: features[p * dims + c].
    std::vector<double> features;
    std::vector<Offset> neighborhood;
    /// Denominator of the attack weight; never below any neighbour distance.
    double c_bar = 1.0;
    unsigned threads = 1;

    std::vector<std::int32_t> labels;
    std::vector<double> strengths;
    std::vector<std::int32_t> next_labels;
    std::vector<double> next_strengths;

    std::uint64_t generation = 0;
    std::size_t changed_last_step = 0;
    std::size_t visited_last_step = 0;
    /// Cells that changed in the last step, ascending. Meaningful only when
    /// `has_history` (no step has run yet otherwise).
    std::vector<std::size_t> changed_cells;
    bool has_history = false;

    // Active-set scratch.
    std::vector<std::uint32_t> mark;
    std::uint32_t mark_stamp = 0;

    std::size_t cell_count() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
};

/// max over cells of the feature norm, raised to the largest neighbour
/// feature distance if that is bigger; 1 when everything is zero.
double compute_c_bar(const MultiBandRaster& features, const std::vector<Offset>& neighborhood);

/// State with every cell unlabeled at strength 0. Features must be finite
/// and non-negative.
AutomatonState make_automaton(const MultiBandRaster& features, const GrowCutParams& params);

/// Seed pixels of labeled regions start at (cluster_label, 1); every other
/// cell at (unlabeled, 0). Throws EmptySeedsError without labeled seeds.
AutomatonState init_automaton(const MultiBandRaster& features, const SeedSet& seeds,
                              const GrowCutParams& params);

/// One generation over every cell. Returns the number of changed cells.
std::size_t step_synchronous(AutomatonState& state);

/// One generation visiting only neighbours of the cells changed in the
/// previous generation (all cells on the first step). Same result as
/// step_synchronous, bit for bit.
std::size_t step_active_set(AutomatonState& state);

std::size_t step(AutomatonState& state, Engine engine);

struct GrowCutResult {
    /// cluster label + 1; 0 for cells no seed reached.
    LabelRaster labels;
    Band strengths;
    /// Generations that changed at least one cell.
    int iterations = 0;
    bool converged = false;
    std::size_t unlabeled = 0;
    /// Changed-cell count per generation, including the final quiet one.
    std::vector<std::size_t> changed_per_generation;
    std::size_t visited_cells = 0;
    double wall_seconds = 0.0;
    Engine engine = Engine::active_set;
};

/// Steps until a generation changes nothing or max_iterations changing
/// generations have run (then converged = false).
GrowCutResult run(AutomatonState& state, const GrowCutParams& params,
                  Engine engine = Engine::active_set);

LabelRaster output_labels(const AutomatonState& state);

}  // namespace growseg
