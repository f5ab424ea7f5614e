#pragma once

#include "growseg/growcut.hpp"
#include "growseg/vectorize.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace growseg {

/// Every tunable of a run. JSON field names match the member names.
struct PipelineConfig {
    std::filesystem::path input_header;
    std::filesystem::path input_data;
    std::filesystem::path output_dir = "out";

    int asf_radius = 1;
    int scales = 2;
    int quant_levels = 64;
    int min_seed_size = 4;
    /// Required; -1 means unset.
    int red_band = -1;
    int nir_band = -1;
    int k = 20;
    int restarts = 10;
    std::uint64_t prng_seed = 0;
    int kmeans_max_iter = 100;
    Neighborhood neighborhood = Neighborhood::moore8;
    /// 0 resolves to width + height.
    int max_iters = 0;
    Engine engine = Engine::active_set;
    unsigned threads = 1;
    /// {-1,-1,-1} resolves to a false-colour IR triplet (NIR, red, other).
    std::array<int, 3> rgb_bands{-1, -1, -1};
    Rgb overlay_color{255, 255, 0};

    bool operator==(const PipelineConfig&) const = default;
};

/// Parses a config document. Unknown keys are rejected. Relative paths are
/// kept as written; see resolve_paths.
PipelineConfig config_from_json(std::string_view text);
std::string config_to_json(const PipelineConfig& config);
/// Rebases relative input/output paths onto `base`.
PipelineConfig resolve_paths(PipelineConfig config, const std::filesystem::path& base);

/// Range checks that need the image's band count. Throws ConfigError.
void validate_config(const PipelineConfig& config, int bands);
/// Fills max_iters and rgb_bands defaults for a width x height x bands image.
PipelineConfig resolve_defaults(PipelineConfig config, int width, int height, int bands);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunManifest {
    PipelineConfig config;
    std::vector<StageTiming> timings;
    std::size_t minima_pixels = 0;
    std::size_t seeds_before_prune = 0;
    std::size_t seeds_after_prune = 0;
    int k_requested = 0;
    int k_used = 0;
    std::size_t restart_selected = 0;
    double separation = 0.0;
    double inertia = 0.0;
    int iterations = 0;
    bool converged = false;
    std::size_t unlabeled = 0;
    std::size_t visited_cells = 0;
    std::size_t polygons = 0;
    std::vector<std::string> warnings;
    /// output file name -> SHA-256 hex digest
    std::map<std::string, std::string> output_hashes;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(std::string_view text);

namespace files {
inline constexpr const char* gradient_header = "gradient.hdr";
inline constexpr const char* gradient_data = "gradient.f32";
inline constexpr const char* seed_mask = "seed_mask.pgm";
inline constexpr const char* seeds = "seeds.json";
inline constexpr const char* labeled_seeds = "seeds_labeled.json";
inline constexpr const char* labels = "labels.pgm";
inline constexpr const char* growcut_report = "growcut_report.json";
inline constexpr const char* polygons = "polygons.json";
inline constexpr const char* overlay = "overlay.ppm";
inline constexpr const char* manifest = "manifest.json";
}  // namespace files

/// Stage names in execution order.
inline constexpr std::array<const char*, 5> kStages{"gradient", "seeds", "label", "segment",
                                                    "vectorize"};

/// Runs every stage in memory, writing all artifacts and manifest.json into
/// config.output_dir. Failures surface as StageError (ConfigError for bad
/// configuration).
RunManifest run_pipeline(const PipelineConfig& config);

/// Runs one stage from the serialized outputs of its predecessors, merging
/// its results into the output directory's manifest. Missing prerequisites
/// raise DependencyError.
RunManifest run_stage(std::string_view stage, const PipelineConfig& config);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace growseg
