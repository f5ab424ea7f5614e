// segcli: unsupervised multispectral segmentation (seeds -> k-means -> GrowCut).
//
//   segcli run   --config cfg.json [overrides...]
//   segcli stage <gradient|seeds|label|segment|vectorize> --config cfg.json [overrides...]
//   segcli gen-synthetic --spec spec.json
//
// Exit codes: 0 success, 2 configuration error, 3 pipeline error.

#include "growseg/error.hpp"
#include "growseg/pipeline.hpp"
#include "growseg/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;

struct Overrides {
    std::optional<std::string> input_header, input_data, output_dir;
    std::optional<int> asf_radius, scales, quant_levels, min_seed_size, red_band, nir_band, k,
        restarts, kmeans_max_iter, max_iters;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> neighborhood, engine, overlay_color;
    std::optional<std::vector<int>> rgb_bands;

    void add_to(CLI::App& app) {
        app.add_option("--input-header", input_header, "Raster header file");
        app.add_option("--input-data", input_data, "Raster data file");
        app.add_option("--output,-o", output_dir, "Output directory");
        app.add_option("--asf-radius", asf_radius, "Largest ASF structuring-element radius");
        app.add_option("--scales", scales, "Multiscale gradient scale count");
        app.add_option("--quant-levels", quant_levels, "Gradient quantization levels for minima");
        app.add_option("--min-seed-size", min_seed_size, "Smallest seed region kept (pixels)");
        app.add_option("--red-band", red_band, "0-based red band index");
        app.add_option("--nir-band", nir_band, "0-based near-infrared band index");
        app.add_option("--k", k, "Number of k-means groups");
        app.add_option("--restarts", restarts, "k-means restarts");
        app.add_option("--kmeans-max-iter", kmeans_max_iter, "Lloyd iteration cap per restart");
        app.add_option("--seed", seed, "PRNG seed");
        app.add_option("--neighborhood", neighborhood, "moore8 or vn4");
        app.add_option("--max-iters", max_iters, "Automaton generation cap (0 = width+height)");
        app.add_option("--engine", engine, "active_set or synchronous");
        app.add_option("--threads", threads, "Worker threads per stage");
        app.add_option("--rgb-bands", rgb_bands, "Three band indices for the overlay")->expected(3);
        app.add_option("--overlay-color", overlay_color, "Boundary colour, r,g,b or #rrggbb");
    }

    growseg::PipelineConfig apply(growseg::PipelineConfig c) const {
        if (input_header) c.input_header = *input_header;
        if (input_data) c.input_data = *input_data;
        if (output_dir) c.output_dir = *output_dir;
        if (asf_radius) c.asf_radius = *asf_radius;
        if (scales) c.scales = *scales;
        if (quant_levels) c.quant_levels = *quant_levels;
        if (min_seed_size) c.min_seed_size = *min_seed_size;
        if (red_band) c.red_band = *red_band;
        if (nir_band) c.nir_band = *nir_band;
        if (k) c.k = *k;
        if (restarts) c.restarts = *restarts;
        if (kmeans_max_iter) c.kmeans_max_iter = *kmeans_max_iter;
        if (seed) c.prng_seed = *seed;
        if (max_iters) c.max_iters = *max_iters;
        if (threads) c.threads = *threads;
        if (neighborhood) c.neighborhood = growseg::parse_neighborhood(*neighborhood);
        if (engine) c.engine = growseg::parse_engine(*engine);
        if (overlay_color) c.overlay_color = growseg::parse_rgb(*overlay_color);
        if (rgb_bands) std::ranges::copy(*rgb_bands, c.rgb_bands.begin());
        return c;
    }
};

growseg::PipelineConfig load_config(const std::string& path, const Overrides& overrides) {
    growseg::PipelineConfig c;
    if (!path.empty()) {
        std::string text;
        try {
            text = growseg::read_text_file(path);
        } catch (const growseg::IoError& e) {
            throw growseg::ConfigError(e.what());
        }
        c = growseg::resolve_paths(growseg::config_from_json(text),
                                   std::filesystem::path(path).parent_path());
    }
    return overrides.apply(c);
}

void print_summary(const growseg::RunManifest& m) {
    std::cout << "seeds: " << m.seeds_before_prune << " -> " << m.seeds_after_prune
              << " after pruning\n"
              << "k used: " << m.k_used << " (requested " << m.k_requested << ")\n"
              << "automaton: " << m.iterations << " generations, "
              << (m.converged ? "converged" : "NOT converged") << ", " << m.unlabeled
              << " unlabeled\n"
              << "polygons: " << m.polygons << "\n"
              << "output: " << m.config.output_dir.string() << "\n";
    for (const auto& w : m.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised multispectral segmentation with a GrowCut cellular automaton"};
    app.require_subcommand(1);

    std::string run_config;
    Overrides run_overrides;
    auto* run_cmd = app.add_subcommand("run", "Run the full pipeline");
    run_cmd->add_option("--config,-c", run_config, "Pipeline config JSON");
    run_overrides.add_to(*run_cmd);

    std::string stage_name;
    std::string stage_config;
    Overrides stage_overrides;
    auto* stage_cmd = app.add_subcommand("stage", "Run one stage from serialized intermediates");
    stage_cmd->add_option("name", stage_name, "gradient, seeds, label, segment or vectorize")->required();
    stage_cmd->add_option("--config,-c", stage_config, "Pipeline config JSON");
    stage_overrides.add_to(*stage_cmd);

    std::string spec_path;
    auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a synthetic test image and its truth labels");
    gen_cmd->add_option("--spec", spec_path, "Synthetic image spec JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run_cmd) {
            print_summary(growseg::run_pipeline(load_config(run_config, run_overrides)));
        } else if (*stage_cmd) {
            const auto m = growseg::run_stage(stage_name, load_config(stage_config, stage_overrides));
            std::cout << "stage " << stage_name << " done, output: " << m.config.output_dir.string() << "\n";
        } else if (*gen_cmd) {
            std::string text;
            try {
                text = growseg::read_text_file(spec_path);
            } catch (const growseg::IoError& e) {
                throw growseg::ConfigError(e.what());
            }
            auto spec = growseg::synthetic_spec_from_json(text);
            const auto base = std::filesystem::path(spec_path).parent_path();
            for (auto* p : {&spec.output_header, &spec.output_data, &spec.truth}) {
                if (!p->empty() && p->is_relative()) {
                    *p = base / *p;
                }
            }
            growseg::write_synthetic(spec);
            std::cout << "wrote " << spec.output_header.string() << ", " << spec.output_data.string()
                      << ", " << spec.truth.string() << "\n";
        }
    } catch (const growseg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
    return 0;
}
