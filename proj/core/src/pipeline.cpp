#include "growseg/pipeline.hpp"

#include "growseg/clustering.hpp"
#include "growseg/error.hpp"
#include "growseg/morphology.hpp"
#include "growseg/seeding.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

namespace growseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Named substreams of the run's prng_seed.
constexpr std::uint64_t kKMeansStream = 1;

const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{
        "input_header", "input_data", "output_dir",     "asf_radius", "scales",
        "quant_levels", "min_seed_size", "red_band",     "nir_band",   "k",
        "restarts",     "prng_seed",   "kmeans_max_iter", "neighborhood", "max_iters",
        "engine",       "threads",     "rgb_bands",      "overlay_color"};
    return keys;
}

std::string color_string(Rgb c) {
    return std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b);
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct RunContext {
    PipelineConfig config;
    MultiBandRaster raw;
    fs::path dir;
    RunManifest& manifest;

    void emit(const char* name, std::span<const std::uint8_t> bytes) {
        write_file_bytes(dir / name, bytes);
        manifest.output_hashes[name] = sha256_hex(bytes);
    }
    void emit_text(const char* name, std::string_view text) {
        emit(name, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    void record_time(std::string_view stage, double seconds) {
        auto it = std::ranges::find(manifest.timings, stage, &StageTiming::stage);
        if (it == manifest.timings.end()) {
            manifest.timings.push_back({std::string(stage), seconds});
        } else {
            it->seconds = seconds;
        }
    }
};

template <typename Fn>
auto in_stage(RunContext& ctx, std::string_view stage, Fn&& fn) {
    Stopwatch clock;
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            ctx.record_time(stage, clock.seconds());
        } else {
            auto out = fn();
            ctx.record_time(stage, clock.seconds());
            return out;
        }
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(std::string(stage), e.what());
    }
}

std::vector<std::uint8_t> encode_mask_pgm(const BinaryMask& mask) {
    const std::string header =
        "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    for (auto v : mask.data) {
        out.push_back(v ? 255 : 0);
    }
    return out;
}

Band gradient_stage(RunContext& ctx) {
    const auto& c = ctx.config;
    MultiBandRaster filtered = normalize_bands(ctx.raw);
    for (int b = 0; b < filtered.bands(); ++b) {
        filtered.set_band(b, asf(filtered.extract_band(b), c.asf_radius, c.threads));
    }
    const Band gradient = multiscale_gradient(filtered, c.scales, c.threads);
    // The stored gradient is f32; later stages see exactly what a reload sees.
    const MultiBandRaster stored =
        round_to_f32(MultiBandRaster(gradient.width, gradient.height, 1, gradient.data));
    ctx.emit_text(files::gradient_header,
                  format_header({stored.width(), stored.height(), 1, DType::f32le, {"gradient"}}));
    ctx.emit(files::gradient_data, encode_raster(stored, DType::f32le));
    return stored.extract_band(0);
}

SeedSet seeds_stage(RunContext& ctx, const Band& gradient) {
    const auto& c = ctx.config;
    const BinaryMask minima = regional_minima(gradient, c.quant_levels);
    SeedSet seeds = connected_components(minima);
    ctx.manifest.minima_pixels = minima.count();
    ctx.manifest.seeds_before_prune = seeds.regions.size();
    try {
        seeds = prune_small(std::move(seeds), static_cast<std::size_t>(c.min_seed_size));
    } catch (const EmptySeedsError& e) {
        throw StageError("prune", e.what());
    }
    ctx.manifest.seeds_after_prune = seeds.regions.size();
    describe_seeds(seeds, ctx.raw, ndvi(ctx.raw, c.red_band, c.nir_band), c.threads);
    ctx.emit(files::seed_mask, encode_mask_pgm(seed_mask(seeds)));
    ctx.emit_text(files::seeds, seeds_to_json(seeds));
    return seeds;
}

SeedSet label_stage(RunContext& ctx, SeedSet seeds) {
    const auto& c = ctx.config;
    if (seeds.regions.empty()) {
        throw EmptySeedsError("seed set is empty");
    }
    const auto ranges = band_ranges(ctx.raw);
    std::vector<Descriptor> scaled;
    scaled.reserve(seeds.regions.size());
    for (const auto& r : seeds.regions) {
        scaled.push_back(scale_descriptor(r.descriptor, ranges));
    }
    const Prng base = Prng(c.prng_seed).substream(kKMeansStream);
    const KMeansResult best =
        best_of_restarts(scaled, c.k, c.restarts, base, c.kmeans_max_iter, c.threads);
    auto& m = ctx.manifest;
    m.k_requested = c.k;
    m.k_used = best.k;
    m.restart_selected = best.run_index;
    m.separation = best.separation;
    m.inertia = best.inertia;
    std::erase_if(m.warnings, [](const std::string& w) { return w.starts_with("label:"); });
    if (best.k < c.k) {
        m.warnings.push_back("label: k lowered from " + std::to_string(c.k) + " to " +
                             std::to_string(best.k) + " (only " + std::to_string(best.k) +
                             " distinct seed descriptors)");
    }
    seeds = apply_labels(std::move(seeds), best);
    ctx.emit_text(files::labeled_seeds, seeds_to_json(seeds));
    return seeds;
}

LabelRaster segment_stage(RunContext& ctx, const SeedSet& labeled) {
    const auto& c = ctx.config;
    const MultiBandRaster features =
        assemble_features(normalize_bands(ctx.raw), ndvi(ctx.raw, c.red_band, c.nir_band));
    const GrowCutParams params{c.max_iters, c.neighborhood, c.threads};
    AutomatonState state = init_automaton(features, labeled, params);
    const GrowCutResult res = run(state, params, c.engine);
    auto& m = ctx.manifest;
    m.iterations = res.iterations;
    m.converged = res.converged;
    m.unlabeled = res.unlabeled;
    m.visited_cells = res.visited_cells;
    std::erase_if(m.warnings, [](const std::string& w) { return w.starts_with("segment:"); });
    if (!res.converged) {
        m.warnings.push_back("segment: automaton stopped at max_iters before convergence");
    }
    if (res.unlabeled > 0) {
        m.warnings.push_back("segment: " + std::to_string(res.unlabeled) +
                             " cells unreachable, left at label 0");
    }
    json report{{"engine", std::string(engine_name(res.engine))},
                {"iterations", res.iterations},
                {"converged", res.converged},
                {"unlabeled", res.unlabeled},
                {"visited_cells", res.visited_cells},
                {"c_bar", state.c_bar},
                {"changed_per_generation", res.changed_per_generation},
                {"wall_seconds", res.wall_seconds}};
    write_text_file(ctx.dir / files::growcut_report, report.dump(2) + "\n");
    ctx.emit(files::labels, encode_label_pgm(res.labels));
    return res.labels;
}

void vectorize_stage(RunContext& ctx, const LabelRaster& labels) {
    const auto& c = ctx.config;
    const PolygonSet polygons = trace_contours(labels);
    ctx.manifest.polygons = polygons.polygons.size();
    ctx.emit_text(files::polygons, polygons_to_json(polygons));
    ctx.emit(files::overlay, encode_ppm(render_overlay_image(ctx.raw, labels, c.rgb_bands, c.overlay_color)));
}

MultiBandRaster load_input(const PipelineConfig& config) {
    try {
        return load_raster(config.input_header, config.input_data);
    } catch (const std::exception& e) {
        throw StageError("load", e.what());
    }
}

PipelineConfig prepare(const PipelineConfig& config, const MultiBandRaster& raw) {
    auto resolved = resolve_defaults(config, raw.width(), raw.height(), raw.bands());
    validate_config(resolved, raw.bands());
    return resolved;
}

void write_manifest(const RunContext& ctx) {
    write_text_file(ctx.dir / files::manifest, manifest_to_json(ctx.manifest));
}

void require_file(const fs::path& p, std::string_view stage, std::string_view producer) {
    if (!fs::exists(p)) {
        throw DependencyError("stage '" + std::string(stage) + "' needs " + p.filename().string() +
                              "; run stage '" + std::string(producer) + "' first");
    }
}

}  // namespace

PipelineConfig config_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (!config_keys().contains(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    PipelineConfig c;
    try {
        auto str = [&](const char* k, fs::path& out) {
            if (j.contains(k)) out = j.at(k).get<std::string>();
        };
        auto num = [&](const char* k, auto& out) {
            if (j.contains(k) && !j.at(k).is_null()) out = j.at(k).get<std::remove_reference_t<decltype(out)>>();
        };
        str("input_header", c.input_header);
        str("input_data", c.input_data);
        str("output_dir", c.output_dir);
        num("asf_radius", c.asf_radius);
        num("scales", c.scales);
        num("quant_levels", c.quant_levels);
        num("min_seed_size", c.min_seed_size);
        num("red_band", c.red_band);
        num("nir_band", c.nir_band);
        num("k", c.k);
        num("restarts", c.restarts);
        num("prng_seed", c.prng_seed);
        num("kmeans_max_iter", c.kmeans_max_iter);
        num("max_iters", c.max_iters);
        num("threads", c.threads);
        if (j.contains("neighborhood")) c.neighborhood = parse_neighborhood(j.at("neighborhood").get<std::string>());
        if (j.contains("engine")) c.engine = parse_engine(j.at("engine").get<std::string>());
        if (j.contains("rgb_bands") && !j.at("rgb_bands").is_null()) {
            const auto v = j.at("rgb_bands").get<std::vector<int>>();
            if (v.size() != 3) throw ConfigError("rgb_bands needs exactly 3 indices");
            std::ranges::copy(v, c.rgb_bands.begin());
        }
        if (j.contains("overlay_color")) c.overlay_color = parse_rgb(j.at("overlay_color").get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

std::string config_to_json(const PipelineConfig& c) {
    json j{{"input_header", c.input_header.string()},
           {"input_data", c.input_data.string()},
           {"output_dir", c.output_dir.string()},
           {"asf_radius", c.asf_radius},
           {"scales", c.scales},
           {"quant_levels", c.quant_levels},
           {"min_seed_size", c.min_seed_size},
           {"red_band", c.red_band},
           {"nir_band", c.nir_band},
           {"k", c.k},
           {"restarts", c.restarts},
           {"prng_seed", c.prng_seed},
           {"kmeans_max_iter", c.kmeans_max_iter},
           {"neighborhood", std::string(neighborhood_name(c.neighborhood))},
           {"max_iters", c.max_iters},
           {"engine", std::string(engine_name(c.engine))},
           {"threads", c.threads},
           {"rgb_bands", c.rgb_bands},
           {"overlay_color", color_string(c.overlay_color)}};
    return j.dump(2);
}

PipelineConfig resolve_paths(PipelineConfig config, const fs::path& base) {
    for (fs::path* p : {&config.input_header, &config.input_data, &config.output_dir}) {
        if (!p->empty() && p->is_relative()) {
            *p = base / *p;
        }
    }
    return config;
}

void validate_config(const PipelineConfig& c, int bands) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (c.input_header.empty() || c.input_data.empty()) fail("input_header and input_data are required");
    if (c.output_dir.empty()) fail("output_dir is required");
    if (c.asf_radius < 1) fail("asf_radius must be >= 1");
    if (c.scales < 1) fail("scales must be >= 1");
    if (c.quant_levels < 2) fail("quant_levels must be >= 2");
    if (c.min_seed_size < 1) fail("min_seed_size must be >= 1");
    if (c.red_band < 0 || c.nir_band < 0) fail("red_band and nir_band are required");
    if (c.red_band >= bands || c.nir_band >= bands) fail("red_band/nir_band out of range for a " + std::to_string(bands) + "-band image");
    if (c.red_band == c.nir_band) fail("red_band and nir_band must differ");
    if (c.k < 1 || c.k > 65534) fail("k must be in 1..65534");
    if (c.restarts < 1) fail("restarts must be >= 1");
    if (c.kmeans_max_iter < 1) fail("kmeans_max_iter must be >= 1");
    if (c.max_iters < 0) fail("max_iters must be >= 1 (or 0 for the default)");
    if (c.threads < 1) fail("threads must be >= 1");
    for (int b : c.rgb_bands) {
        if (b < 0 || b >= bands) fail("rgb_bands index out of range");
    }
}

PipelineConfig resolve_defaults(PipelineConfig c, int width, int height, int bands) {
    if (c.max_iters == 0) {
        c.max_iters = width + height;
    }
    if (c.rgb_bands == std::array<int, 3>{-1, -1, -1} && c.red_band >= 0 && c.nir_band >= 0) {
        int other = c.red_band;
        for (int b = 0; b < bands; ++b) {
            if (b != c.red_band && b != c.nir_band) {
                other = b;
                break;
            }
        }
        c.rgb_bands = {c.nir_band, c.red_band, other};
    }
    return c;
}

std::string manifest_to_json(const RunManifest& m) {
    json timings = json::array();
    for (const auto& t : m.timings) {
        timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    }
    json j{{"config", json::parse(config_to_json(m.config))},
           {"timings", std::move(timings)},
           {"seeds", {{"minima_pixels", m.minima_pixels},
                      {"before_prune", m.seeds_before_prune},
                      {"after_prune", m.seeds_after_prune}}},
           {"clustering", {{"k_requested", m.k_requested},
                           {"k_used", m.k_used},
                           {"restart_selected", m.restart_selected},
                           {"separation", std::isfinite(m.separation) ? json(m.separation) : json(nullptr)},
                           {"inertia", m.inertia}}},
           {"automaton", {{"iterations", m.iterations},
                          {"converged", m.converged},
                          {"unlabeled", m.unlabeled},
                          {"visited_cells", m.visited_cells}}},
           {"polygons", m.polygons},
           {"warnings", m.warnings},
           {"outputs", m.output_hashes}};
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        RunManifest m;
        m.config = config_from_json(j.at("config").dump());
        for (const auto& t : j.at("timings")) {
            m.timings.push_back({t.at("stage").get<std::string>(), t.at("seconds").get<double>()});
        }
        const auto& s = j.at("seeds");
        m.minima_pixels = s.at("minima_pixels").get<std::size_t>();
        m.seeds_before_prune = s.at("before_prune").get<std::size_t>();
        m.seeds_after_prune = s.at("after_prune").get<std::size_t>();
        const auto& c = j.at("clustering");
        m.k_requested = c.at("k_requested").get<int>();
        m.k_used = c.at("k_used").get<int>();
        m.restart_selected = c.at("restart_selected").get<std::size_t>();
        m.separation = c.at("separation").is_null() ? std::numeric_limits<double>::infinity()
                                                    : c.at("separation").get<double>();
        m.inertia = c.at("inertia").get<double>();
        const auto& a = j.at("automaton");
        m.iterations = a.at("iterations").get<int>();
        m.converged = a.at("converged").get<bool>();
        m.unlabeled = a.at("unlabeled").get<std::size_t>();
        m.visited_cells = a.at("visited_cells").get<std::size_t>();
        m.polygons = j.at("polygons").get<std::size_t>();
        m.warnings = j.at("warnings").get<std::vector<std::string>>();
        m.output_hashes = j.at("outputs").get<std::map<std::string, std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
}

RunManifest run_pipeline(const PipelineConfig& config) {
    const MultiBandRaster raw = load_input(config);
    RunManifest manifest;
    manifest.config = prepare(config, raw);
    RunContext ctx{manifest.config, raw, manifest.config.output_dir, manifest};
    try {
        fs::create_directories(ctx.dir);
    } catch (const fs::filesystem_error& e) {
        throw StageError("setup", e.what());
    }
    const Band gradient = in_stage(ctx, "gradient", [&] { return gradient_stage(ctx); });
    SeedSet seeds = in_stage(ctx, "seeds", [&] { return seeds_stage(ctx, gradient); });
    const SeedSet labeled = in_stage(ctx, "label", [&] { return label_stage(ctx, std::move(seeds)); });
    const LabelRaster labels = in_stage(ctx, "segment", [&] { return segment_stage(ctx, labeled); });
    in_stage(ctx, "vectorize", [&] { vectorize_stage(ctx, labels); });
    write_manifest(ctx);
    return manifest;
}

RunManifest run_stage(std::string_view stage, const PipelineConfig& config) {
    if (std::ranges::find(kStages, stage) == kStages.end()) {
        throw ConfigError("unknown stage '" + std::string(stage) +
                          "' (expected gradient, seeds, label, segment or vectorize)");
    }
    const MultiBandRaster raw = load_input(config);
    const PipelineConfig resolved = prepare(config, raw);
    const fs::path dir = resolved.output_dir;

    RunManifest manifest;
    if (fs::exists(dir / files::manifest)) {
        manifest = manifest_from_json(read_text_file(dir / files::manifest));
    }
    manifest.config = resolved;
    RunContext ctx{resolved, raw, dir, manifest};
    try {
        fs::create_directories(dir);
    } catch (const fs::filesystem_error& e) {
        throw StageError("setup", e.what());
    }

    if (stage == "gradient") {
        in_stage(ctx, stage, [&] { gradient_stage(ctx); });
    } else if (stage == "seeds") {
        require_file(dir / files::gradient_header, stage, "gradient");
        require_file(dir / files::gradient_data, stage, "gradient");
        in_stage(ctx, stage, [&] {
            const auto g = load_raster(dir / files::gradient_header, dir / files::gradient_data);
            if (g.width() != raw.width() || g.height() != raw.height() || g.bands() != 1) {
                throw SizeError("stored gradient does not match the input image");
            }
            seeds_stage(ctx, g.extract_band(0));
        });
    } else if (stage == "label") {
        require_file(dir / files::seeds, stage, "seeds");
        in_stage(ctx, stage, [&] { label_stage(ctx, load_seeds(dir / files::seeds)); });
    } else if (stage == "segment") {
        require_file(dir / files::labeled_seeds, stage, "label");
        in_stage(ctx, stage, [&] { segment_stage(ctx, load_seeds(dir / files::labeled_seeds)); });
    } else {
        require_file(dir / files::labels, stage, "segment");
        in_stage(ctx, stage, [&] {
            const auto labels = load_label_raster(dir / files::labels);
            if (labels.width != raw.width() || labels.height != raw.height()) {
                throw SizeError("stored label raster does not match the input image");
            }
            vectorize_stage(ctx, labels);
        });
    }
    write_manifest(ctx);
    return manifest;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const fs::path& path) {
    return sha256_hex(read_file_bytes(path));
}

}  // namespace growseg
