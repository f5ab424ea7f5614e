#include "growseg/error.hpp"
#include "growseg/pipeline.hpp"
#include "growseg/synthetic.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <set>
#include <sys/wait.h>

using namespace growseg;
namespace fs = std::filesystem;

namespace {

// Left and right halves, 4 bands, means 40 apart at sigma 2.
SyntheticSpec two_halves(const fs::path& dir) {
    SyntheticSpec s;
    s.width = 64;
    s.height = 64;
    s.bands = 4;
    s.noise_sigma = 2.0;
    s.seed = 11;
    s.regions.push_back({0, 0, 32, 64, {60, 80, 40, 120}});
    s.regions.push_back({32, 0, 64, 64, {100, 40, 80, 60}});
    s.output_header = dir / "image.hdr";
    s.output_data = dir / "image.f32";
    s.truth = dir / "truth.pgm";
    return s;
}

PipelineConfig config_for(const SyntheticSpec& s, const fs::path& out) {
    PipelineConfig c;
    c.input_header = s.output_header;
    c.input_data = s.output_data;
    c.output_dir = out;
    c.red_band = 2;
    c.nir_band = 3;
    c.k = 2;
    c.restarts = 5;
    c.prng_seed = 7;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Artifacts that carry no timing information.
const std::vector<std::string> kStableFiles{
    files::gradient_header, files::gradient_data, files::seed_mask, files::seeds,
    files::labeled_seeds,   files::labels,        files::polygons,  files::overlay};

#ifdef SEGCLI_PATH
int run_cli(const std::string& args) {
    const std::string cmd = std::string(SEGCLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_CASE("two-region image is segmented exactly") {
    const auto dir = testing::scratch_dir("pipeline_two");
    const auto spec = two_halves(dir);
    const auto img = write_synthetic(spec);
    const auto m = run_pipeline(config_for(spec, dir / "out"));

    const auto labels = load_label_raster(dir / "out" / files::labels);
    REQUIRE(labels.width == 64);
    std::set<std::pair<int, int>> mapping;
    for (std::size_t i = 0; i < labels.data.size(); ++i)
        mapping.insert({img.truth.data[i], labels.data[i]});
    CHECK(mapping.size() == 2);
    std::set<int> predicted;
    for (auto [_, p] : mapping) predicted.insert(p);
    CHECK(predicted.size() == 2);
    CHECK(predicted.count(0) == 0);

    CHECK(m.k_used == 2);
    CHECK(m.converged);
    CHECK(m.unlabeled == 0);
    CHECK(m.polygons == 2);
    CHECK(m.seeds_after_prune <= m.seeds_before_prune);
    CHECK(m.config.max_iters == 128);
    for (const auto& name : kStableFiles) CHECK(m.output_hashes.count(name) == 1);
    CHECK(m.output_hashes.at(files::labels) == sha256_file(dir / "out" / files::labels));
}

TEST_CASE("runs are byte-for-byte reproducible") {
    const auto dir = testing::scratch_dir("pipeline_repeat");
    const auto spec = two_halves(dir);
    write_synthetic(spec);
    auto c = config_for(spec, dir / "a");
    run_pipeline(c);
    c.output_dir = dir / "b";
    c.threads = 4;
    run_pipeline(c);
    for (const auto& name : kStableFiles) {
        CAPTURE(name);
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }
}

TEST_CASE("staged execution matches the monolithic run") {
    const auto dir = testing::scratch_dir("pipeline_staged");
    const auto spec = two_halves(dir);
    write_synthetic(spec);
    auto c = config_for(spec, dir / "whole");
    const auto whole = run_pipeline(c);
    c.output_dir = dir / "staged";
    RunManifest staged;
    for (const char* stage : kStages) staged = run_stage(stage, c);
    for (const auto& name : kStableFiles) {
        CAPTURE(name);
        CHECK(slurp(dir / "whole" / name) == slurp(dir / "staged" / name));
    }
    CHECK(staged.output_hashes == whole.output_hashes);
    CHECK(staged.iterations == whole.iterations);
    CHECK(staged.k_used == whole.k_used);
    CHECK(staged.polygons == whole.polygons);
    const auto on_disk = manifest_from_json(slurp(dir / "staged" / files::manifest));
    CHECK(on_disk.output_hashes == whole.output_hashes);
}

TEST_CASE("stages need their predecessors") {
    const auto dir = testing::scratch_dir("pipeline_deps");
    const auto spec = two_halves(dir);
    write_synthetic(spec);
    const auto c = config_for(spec, dir / "out");
    CHECK_THROWS_AS(run_stage("segment", c), DependencyError);
    CHECK_THROWS_AS(run_stage("label", c), DependencyError);
    CHECK_THROWS_AS(run_stage("polish", c), ConfigError);
    run_stage("gradient", c);
    CHECK_THROWS_AS(run_stage("label", c), DependencyError);
    run_stage("seeds", c);
    CHECK_NOTHROW(run_stage("label", c));
}

TEST_CASE("pruning everything fails in the prune stage") {
    const auto dir = testing::scratch_dir("pipeline_prune");
    const auto spec = two_halves(dir);
    write_synthetic(spec);
    auto c = config_for(spec, dir / "out");
    c.min_seed_size = 64 * 64 + 1;
    try {
        run_pipeline(c);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "prune");
    }
}

TEST_CASE("missing input surfaces as a stage error") {
    const auto dir = testing::scratch_dir("pipeline_missing");
    auto c = config_for(two_halves(dir), dir / "out");
    CHECK_THROWS_AS(run_pipeline(c), StageError);
}

TEST_CASE("config parsing") {
    const auto c = config_from_json(R"({"input_header": "a.hdr", "input_data": "a.raw",
        "red_band": 2, "nir_band": 3, "k": 5, "neighborhood": "vn4", "engine": "synchronous",
        "rgb_bands": [3, 2, 1], "overlay_color": "#ff0000"})");
    CHECK(c.k == 5);
    CHECK(c.restarts == 10);
    CHECK(c.neighborhood == Neighborhood::vonneumann4);
    CHECK(c.engine == Engine::synchronous);
    CHECK(c.rgb_bands == std::array<int, 3>{3, 2, 1});
    CHECK(c.overlay_color == Rgb{255, 0, 0});
    CHECK(config_from_json(config_to_json(c)) == c);

    const auto rebased = resolve_paths(c, "/data/run");
    CHECK(rebased.input_header == fs::path("/data/run/a.hdr"));
    CHECK(rebased.output_dir == fs::path("/data/run/out"));

    CHECK_THROWS_AS(config_from_json(R"({"kk": 3})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"k": "three"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"rgb_bands": [1, 2]})"), ConfigError);

    CHECK_THROWS_AS(validate_config(PipelineConfig{}, 4), ConfigError);  // bands unset
    auto v = c;
    CHECK_NOTHROW(validate_config(v, 4));
    CHECK_THROWS_AS(validate_config(v, 3), ConfigError);  // nir_band out of range
    v.k = 0;
    CHECK_THROWS_AS(validate_config(v, 4), ConfigError);
    v = c;
    v.red_band = v.nir_band;
    CHECK_THROWS_AS(validate_config(v, 4), ConfigError);

    auto d = resolve_defaults(PipelineConfig{.red_band = 2, .nir_band = 3}, 30, 20, 4);
    CHECK(d.max_iters == 50);
    CHECK(d.rgb_bands == std::array<int, 3>{3, 2, 0});
}

TEST_CASE("manifest round trip") {
    RunManifest m;
    m.config.k = 3;
    m.timings = {{"gradient", 0.5}};
    m.separation = std::numeric_limits<double>::infinity();
    m.output_hashes["labels.pgm"] = std::string(64, 'a');
    m.warnings = {"k lowered"};
    const auto back = manifest_from_json(manifest_to_json(m));
    CHECK(back.config == m.config);
    CHECK(std::isinf(back.separation));
    CHECK(back.output_hashes == m.output_hashes);
    CHECK(back.warnings == m.warnings);
    CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const std::string abc = "abc";
    CHECK(sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size())) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#ifdef SEGCLI_PATH
TEST_CASE("command line exit codes") {
    const auto dir = testing::scratch_dir("pipeline_cli");
    auto spec = two_halves(dir);
    spec.output_header = "image.hdr";
    spec.output_data = "image.f32";
    spec.truth = "truth.pgm";
    {
        std::ofstream(dir / "spec.json") << synthetic_spec_to_json(spec);
    }
    CHECK(run_cli("gen-synthetic --spec " + (dir / "spec.json").string()) == 0);
    CHECK(fs::exists(dir / "image.hdr"));
    CHECK(fs::exists(dir / "truth.pgm"));

    std::ofstream(dir / "good.json") << R"({"input_header": "image.hdr", "input_data": "image.f32",
        "output_dir": "out", "red_band": 2, "nir_band": 3, "k": 2, "restarts": 3})";
    std::ofstream(dir / "unknown.json") << R"({"input_header": "image.hdr", "colour": 1})";
    CHECK(run_cli("run --config " + (dir / "good.json").string()) == 0);
    CHECK(fs::exists(dir / "out" / files::polygons));
    CHECK(run_cli("stage segment --config " + (dir / "good.json").string()) == 0);
    CHECK(run_cli("run --config " + (dir / "unknown.json").string()) == 2);
    CHECK(run_cli("run --config " + (dir / "good.json").string() + " --k 0") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("run --config " + (dir / "good.json").string() + " --min-seed-size 100000") ==
          3);
    CHECK(run_cli("stage label --config " + (dir / "good.json").string() + " -o " +
                  (dir / "empty").string()) == 3);
}
#endif
