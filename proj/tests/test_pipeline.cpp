#include "doctest.h"

#include <filesystem>
#include <string>

#include "bapg/error.hpp"
#include "bapg/io.hpp"
#include "bapg/pipeline.hpp"

using namespace bapg;
namespace fs = std::filesystem;

namespace {

// Small but complete config so stage tests stay fast.
PipelineConfig tiny_config() {
    PipelineConfig cfg;
    cfg.seed = 5;
    cfg.synth.num_videos = 4;
    cfg.synth.duration_min = 30;
    cfg.synth.duration_max = 40;
    cfg.synth.actions_min = 1;
    cfg.synth.actions_max = 2;
    cfg.train.epochs = 10;
    cfg.m_values = {2, 4};
    return cfg;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("parse_config on an empty file yields all defaults") {
    const PipelineConfig cfg = parse_config("");
    const PipelineConfig def;
    CHECK(serialize_config(cfg) == serialize_config(def));
    CHECK(cfg.m_values == std::vector<std::size_t>{4, 6, 8});
    CHECK(cfg.eval_thresholds == std::vector<double>{0.3, 0.4, 0.5, 0.6, 0.7});
}

TEST_CASE("parse_config handles lists, comments and whitespace") {
    const auto cfg = parse_config(
        "# a comment\n"
        "m_values = 2,3,4\n"
        "  eval_thresholds = 0.5, 0.75  # trailing comment\n"
        "hard_window = inf\n"
        "\n"
        "loss_mode = literal\n");
    CHECK(cfg.m_values == std::vector<std::size_t>{2, 3, 4});
    CHECK(cfg.eval_thresholds == std::vector<double>{0.5, 0.75});
    CHECK(std::isinf(cfg.hard_window_seconds));
    CHECK(cfg.train.loss_mode == LossMode::Literal);
}

TEST_CASE("parse_config rejections name the key and line") {
    CHECK_THROWS_WITH_AS((void)parse_config("margin = -1\n"),
                         doctest::Contains("'margin'"), ValidationError);
    CHECK_THROWS_WITH_AS((void)parse_config("nope = 3\n"), doctest::Contains("'nope'"),
                         ConfigError);
    CHECK_THROWS_WITH_AS((void)parse_config("seed = 1\nseed = 2\n"),
                         doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_WITH_AS((void)parse_config("epochs = soon\n"),
                         doctest::Contains("'epochs'"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("just a line\n"), ConfigError);
    CHECK_THROWS_WITH_AS((void)parse_config("eval_thresholds = 0.5,1.5\n"),
                         doctest::Contains("eval_thresholds"), ValidationError);
    // Only hard_window accepts 'inf'; numeric keys must stay finite.
    CHECK_THROWS_AS((void)parse_config("duration_max = inf\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("alpha = nan\n"), ConfigError);
}

TEST_CASE("serialize/parse round-trip is stable") {
    PipelineConfig cfg = tiny_config();
    cfg.hard_window_seconds = std::numeric_limits<double>::infinity();
    const std::string text = serialize_config(cfg);
    const PipelineConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("apply_override") {
    PipelineConfig cfg;
    apply_override(cfg, "m_values=1,2");
    CHECK(cfg.m_values == std::vector<std::size_t>{1, 2});
    CHECK_THROWS_AS(apply_override(cfg, "margin"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_override(cfg, "margin=-2"), doctest::Contains("'margin'"),
                         ValidationError);
}

TEST_CASE("unknown subcommand") {
    const PipelineConfig cfg;
    CHECK_THROWS_WITH_AS(run_subcommand("transmogrify", cfg, "/tmp/bapg_never"),
                         doctest::Contains("transmogrify"), ConfigError);
}

TEST_CASE("stages demand their upstream artifacts") {
    TempDir dir("bapg_stage_missing");
    const PipelineConfig cfg = tiny_config();
    CHECK_THROWS_AS(run_subcommand("pools", cfg, dir.path), MissingArtifactError);
    CHECK_THROWS_AS(run_subcommand("eval", cfg, dir.path), MissingArtifactError);
}

TEST_CASE("pipeline stages are idempotent and isolated") {
    TempDir dir("bapg_stage_isolation");
    const PipelineConfig cfg = tiny_config();
    run_subcommand("pipeline", cfg, dir.path);

    const std::string proposals = io::read_text_file(dir.path / "proposals.txt");
    const std::string report = io::read_text_file(dir.path / "report.txt");
    const std::string encoder = io::read_text_file(dir.path / "encoder.txt");
    CHECK(!proposals.empty());

    // Deleting a downstream artifact and re-running only that stage
    // reproduces it exactly.
    fs::remove(dir.path / "proposals.txt");
    run_subcommand("propose", cfg, dir.path);
    CHECK(io::read_text_file(dir.path / "proposals.txt") == proposals);

    // Re-running with identical inputs is idempotent.
    run_subcommand("train", cfg, dir.path);
    CHECK(io::read_text_file(dir.path / "encoder.txt") == encoder);
    run_subcommand("eval", cfg, dir.path);
    CHECK(io::read_text_file(dir.path / "report.txt") == report);
}

TEST_CASE("segment honors m_values and writes one line per video and m") {
    TempDir dir("bapg_segment_stage");
    PipelineConfig cfg = tiny_config();
    cfg.m_values = {0};
    run_subcommand("pipeline", cfg, dir.path);

    const std::string segs = io::read_text_file(dir.path / "segmentations.txt");
    std::size_t lines = 0;
    for (char c : segs) lines += (c == '\n');
    CHECK(lines == cfg.synth.num_videos);
    CHECK(segs.find("m=0") != std::string::npos);
    CHECK(segs.find("cps=") != std::string::npos);

    // m = 0: every video yields exactly one whole-video proposal.
    const auto props =
        io::parse_proposal_file(io::read_text_file(dir.path / "proposals.txt"), "p");
    CHECK(props.size() == cfg.synth.num_videos);
    for (const auto& p : props) CHECK(p.t_start == 0.0);
}

TEST_CASE("provenance records are deterministic") {
    TempDir dir("bapg_provenance");
    const PipelineConfig cfg = tiny_config();
    run_subcommand("synth", cfg, dir.path);
    const std::string prov = io::read_text_file(dir.path / "synth.provenance.txt");
    CHECK(prov.find("stage=synth") != std::string::npos);
    CHECK(prov.find("config_hash=") != std::string::npos);
    CHECK(prov.find("seed=5") != std::string::npos);
    run_subcommand("synth", cfg, dir.path);
    CHECK(io::read_text_file(dir.path / "synth.provenance.txt") == prov);
}
