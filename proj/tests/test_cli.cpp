// Exercises the installed binary end to end: exit statuses, determinism of
// rerun artifacts, and the multi-file eval table.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "bapg/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = BAPG_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// Keeps CLI runs fast.
const std::string kTinySets =
    "--set num_videos=4 --set duration_min=30 --set duration_max=40 "
    "--set actions_max=2 --set epochs=10 --set m_values=2,4";

} // namespace

TEST_CASE("exit statuses follow the documented contract") {
    TempDir dir("bapg_cli_exit");
    const std::string out = " --out " + (dir.path / "o").string();

    CHECK(run("") == 2);                         // no subcommand
    CHECK(run("transmogrify" + out) == 2);       // unknown subcommand
    CHECK(run("synth --bogus-flag" + out) == 2); // unknown flag
    CHECK(run("pools" + out) == 3);              // missing upstream artifact

    const fs::path bad_cfg = dir.path / "bad.cfg";
    std::ofstream(bad_cfg) << "margin = -1\n";
    CHECK(run("synth --config " + bad_cfg.string() + out) == 4); // value validation

    const fs::path unknown_key = dir.path / "unk.cfg";
    std::ofstream(unknown_key) << "no_such_key = 1\n";
    CHECK(run("synth --config " + unknown_key.string() + out) == 2); // config error

    CHECK(run("synth --config " + (dir.path / "absent.cfg").string() + out) == 3);

    CHECK(run("synth --seed 3 " + kTinySets + out) == 0);
    CHECK(run("help") == 0);
}

TEST_CASE("reruns with identical config and seed are byte-identical") {
    TempDir a("bapg_cli_det_a");
    TempDir b("bapg_cli_det_b");
    REQUIRE(run("pipeline --seed 11 " + kTinySets + " --out " + a.path.string()) == 0);
    REQUIRE(run("pipeline --seed 11 " + kTinySets + " --out " + b.path.string()) == 0);

    for (const char* name : {"proposals.txt", "report.txt", "encoder.txt",
                             "segmentations.txt", "manifest.txt", "pools.txt"}) {
        CHECK(bapg::io::read_text_file(a.path / name) ==
              bapg::io::read_text_file(b.path / name));
    }

    // A different seed changes the artifacts.
    TempDir c("bapg_cli_det_c");
    REQUIRE(run("pipeline --seed 12 " + kTinySets + " --out " + c.path.string()) == 0);
    CHECK(bapg::io::read_text_file(a.path / "proposals.txt") !=
          bapg::io::read_text_file(c.path / "proposals.txt"));
}

TEST_CASE("eval accepts several proposal files and emits a side-by-side table") {
    TempDir dir("bapg_cli_ablation");
    const std::string out = " --out " + dir.path.string();
    REQUIRE(run("pipeline --seed 13 " + kTinySets + out) == 0);

    // Build two proposal variants from the same similarity matrices.
    REQUIRE(run("propose --seed 13 " + kTinySets + out + " --set m_values=2") == 0);
    fs::copy_file(dir.path / "proposals.txt", dir.path / "m2.txt");
    REQUIRE(run("propose --seed 13 " + kTinySets + out + " --set m_values=2,4") == 0);
    fs::copy_file(dir.path / "proposals.txt", dir.path / "m24.txt");

    REQUIRE(run("eval --seed 13 " + kTinySets + out + " " + (dir.path / "m2.txt").string() +
                " " + (dir.path / "m24.txt").string()) == 0);
    const std::string report = bapg::io::read_text_file(dir.path / "report.txt");
    CHECK(report.find("m2.txt") != std::string::npos);
    CHECK(report.find("m24.txt") != std::string::npos);
    CHECK(report.find("Avg.") != std::string::npos);
}
