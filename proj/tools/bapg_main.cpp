// Command-line driver: boundary-aware temporal proposal pipeline.
//
//   bapg <subcommand> [--config <path>] [--seed <int>] [--set key=value]...
//        [--out <dir>] [proposal files... (eval only)]
//
// Subcommands: synth pools train embed simmat segment propose refine eval
// pipeline. Exit statuses: 0 success, 2 config error, 3 missing artifact,
// 4 validation error, 1 other.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "bapg/error.hpp"
#include "bapg/io.hpp"
#include "bapg/pipeline.hpp"

namespace {

const char* kUsage =
    "usage: bapg <subcommand> [--config <path>] [--seed <int>]\n"
    "            [--set key=value]... [--out <dir>] [proposal files...]\n"
    "\n"
    "subcommands:\n"
    "  synth     generate the synthetic dataset (features, annotations, manifest)\n"
    "  pools     build positive / hard-negative / easy-negative frame pools\n"
    "  train     train the contrastive encoder on triplet draws\n"
    "  embed     encode per-frame features into unit-norm embeddings\n"
    "  simmat    build per-video cosine similarity matrices\n"
    "  segment   run the change-point DP for every configured m\n"
    "  propose   turn multi-scale segmentations into scored proposals\n"
    "  refine    blend top-k proposal means back into the video features\n"
    "  eval      recall/boundary report; extra proposal files -> ablation table\n"
    "  pipeline  run every stage in order\n";

std::string next_arg(const std::vector<std::string>& args, std::size_t& i,
                     const std::string& flag) {
    if (i + 1 >= args.size()) {
        throw bapg::ConfigError("flag " + flag + " needs a value");
    }
    return args[++i];
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
            std::fputs(kUsage, args.empty() ? stderr : stdout);
            return args.empty() ? 2 : 0;
        }
        const std::string subcommand = args[0];

        std::string config_path;
        std::string out_dir = "out";
        std::vector<std::string> overrides;
        std::vector<std::string> positionals;
        bool seed_given = false;
        std::uint64_t seed = 0;

        for (std::size_t i = 1; i < args.size(); ++i) {
            const std::string& a = args[i];
            if (a == "--config") {
                config_path = next_arg(args, i, a);
            } else if (a == "--out") {
                out_dir = next_arg(args, i, a);
            } else if (a == "--set") {
                overrides.push_back(next_arg(args, i, a));
            } else if (a == "--seed") {
                const std::string v = next_arg(args, i, a);
                try {
                    seed = std::stoull(v);
                } catch (const std::exception&) {
                    throw bapg::ConfigError("--seed expects a non-negative integer, got '" +
                                            v + "'");
                }
                seed_given = true;
            } else if (!a.empty() && a[0] == '-') {
                throw bapg::ConfigError("unknown flag '" + a + "'");
            } else {
                positionals.push_back(a);
            }
        }
        if (!positionals.empty() && subcommand != "eval") {
            throw bapg::ConfigError("unexpected positional argument '" + positionals[0] +
                                    "' for subcommand '" + subcommand + "'");
        }

        bapg::PipelineConfig cfg;
        if (!config_path.empty()) {
            cfg = bapg::parse_config(bapg::io::read_text_file(config_path));
        }
        for (const auto& o : overrides) bapg::apply_override(cfg, o);
        if (seed_given) cfg.seed = seed;

        bapg::run_subcommand(subcommand, cfg, out_dir, positionals);
        return 0;
    } catch (const bapg::ConfigError& e) {
        std::fprintf(stderr, "error kind=config msg=\"%s\"\n", e.what());
        return 2;
    } catch (const bapg::MissingArtifactError& e) {
        std::fprintf(stderr, "error kind=missing-artifact msg=\"%s\"\n", e.what());
        return 3;
    } catch (const bapg::ValidationError& e) {
        std::fprintf(stderr, "error kind=validation msg=\"%s\"\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error kind=other msg=\"%s\"\n", e.what());
        return 1;
    }
}
