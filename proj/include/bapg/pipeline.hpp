#ifndef BAPG_PIPELINE_HPP
#define BAPG_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bapg/contrastive.hpp"
#include "bapg/synthetic.hpp"

namespace bapg {

// Everything a pipeline run needs, parsed from flat "key = value" text.
// The single global seed feeds per-stage seed streams.
struct PipelineConfig {
    std::uint64_t seed = 1;
    SynthConfig synth;
    double hard_window_seconds = 3.0; // +inf reproduces the whole-clip rule
    TrainConfig train;
    std::vector<std::size_t> m_values = {4, 6, 8};
    std::size_t top_k = 10;
    double alpha = 0.5;
    std::vector<double> eval_thresholds = {0.3, 0.4, 0.5, 0.6, 0.7};
    std::size_t recall_top_n = 10;
    double boundary_threshold = 0.5;

    void validate() const;
    // Per-stage seeds derived from the global one.
    std::uint64_t synth_seed() const;
    std::uint64_t train_seed() const;
};

// Parses the documented key = value format; unknown keys, duplicates and
// type mismatches are ConfigErrors, out-of-range values ValidationErrors,
// each naming the key and line.
PipelineConfig parse_config(const std::string& text);

// Applies one "key=value" override (the --set flag).
void apply_override(PipelineConfig& cfg, const std::string& assignment);

// Canonical serialization; also the basis of the provenance config hash.
std::string serialize_config(const PipelineConfig& cfg);
std::uint64_t config_hash(const PipelineConfig& cfg);

// Stage names: synth pools train embed simmat segment propose refine eval
// pipeline. Throws ConfigError for unknown names; stages throw
// MissingArtifactError / ValidationError / IoError as appropriate.
// extra_inputs currently feeds `eval` additional proposal files for
// side-by-side ablation tables.
void run_subcommand(const std::string& name, const PipelineConfig& cfg,
                    const std::filesystem::path& out_dir,
                    const std::vector<std::string>& extra_inputs = {});

} // namespace bapg

#endif
