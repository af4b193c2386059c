#include "bapg/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "bapg/error.hpp"
#include "bapg/eval.hpp"
#include "bapg/io.hpp"
#include "bapg/proposal.hpp"
#include "bapg/tsc.hpp"

namespace bapg {

namespace {

constexpr std::uint64_t kSynthStream = 0x53594e5448ULL;
constexpr std::uint64_t kTrainStream = 0x545241494eULL;

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// ---------------------------------------------------------------- config

struct KeyContext {
    std::string key;
    std::string location; // "line 7" or "override 'k=v'"
};

[[noreturn]] void bad_type(const KeyContext& ctx, const char* expected) {
    throw ConfigError(ctx.location + ": key '" + ctx.key + "' expects " + expected);
}

[[noreturn]] void bad_range(const KeyContext& ctx, const char* constraint) {
    throw ValidationError(ctx.location + ": key '" + ctx.key + "' " + constraint);
}

double to_double(const std::string& v, const KeyContext& ctx) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
        bad_type(ctx, "a finite number");
    }
    return x;
}

std::uint64_t to_uint(const std::string& v, const KeyContext& ctx) {
    if (!v.empty() && v[0] == '-') bad_type(ctx, "a non-negative integer");
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
        bad_type(ctx, "a non-negative integer");
    }
    return x;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

// One entry per config key; applies a validated value into the config.
using KeyHandler = std::function<void(PipelineConfig&, const std::string&, const KeyContext&)>;

const std::map<std::string, KeyHandler>& key_handlers() {
    static const std::map<std::string, KeyHandler> handlers = {
        {"seed",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             c.seed = to_uint(v, ctx);
         }},
        {"num_videos",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             c.synth.num_videos = to_uint(v, ctx);
         }},
        {"duration_min",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0)) bad_range(ctx, "must be > 0");
             c.synth.duration_min = x;
         }},
        {"duration_max",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0)) bad_range(ctx, "must be > 0");
             c.synth.duration_max = x;
         }},
        {"interval",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0)) bad_range(ctx, "must be > 0");
             c.synth.interval_seconds = x;
         }},
        {"actions_min",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             c.synth.actions_min = to_uint(v, ctx);
         }},
        {"actions_max",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             c.synth.actions_max = to_uint(v, ctx);
         }},
        {"action_len_min",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0)) bad_range(ctx, "must be > 0");
             c.synth.action_len_min = x;
         }},
        {"action_len_max",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0)) bad_range(ctx, "must be > 0");
             c.synth.action_len_max = x;
         }},
        {"hard_phase_min",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x >= 0.0)) bad_range(ctx, "must be >= 0");
             c.synth.hard_phase_min = x;
         }},
        {"hard_phase_max",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x >= 0.0)) bad_range(ctx, "must be >= 0");
             c.synth.hard_phase_max = x;
         }},
        {"background_dim",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const std::uint64_t x = to_uint(v, ctx);
             if (x < 1) bad_range(ctx, "must be >= 1");
             c.synth.background_dim = x;
         }},
        {"semantic_dim",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const std::uint64_t x = to_uint(v, ctx);
             if (x < 1) bad_range(ctx, "must be >= 1");
             c.synth.semantic_dim = x;
         }},
        {"background_scale",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0)) bad_range(ctx, "must be > 0");
             c.synth.background_scale = x;
         }},
        {"semantic_scale",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0)) bad_range(ctx, "must be > 0");
             c.synth.semantic_scale = x;
         }},
        {"noise_scale",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x >= 0.0)) bad_range(ctx, "must be >= 0");
             c.synth.noise_scale = x;
         }},
        {"num_classes",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const std::uint64_t x = to_uint(v, ctx);
             if (x < 1) bad_range(ctx, "must be >= 1");
             c.synth.num_classes = x;
         }},
        {"hard_window",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             if (v == "inf") {
                 c.hard_window_seconds = std::numeric_limits<double>::infinity();
                 return;
             }
             const double x = to_double(v, ctx);
             if (!(x >= 0.0)) bad_range(ctx, "must be >= 0 (or 'inf')");
             c.hard_window_seconds = x;
         }},
        {"learning_rate",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0)) bad_range(ctx, "must be > 0");
             c.train.learning_rate = x;
         }},
        {"epochs",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const std::uint64_t x = to_uint(v, ctx);
             if (x < 1) bad_range(ctx, "must be >= 1");
             c.train.epochs = static_cast<int>(x);
         }},
        {"batch_size",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const std::uint64_t x = to_uint(v, ctx);
             if (x < 1) bad_range(ctx, "must be >= 1");
             c.train.batch_size = static_cast<int>(x);
         }},
        {"margin",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x >= 0.0)) bad_range(ctx, "must be >= 0");
             c.train.margin = x;
         }},
        {"loss_mode",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             if (v == "literal") {
                 c.train.loss_mode = LossMode::Literal;
             } else if (v == "standard") {
                 c.train.loss_mode = LossMode::Standard;
             } else {
                 bad_type(ctx, "'literal' or 'standard'");
             }
         }},
        {"weight_decay",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x >= 0.0)) bad_range(ctx, "must be >= 0");
             c.train.weight_decay = x;
         }},
        {"hidden_dim",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const std::uint64_t x = to_uint(v, ctx);
             if (x < 1) bad_range(ctx, "must be >= 1");
             c.train.hidden_dim = x;
         }},
        {"embed_dim",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const std::uint64_t x = to_uint(v, ctx);
             if (x < 1) bad_range(ctx, "must be >= 1");
             c.train.embed_dim = x;
         }},
        {"m_values",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             std::vector<std::size_t> ms;
             for (const auto& part : split_list(v)) ms.push_back(to_uint(part, ctx));
             if (ms.empty()) bad_range(ctx, "must be a nonempty list");
             c.m_values = std::move(ms);
         }},
        {"top_k",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             c.top_k = to_uint(v, ctx);
         }},
        {"alpha",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!std::isfinite(x)) bad_range(ctx, "must be finite");
             c.alpha = x;
         }},
        {"eval_thresholds",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             std::vector<double> ts;
             for (const auto& part : split_list(v)) {
                 const double t = to_double(part, ctx);
                 if (!(t > 0.0) || !(t <= 1.0)) bad_range(ctx, "entries must lie in (0, 1]");
                 ts.push_back(t);
             }
             if (ts.empty()) bad_range(ctx, "must be a nonempty list");
             c.eval_thresholds = std::move(ts);
         }},
        {"top_n",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const std::uint64_t x = to_uint(v, ctx);
             if (x < 1) bad_range(ctx, "must be >= 1");
             c.recall_top_n = x;
         }},
        {"boundary_threshold",
         [](PipelineConfig& c, const std::string& v, const KeyContext& ctx) {
             const double x = to_double(v, ctx);
             if (!(x > 0.0) || !(x <= 1.0)) bad_range(ctx, "must lie in (0, 1]");
             c.boundary_threshold = x;
         }},
    };
    return handlers;
}

void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value,
               const KeyContext& ctx) {
    const auto& handlers = key_handlers();
    const auto it = handlers.find(key);
    if (it == handlers.end()) {
        throw ConfigError(ctx.location + ": unknown key '" + key + "'");
    }
    it->second(cfg, value, ctx);
}

// ---------------------------------------------------------------- stages

using fs_path = std::filesystem::path;

struct ProvenanceInput {
    std::string name;
    std::uint64_t hash;
};

void write_provenance(const fs_path& out_dir, const std::string& stage,
                      const PipelineConfig& cfg,
                      const std::vector<ProvenanceInput>& inputs) {
    std::string text = "stage=" + stage + "\n";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    text += "config_hash=" + std::string(buf) + "\n";
    text += "seed=" + std::to_string(cfg.seed) + "\n";
    std::vector<ProvenanceInput> sorted = inputs;
    std::sort(sorted.begin(), sorted.end(),
              [](const ProvenanceInput& a, const ProvenanceInput& b) {
                  return a.name < b.name;
              });
    for (const auto& in : sorted) {
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(in.hash));
        text += "input=" + in.name + " fnv=" + std::string(buf) + "\n";
    }
    io::write_text_atomic(out_dir / (stage + ".provenance.txt"), text);
}

std::vector<std::string> manifest_video_ids(const std::string& manifest,
                                            const std::string& source) {
    std::vector<std::string> ids;
    std::istringstream in(manifest);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string id;
        if (!(ls >> id)) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": malformed line");
        }
        ids.push_back(id);
    }
    return ids;
}

// Loads the manifest plus a per-video artifact, recording hashes for
// provenance.
struct LoadedText {
    std::string text;
    ProvenanceInput prov;
};

LoadedText load_tracked(const fs_path& path) {
    LoadedText lt;
    lt.text = io::read_text_file(path);
    lt.prov = {path.filename().string(), io::fnv1a64(lt.text)};
    return lt;
}

LoadedText load_tracked_rel(const fs_path& out_dir, const std::string& rel) {
    LoadedText lt;
    lt.text = io::read_text_file(out_dir / rel);
    lt.prov = {rel, io::fnv1a64(lt.text)};
    return lt;
}

std::vector<std::string> require_manifest(const fs_path& out_dir,
                                          std::vector<ProvenanceInput>& inputs) {
    const LoadedText lt = load_tracked_rel(out_dir, "manifest.txt");
    inputs.push_back(lt.prov);
    return manifest_video_ids(lt.text, "manifest.txt");
}

void run_synth(const PipelineConfig& cfg, const fs_path& out_dir) {
    SynthConfig synth = cfg.synth;
    synth.seed = cfg.synth_seed();
    const auto dataset = generate_dataset(synth);
    for (const auto& v : dataset) {
        io::write_text_atomic(out_dir / "features" / (v.features.video_id + ".txt"),
                              io::format_feature_file(v.features));
        io::write_text_atomic(out_dir / "annotations" / (v.annotation.video_id + ".txt"),
                              io::format_annotation_file({v.annotation}));
    }
    io::write_text_atomic(out_dir / "manifest.txt", manifest_text(dataset));
    write_provenance(out_dir, "synth", cfg, {});
}

void run_pools(const PipelineConfig& cfg, const fs_path& out_dir) {
    std::vector<ProvenanceInput> inputs;
    const auto ids = require_manifest(out_dir, inputs);
    std::vector<SamplePools> all;
    for (const auto& id : ids) {
        const LoadedText ft = load_tracked_rel(out_dir, "features/" + id + ".txt");
        const LoadedText at = load_tracked_rel(out_dir, "annotations/" + id + ".txt");
        inputs.push_back(ft.prov);
        inputs.push_back(at.prov);
        const auto features = io::parse_feature_file(ft.text, "features/" + id + ".txt");
        const auto anns = io::parse_annotation_file(at.text, "annotations/" + id + ".txt");
        if (anns.size() != 1 || anns[0].video_id != id) {
            throw ValidationError("annotations/" + id + ".txt: expected one annotation for '" +
                                  id + "'");
        }
        all.push_back(label_clips(anns[0], features.num_frames(), features.interval_seconds,
                                  cfg.hard_window_seconds));
    }
    io::write_text_atomic(out_dir / "pools.txt", io::format_pools_file(all));
    write_provenance(out_dir, "pools", cfg, inputs);
}

void run_train(const PipelineConfig& cfg, const fs_path& out_dir) {
    std::vector<ProvenanceInput> inputs;
    const auto ids = require_manifest(out_dir, inputs);
    const LoadedText pt = load_tracked_rel(out_dir, "pools.txt");
    inputs.push_back(pt.prov);
    const auto pools = io::parse_pools_file(pt.text, "pools.txt");

    std::map<std::string, const SamplePools*> poolsById;
    for (const auto& p : pools) poolsById[p.video_id] = &p;

    std::vector<std::pair<FrameFeatureSequence, SamplePools>> dataset;
    for (const auto& id : ids) {
        const LoadedText ft = load_tracked_rel(out_dir, "features/" + id + ".txt");
        inputs.push_back(ft.prov);
        auto features = io::parse_feature_file(ft.text, "features/" + id + ".txt");
        const auto it = poolsById.find(id);
        if (it == poolsById.end()) {
            throw ValidationError("pools.txt: no pools for video '" + id + "'");
        }
        if (it->second->num_frames > features.num_frames()) {
            throw ValidationError("pools.txt: frame indices for video '" + id +
                                  "' exceed the feature file's " +
                                  std::to_string(features.num_frames()) + " rows");
        }
        dataset.emplace_back(std::move(features), *it->second);
    }

    TrainConfig train = cfg.train;
    train.seed = cfg.train_seed();
    const TrainResult result = train_encoder(dataset, train);

    io::write_text_atomic(out_dir / "encoder.txt", io::format_encoder_file(result.params));
    std::string trace;
    for (std::size_t i = 0; i < result.epoch_loss.size(); ++i) {
        trace += std::to_string(i) + " " + io::format_double(result.epoch_loss[i], 12) + "\n";
    }
    io::write_text_atomic(out_dir / "loss_trace.txt", trace);
    write_provenance(out_dir, "train", cfg, inputs);
}

void run_embed(const PipelineConfig& cfg, const fs_path& out_dir) {
    std::vector<ProvenanceInput> inputs;
    const auto ids = require_manifest(out_dir, inputs);
    const LoadedText et = load_tracked_rel(out_dir, "encoder.txt");
    inputs.push_back(et.prov);
    const auto params = io::parse_encoder_file(et.text, "encoder.txt");
    for (const auto& id : ids) {
        const LoadedText ft = load_tracked_rel(out_dir, "features/" + id + ".txt");
        inputs.push_back(ft.prov);
        const auto features = io::parse_feature_file(ft.text, "features/" + id + ".txt");
        const auto emb = encode_sequence(features, params);
        io::write_text_atomic(out_dir / "embeddings" / (id + ".txt"),
                              io::format_embedding_file(emb));
    }
    write_provenance(out_dir, "embed", cfg, inputs);
}

void run_simmat(const PipelineConfig& cfg, const fs_path& out_dir) {
    std::vector<ProvenanceInput> inputs;
    const auto ids = require_manifest(out_dir, inputs);
    for (const auto& id : ids) {
        const LoadedText lt = load_tracked_rel(out_dir, "embeddings/" + id + ".txt");
        inputs.push_back(lt.prov);
        const auto emb = io::parse_embedding_file(lt.text, "embeddings/" + id + ".txt");
        const auto sim = build_similarity_matrix(emb);
        io::write_text_atomic(out_dir / "simmats" / (id + ".txt"),
                              io::format_similarity_file(sim));
    }
    write_provenance(out_dir, "simmat", cfg, inputs);
}

void run_segment(const PipelineConfig& cfg, const fs_path& out_dir) {
    std::vector<ProvenanceInput> inputs;
    const auto ids = require_manifest(out_dir, inputs);
    std::string out;
    for (const auto& id : ids) {
        const LoadedText lt = load_tracked_rel(out_dir, "simmats/" + id + ".txt");
        inputs.push_back(lt.prov);
        const auto sim = io::parse_similarity_file(lt.text, "simmats/" + id + ".txt");
        for (std::size_t m : cfg.m_values) {
            if (m > sim.size() - 1) {
                throw ValidationError("segment: m = " + std::to_string(m) +
                                      " out of range for video '" + id + "' (l = " +
                                      std::to_string(sim.size()) + ")");
            }
            out += io::format_segmentation_line(optimal_change_points(sim, m)) + "\n";
        }
    }
    io::write_text_atomic(out_dir / "segmentations.txt", out);
    write_provenance(out_dir, "segment", cfg, inputs);
}

void run_propose(const PipelineConfig& cfg, const fs_path& out_dir) {
    std::vector<ProvenanceInput> inputs;
    const auto ids = require_manifest(out_dir, inputs);
    std::string out;
    for (const auto& id : ids) {
        const LoadedText lt = load_tracked_rel(out_dir, "simmats/" + id + ".txt");
        inputs.push_back(lt.prov);
        const auto sim = io::parse_similarity_file(lt.text, "simmats/" + id + ".txt");
        out += io::format_proposal_file(generate_proposals(sim, cfg.m_values));
    }
    io::write_text_atomic(out_dir / "proposals.txt", out);
    write_provenance(out_dir, "propose", cfg, inputs);
}

void run_refine(const PipelineConfig& cfg, const fs_path& out_dir) {
    std::vector<ProvenanceInput> inputs;
    const auto ids = require_manifest(out_dir, inputs);
    const LoadedText pt = load_tracked_rel(out_dir, "proposals.txt");
    inputs.push_back(pt.prov);
    const ProposalSet all = io::parse_proposal_file(pt.text, "proposals.txt");

    std::map<std::string, ProposalSet> byVideo;
    for (const auto& p : all) byVideo[p.video_id].push_back(p);

    for (const auto& id : ids) {
        const LoadedText ft = load_tracked_rel(out_dir, "features/" + id + ".txt");
        inputs.push_back(ft.prov);
        const auto features = io::parse_feature_file(ft.text, "features/" + id + ".txt");
        FeatureSequence fv;
        fv.video_id = features.video_id;
        fv.stride_seconds = features.interval_seconds;
        fv.rows = features.features;
        const auto it = byVideo.find(id);
        const ProposalSet& props = (it == byVideo.end()) ? ProposalSet{} : it->second;
        const FeatureSequence refined = refine_features(fv, props, cfg.top_k, cfg.alpha);
        FrameFeatureSequence out;
        out.video_id = refined.video_id;
        out.interval_seconds = refined.stride_seconds;
        out.features = refined.rows;
        io::write_text_atomic(out_dir / "refined" / (id + ".txt"),
                              io::format_feature_file(out));
    }
    write_provenance(out_dir, "refine", cfg, inputs);
}

std::string format_report_row(const std::string& name,
                              const std::vector<std::pair<double, double>>& values,
                              double average) {
    char buf[64];
    std::string row = name;
    row.resize(std::max<std::size_t>(row.size(), 24), ' ');
    for (const auto& [t, v] : values) {
        std::snprintf(buf, sizeof(buf), "  %6.4f", v);
        row += buf;
    }
    std::snprintf(buf, sizeof(buf), "  %6.4f", average);
    row += buf;
    return row + "\n";
}

std::string report_header(const std::vector<double>& thresholds) {
    char buf[64];
    std::string head(24, ' ');
    head.replace(0, 6, "metric");
    for (double t : thresholds) {
        std::snprintf(buf, sizeof(buf), "  %6.2f", t);
        head += buf;
    }
    head += "    Avg.";
    return head + "\n";
}

void run_eval(const PipelineConfig& cfg, const fs_path& out_dir,
              const std::vector<std::string>& extra_proposal_files) {
    std::vector<ProvenanceInput> inputs;
    const auto ids = require_manifest(out_dir, inputs);

    std::vector<VideoAnnotation> ground_truth;
    for (const auto& id : ids) {
        const LoadedText at = load_tracked_rel(out_dir, "annotations/" + id + ".txt");
        inputs.push_back(at.prov);
        for (auto& ann : io::parse_annotation_file(at.text, "annotations/" + id + ".txt")) {
            ground_truth.push_back(std::move(ann));
        }
    }

    // Default: the pipeline's own proposals; extra files produce one
    // side-by-side row each (the ablation table).
    std::vector<std::pair<std::string, ProposalSet>> entries;
    if (extra_proposal_files.empty()) {
        const LoadedText pt = load_tracked_rel(out_dir, "proposals.txt");
        inputs.push_back(pt.prov);
        entries.emplace_back("proposals.txt",
                             io::parse_proposal_file(pt.text, "proposals.txt"));
    } else {
        for (const auto& file : extra_proposal_files) {
            const LoadedText pt = load_tracked(file);
            inputs.push_back(pt.prov);
            entries.emplace_back(fs_path(file).filename().string(),
                                 io::parse_proposal_file(pt.text, file));
        }
    }

    std::string report = report_header(cfg.eval_thresholds);
    for (const auto& [name, props] : entries) {
        const EvalReport rep = evaluate_recall_over_thresholds(
            props, ground_truth, cfg.eval_thresholds, cfg.recall_top_n);
        const std::string row_name =
            (entries.size() == 1 ? rep.metric_name : rep.metric_name + " " + name);
        report += format_report_row(row_name, rep.per_threshold, rep.average);
    }
    report += "\n";
    for (const auto& [name, props] : entries) {
        const BoundaryErrorResult be =
            boundary_error(props, ground_truth, cfg.boundary_threshold);
        report += "boundary_error";
        if (entries.size() > 1) report += " " + name;
        report += " threshold=" + io::format_double(cfg.boundary_threshold, 6);
        if (be.num_matches == 0) {
            report += " no_matches\n";
        } else {
            report += " matches=" + std::to_string(be.num_matches) +
                      " mean_abs_start=" + io::format_double(be.mean_abs_start, 6) +
                      " mean_abs_end=" + io::format_double(be.mean_abs_end, 6) + "\n";
        }
    }
    std::size_t num_gt = 0;
    for (const auto& ann : ground_truth) num_gt += ann.instances.size();
    report += "num_ground_truth=" + std::to_string(num_gt) + "\n";

    io::write_text_atomic(out_dir / "report.txt", report);
    write_provenance(out_dir, "eval", cfg, inputs);
}

} // namespace

void PipelineConfig::validate() const {
    synth.validate();
    train.validate();
    if (!(hard_window_seconds >= 0.0)) {
        throw ValidationError("config: hard_window must be >= 0");
    }
    if (m_values.empty()) throw ValidationError("config: m_values must be nonempty");
    if (eval_thresholds.empty()) {
        throw ValidationError("config: eval_thresholds must be nonempty");
    }
    for (double t : eval_thresholds) {
        if (!(t > 0.0) || !(t <= 1.0)) {
            throw ValidationError("config: eval_thresholds entries must lie in (0, 1]");
        }
    }
    if (recall_top_n < 1) throw ValidationError("config: top_n must be >= 1");
    if (!(boundary_threshold > 0.0) || !(boundary_threshold <= 1.0)) {
        throw ValidationError("config: boundary_threshold must lie in (0, 1]");
    }
    if (!std::isfinite(alpha)) throw ValidationError("config: alpha must be finite");
}

std::uint64_t PipelineConfig::synth_seed() const { return mix_seed(seed, kSynthStream); }
std::uint64_t PipelineConfig::train_seed() const { return mix_seed(seed, kTrainStream); }

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "'");
        }
        apply_key(cfg, key, value, {key, "line " + std::to_string(lineno)});
    }
    cfg.validate();
    return cfg;
}

void apply_override(PipelineConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override '" + assignment + "': expected key=value");
    }
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    apply_key(cfg, key, value, {key, "override '" + assignment + "'"});
    cfg.validate();
}

std::string serialize_config(const PipelineConfig& cfg) {
    std::string out;
    const auto add = [&out](const std::string& k, const std::string& v) {
        out += k + " = " + v + "\n";
    };
    add("seed", std::to_string(cfg.seed));
    add("num_videos", std::to_string(cfg.synth.num_videos));
    add("duration_min", io::format_double(cfg.synth.duration_min, 12));
    add("duration_max", io::format_double(cfg.synth.duration_max, 12));
    add("interval", io::format_double(cfg.synth.interval_seconds, 12));
    add("actions_min", std::to_string(cfg.synth.actions_min));
    add("actions_max", std::to_string(cfg.synth.actions_max));
    add("action_len_min", io::format_double(cfg.synth.action_len_min, 12));
    add("action_len_max", io::format_double(cfg.synth.action_len_max, 12));
    add("hard_phase_min", io::format_double(cfg.synth.hard_phase_min, 12));
    add("hard_phase_max", io::format_double(cfg.synth.hard_phase_max, 12));
    add("background_dim", std::to_string(cfg.synth.background_dim));
    add("semantic_dim", std::to_string(cfg.synth.semantic_dim));
    add("background_scale", io::format_double(cfg.synth.background_scale, 12));
    add("semantic_scale", io::format_double(cfg.synth.semantic_scale, 12));
    add("noise_scale", io::format_double(cfg.synth.noise_scale, 12));
    add("num_classes", std::to_string(cfg.synth.num_classes));
    add("hard_window", io::format_double(cfg.hard_window_seconds, 12));
    add("learning_rate", io::format_double(cfg.train.learning_rate, 12));
    add("epochs", std::to_string(cfg.train.epochs));
    add("batch_size", std::to_string(cfg.train.batch_size));
    add("margin", io::format_double(cfg.train.margin, 12));
    add("loss_mode", cfg.train.loss_mode == LossMode::Literal ? "literal" : "standard");
    add("weight_decay", io::format_double(cfg.train.weight_decay, 12));
    add("hidden_dim", std::to_string(cfg.train.hidden_dim));
    add("embed_dim", std::to_string(cfg.train.embed_dim));
    std::string ms;
    for (std::size_t i = 0; i < cfg.m_values.size(); ++i) {
        if (i) ms += ",";
        ms += std::to_string(cfg.m_values[i]);
    }
    add("m_values", ms);
    add("top_k", std::to_string(cfg.top_k));
    add("alpha", io::format_double(cfg.alpha, 12));
    std::string ts;
    for (std::size_t i = 0; i < cfg.eval_thresholds.size(); ++i) {
        if (i) ts += ",";
        ts += io::format_double(cfg.eval_thresholds[i], 12);
    }
    add("eval_thresholds", ts);
    add("top_n", std::to_string(cfg.recall_top_n));
    add("boundary_threshold", io::format_double(cfg.boundary_threshold, 12));
    return out;
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
    return io::fnv1a64(serialize_config(cfg));
}

void run_subcommand(const std::string& name, const PipelineConfig& cfg,
                    const std::filesystem::path& out_dir,
                    const std::vector<std::string>& extra_inputs) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    if (name == "synth") {
        run_synth(cfg, out_dir);
    } else if (name == "pools") {
        run_pools(cfg, out_dir);
    } else if (name == "train") {
        run_train(cfg, out_dir);
    } else if (name == "embed") {
        run_embed(cfg, out_dir);
    } else if (name == "simmat") {
        run_simmat(cfg, out_dir);
    } else if (name == "segment") {
        run_segment(cfg, out_dir);
    } else if (name == "propose") {
        run_propose(cfg, out_dir);
    } else if (name == "refine") {
        run_refine(cfg, out_dir);
    } else if (name == "eval") {
        run_eval(cfg, out_dir, extra_inputs);
    } else if (name == "pipeline") {
        run_synth(cfg, out_dir);
        run_pools(cfg, out_dir);
        run_train(cfg, out_dir);
        run_embed(cfg, out_dir);
        run_simmat(cfg, out_dir);
        run_segment(cfg, out_dir);
        run_propose(cfg, out_dir);
        run_refine(cfg, out_dir);
        run_eval(cfg, out_dir, {});
    } else {
        throw ConfigError("unknown subcommand '" + name + "'");
    }
}

} // namespace bapg
