#ifndef BAPG_IO_HPP
#define BAPG_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bapg/contrastive.hpp"
#include "bapg/core.hpp"
#include "bapg/proposal.hpp"
#include "bapg/sample_pool.hpp"
#include "bapg/tsc.hpp"

namespace bapg {
namespace io {

// All writers are atomic (write to <path>.tmp, then rename) and emit
// decimals with enough significant digits to round-trip within 1e-9.

std::string format_feature_file(const FrameFeatureSequence& features);
FrameFeatureSequence parse_feature_file(const std::string& text,
                                        const std::string& source_name);

std::string format_embedding_file(const EmbeddingSequence& emb);
EmbeddingSequence parse_embedding_file(const std::string& text,
                                       const std::string& source_name);

std::string format_similarity_file(const SimilarityMatrix& sim);
SimilarityMatrix parse_similarity_file(const std::string& text,
                                       const std::string& source_name);

// One or more videos per file; a "# video=<id> duration=<d>" header starts
// each section, followed by "<video_id> <t_s> <t_e> <label>" lines.
std::string format_annotation_file(const std::vector<VideoAnnotation>& annotations);
std::vector<VideoAnnotation> parse_annotation_file(const std::string& text,
                                                   const std::string& source_name);

// "<video_id> <instance_idx> <pool_kind> <frame_idx...>", kind in
// {pos, hard, easy}; the easy pool uses instance index -1.
std::string format_pools_file(const std::vector<SamplePools>& pools);
std::vector<SamplePools> parse_pools_file(const std::string& text,
                                          const std::string& source_name);

// Header "# d=<d> h=<h> e=<e>", then sections W1, b1, W2, b2.
std::string format_encoder_file(const EncoderParams& params);
EncoderParams parse_encoder_file(const std::string& text, const std::string& source_name);

// "<video_id> <t_s> <t_e> <score> <source_m>", descending score per video.
std::string format_proposal_file(const ProposalSet& proposals);
ProposalSet parse_proposal_file(const std::string& text, const std::string& source_name);

// "<video_id> m=<m> cost=<total> cps=<c1,c2,...>".
std::string format_segmentation_line(const Segmentation& seg);

std::string read_text_file(const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
bool file_exists(const std::filesystem::path& path);

// FNV-1a 64-bit content hash, used for provenance records.
std::uint64_t fnv1a64(const std::string& bytes);

// Shorthand for formatting a double with the given significant digits.
std::string format_double(double value, int significant_digits);

} // namespace io
} // namespace bapg

#endif
