#include "bapg/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "bapg/error.hpp"

namespace bapg {
namespace io {

namespace {

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_num(const std::string& tok, const std::string& source, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
        throw ValidationError(where(source, line) + ": expected a number, got '" + tok + "'");
    }
    return v;
}

std::size_t parse_index(const std::string& tok, const std::string& source, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
        throw ValidationError(where(source, line) + ": expected an index, got '" + tok + "'");
    }
    return static_cast<std::size_t>(v);
}

// Key=value fields of a "# key=value ..." header line.
std::string header_field(const std::string& line, const std::string& key,
                         const std::string& source, std::size_t lineno) {
    const std::string needle = key + "=";
    const std::size_t pos = line.find(needle);
    if (pos == std::string::npos) {
        throw ValidationError(where(source, lineno) + ": header missing '" + key + "='");
    }
    const std::size_t start = pos + needle.size();
    std::size_t end = line.find(' ', start);
    if (end == std::string::npos) end = line.size();
    return line.substr(start, end - start);
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

struct MatrixFile {
    std::string video_id;
    double interval = 1.0;
    Matrix values;
};

std::string format_matrix_file(const std::string& video_id, std::size_t frames,
                               std::size_t dim, double interval, const Matrix& values) {
    std::string out = "# video=" + video_id + " frames=" + std::to_string(frames) +
                      " dim=" + std::to_string(dim) +
                      " interval=" + format_double(interval, 12) + "\n";
    for (std::size_t i = 0; i < values.rows; ++i) {
        for (std::size_t j = 0; j < values.cols; ++j) {
            if (j > 0) out += ' ';
            out += format_double(values(i, j), 12);
        }
        out += '\n';
    }
    return out;
}

MatrixFile parse_matrix_file(const std::string& text, const std::string& source) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0].rfind("# ", 0) != 0) {
        throw ValidationError(source + ":1: expected '# video=... frames=... dim=... "
                              "interval=...' header");
    }
    MatrixFile mf;
    mf.video_id = header_field(lines[0], "video", source, 1);
    const std::size_t frames = parse_index(header_field(lines[0], "frames", source, 1), source, 1);
    const std::size_t dim = parse_index(header_field(lines[0], "dim", source, 1), source, 1);
    mf.interval = parse_num(header_field(lines[0], "interval", source, 1), source, 1);
    if (frames < 1 || dim < 1) {
        throw ValidationError(source + ":1: frames and dim must be >= 1");
    }

    mf.values = Matrix(frames, dim);
    std::size_t row = 0;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        if (row >= frames) {
            throw ValidationError(where(source, li + 1) + ": more rows than header frames=" +
                                  std::to_string(frames));
        }
        const auto toks = split_ws(lines[li]);
        if (toks.size() != dim) {
            throw ValidationError(where(source, li + 1) + ": expected " + std::to_string(dim) +
                                  " values, got " + std::to_string(toks.size()));
        }
        for (std::size_t j = 0; j < dim; ++j) {
            mf.values(row, j) = parse_num(toks[j], source, li + 1);
        }
        ++row;
    }
    if (row != frames) {
        throw ValidationError(source + ": expected " + std::to_string(frames) +
                              " rows, got " + std::to_string(row));
    }
    return mf;
}

} // namespace

std::string format_double(double value, int significant_digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, value);
    return buf;
}

std::string format_feature_file(const FrameFeatureSequence& features) {
    return format_matrix_file(features.video_id, features.num_frames(), features.dim(),
                              features.interval_seconds, features.features);
}

FrameFeatureSequence parse_feature_file(const std::string& text,
                                        const std::string& source_name) {
    MatrixFile mf = parse_matrix_file(text, source_name);
    FrameFeatureSequence f;
    f.video_id = std::move(mf.video_id);
    f.interval_seconds = mf.interval;
    f.features = std::move(mf.values);
    f.validate();
    return f;
}

std::string format_embedding_file(const EmbeddingSequence& emb) {
    return format_matrix_file(emb.video_id, emb.num_frames(), emb.dim(),
                              emb.interval_seconds, emb.embeddings);
}

EmbeddingSequence parse_embedding_file(const std::string& text,
                                       const std::string& source_name) {
    MatrixFile mf = parse_matrix_file(text, source_name);
    EmbeddingSequence e;
    e.video_id = std::move(mf.video_id);
    e.interval_seconds = mf.interval;
    e.embeddings = std::move(mf.values);
    e.validate();
    return e;
}

std::string format_similarity_file(const SimilarityMatrix& sim) {
    return format_matrix_file(sim.video_id, sim.size(), sim.size(),
                              sim.interval_seconds, sim.values);
}

SimilarityMatrix parse_similarity_file(const std::string& text,
                                       const std::string& source_name) {
    MatrixFile mf = parse_matrix_file(text, source_name);
    SimilarityMatrix s;
    s.video_id = std::move(mf.video_id);
    s.interval_seconds = mf.interval;
    s.values = std::move(mf.values);
    s.validate();
    return s;
}

std::string format_annotation_file(const std::vector<VideoAnnotation>& annotations) {
    std::string out;
    for (const auto& ann : annotations) {
        out += "# video=" + ann.video_id +
               " duration=" + format_double(ann.duration_seconds, 12) + "\n";
        for (const auto& inst : ann.instances) {
            out += ann.video_id + " " + format_double(inst.t_start, 12) + " " +
                   format_double(inst.t_end, 12) + " " + inst.label + "\n";
        }
    }
    return out;
}

std::vector<VideoAnnotation> parse_annotation_file(const std::string& text,
                                                   const std::string& source_name) {
    std::vector<VideoAnnotation> out;
    const auto lines = lines_of(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string& line = lines[li];
        if (line.empty()) continue;
        if (line[0] == '#') {
            VideoAnnotation ann;
            ann.video_id = header_field(line, "video", source_name, li + 1);
            ann.duration_seconds =
                parse_num(header_field(line, "duration", source_name, li + 1),
                          source_name, li + 1);
            out.push_back(std::move(ann));
            continue;
        }
        if (out.empty()) {
            throw ValidationError(where(source_name, li + 1) +
                                  ": instance line before any '# video=' header");
        }
        const auto toks = split_ws(line);
        if (toks.size() != 4) {
            throw ValidationError(where(source_name, li + 1) +
                                  ": expected '<video_id> <t_s> <t_e> <label>'");
        }
        if (toks[0] != out.back().video_id) {
            throw ValidationError(where(source_name, li + 1) + ": video id '" + toks[0] +
                                  "' does not match current header '" +
                                  out.back().video_id + "'");
        }
        ActionInstance inst;
        inst.t_start = parse_num(toks[1], source_name, li + 1);
        inst.t_end = parse_num(toks[2], source_name, li + 1);
        inst.label = toks[3];
        out.back().instances.push_back(std::move(inst));
    }
    // Overlapping instances are rejected here, at load time.
    for (auto& ann : out) ann.sort_and_validate();
    return out;
}

std::string format_pools_file(const std::vector<SamplePools>& pools) {
    std::string out;
    const auto emit = [&out](const std::string& video_id, long long instance,
                             const char* kind, const std::vector<std::size_t>& idx) {
        out += video_id + " " + std::to_string(instance) + " " + kind;
        for (std::size_t i : idx) out += " " + std::to_string(i);
        out += '\n';
    };
    for (const auto& p : pools) {
        for (std::size_t n = 0; n < p.num_instances(); ++n) {
            emit(p.video_id, static_cast<long long>(n), "pos", p.positives[n]);
            emit(p.video_id, static_cast<long long>(n), "hard", p.hard_negatives[n]);
        }
        emit(p.video_id, -1, "easy", p.easy_negatives);
    }
    return out;
}

std::vector<SamplePools> parse_pools_file(const std::string& text,
                                          const std::string& source_name) {
    std::vector<SamplePools> out;
    const auto lines = lines_of(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (lines[li].empty() || lines[li][0] == '#') continue;
        const auto toks = split_ws(lines[li]);
        if (toks.size() < 3) {
            throw ValidationError(where(source_name, li + 1) +
                                  ": expected '<video_id> <instance> <kind> <indices...>'");
        }
        if (out.empty() || out.back().video_id != toks[0]) {
            out.emplace_back();
            out.back().video_id = toks[0];
        }
        SamplePools& p = out.back();
        std::vector<std::size_t> idx;
        for (std::size_t i = 3; i < toks.size(); ++i) {
            idx.push_back(parse_index(toks[i], source_name, li + 1));
        }
        const std::string& kind = toks[2];
        if (kind == "easy") {
            p.easy_negatives = std::move(idx);
        } else {
            const std::size_t inst = parse_index(toks[1], source_name, li + 1);
            auto& dest = (kind == "pos") ? p.positives : p.hard_negatives;
            if (kind != "pos" && kind != "hard") {
                throw ValidationError(where(source_name, li + 1) + ": unknown pool kind '" +
                                      kind + "'");
            }
            if (dest.size() <= inst) dest.resize(inst + 1);
            dest[inst] = std::move(idx);
        }
    }
    for (auto& p : out) {
        const std::size_t n = std::max(p.positives.size(), p.hard_negatives.size());
        p.positives.resize(n);
        p.hard_negatives.resize(n);
        std::size_t max_frame = 0;
        const auto track = [&max_frame](const std::vector<std::size_t>& v) {
            for (std::size_t i : v) max_frame = std::max(max_frame, i + 1);
        };
        for (const auto& v : p.positives) track(v);
        for (const auto& v : p.hard_negatives) track(v);
        track(p.easy_negatives);
        p.num_frames = max_frame;
        for (std::size_t i = 0; i < n; ++i) {
            if (p.positives[i].empty()) p.empty_instances.push_back(i);
        }
    }
    return out;
}

std::string format_encoder_file(const EncoderParams& params) {
    std::string out = "# d=" + std::to_string(params.input_dim) +
                      " h=" + std::to_string(params.hidden_dim) +
                      " e=" + std::to_string(params.embed_dim) + "\n";
    const auto emit_matrix = [&out](const char* name, const Matrix& m) {
        out += name;
        out += '\n';
        for (std::size_t i = 0; i < m.rows; ++i) {
            for (std::size_t j = 0; j < m.cols; ++j) {
                if (j > 0) out += ' ';
                out += format_double(m(i, j), 17);
            }
            out += '\n';
        }
    };
    const auto emit_vector = [&out](const char* name, const std::vector<double>& v) {
        out += name;
        out += '\n';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) out += ' ';
            out += format_double(v[i], 17);
        }
        out += '\n';
    };
    emit_matrix("W1", params.w1);
    emit_vector("b1", params.b1);
    emit_matrix("W2", params.w2);
    emit_vector("b2", params.b2);
    return out;
}

EncoderParams parse_encoder_file(const std::string& text, const std::string& source_name) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0].rfind("# ", 0) != 0) {
        throw ValidationError(source_name + ":1: expected '# d=... h=... e=...' header");
    }
    EncoderParams p;
    p.input_dim = parse_index(header_field(lines[0], "d", source_name, 1), source_name, 1);
    p.hidden_dim = parse_index(header_field(lines[0], "h", source_name, 1), source_name, 1);
    p.embed_dim = parse_index(header_field(lines[0], "e", source_name, 1), source_name, 1);

    std::vector<double> flat;
    std::string section;
    std::map<std::string, std::vector<double>> tensors;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string& line = lines[li];
        if (line.empty()) continue;
        if (line == "W1" || line == "b1" || line == "W2" || line == "b2") {
            section = line;
            continue;
        }
        if (section.empty()) {
            throw ValidationError(where(source_name, li + 1) + ": values before any section");
        }
        for (const auto& tok : split_ws(line)) {
            tensors[section].push_back(parse_num(tok, source_name, li + 1));
        }
    }

    const auto take = [&](const char* name, std::size_t expect) {
        auto it = tensors.find(name);
        if (it == tensors.end() || it->second.size() != expect) {
            throw ValidationError(source_name + ": section '" + name + "' must hold " +
                                  std::to_string(expect) + " values");
        }
        return std::move(it->second);
    };
    p.w1 = Matrix(p.hidden_dim, p.input_dim);
    p.w1.data = take("W1", p.hidden_dim * p.input_dim);
    p.b1 = take("b1", p.hidden_dim);
    p.w2 = Matrix(p.embed_dim, p.hidden_dim);
    p.w2.data = take("W2", p.embed_dim * p.hidden_dim);
    p.b2 = take("b2", p.embed_dim);
    p.validate();
    return p;
}

std::string format_proposal_file(const ProposalSet& proposals) {
    std::string out;
    for (const Proposal& p : proposals) {
        out += p.video_id + " " + format_double(p.t_start, 9) + " " +
               format_double(p.t_end, 9) + " " + format_double(p.score, 9) + " " +
               std::to_string(p.source_m) + "\n";
    }
    return out;
}

ProposalSet parse_proposal_file(const std::string& text, const std::string& source_name) {
    ProposalSet out;
    const auto lines = lines_of(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (lines[li].empty() || lines[li][0] == '#') continue;
        const auto toks = split_ws(lines[li]);
        if (toks.size() != 5) {
            throw ValidationError(where(source_name, li + 1) +
                                  ": expected '<video_id> <t_s> <t_e> <score> <source_m>'");
        }
        Proposal p;
        p.video_id = toks[0];
        p.t_start = parse_num(toks[1], source_name, li + 1);
        p.t_end = parse_num(toks[2], source_name, li + 1);
        p.score = parse_num(toks[3], source_name, li + 1);
        p.source_m = parse_index(toks[4], source_name, li + 1);
        if (!(p.t_start >= 0.0) || !(p.t_start < p.t_end) || !std::isfinite(p.t_end) ||
            !std::isfinite(p.score)) {
            throw ValidationError(where(source_name, li + 1) + ": invalid proposal values");
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::string format_segmentation_line(const Segmentation& seg) {
    std::string out = seg.video_id + " m=" + std::to_string(seg.num_change_points()) +
                      " cost=" + format_double(seg.total_cost, 12) + " cps=";
    for (std::size_t i = 0; i < seg.change_points.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(seg.change_points[i]);
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw MissingArtifactError("missing artifact: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path.string());
    return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw IoError("write failure on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

bool file_exists(const std::filesystem::path& path) {
    return std::filesystem::exists(path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace io
} // namespace bapg
