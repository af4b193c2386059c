#ifndef BAPG_TESTS_HELPERS_HPP
#define BAPG_TESTS_HELPERS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "bapg/core.hpp"
#include "bapg/matrix.hpp"
#include "bapg/rng.hpp"

namespace test_helpers {

// Matrix of random unit-norm rows.
inline bapg::Matrix random_unit_rows(std::size_t rows, std::size_t cols, bapg::Rng& rng) {
    bapg::Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                m(i, j) = rng.normal();
                norm2 += m(i, j) * m(i, j);
            }
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t j = 0; j < cols; ++j) m(i, j) *= inv;
    }
    return m;
}

// Similarity matrix built as a Gram matrix of random unit vectors (PSD by
// construction).
inline bapg::SimilarityMatrix random_gram_similarity(std::size_t l, std::size_t dim,
                                                     bapg::Rng& rng,
                                                     const std::string& id = "test") {
    const bapg::Matrix rows = random_unit_rows(l, dim, rng);
    bapg::SimilarityMatrix sim;
    sim.video_id = id;
    sim.interval_seconds = 1.0;
    sim.values = bapg::Matrix(l, l);
    for (std::size_t i = 0; i < l; ++i) {
        sim.values(i, i) = 1.0;
        for (std::size_t j = i + 1; j < l; ++j) {
            const double s = bapg::dot(rows.row(i), rows.row(j));
            sim.values(i, j) = s;
            sim.values(j, i) = s;
        }
    }
    return sim;
}

inline bapg::SimilarityMatrix similarity_from(const std::vector<std::vector<double>>& vals,
                                              const std::string& id = "test",
                                              double interval = 1.0) {
    bapg::SimilarityMatrix sim;
    sim.video_id = id;
    sim.interval_seconds = interval;
    sim.values = bapg::Matrix(vals.size(), vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        for (std::size_t j = 0; j < vals.size(); ++j) sim.values(i, j) = vals[i][j];
    }
    return sim;
}

// Two 2x2 all-ones blocks, zeros elsewhere.
inline bapg::SimilarityMatrix block_diagonal_4x4() {
    return similarity_from({{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1}});
}

} // namespace test_helpers

#endif
