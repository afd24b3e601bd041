#pragma once

#include "xling/linalg.hpp"

#include <vector>

namespace xling {

struct Neighbor {
    Index index = 0;
    double score = 0;
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// score(q, j) = scale * <q, key_j> - query_penalty[q] - key_penalty[j].
/// With unit rows and scale 2 plus CSLS penalties this is the CSLS score.
struct ScoreAdjust {
    double scale = 1.0;
    const Vector* query_penalty = nullptr;
    const Vector* key_penalty = nullptr;
};

/// Exhaustive top-k by inner product: descending score, ties by lower key
/// index. Work is split into fixed query blocks so results are independent
/// of `threads`.
std::vector<std::vector<Neighbor>> top_k(const Matrix& queries, const Matrix& keys, Index k,
                                         const ScoreAdjust& adjust = {}, int threads = 1);

/// For every query row, the mean of its k largest inner products with `keys`
/// (the CSLS neighbourhood density r).
Vector mean_top_k_similarity(const Matrix& queries, const Matrix& keys, Index k, int threads = 1);

}  // namespace xling
