#include "xling/retrieval.hpp"
#include "xling/parallel.hpp"

#include <algorithm>

namespace xling {
namespace {

// Rows per block: bounded so one score block stays around 32 MB.
std::size_t query_block(Index keys) {
    const Index budget = Index(1) << 22;
    return static_cast<std::size_t>(std::clamp<Index>(budget / std::max<Index>(keys, 1), 1, 256));
}

bool better(const Neighbor& a, const Neighbor& b) {
    return a.score != b.score ? a.score > b.score : a.index < b.index;
}

void select_top(std::vector<Neighbor>& row, Index k) {
    const auto kk = static_cast<std::size_t>(std::min<Index>(k, static_cast<Index>(row.size())));
    if (kk < row.size()) {
        std::nth_element(row.begin(), row.begin() + kk, row.end(), better);
        row.resize(kk);
    }
    std::sort(row.begin(), row.end(), better);
}

}  // namespace

std::vector<std::vector<Neighbor>> top_k(const Matrix& queries, const Matrix& keys, Index k,
                                         const ScoreAdjust& adjust, int threads) {
    std::vector<std::vector<Neighbor>> out(static_cast<std::size_t>(queries.rows()));
    if (keys.rows() == 0 || k <= 0) return out;
    const std::size_t block = query_block(keys.rows());
    parallel_for_blocks(out.size(), block, threads, [&](std::size_t begin, std::size_t end) {
        const Index b = static_cast<Index>(begin);
        const Index n = static_cast<Index>(end - begin);
        const Matrix scores = queries.middleRows(b, n) * keys.transpose();
        std::vector<Neighbor> row(static_cast<std::size_t>(keys.rows()));
        for (Index q = 0; q < n; ++q) {
            const double qp = adjust.query_penalty ? (*adjust.query_penalty)(b + q) : 0.0;
            for (Index j = 0; j < keys.rows(); ++j) {
                double s = adjust.scale * scores(q, j) - qp;
                if (adjust.key_penalty) s -= (*adjust.key_penalty)(j);
                row[static_cast<std::size_t>(j)] = {j, s};
            }
            auto selected = row;
            select_top(selected, k);
            out[static_cast<std::size_t>(b + q)] = std::move(selected);
        }
    });
    return out;
}

Vector mean_top_k_similarity(const Matrix& queries, const Matrix& keys, Index k, int threads) {
    Vector out = Vector::Zero(queries.rows());
    if (keys.rows() == 0 || k <= 0) return out;
    const auto kk = static_cast<std::size_t>(std::min<Index>(k, keys.rows()));
    const std::size_t block = query_block(keys.rows());
    parallel_for_blocks(static_cast<std::size_t>(queries.rows()), block, threads,
                        [&](std::size_t begin, std::size_t end) {
                            const Index b = static_cast<Index>(begin);
                            const Index n = static_cast<Index>(end - begin);
                            const Matrix scores = queries.middleRows(b, n) * keys.transpose();
                            std::vector<double> row(static_cast<std::size_t>(keys.rows()));
                            for (Index q = 0; q < n; ++q) {
                                for (Index j = 0; j < keys.rows(); ++j) row[static_cast<std::size_t>(j)] = scores(q, j);
                                std::nth_element(row.begin(), row.begin() + (kk - 1), row.end(), std::greater<>());
                                std::sort(row.begin(), row.begin() + kk, std::greater<>());
                                double sum = 0;
                                for (std::size_t i = 0; i < kk; ++i) sum += row[i];
                                out(b + q) = sum / static_cast<double>(kk);
                            }
                        });
    return out;
}

}  // namespace xling
