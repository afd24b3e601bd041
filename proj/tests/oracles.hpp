#pragma once
// Independent reference implementations used only by the tests. Kept
// deliberately naive: plain loops, no shared code with the library paths
// they check.

#include "xling/embed_store.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using xling::Index;
using xling::Matrix;

inline xling::Vocabulary vocab_of(const std::vector<std::string>& tokens) {
    std::vector<std::uint64_t> f;
    std::vector<xling::TokenClass> c;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        f.push_back(static_cast<std::uint64_t>(tokens.size() - i) * 10);
        c.push_back(xling::classify_token(tokens[i]));
    }
    return {tokens, f, c};
}

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

inline xling::EmbeddingSpace space_of(const std::vector<std::string>& tokens, const Matrix& m, bool unit = false) {
    return {vocab_of(tokens), m, {unit, false}};
}

inline Matrix gaussian_unit(Index n, Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix m(n, d);
    for (Index r = 0; r < n; ++r) {
        double s = 0;
        for (Index c = 0; c < d; ++c) {
            m(r, c) = g(rng);
            s += m(r, c) * m(r, c);
        }
        for (Index c = 0; c < d; ++c) m(r, c) /= std::sqrt(s);
    }
    return m;
}

/// Exhaustive scoring with explicit loops; ties to the lower key index.
inline std::vector<std::vector<std::pair<Index, double>>> brute_top_k(const Matrix& q, const Matrix& keys, Index k) {
    std::vector<std::vector<std::pair<Index, double>>> out;
    for (Index i = 0; i < q.rows(); ++i) {
        std::vector<std::pair<Index, double>> all;
        for (Index j = 0; j < keys.rows(); ++j) {
            double s = 0;
            for (Index c = 0; c < q.cols(); ++c) s += q(i, c) * keys(j, c);
            all.emplace_back(j, s);
        }
        std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        all.resize(static_cast<std::size_t>(std::min<Index>(k, keys.rows())));
        out.push_back(std::move(all));
    }
    return out;
}

/// Least squares through the normal equations (X^T X)^-1 X^T Y.
inline Matrix normal_equations(const Matrix& x, const Matrix& y) {
    const Eigen::MatrixXd gram = x.transpose() * x;
    return gram.partialPivLu().solve(x.transpose() * y);
}

inline double frobenius_error(const Matrix& x, const Matrix& y, const Eigen::Matrix2d& w) {
    double s = 0;
    for (Index r = 0; r < x.rows(); ++r)
        for (Index c = 0; c < 2; ++c) {
            const double v = x(r, 0) * w(0, c) + x(r, 1) * w(1, c) - y(r, c);
            s += v * v;
        }
    return std::sqrt(s);
}

/// Smallest error over rotations and reflections on a grid of `step_deg`.
inline double grid_best_error(const Matrix& x, const Matrix& y, double step_deg = 0.01) {
    double best = INFINITY;
    const long steps = std::lround(360.0 / step_deg);
    for (long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * step_deg * std::numbers::pi / 180.0;
        const double c = std::cos(t);
        const double s = std::sin(t);
        Eigen::Matrix2d rot;
        rot << c, s, -s, c;
        Eigen::Matrix2d ref;
        ref << c, s, s, -c;
        best = std::min({best, frobenius_error(x, y, rot), frobenius_error(x, y, ref)});
    }
    return best;
}

struct ParsedVectors {
    std::vector<std::string> tokens;
    std::vector<std::vector<double>> rows;
};

/// word2vec text parser written against the format description alone.
inline ParsedVectors parse_word2vec(const std::string& text) {
    std::istringstream in(text);
    ParsedVectors out;
    std::size_t n = 0;
    std::size_t d = 0;
    in >> n >> d;
    for (std::size_t i = 0; i < n; ++i) {
        std::string tok;
        in >> tok;
        std::vector<double> row(d);
        for (auto& v : row) in >> v;
        out.tokens.push_back(tok);
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace oracle
