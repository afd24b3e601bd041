#include "xling/refine.hpp"
#include "xling/diagnostics.hpp"
#include "xling/error.hpp"

namespace xling {

CrossLingualSpace::CrossLingualSpace(EmbeddingSpace src, EmbeddingSpace tgt, std::vector<nlohmann::json> provenance)
    : src_(std::move(src)), tgt_(std::move(tgt)), provenance_(std::move(provenance)) {
    if (src_.dim() != tgt_.dim())
        throw PreconditionError("cross-lingual space: dimensions differ (" + std::to_string(src_.dim()) + " vs " +
                                std::to_string(tgt_.dim()) + ")");
}

CrossLingualSpace CrossLingualSpace::derive(EmbeddingSpace src, EmbeddingSpace tgt, nlohmann::json record) const {
    auto log = provenance_;
    log.push_back(std::move(record));
    return CrossLingualSpace(std::move(src), std::move(tgt), std::move(log));
}

namespace {

enum class Weighting { Plain, Frequency };

void check_indices(const CrossLingualSpace& space, const BilingualDictionary& dict) {
    for (const auto& p : dict) {
        if (p.src >= static_cast<std::size_t>(space.src().size()) || p.tgt >= static_cast<std::size_t>(space.tgt().size()))
            throw PreconditionError("dictionary pair (" + std::to_string(p.src) + ", " + std::to_string(p.tgt) +
                                    ") out of range");
    }
}

CrossLingualSpace anchor(const CrossLingualSpace& space, const BilingualDictionary& dict, Weighting weighting) {
    check_indices(space, dict);
    const auto& xs = space.src().matrix();
    const auto& ys = space.tgt().matrix();
    const bool freq = weighting == Weighting::Frequency;

    std::unordered_map<std::size_t, std::vector<std::size_t>> src_pairs;
    std::unordered_map<std::size_t, std::vector<std::size_t>> tgt_pairs;
    for (std::size_t k = 0; k < dict.size(); ++k) {
        const auto& p = dict[k];
        if (freq && !(p.f_src + p.f_tgt > 0))
            throw PreconditionError("pair ('" + space.src().vocab().token(p.src) + "', '" +
                                    space.tgt().vocab().token(p.tgt) + "') has zero total frequency");
        src_pairs[p.src].push_back(k);
        tgt_pairs[p.tgt].push_back(k);
    }

    Matrix out_src = xs;
    Matrix out_tgt = ys;
    for (std::size_t k = 0; k < dict.size(); ++k) {
        const auto& p = dict[k];
        const auto i = static_cast<Index>(p.src);
        const auto j = static_cast<Index>(p.tgt);
        if (src_pairs[p.src].size() != 1 || tgt_pairs[p.tgt].size() != 1) continue;
        // Simple pair: one shared vector written to both sides.
        Eigen::RowVectorXd mu;
        if (freq)
            mu = (p.f_src * xs.row(i) + p.f_tgt * ys.row(j)) / (p.f_src + p.f_tgt);
        else
            mu = (xs.row(i) + ys.row(j)) / 2.0;
        out_src.row(i) = mu;
        out_tgt.row(j) = mu;
    }

    // Tokens with several counterparts: mean over the whole neighbourhood.
    for (const auto& [i, ks] : src_pairs) {
        if (ks.size() == 1 && tgt_pairs[dict[ks.front()].tgt].size() == 1) continue;
        const double own = freq ? dict[ks.front()].f_src : 1.0;
        Eigen::RowVectorXd acc = own * xs.row(static_cast<Index>(i));
        double total = own;
        for (const auto k : ks) {
            const double w = freq ? dict[k].f_tgt : 1.0;
            acc += w * ys.row(static_cast<Index>(dict[k].tgt));
            total += w;
        }
        out_src.row(static_cast<Index>(i)) = acc / total;
    }
    for (const auto& [j, ks] : tgt_pairs) {
        if (ks.size() == 1 && src_pairs[dict[ks.front()].src].size() == 1) continue;
        const double own = freq ? dict[ks.front()].f_tgt : 1.0;
        Eigen::RowVectorXd acc = own * ys.row(static_cast<Index>(j));
        double total = own;
        for (const auto k : ks) {
            const double w = freq ? dict[k].f_src : 1.0;
            acc += w * xs.row(static_cast<Index>(dict[k].src));
            total += w;
        }
        out_tgt.row(static_cast<Index>(j)) = acc / total;
    }

    NormState src_state = space.src().norm_state();
    NormState tgt_state = space.tgt().norm_state();
    src_state.unit_rows = tgt_state.unit_rows = false;
    nlohmann::json record = {{"stage", "refine"},
                             {"method", freq ? "weighted" : "plain"},
                             {"pairs", dict.size()}};
    return space.derive(space.src().with_matrix(std::move(out_src), src_state),
                        space.tgt().with_matrix(std::move(out_tgt), tgt_state), std::move(record));
}

}  // namespace

CrossLingualSpace average_plain(const CrossLingualSpace& space, const BilingualDictionary& dict) {
    return anchor(space, dict, Weighting::Plain);
}

CrossLingualSpace average_weighted(const CrossLingualSpace& space, const BilingualDictionary& dict) {
    return anchor(space, dict, Weighting::Frequency);
}

CrossLingualSpace meemi_transform(const CrossLingualSpace& space, const BilingualDictionary& dict,
                                  const MeemiOptions& options) {
    if (dict.empty()) throw PreconditionError("meemi needs a non-empty dictionary");
    check_indices(space, dict);
    const Index n = static_cast<Index>(dict.size());
    const Index d = space.dim();
    Matrix x(n, d);
    Matrix y(n, d);
    for (Index r = 0; r < n; ++r) {
        x.row(r) = space.src().row(static_cast<Index>(dict[r].src));
        y.row(r) = space.tgt().row(static_cast<Index>(dict[r].tgt));
    }
    const Matrix mid = (x + y) / 2.0;
    if (n < d) warn("meemi: dictionary smaller than dimension, using ridge regression");
    const auto fit_src = fit_linear_map(x, mid, options.ridge_lambda, options.max_condition);
    const auto fit_tgt = fit_linear_map(y, mid, options.ridge_lambda, options.max_condition);
    if (n >= d && (fit_src.ridge || fit_tgt.ridge)) warn("meemi: ill-conditioned regression, using ridge regression");

    NormState src_state = space.src().norm_state();
    NormState tgt_state = space.tgt().norm_state();
    src_state.unit_rows = tgt_state.unit_rows = false;
    nlohmann::json record = {{"stage", "refine"},
                             {"method", "meemi"},
                             {"pairs", dict.size()},
                             {"ridge", fit_src.ridge || fit_tgt.ridge}};
    return space.derive(space.src().with_matrix(space.src().matrix() * fit_src.map, src_state),
                        space.tgt().with_matrix(space.tgt().matrix() * fit_tgt.map, tgt_state), std::move(record));
}

}  // namespace xling
