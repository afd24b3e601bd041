#include "xling/translation.hpp"
#include "xling/error.hpp"

#include <algorithm>
#include <cstdio>

namespace xling {

Translator::Translator(const CrossLingualSpace& space, Retrieval retrieval, int csls_k, int threads)
    : retrieval_(retrieval),
      threads_(threads),
      src_unit_(unit_rows(space.src().matrix())),
      tgt_unit_(unit_rows(space.tgt().matrix())) {
    if (retrieval_ == Retrieval::Csls) {
        src_density_ = mean_top_k_similarity(src_unit_, tgt_unit_, csls_k, threads_);
        tgt_density_ = mean_top_k_similarity(tgt_unit_, src_unit_, csls_k, threads_);
    }
}

std::vector<std::vector<Neighbor>> Translator::rank(const std::vector<Index>& queries, Index k) const {
    Matrix q(static_cast<Index>(queries.size()), src_unit_.cols());
    Vector penalty;
    if (retrieval_ == Retrieval::Csls) penalty.resize(q.rows());
    for (Index r = 0; r < q.rows(); ++r) {
        q.row(r) = src_unit_.row(queries[static_cast<std::size_t>(r)]);
        if (retrieval_ == Retrieval::Csls) penalty(r) = src_density_(queries[static_cast<std::size_t>(r)]);
    }
    if (retrieval_ == Retrieval::Csls) return top_k(q, tgt_unit_, k, {2.0, &penalty, &tgt_density_}, threads_);
    return top_k(q, tgt_unit_, k, {}, threads_);
}

std::vector<Candidate> translate_topk(const CrossLingualSpace& space, std::string_view query, Index k,
                                      Retrieval retrieval) {
    if (k < 1) throw PreconditionError("k must be at least 1");
    const auto i = space.src().find(query);
    if (!i) throw PreconditionError("query '" + std::string(query) + "' is not in the source vocabulary");
    const Translator translator(space, retrieval);
    std::vector<Candidate> out;
    const auto ranked = translator.rank({*i}, k);
    for (const auto& n : ranked.front())
        out.push_back({space.tgt().vocab().token(static_cast<std::size_t>(n.index)), n.index, n.score});
    return out;
}

TranslationReport precision_at_k(const CrossLingualSpace& space, const TestDictionary& test,
                                 const TranslationOptions& options) {
    if (options.ks.empty()) throw PreconditionError("no k values requested");
    for (const int k : options.ks)
        if (k < 1) throw PreconditionError("k must be at least 1");
    const int kmax = *std::max_element(options.ks.begin(), options.ks.end());

    TranslationReport report;
    report.total = test.size();
    std::vector<Index> queries;
    std::vector<const TestEntry*> covered;
    for (const auto& e : test.entries()) {
        if (auto i = space.src().find(e.source)) {
            queries.push_back(*i);
            covered.push_back(&e);
        }
    }
    report.covered = covered.size();
    report.skipped = report.total - report.covered;

    const Translator translator(space, options.retrieval, 10, options.threads);
    const auto ranked = queries.empty() ? std::vector<std::vector<Neighbor>>{} : translator.rank(queries, kmax);

    std::map<int, std::size_t> hits;
    for (const int k : options.ks) hits[k] = 0;
    for (std::size_t q = 0; q < covered.size(); ++q) {
        const auto& entry = *covered[q];
        std::vector<Index> gold;
        for (const auto& t : entry.targets)
            if (auto j = space.tgt().find(t)) gold.push_back(*j);
        std::optional<int> first_hit;
        for (std::size_t r = 0; r < ranked[q].size() && !first_hit; ++r)
            if (std::find(gold.begin(), gold.end(), ranked[q][r].index) != gold.end()) first_hit = static_cast<int>(r) + 1;
        for (const int k : options.ks)
            if (first_hit && *first_hit <= k) ++hits[k];
        if (options.keep_candidates) {
            QueryResult result{entry.source, entry.targets, {}, first_hit};
            for (const auto& n : ranked[q])
                result.candidates.push_back(
                    {space.tgt().vocab().token(static_cast<std::size_t>(n.index)), n.index, n.score});
            report.per_query.push_back(std::move(result));
        }
    }
    const std::size_t denominator = options.oov_as_wrong ? report.total : report.covered;
    for (const int k : options.ks) {
        if (denominator == 0)
            report.p_at[k] = std::nullopt;
        else
            report.p_at[k] = 100.0 * static_cast<double>(hits[k]) / static_cast<double>(denominator);
    }
    return report;
}

std::string format_percent(const std::optional<double>& p) {
    if (!p) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *p);
    return buf;
}

}  // namespace xling
