#pragma once

#include "xling/lexicon.hpp"
#include "xling/mapper.hpp"
#include "xling/refine.hpp"
#include "xling/retrieval.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xling {

struct Candidate {
    std::string token;
    Index index = 0;
    double score = 0;
};

/// Precomputed normalized matrices (and CSLS densities) for repeated
/// source-to-target queries against one cross-lingual space.
class Translator {
public:
    Translator(const CrossLingualSpace& space, Retrieval retrieval = Retrieval::Cosine, int csls_k = 10,
               int threads = 1);

    /// Ranked candidates for source rows; descending score, ties by lower target index.
    std::vector<std::vector<Neighbor>> rank(const std::vector<Index>& queries, Index k) const;

    Retrieval retrieval() const noexcept { return retrieval_; }

private:
    Retrieval retrieval_;
    int threads_;
    Matrix src_unit_;
    Matrix tgt_unit_;
    Vector src_density_;  // r_T(x): mean similarity of x to its target neighbourhood
    Vector tgt_density_;  // r_S(y)
};

/// Throws PreconditionError for an out-of-vocabulary query or k < 1.
std::vector<Candidate> translate_topk(const CrossLingualSpace& space, std::string_view query, Index k,
                                      Retrieval retrieval = Retrieval::Cosine);

struct TranslationOptions {
    std::vector<int> ks{1, 5, 10};
    Retrieval retrieval = Retrieval::Cosine;
    bool oov_as_wrong = false;
    bool keep_candidates = false;
    int threads = 1;
};

struct QueryResult {
    std::string source;
    std::vector<std::string> gold;
    std::vector<Candidate> candidates;
    std::optional<int> rank;  // 1-based rank of the first gold hit within the kept candidates
};

struct TranslationReport {
    /// Percentages; nullopt when the denominator is zero.
    std::map<int, std::optional<double>> p_at;
    std::size_t total = 0;
    std::size_t covered = 0;
    std::size_t skipped = 0;
    std::vector<QueryResult> per_query;
};

TranslationReport precision_at_k(const CrossLingualSpace& space, const TestDictionary& test,
                                 const TranslationOptions& options = {});

std::string format_percent(const std::optional<double>& p);

}  // namespace xling
