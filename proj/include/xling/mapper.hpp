#pragma once

#include "xling/embed_store.hpp"
#include "xling/lexicon.hpp"
#include "xling/linalg.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace xling {

enum class Retrieval { Cosine, Csls };
std::string_view to_string(Retrieval r);
Retrieval parse_retrieval(std::string_view name);

/// Correlation re-weighting applied after the orthogonal map. With
/// U Sigma V^T the SVD of (X W)^T Y over the dictionary, mapped source rows
/// become x W U Sigma^s V^T and target rows y V Sigma^s V^T.
struct Reweighting {
    double exponent = 0.5;
    Vector sigma;
    Square u;
    Square v;

    Square source_transform() const;
    Square target_transform() const;
};

struct AlignmentDiagnostics {
    int iterations = 0;
    /// Mean dictionary cosine of every accepted self-learning iteration.
    std::vector<double> objective;
    std::size_t dictionary_size = 0;
};

struct AlignmentModel {
    Square w;  // x -> x W
    std::optional<Reweighting> reweight;
    AlignmentDiagnostics diagnostics;

    Index dim() const noexcept { return w.rows(); }
};

/// W = U V^T from the SVD of X^T Y over dictionary rows. Both spaces must
/// be unit-normalized and share a dimension; the dictionary must be non-empty.
AlignmentModel solve_procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                const BilingualDictionary& dict);

struct SelfLearnConfig {
    std::size_t induce_vocab_cutoff = 20000;
    Retrieval retrieval = Retrieval::Cosine;
    int csls_k = 10;
    int max_iters = 50;
    double tol = 1e-6;
    int threads = 1;
};

/// Alternates Procrustes and nearest-neighbour dictionary induction over the
/// most frequent tokens until the mean dictionary cosine stops improving by
/// at least tol. Returns the best model seen.
AlignmentModel self_learn(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualDictionary& seed,
                          const SelfLearnConfig& config = {}, BilingualDictionary* induced = nullptr);

/// Dictionary induced by mutual-direction nearest neighbours under `w`
/// (union of both directions) plus the seed pairs. Exposed for tests.
BilingualDictionary induce_dictionary(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Square& w,
                                      const BilingualDictionary& seed, const SelfLearnConfig& config);

/// Mean cosine between x W and y over the dictionary pairs.
double mean_dictionary_cosine(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Square& w,
                              const BilingualDictionary& dict);

struct ReweightResult {
    AlignmentModel model;
    EmbeddingSpace src;
    EmbeddingSpace tgt;
};

/// Adds correlation re-weighting with exponent s in [0, 1] and returns both
/// transformed spaces.
ReweightResult reweight(const AlignmentModel& model, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                        const BilingualDictionary& dict, double s = 0.5);

enum class Side { Source, Target };

/// Source rows are multiplied by W (then the re-weighting transform, if any);
/// target rows only receive the re-weighting transform.
EmbeddingSpace apply_mapping(const AlignmentModel& model, const EmbeddingSpace& space, Side side = Side::Source);

/// Header `d s` (s is `-` without re-weighting), d rows of W, then with
/// re-weighting one row of singular values and d rows each of U and V.
void write_model(std::ostream& out, const AlignmentModel& model);
void save_model(const std::string& path, const AlignmentModel& model);
AlignmentModel read_model(std::istream& in, const std::string& name = "<stream>");
AlignmentModel load_model(const std::string& path);

}  // namespace xling
