#pragma once

#include "xling/corpus.hpp"
#include "xling/linalg.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace xling {

struct NormState {
    bool unit_rows = false;
    bool mean_centered = false;
    friend bool operator==(const NormState&, const NormState&) = default;
};

/// Vocabulary plus a row-per-token matrix. Immutable once built; every
/// transform returns a new space.
class EmbeddingSpace {
public:
    EmbeddingSpace() = default;
    /// Throws xling::Error if the row count differs from the vocabulary size,
    /// the dimension is zero, any entry is non-finite, or `state.unit_rows`
    /// is claimed but some row is not unit-norm within 1e-6.
    EmbeddingSpace(Vocabulary vocab, Matrix matrix, NormState state = {});

    const Vocabulary& vocab() const noexcept { return vocab_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    const NormState& norm_state() const noexcept { return state_; }

    Index size() const noexcept { return matrix_.rows(); }
    Index dim() const noexcept { return matrix_.cols(); }
    auto row(Index i) const { return matrix_.row(i); }

    std::optional<Index> find(std::string_view token) const {
        if (auto i = vocab_.find(token)) return static_cast<Index>(*i);
        return std::nullopt;
    }

    /// Same vocabulary, new matrix.
    EmbeddingSpace with_matrix(Matrix m, NormState state) const { return {vocab_, std::move(m), state}; }

private:
    Vocabulary vocab_;
    Matrix matrix_;
    NormState state_;
};

enum class NormStep { UnitRows, CenterColumns };

std::vector<NormStep> default_normalization();
std::vector<NormStep> parse_normalization(const std::vector<std::string>& names);
std::string_view to_string(NormStep step);

/// Applies the steps in order. Throws PreconditionError naming the token when
/// UnitRows meets a zero row.
EmbeddingSpace normalize(const EmbeddingSpace& space, const std::vector<NormStep>& steps = default_normalization());

struct LoadOptions {
    std::optional<Index> expected_dim;
    /// Vocabulary TSV supplying frequencies; without it frequency := n - rank.
    std::optional<std::string> sidecar;
};

/// word2vec text format: header `n d`, then n lines `token v1 ... vd`.
EmbeddingSpace read_embeddings(std::istream& in, const std::string& name, const LoadOptions& options = {},
                               const Vocabulary* sidecar = nullptr);
EmbeddingSpace load_embeddings(const std::string& path, const LoadOptions& options = {});

/// Six significant digits per value.
void write_embeddings(std::ostream& out, const EmbeddingSpace& space);
void save_embeddings(const std::string& path, const EmbeddingSpace& space);

}  // namespace xling
