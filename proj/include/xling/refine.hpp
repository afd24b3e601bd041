#pragma once

#include "xling/embed_store.hpp"
#include "xling/lexicon.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace xling {

/// Two aligned spaces of equal dimension plus an append-only transform log.
class CrossLingualSpace {
public:
    CrossLingualSpace(EmbeddingSpace src, EmbeddingSpace tgt, std::vector<nlohmann::json> provenance = {});

    const EmbeddingSpace& src() const noexcept { return src_; }
    const EmbeddingSpace& tgt() const noexcept { return tgt_; }
    const std::vector<nlohmann::json>& provenance() const noexcept { return provenance_; }
    Index dim() const noexcept { return src_.dim(); }

    /// New space with replaced matrices and one more provenance record.
    CrossLingualSpace derive(EmbeddingSpace src, EmbeddingSpace tgt, nlohmann::json record) const;

private:
    EmbeddingSpace src_;
    EmbeddingSpace tgt_;
    std::vector<nlohmann::json> provenance_;
};

/// Replaces both vectors of every dictionary pair by their midpoint; every
/// other row is left untouched. A token in several pairs receives the mean of
/// its own vector and all of its counterparts (computed from the input).
CrossLingualSpace average_plain(const CrossLingualSpace& space, const BilingualDictionary& dict);

/// As average_plain with frequency weights: (f1 v1 + f2 v2) / (f1 + f2).
/// Throws PreconditionError naming the pair when f1 + f2 is not positive.
CrossLingualSpace average_weighted(const CrossLingualSpace& space, const BilingualDictionary& dict);

struct MeemiOptions {
    double ridge_lambda = 1e-3;
    double max_condition = 1e10;
};

/// Per side, the least-squares linear map sending dictionary vectors to the
/// pair midpoints, applied to every row of that side.
CrossLingualSpace meemi_transform(const CrossLingualSpace& space, const BilingualDictionary& dict,
                                  const MeemiOptions& options = {});

}  // namespace xling
