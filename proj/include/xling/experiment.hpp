#pragma once

#include "xling/lexicon.hpp"
#include "xling/mapper.hpp"
#include "xling/refine.hpp"
#include "xling/sentiment.hpp"
#include "xling/translation.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace xling {

enum class MapMethod { Procrustes, SelfLearning };
std::string_view to_string(MapMethod m);
MapMethod parse_map_method(std::string_view name);

struct MapperSettings {
    MapMethod method = MapMethod::SelfLearning;
    SelfLearnConfig self_learn;
    std::optional<double> reweight;  // exponent s
};

struct Alignment {
    AlignmentModel model;
    CrossLingualSpace space;
    BilingualDictionary induced;  // final self-learning dictionary (the seed for one-shot solves)
};

/// Solves the mapping on normalized spaces and returns the mapped pair.
Alignment align_spaces(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualDictionary& seed,
                       const MapperSettings& settings);

enum class RefineMode { None, Plain, Weighted, Meemi };
std::string_view to_string(RefineMode m);
RefineMode parse_refine_mode(std::string_view name);

enum class FrequencyMode { Absolute, Relative };

CrossLingualSpace refine_space(const CrossLingualSpace& space, const BilingualDictionary& dict, RefineMode mode,
                               FrequencyMode frequencies = FrequencyMode::Absolute);

struct SentimentTask {
    SentimentDataset train;  // source language
    SentimentDataset test;   // target language
    ProbeConfig probe;
};

struct AblationConfig {
    MapperSettings mapper;
    TranslationOptions translation;
    FrequencyMode frequencies = FrequencyMode::Absolute;
};

struct AblationCell {
    ClassGroup group = ClassGroup::All;
    std::string system;  // "base" or "weighted"
    std::size_t pairs = 0;
    std::optional<TranslationReport> translation;
    std::optional<SentimentReport> sentiment;
    /// "n/a" for an empty dictionary, otherwise the failure message.
    std::optional<std::string> failure;
};

struct AblationTable {
    std::vector<AblationCell> cells;  // groups in All, Numerals, Emoji, Words order; base before weighted
    bool has_translation = false;
    bool has_sentiment = false;

    const AblationCell* find(ClassGroup group, std::string_view system) const;
};

/// Runs the base mapper and weighted averaging for every class-filtered
/// dictionary. Cell failures are recorded, never thrown. Throws
/// PreconditionError only when the full dictionary is empty.
AblationTable run_ablation(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualDictionary& all,
                           const TestDictionary* test, const SentimentTask* sentiment, const AblationConfig& config);

void write_ablation_markdown(std::ostream& out, const AblationTable& table);
void write_ablation_tsv(std::ostream& out, const AblationTable& table);

/// "%.<digits>f", or "n/a" for nullopt.
std::string format_fixed(const std::optional<double>& v, int digits = 1);

}  // namespace xling
