#pragma once

#include "xling/corpus.hpp"
#include "xling/embed_store.hpp"
#include "xling/error.hpp"
#include "xling/experiment.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace xling {

/// Stage name plus message; thrown after the partial manifest is written.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what, std::string cause_kind)
        : Error(stage + ": " + what), stage_(std::move(stage)), cause_(std::move(cause_kind)) {}
    const char* kind() const noexcept override { return "stage"; }
    const std::string& stage() const noexcept { return stage_; }
    const std::string& cause_kind() const noexcept { return cause_; }

private:
    std::string stage_;
    std::string cause_;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

enum class DictionaryMode { Identical, ExternalSeed, File };

struct SideInputs {
    std::filesystem::path embeddings;
    std::optional<std::filesystem::path> vocab;
    std::optional<std::filesystem::path> corpus;
};

struct SentimentInputs {
    std::filesystem::path train;
    std::filesystem::path test;
    std::optional<Scheme> scheme;
};

struct PipelineConfig {
    std::uint64_t seed = 1;
    TokenizerConfig tokenizer;
    std::uint64_t min_count = 5;
    SideInputs src;
    SideInputs tgt;

    DictionaryMode dictionary = DictionaryMode::Identical;
    std::size_t seed_k = 100;
    std::optional<std::filesystem::path> dictionary_path;
    ClassGroup map_classes = ClassGroup::All;

    std::vector<NormStep> normalize = default_normalization();
    MapperSettings mapper;

    RefineMode refine = RefineMode::Weighted;
    FrequencyMode frequencies = FrequencyMode::Absolute;
    ClassGroup refine_classes = ClassGroup::All;
    bool refine_with_seed = false;  // average over the mapping seed instead of the identical dictionary

    std::vector<std::filesystem::path> translation_tests;
    Retrieval eval_retrieval = Retrieval::Cosine;
    std::vector<int> ks{1, 5, 10};
    bool oov_as_wrong = false;
    bool exclude_identical_test_pairs = false;
    std::optional<SentimentInputs> sentiment;
    bool ablation = false;
    ProbeConfig probe;

    std::filesystem::path output_dir = "runs";

    /// Fully merged configuration (defaults plus user values), paths as written.
    nlohmann::json resolved;
    std::string hash;  // FNV-1a of resolved.dump()
};

nlohmann::json default_config_json();

/// Sets a dotted key (`mapper.method=procrustes`). The value is parsed as
/// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& config, std::string_view assignment);

/// Merges onto the defaults, rejects unknown keys, resolves relative paths
/// against `base_dir`, and checks that every referenced file exists.
PipelineConfig parse_pipeline_config(const nlohmann::json& user, const std::filesystem::path& base_dir = ".");
PipelineConfig load_pipeline_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

struct PipelineResult {
    std::filesystem::path run_dir;
    std::string report_markdown;
    std::string report_tsv;
};

/// Runs every stage and writes a new run directory below output_dir:
/// config.json, the aligned spaces, model, dictionaries, report.md,
/// report.tsv, provenance.jsonl and manifest.json. Reports depend only on
/// the configuration and input bytes. Throws StageError.
PipelineResult run_pipeline(const PipelineConfig& config, int threads = 1);

/// As run_pipeline but only produces the class ablation table (ablation.md, ablation.tsv).
PipelineResult run_ablation_pipeline(const PipelineConfig& config, int threads = 1);

/// Table of tweets, tokens, unique tokens and removed duplicates per corpus.
std::string corpus_stats_markdown(const std::vector<std::string>& paths, const TokenizerConfig& tokenizer = {},
                                  int threads = 1);

}  // namespace xling
