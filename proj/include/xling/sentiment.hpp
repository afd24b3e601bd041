#pragma once

#include "xling/corpus.hpp"
#include "xling/embed_store.hpp"
#include "xling/linalg.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace xling {

enum class Polarity { Negative, Neutral, Positive };
enum class Scheme { Binary = 2, Ternary = 3 };

std::string_view to_string(Polarity p);
/// positive/neutral/negative, pos/neu/neg, p/n/neu (case-insensitive).
Polarity parse_polarity(std::string_view name);

int class_count(Scheme scheme);
/// Class index within a scheme: Binary {negative, positive}, Ternary {negative, neutral, positive}.
int class_index(Polarity p, Scheme scheme);
Polarity class_polarity(int index, Scheme scheme);

struct SentimentExample {
    std::vector<std::string> tokens;
    Polarity label = Polarity::Neutral;
};

struct SentimentDataset {
    std::vector<SentimentExample> examples;
    Scheme scheme = Scheme::Ternary;

    /// Throws PreconditionError on labels outside the scheme or empty token lists.
    void validate() const;
};

/// TSV `label<TAB>raw text`. Without an explicit scheme, the dataset is
/// ternary when any neutral label occurs and binary otherwise.
SentimentDataset read_sentiment_dataset(std::istream& in, const std::string& name, const TokenizerConfig& config = {},
                                        std::optional<Scheme> scheme = std::nullopt);
SentimentDataset load_sentiment_dataset(const std::string& path, const TokenizerConfig& config = {},
                                        std::optional<Scheme> scheme = std::nullopt);

/// Drops neutral examples and switches to the binary scheme.
SentimentDataset to_binary(const SentimentDataset& data);

struct SentenceEmbedding {
    Vector vector;
    bool all_oov = false;
};

/// Mean of the in-vocabulary token vectors; zero vector (flagged) when none is known.
SentenceEmbedding embed_sentence(const EmbeddingSpace& space, const std::vector<std::string>& tokens);

struct ProbeConfig {
    int epochs = 500;
    double learning_rate = 0.1;
    double l2 = 1e-4;
};

/// Multinomial logistic regression over frozen sentence embeddings.
struct ProbeModel {
    Square weights;  // d x classes
    Vector bias;
    Scheme scheme = Scheme::Ternary;
    std::vector<double> loss_log;

    std::vector<int> predict(const Matrix& features) const;
};

struct ProbeObjective {
    double loss = 0;
    Square grad_weights;
    Vector grad_bias;
};

/// Mean cross-entropy plus (l2 / 2) * ||W||^2, and its gradient.
ProbeObjective probe_objective(const Square& weights, const Vector& bias, const Matrix& features,
                               const std::vector<int>& labels, double l2);

Matrix sentence_features(const EmbeddingSpace& space, const SentimentDataset& data);

/// Full-batch gradient descent from zero. Throws PreconditionError when a
/// class has no examples and NumericalError on a non-finite loss.
ProbeModel train_probe(const SentimentDataset& train, const EmbeddingSpace& space, const ProbeConfig& config = {});

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

/// Percentages. Classes with an undefined precision or recall score 0.
struct SentimentReport {
    double accuracy = 0;
    double macro_f1 = 0;
    std::vector<ClassMetrics> per_class;
    std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
    Scheme scheme = Scheme::Ternary;
};

SentimentReport score_predictions(const std::vector<int>& gold, const std::vector<int>& predicted, Scheme scheme);

/// Throws PreconditionError when the model and dataset schemes differ.
SentimentReport eval_probe(const ProbeModel& model, const SentimentDataset& test, const EmbeddingSpace& space);

/// Most frequent training class (ties to the lower class index).
int majority_class(const SentimentDataset& train);
SentimentReport eval_majority(const SentimentDataset& train, const SentimentDataset& test);

}  // namespace xling
