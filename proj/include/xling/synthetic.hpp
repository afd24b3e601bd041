#pragma once

#include "xling/embed_store.hpp"
#include "xling/lexicon.hpp"
#include "xling/linalg.hpp"
#include "xling/sentiment.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace xling {

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, signs fixed by diag(R)).
Square random_orthogonal(Index d, std::mt19937_64& rng);

/// Gaussian rows scaled to unit length.
Matrix random_unit_rows(Index n, Index d, std::mt19937_64& rng);

/// Noisy rotation task. Concept c has a unit Gaussian vector x_c in the
/// source space and unit(x_c Q + noise * g) in the target space. The first
/// `identical` concepts are spelled the same in both languages (numerals,
/// emoji, emoticons and shared words, in that order); the rest are `en<c>`
/// and `es<c>`.
struct RotationBenchmarkConfig {
    Index n = 5000;
    Index d = 50;
    double noise = 0.0;
    std::size_t identical = 500;
    double numeral_share = 0.2;
    double emoji_share = 0.1;  // emoticons are taken from this share first, one in five
    std::size_t test_pairs = 200;
    /// Fraction of identical entries in the mixed test set.
    double identical_test_share = 0.1;
    std::uint64_t seed = 1;
};

struct RotationBenchmark {
    EmbeddingSpace src;  // unit rows
    EmbeddingSpace tgt;  // unit rows
    Square rotation;
    TestDictionary heldout;  // non-identical concepts only
    TestDictionary mixed;    // heldout plus identical entries
    TestDictionary train;    // every remaining non-identical concept
};

RotationBenchmark make_rotation_benchmark(const RotationBenchmarkConfig& config);

/// Two languages with disjoint words and shared emoji. Sentence polarity is
/// fixed by its emoji; emoji vectors carry the polarity along a language
/// specific axis, the target axis orthogonal to the rotated source axis.
/// Numerals and words are noisy rotations of each other.
struct SentimentBenchmarkConfig {
    Index d = 50;
    std::size_t emoji = 20;
    std::size_t numerals = 100;
    std::size_t words = 2000;
    std::size_t filler = 3;
    double polarity_weight = 0.6;
    double noise = 0.05;
    std::size_t train_size = 500;
    std::size_t test_size = 500;
    std::uint64_t seed = 1;
};

struct SentimentBenchmark {
    EmbeddingSpace src;  // language A, default normalization
    EmbeddingSpace tgt;  // language B
    SentimentDataset train;  // language A sentences
    SentimentDataset test;   // language B sentences
};

SentimentBenchmark make_sentiment_benchmark(const SentimentBenchmarkConfig& config);

/// Encodes one code point as UTF-8.
std::string utf8(char32_t cp);

/// Writes src.vec, tgt.vec, src.vocab.tsv, tgt.vocab.tsv, test.txt,
/// mixed.txt and train.txt into `dir` (created if needed).
void write_rotation_fixture(const std::string& dir, const RotationBenchmark& bench);

/// Writes src.vec, tgt.vec, src.vocab.tsv, tgt.vocab.tsv, train.tsv and test.tsv.
void write_sentiment_fixture(const std::string& dir, const SentimentBenchmark& bench);

void write_test_dictionary(std::ostream& out, const TestDictionary& dict);
void write_sentiment_dataset(std::ostream& out, const SentimentDataset& data);

}  // namespace xling
