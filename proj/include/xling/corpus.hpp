#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xling {

enum class TokenClass { Numeral, Emoji, Emoticon, Word };

std::string_view to_string(TokenClass c);
/// Accepts the names produced by to_string (case-insensitive). Throws xling::Error otherwise.
TokenClass parse_token_class(std::string_view name);

/// Numeral if the digit rule matches; else Emoji if every code point is an
/// emoji (or a joiner/selector gluing emoji); else Emoticon if the token is
/// in the bundled lexicon; else Word.
TokenClass classify_token(std::string_view token);

bool is_numeral(std::string_view token);
bool is_emoji_sequence(std::string_view token);
bool is_emoticon(std::string_view token);
std::span<const std::string_view> emoticon_lexicon();

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

/// Ordered token list; index space for every matrix in the toolkit.
class Vocabulary {
public:
    Vocabulary() = default;
    /// Throws xling::Error on duplicate tokens or mismatched lengths.
    Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> freq, std::vector<TokenClass> classes);

    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }

    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    std::uint64_t freq(std::size_t i) const { return freq_.at(i); }
    TokenClass token_class(std::size_t i) const { return classes_.at(i); }

    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::vector<std::uint64_t>& frequencies() const noexcept { return freq_; }

    std::optional<std::size_t> find(std::string_view token) const;
    bool contains(std::string_view token) const { return find(token).has_value(); }

    std::uint64_t total_frequency() const noexcept;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.tokens_ == b.tokens_ && a.freq_ == b.freq_ && a.classes_ == b.classes_;
    }

private:
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> freq_;
    std::vector<TokenClass> classes_;
    std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
};

struct TokenizerConfig {
    bool lowercase = true;
};

/// Social-media aware tokenizer. Not thread-safe; use one instance per thread.
class Tokenizer {
public:
    explicit Tokenizer(TokenizerConfig config = {});
    ~Tokenizer();
    Tokenizer(Tokenizer&&) noexcept;
    Tokenizer& operator=(Tokenizer&&) noexcept;

    std::vector<std::string> operator()(std::string_view line);
    const TokenizerConfig& config() const noexcept { return config_; }

private:
    struct Impl;
    TokenizerConfig config_;
    std::unique_ptr<Impl> impl_;
};

std::vector<std::string> tokenize(std::string_view line, const TokenizerConfig& config = {});

/// Table-1 style corpus statistics.
struct CorpusStats {
    std::uint64_t tweets = 0;
    std::uint64_t tokens = 0;
    std::uint64_t unique = 0;
    std::uint64_t duplicates_removed = 0;
};

/// Exact token counts. Counters built over disjoint shards can be merged in
/// any order with the same result.
class TokenCounter {
public:
    void add_tweet(std::span<const std::string> tokens);
    void merge(const TokenCounter& other);

    std::uint64_t tweets() const noexcept { return tweets_; }
    std::uint64_t tokens() const noexcept { return tokens_; }
    const std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>& counts() const noexcept {
        return counts_;
    }

private:
    std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>> counts_;
    std::uint64_t tweets_ = 0;
    std::uint64_t tokens_ = 0;
};

struct VocabularyBuild {
    Vocabulary vocab;
    CorpusStats stats;
    std::uint64_t dropped_tokens = 0;  // occurrences of tokens below min_count
};

/// Sorted by descending count, ties by token bytes; tokens below min_count dropped.
VocabularyBuild build_vocabulary(const TokenCounter& counter, std::uint64_t min_count = 5);
/// Convenience overload treating the whole stream as a single tweet.
VocabularyBuild build_vocabulary(std::span<const std::string> stream, std::uint64_t min_count = 5);

/// Reads one tweet per line, trims, drops blank and duplicate lines, and
/// tokenizes the rest (sharded over `threads` workers).
struct CorpusCount {
    TokenCounter counter;
    std::uint64_t duplicates_removed = 0;
};
CorpusCount count_corpus(std::istream& in, const TokenizerConfig& config = {}, int threads = 1);
CorpusCount count_corpus_file(const std::string& path, const TokenizerConfig& config = {}, int threads = 1);

VocabularyBuild build_vocabulary(const CorpusCount& counted, std::uint64_t min_count = 5);

/// `token<TAB>count<TAB>class` per line.
void write_vocabulary_tsv(std::ostream& out, const Vocabulary& vocab);
void save_vocabulary_tsv(const std::string& path, const Vocabulary& vocab);
Vocabulary read_vocabulary_tsv(std::istream& in, const std::string& name = "<stream>");
Vocabulary load_vocabulary_tsv(const std::string& path);

}  // namespace xling
