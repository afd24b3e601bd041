#include "xling/corpus.hpp"
#include "xling/diagnostics.hpp"
#include "xling/error.hpp"
#include "xling/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace xling {

std::string_view to_string(TokenClass c) {
    switch (c) {
        case TokenClass::Numeral: return "numeral";
        case TokenClass::Emoji: return "emoji";
        case TokenClass::Emoticon: return "emoticon";
        case TokenClass::Word: return "word";
    }
    return "word";
}

TokenClass parse_token_class(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "numeral" || lower == "numerals") return TokenClass::Numeral;
    if (lower == "emoji") return TokenClass::Emoji;
    if (lower == "emoticon" || lower == "emoticons") return TokenClass::Emoticon;
    if (lower == "word" || lower == "words") return TokenClass::Word;
    throw Error("unknown token class '" + std::string(name) + "'");
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> freq,
                       std::vector<TokenClass> classes)
    : tokens_(std::move(tokens)), freq_(std::move(freq)), classes_(std::move(classes)) {
    if (freq_.size() != tokens_.size() || classes_.size() != tokens_.size())
        throw Error("vocabulary: tokens, frequencies and classes differ in length");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], i).second) throw Error("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
    const auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t Vocabulary::total_frequency() const noexcept {
    std::uint64_t total = 0;
    for (const auto f : freq_) total += f;
    return total;
}

void TokenCounter::add_tweet(std::span<const std::string> tokens) {
    ++tweets_;
    tokens_ += tokens.size();
    for (const auto& t : tokens) {
        auto it = counts_.find(std::string_view(t));
        if (it == counts_.end())
            counts_.emplace(t, 1);
        else
            ++it->second;
    }
}

void TokenCounter::merge(const TokenCounter& other) {
    tweets_ += other.tweets_;
    tokens_ += other.tokens_;
    for (const auto& [token, count] : other.counts_) counts_[token] += count;
}

VocabularyBuild build_vocabulary(const TokenCounter& counter, std::uint64_t min_count) {
    if (min_count < 1) throw PreconditionError("min_count must be at least 1");
    VocabularyBuild out;
    out.stats.tweets = counter.tweets();
    out.stats.tokens = counter.tokens();
    out.stats.unique = counter.counts().size();

    std::vector<std::pair<std::string_view, std::uint64_t>> kept;
    for (const auto& [token, count] : counter.counts()) {
        if (count >= min_count)
            kept.emplace_back(token, count);
        else
            out.dropped_tokens += count;
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::vector<std::string> tokens;
    std::vector<std::uint64_t> freq;
    std::vector<TokenClass> classes;
    tokens.reserve(kept.size());
    freq.reserve(kept.size());
    classes.reserve(kept.size());
    for (const auto& [token, count] : kept) {
        tokens.emplace_back(token);
        freq.push_back(count);
        classes.push_back(classify_token(token));
    }
    if (counter.tokens() == 0) warn("empty corpus: vocabulary is empty");
    out.vocab = Vocabulary(std::move(tokens), std::move(freq), std::move(classes));
    return out;
}

VocabularyBuild build_vocabulary(std::span<const std::string> stream, std::uint64_t min_count) {
    TokenCounter counter;
    if (!stream.empty()) counter.add_tweet(stream);
    return build_vocabulary(counter, min_count);
}

VocabularyBuild build_vocabulary(const CorpusCount& counted, std::uint64_t min_count) {
    auto out = build_vocabulary(counted.counter, min_count);
    out.stats.duplicates_removed = counted.duplicates_removed;
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n\v\f";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

}  // namespace

CorpusCount count_corpus(std::istream& in, const TokenizerConfig& config, int threads) {
    CorpusCount out;
    std::vector<std::string> lines;
    std::unordered_set<std::string, StringHash, std::equal_to<>> seen;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty()) continue;
        if (seen.find(t) != seen.end()) {
            ++out.duplicates_removed;
            continue;
        }
        seen.emplace(t);
        lines.emplace_back(t);
    }

    constexpr std::size_t kShard = 4096;
    const std::size_t shards = (lines.size() + kShard - 1) / kShard;
    std::vector<TokenCounter> partial(shards);
    parallel_for_blocks(lines.size(), kShard, threads, [&](std::size_t begin, std::size_t end) {
        Tokenizer tokenizer(config);
        auto& counter = partial[begin / kShard];
        for (std::size_t i = begin; i < end; ++i) {
            const auto tokens = tokenizer(lines[i]);
            counter.add_tweet(tokens);
        }
    });
    for (const auto& p : partial) out.counter.merge(p);
    return out;
}

CorpusCount count_corpus_file(const std::string& path, const TokenizerConfig& config, int threads) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus '" + path + "'");
    return count_corpus(in, config, threads);
}

void write_vocabulary_tsv(std::ostream& out, const Vocabulary& vocab) {
    for (std::size_t i = 0; i < vocab.size(); ++i)
        out << vocab.token(i) << '\t' << vocab.freq(i) << '\t' << to_string(vocab.token_class(i)) << '\n';
}

void save_vocabulary_tsv(const std::string& path, const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write_vocabulary_tsv(out, vocab);
}

Vocabulary read_vocabulary_tsv(std::istream& in, const std::string& name) {
    std::vector<std::string> tokens;
    std::vector<std::uint64_t> freq;
    std::vector<TokenClass> classes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        if (t1 == std::string::npos || t1 == 0) throw ParseError(name, lineno, "expected token<TAB>count[<TAB>class]");
        const auto t2 = line.find('\t', t1 + 1);
        const std::string token = line.substr(0, t1);
        const std::string count = line.substr(t1 + 1, t2 == std::string::npos ? std::string::npos : t2 - t1 - 1);
        std::uint64_t value = 0;
        std::size_t used = 0;
        try {
            value = std::stoull(count, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != count.size()) throw ParseError(name, lineno, "invalid count '" + count + "'");
        TokenClass cls = classify_token(token);
        if (t2 != std::string::npos) {
            try {
                cls = parse_token_class(line.substr(t2 + 1));
            } catch (const Error& e) {
                throw ParseError(name, lineno, e.what());
            }
        }
        tokens.push_back(token);
        freq.push_back(value);
        classes.push_back(cls);
    }
    try {
        return Vocabulary(std::move(tokens), std::move(freq), std::move(classes));
    } catch (const Error& e) {
        throw ParseError(name, lineno, e.what());
    }
}

Vocabulary load_vocabulary_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vocabulary '" + path + "'");
    return read_vocabulary_tsv(in, path);
}

}  // namespace xling
