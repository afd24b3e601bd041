#pragma once

#include "xling/corpus.hpp"

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace xling {

struct DictionaryPair {
    std::size_t src = 0;
    std::size_t tgt = 0;
    TokenClass cls = TokenClass::Word;
    double f_src = 0;
    double f_tgt = 0;

    friend bool operator==(const DictionaryPair&, const DictionaryPair&) = default;
};

/// (source index, target index) pairs with class tags and frequencies.
/// Duplicate (src, tgt) pairs are rejected on insertion.
class BilingualDictionary {
public:
    BilingualDictionary() = default;

    /// Returns false (and ignores the pair) when (src, tgt) is already present.
    bool add(const DictionaryPair& pair);

    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    const std::vector<DictionaryPair>& pairs() const noexcept { return pairs_; }
    const DictionaryPair& operator[](std::size_t i) const { return pairs_[i]; }
    auto begin() const noexcept { return pairs_.begin(); }
    auto end() const noexcept { return pairs_.end(); }

    bool contains(std::size_t src, std::size_t tgt) const { return keys_.count({src, tgt}) > 0; }

    /// Throws PreconditionError if any index is out of range for the given sizes.
    void validate(std::size_t src_size, std::size_t tgt_size) const;

    friend bool operator==(const BilingualDictionary& a, const BilingualDictionary& b) { return a.pairs_ == b.pairs_; }

private:
    std::vector<DictionaryPair> pairs_;
    std::set<std::pair<std::size_t, std::size_t>> keys_;
};

/// One pair per token string present in both vocabularies, sorted by
/// min(f_src, f_tgt) descending, ties by source index.
BilingualDictionary build_identical_dictionary(const Vocabulary& src, const Vocabulary& tgt);

BilingualDictionary filter_by_class(const BilingualDictionary& dict, const std::set<TokenClass>& keep);

/// Ablation groups: emoticons travel with emoji.
enum class ClassGroup { All, Numerals, Emoji, Words };
std::set<TokenClass> classes_of(ClassGroup group);
std::string_view to_string(ClassGroup group);
/// all / numerals / emoji / words, case-insensitive.
ClassGroup parse_class_group(std::string_view name);
std::vector<ClassGroup> all_class_groups();

/// Rescales f_src and f_tgt by the corpus totals (relative frequencies).
BilingualDictionary to_relative_frequencies(const BilingualDictionary& dict, double src_total, double tgt_total);

/// `token<TAB>token<TAB>class<TAB>f_src<TAB>f_tgt`
void write_dictionary(std::ostream& out, const BilingualDictionary& dict, const Vocabulary& src,
                      const Vocabulary& tgt);
void save_dictionary(const std::string& path, const BilingualDictionary& dict, const Vocabulary& src,
                     const Vocabulary& tgt);

/// Reads either the five-column synthetic format or plain `src tgt` pairs.
/// Pairs with out-of-vocabulary tokens are skipped with a warning.
BilingualDictionary read_dictionary(std::istream& in, const std::string& name, const Vocabulary& src,
                                    const Vocabulary& tgt);
BilingualDictionary load_dictionary(const std::string& path, const Vocabulary& src, const Vocabulary& tgt);

struct TestEntry {
    std::string source;
    std::vector<std::string> targets;  // first-seen order, no duplicates
};

/// Gold translation sets; multiple lines for one source are merged.
class TestDictionary {
public:
    void add(const std::string& source, const std::string& target);
    const std::vector<TestEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t pair_count() const noexcept;

private:
    std::vector<TestEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

TestDictionary read_test_dictionary(std::istream& in, const std::string& name = "<stream>");
TestDictionary load_test_dictionary(const std::string& path);

/// Drops gold targets equal to their source; entries left empty are removed.
TestDictionary exclude_identical_pairs(const TestDictionary& test);

struct CoverageStats {
    std::size_t entries = 0;
    std::size_t in_vocab_source = 0;
    std::size_t identical_entries = 0;  // some gold target equals the source string
    std::size_t pairs = 0;
    std::size_t pairs_in_dictionary = 0;

    double source_coverage() const { return entries ? double(in_vocab_source) / entries : 0.0; }
    double identical_rate() const { return entries ? double(identical_entries) / entries : 0.0; }
    double dictionary_overlap() const { return pairs ? double(pairs_in_dictionary) / pairs : 0.0; }
};

CoverageStats coverage_stats(const TestDictionary& test, const Vocabulary& src, const Vocabulary& tgt,
                             const BilingualDictionary* synthetic = nullptr);

/// Uniform sample without replacement of k entries whose source and at least
/// one target are in vocabulary; the in-vocabulary target with the lowest
/// index is used. Throws PreconditionError when fewer than k are available.
BilingualDictionary sample_seed(const TestDictionary& dict, const Vocabulary& src, const Vocabulary& tgt,
                                std::size_t k, std::uint64_t rng_seed);

}  // namespace xling
