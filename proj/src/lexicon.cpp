#include "xling/lexicon.hpp"
#include "xling/diagnostics.hpp"
#include "xling/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace xling {

bool BilingualDictionary::add(const DictionaryPair& pair) {
    if (!keys_.emplace(pair.src, pair.tgt).second) return false;
    pairs_.push_back(pair);
    return true;
}

void BilingualDictionary::validate(std::size_t src_size, std::size_t tgt_size) const {
    for (const auto& p : pairs_) {
        if (p.src >= src_size || p.tgt >= tgt_size)
            throw PreconditionError("dictionary pair (" + std::to_string(p.src) + ", " + std::to_string(p.tgt) +
                                    ") out of range");
    }
}

BilingualDictionary build_identical_dictionary(const Vocabulary& src, const Vocabulary& tgt) {
    std::vector<DictionaryPair> pairs;
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (auto j = tgt.find(src.token(i))) {
            pairs.push_back({i, *j, classify_token(src.token(i)), static_cast<double>(src.freq(i)),
                             static_cast<double>(tgt.freq(*j))});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const DictionaryPair& a, const DictionaryPair& b) {
        const double ma = std::min(a.f_src, a.f_tgt);
        const double mb = std::min(b.f_src, b.f_tgt);
        return ma != mb ? ma > mb : a.src < b.src;
    });
    if (pairs.empty()) warn("identical-token dictionary is empty: vocabularies share no tokens");
    BilingualDictionary out;
    for (const auto& p : pairs) out.add(p);
    return out;
}

BilingualDictionary filter_by_class(const BilingualDictionary& dict, const std::set<TokenClass>& keep) {
    BilingualDictionary out;
    for (const auto& p : dict)
        if (keep.count(p.cls)) out.add(p);
    return out;
}

std::set<TokenClass> classes_of(ClassGroup group) {
    switch (group) {
        case ClassGroup::All:
            return {TokenClass::Numeral, TokenClass::Emoji, TokenClass::Emoticon, TokenClass::Word};
        case ClassGroup::Numerals: return {TokenClass::Numeral};
        case ClassGroup::Emoji: return {TokenClass::Emoji, TokenClass::Emoticon};
        case ClassGroup::Words: return {TokenClass::Word};
    }
    return {};
}

std::string_view to_string(ClassGroup group) {
    switch (group) {
        case ClassGroup::All: return "All";
        case ClassGroup::Numerals: return "Numerals";
        case ClassGroup::Emoji: return "Emoji";
        case ClassGroup::Words: return "Words";
    }
    return "All";
}

ClassGroup parse_class_group(std::string_view name) {
    std::string s(name);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "all") return ClassGroup::All;
    if (s == "numerals" || s == "numeral") return ClassGroup::Numerals;
    if (s == "emoji") return ClassGroup::Emoji;
    if (s == "words" || s == "word") return ClassGroup::Words;
    throw Error("unknown class group '" + std::string(name) + "'");
}

std::vector<ClassGroup> all_class_groups() {
    return {ClassGroup::All, ClassGroup::Numerals, ClassGroup::Emoji, ClassGroup::Words};
}

BilingualDictionary to_relative_frequencies(const BilingualDictionary& dict, double src_total, double tgt_total) {
    if (!(src_total > 0) || !(tgt_total > 0)) throw PreconditionError("corpus totals must be positive");
    BilingualDictionary out;
    for (auto p : dict) {
        p.f_src /= src_total;
        p.f_tgt /= tgt_total;
        out.add(p);
    }
    return out;
}

void write_dictionary(std::ostream& out, const BilingualDictionary& dict, const Vocabulary& src,
                      const Vocabulary& tgt) {
    for (const auto& p : dict) {
        out << src.token(p.src) << '\t' << tgt.token(p.tgt) << '\t' << to_string(p.cls) << '\t' << p.f_src << '\t'
            << p.f_tgt << '\n';
    }
}

void save_dictionary(const std::string& path, const BilingualDictionary& dict, const Vocabulary& src,
                     const Vocabulary& tgt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out.precision(17);
    write_dictionary(out, dict, src, tgt);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) out.push_back(f);
    return out;
}

}  // namespace

BilingualDictionary read_dictionary(std::istream& in, const std::string& name, const Vocabulary& src,
                                    const Vocabulary& tgt) {
    BilingualDictionary out;
    std::string line;
    std::size_t lineno = 0;
    std::size_t oov = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 2 && fields.size() != 5)
            throw ParseError(name, lineno, "expected `src tgt` or `src tgt class f_src f_tgt`");
        const auto i = src.find(fields[0]);
        const auto j = tgt.find(fields[1]);
        if (!i || !j) {
            ++oov;
            continue;
        }
        DictionaryPair p{*i, *j, classify_token(fields[0]), static_cast<double>(src.freq(*i)),
                         static_cast<double>(tgt.freq(*j))};
        if (fields.size() == 5) {
            try {
                p.cls = parse_token_class(fields[2]);
                p.f_src = std::stod(fields[3]);
                p.f_tgt = std::stod(fields[4]);
            } catch (const std::exception& e) {
                throw ParseError(name, lineno, e.what());
            }
        }
        out.add(p);
    }
    if (oov > 0) warn(name + ": skipped " + std::to_string(oov) + " dictionary pair(s) with out-of-vocabulary tokens");
    return out;
}

BilingualDictionary load_dictionary(const std::string& path, const Vocabulary& src, const Vocabulary& tgt) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dictionary '" + path + "'");
    return read_dictionary(in, path, src, tgt);
}

void TestDictionary::add(const std::string& source, const std::string& target) {
    auto [it, inserted] = index_.emplace(source, entries_.size());
    if (inserted) entries_.push_back({source, {}});
    auto& targets = entries_[it->second].targets;
    if (std::find(targets.begin(), targets.end(), target) == targets.end()) targets.push_back(target);
}

std::size_t TestDictionary::pair_count() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.targets.size();
    return n;
}

TestDictionary read_test_dictionary(std::istream& in, const std::string& name) {
    TestDictionary out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 2) throw ParseError(name, lineno, "expected `src tgt`");
        out.add(fields[0], fields[1]);
    }
    return out;
}

TestDictionary load_test_dictionary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open test dictionary '" + path + "'");
    return read_test_dictionary(in, path);
}

TestDictionary exclude_identical_pairs(const TestDictionary& test) {
    TestDictionary out;
    for (const auto& e : test.entries())
        for (const auto& t : e.targets)
            if (t != e.source) out.add(e.source, t);
    return out;
}

CoverageStats coverage_stats(const TestDictionary& test, const Vocabulary& src, const Vocabulary& tgt,
                             const BilingualDictionary* synthetic) {
    CoverageStats s;
    s.entries = test.size();
    for (const auto& e : test.entries()) {
        const auto i = src.find(e.source);
        if (i) ++s.in_vocab_source;
        if (std::find(e.targets.begin(), e.targets.end(), e.source) != e.targets.end()) ++s.identical_entries;
        for (const auto& t : e.targets) {
            ++s.pairs;
            if (!synthetic || !i) continue;
            if (auto j = tgt.find(t); j && synthetic->contains(*i, *j)) ++s.pairs_in_dictionary;
        }
    }
    return s;
}

BilingualDictionary sample_seed(const TestDictionary& dict, const Vocabulary& src, const Vocabulary& tgt,
                                std::size_t k, std::uint64_t rng_seed) {
    std::vector<DictionaryPair> candidates;
    for (const auto& e : dict.entries()) {
        const auto i = src.find(e.source);
        if (!i) continue;
        std::optional<std::size_t> best;
        for (const auto& t : e.targets)
            if (auto j = tgt.find(t); j && (!best || *j < *best)) best = j;
        if (!best) continue;
        candidates.push_back({*i, *best, classify_token(e.source), static_cast<double>(src.freq(*i)),
                              static_cast<double>(tgt.freq(*best))});
    }
    if (k > candidates.size())
        throw PreconditionError("cannot sample " + std::to_string(k) + " seed pairs: only " +
                                std::to_string(candidates.size()) + " in-vocabulary entries available");
    // Partial Fisher-Yates driven by the raw engine output (portable across
    // standard libraries, unlike the <random> distributions).
    std::mt19937_64 rng(rng_seed);
    auto bounded = [&rng](std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do x = rng();
        while (x >= limit);
        return x % n;
    };
    for (std::size_t i = 0; i < k; ++i) std::swap(candidates[i], candidates[i + bounded(candidates.size() - i)]);
    BilingualDictionary out;
    for (std::size_t i = 0; i < k; ++i) out.add(candidates[i]);
    return out;
}

}  // namespace xling
