#include "oracles.hpp"
#include "xling/error.hpp"
#include "xling/lexicon.hpp"

#include <doctest.h>

#include <sstream>

using namespace xling;

TEST_CASE("identical dictionary is the token intersection") {
    const auto d = build_identical_dictionary(oracle::vocab_of({"a", "b"}), oracle::vocab_of({"b", "c"}));
    REQUIRE(d.size() == 1);
    CHECK(d[0].src == 1);
    CHECK(d[0].tgt == 0);
}

TEST_CASE("identical dictionary is symmetric and sorted by min frequency") {
    const Vocabulary a({"x", "5", "🎉", "y"}, {100, 50, 40, 3}, {TokenClass::Word, TokenClass::Numeral, TokenClass::Emoji, TokenClass::Word});
    const Vocabulary b({"🎉", "y", "5", "z"}, {90, 80, 10, 1}, {TokenClass::Emoji, TokenClass::Word, TokenClass::Numeral, TokenClass::Word});
    const auto ab = build_identical_dictionary(a, b);
    const auto ba = build_identical_dictionary(b, a);
    REQUIRE(ab.size() == 3);
    CHECK(a.token(ab[0].src) == "🎉");
    CHECK(a.token(ab[1].src) == "5");
    CHECK(a.token(ab[2].src) == "y");
    for (const auto& p : ab) {
        CHECK(a.token(p.src) == b.token(p.tgt));
        CHECK(ba.contains(p.tgt, p.src));
        CHECK(p.f_src == a.freq(p.src));
        CHECK(p.f_tgt == b.freq(p.tgt));
    }
}

TEST_CASE("class filters partition the dictionary") {
    const auto v = oracle::vocab_of({"5", "lol", ":)", "🎉", "12", "hola"});
    const auto d = build_identical_dictionary(v, v);
    const auto num = filter_by_class(d, classes_of(ClassGroup::Numerals));
    const auto emo = filter_by_class(d, classes_of(ClassGroup::Emoji));
    const auto words = filter_by_class(d, classes_of(ClassGroup::Words));
    CHECK(num.size() == 2);
    CHECK(emo.size() == 2);
    CHECK(words.size() == 2);
    CHECK(num.size() + emo.size() + words.size() == d.size());
    CHECK(filter_by_class(d, classes_of(ClassGroup::All)) == d);

    const auto two = build_identical_dictionary(oracle::vocab_of({"5", "lol"}), oracle::vocab_of({"5", "lol"}));
    const auto only = filter_by_class(two, {TokenClass::Numeral});
    REQUIRE(only.size() == 1);
    CHECK(only[0].cls == TokenClass::Numeral);
}

TEST_CASE("duplicate pairs are rejected") {
    BilingualDictionary d;
    CHECK(d.add({0, 1, TokenClass::Word, 1, 1}));
    CHECK_FALSE(d.add({0, 1, TokenClass::Word, 2, 2}));
    CHECK(d.size() == 1);
    CHECK_THROWS_AS(d.validate(1, 1), PreconditionError);
}

TEST_CASE("dictionary file round trip") {
    const auto v = oracle::vocab_of({"5", "lol", "🎉"});
    const auto d = build_identical_dictionary(v, v);
    std::ostringstream out;
    write_dictionary(out, d, v, v);
    std::istringstream in(out.str());
    CHECK(read_dictionary(in, "mem", v, v) == d);
    std::istringstream plain("lol lol\n5\t5\n");
    CHECK(read_dictionary(plain, "mem", v, v).size() == 2);
    std::istringstream bad("lol\n");
    CHECK_THROWS_AS(read_dictionary(bad, "mem", v, v), ParseError);
}

TEST_CASE("test dictionary merges gold targets") {
    std::istringstream in("dog perro\ndog can\ncat gato\n");
    const auto t = read_test_dictionary(in);
    REQUIRE(t.size() == 2);
    CHECK(t.entries()[0].source == "dog");
    CHECK(t.entries()[0].targets == std::vector<std::string>{"perro", "can"});
    CHECK(t.pair_count() == 3);
    std::istringstream bad("dog perro\nlonely\n");
    try {
        read_test_dictionary(bad, "t.txt");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("coverage statistics") {
    std::istringstream in("hola hola\nperro dog\nzzz zzz\n");
    const auto t = read_test_dictionary(in);
    const auto src = oracle::vocab_of({"hola", "perro"});
    const auto tgt = oracle::vocab_of({"hola", "dog"});
    const auto d = build_identical_dictionary(src, tgt);
    const auto c = coverage_stats(t, src, tgt, &d);
    CHECK(c.entries == 3);
    CHECK(c.in_vocab_source == 2);
    CHECK(c.identical_entries == 2);
    CHECK(c.pairs_in_dictionary == 1);
    CHECK(exclude_identical_pairs(t).size() == 1);
}

TEST_CASE("seed sampling") {
    TestDictionary t;
    for (int i = 0; i < 300; ++i) t.add("s" + std::to_string(i), "t" + std::to_string(i));
    const auto src = oracle::vocab_of(oracle::numbered("s", 250));
    const auto tgt = oracle::vocab_of(oracle::numbered("t", 300));
    const auto a = sample_seed(t, src, tgt, 100, 7);
    const auto b = sample_seed(t, src, tgt, 100, 7);
    CHECK(a.size() == 100);
    CHECK(a == b);
    CHECK_FALSE(a == sample_seed(t, src, tgt, 100, 8));
    CHECK(sample_seed(t, src, tgt, 0, 7).empty());
    CHECK_THROWS_AS(sample_seed(t, src, tgt, 251, 7), PreconditionError);
}

TEST_CASE("relative frequencies") {
    BilingualDictionary d;
    d.add({0, 0, TokenClass::Word, 10, 30});
    const auto r = to_relative_frequencies(d, 100, 300);
    CHECK(r[0].f_src == doctest::Approx(0.1));
    CHECK(r[0].f_tgt == doctest::Approx(0.1));
}
