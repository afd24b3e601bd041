#include "xling/corpus.hpp"
#include "xling/diagnostics.hpp"
#include "xling/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace xling;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenizer splits a tweet with an emoticon") {
    CHECK(tokenize("Buenos Dias a todos, menos a mi :(") ==
          Tokens{"buenos", "dias", "a", "todos", ",", "menos", "a", "mi", ":("});
}

TEST_CASE("tokenizer edge cases") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("   ").empty());
    CHECK(tokenize("5 🎉🎉") == Tokens{"5", "🎉", "🎉"});
    CHECK(tokenize("lol:-)") == Tokens{"lol", ":-)"});
    CHECK(tokenize("see https://t.co/Z2zBxCN6vv now") == Tokens{"see", "https://t.co/Z2zBxCN6vv", "now"});
    CHECK(tokenize("@AVCanPastilla #esllaut") == Tokens{"@avcanpastilla", "#esllaut"});
    CHECK(tokenize("NIRVANA", {false}) == Tokens{"NIRVANA"});
    // ZWJ family stays one cluster; skin tone modifiers too.
    CHECK(tokenize("👨‍👩‍👧 👍🏽") == Tokens{"👨‍👩‍👧", "👍🏽"});
    CHECK(tokenize("3.14 1,000") == Tokens{"3.14", "1,000"});
}

TEST_CASE("invalid UTF-8 is replaced, not rejected") {
    const auto t = tokenize(std::string("ab\xff") + "cd");
    CHECK_FALSE(t.empty());
}

TEST_CASE("classify_token precedence") {
    CHECK(classify_token("5") == TokenClass::Numeral);
    CHECK(classify_token("3.14") == TokenClass::Numeral);
    CHECK(classify_token("1.2.3") == TokenClass::Word);
    CHECK(classify_token(".5") == TokenClass::Word);
    CHECK(classify_token(":-)") == TokenClass::Emoticon);
    CHECK(classify_token("nirvana") == TokenClass::Word);
    CHECK(classify_token("🎉") == TokenClass::Emoji);
    CHECK(classify_token("👨‍👩‍👧") == TokenClass::Emoji);
    CHECK(classify_token("#") == TokenClass::Word);
    CHECK(classify_token("🎉a") == TokenClass::Word);
    CHECK(emoticon_lexicon().size() >= 50);
    for (const auto e : emoticon_lexicon()) CHECK(classify_token(e) == TokenClass::Emoticon);
}

TEST_CASE("classification is idempotent through the class names") {
    for (const auto* tok : {"5", ":)", "🎉", "hola"}) {
        const auto c = classify_token(tok);
        CHECK(parse_token_class(to_string(c)) == c);
    }
}

TEST_CASE("build_vocabulary counts and cuts") {
    const Tokens stream{"a", "b", "a"};
    auto v1 = build_vocabulary(stream, 1).vocab;
    REQUIRE(v1.size() == 2);
    CHECK(v1.token(0) == "a");
    CHECK(v1.freq(0) == 2);
    CHECK(v1.token(1) == "b");
    CHECK(v1.freq(1) == 1);
    auto v2 = build_vocabulary(stream, 2);
    REQUIRE(v2.vocab.size() == 1);
    CHECK(v2.vocab.token(0) == "a");
    CHECK(v2.vocab.total_frequency() + v2.dropped_tokens == v2.stats.tokens);
    CHECK_THROWS_AS(build_vocabulary(stream, 0), PreconditionError);
}

TEST_CASE("ties sort by token bytes") {
    const Tokens stream{"c", "b", "a", "b", "c", "a"};
    const auto v = build_vocabulary(stream, 1).vocab;
    CHECK(v.tokens() == Tokens{"a", "b", "c"});
}

TEST_CASE("empty corpus warns and yields an empty vocabulary") {
    std::string captured;
    auto old = set_warning_sink([&](std::string_view m) { captured = m; });
    std::istringstream in("");
    const auto built = build_vocabulary(count_corpus(in), 1);
    set_warning_sink(old);
    CHECK(built.vocab.empty());
    CHECK(built.stats.tweets == 0);
    CHECK(built.stats.tokens == 0);
    CHECK_FALSE(captured.empty());
}

TEST_CASE("duplicate tweets are removed after trimming") {
    std::istringstream in("hola amigo\n  hola amigo \nadios\n");
    const auto counted = count_corpus(in);
    CHECK(counted.counter.tweets() == 2);
    CHECK(counted.duplicates_removed == 1);
}

TEST_CASE("sharded counting matches regardless of thread count") {
    std::string text;
    for (int i = 0; i < 10000; ++i) text += "tweet " + std::to_string(i % 977) + " x" + std::to_string(i) + " 🎉\n";
    std::istringstream a(text);
    std::istringstream b(text);
    const auto va = build_vocabulary(count_corpus(a, {}, 1), 1);
    const auto vb = build_vocabulary(count_corpus(b, {}, 4), 1);
    CHECK(va.vocab == vb.vocab);
    CHECK(va.stats.tokens == vb.stats.tokens);
}

TEST_CASE("counter merge is order independent") {
    TokenCounter a;
    TokenCounter b;
    a.add_tweet(Tokens{"x", "y"});
    b.add_tweet(Tokens{"y", "z", "z"});
    TokenCounter ab = a;
    ab.merge(b);
    TokenCounter ba = b;
    ba.merge(a);
    CHECK(build_vocabulary(ab, 1).vocab == build_vocabulary(ba, 1).vocab);
}

TEST_CASE("vocabulary TSV round trip and errors") {
    const auto v = build_vocabulary(Tokens{"a", "🎉", "a", "5", ":)"}, 1).vocab;
    std::ostringstream out;
    write_vocabulary_tsv(out, v);
    std::istringstream in(out.str());
    CHECK(read_vocabulary_tsv(in) == v);
    std::istringstream bad("a\tnotanumber\tword\n");
    CHECK_THROWS_AS(read_vocabulary_tsv(bad), ParseError);
    CHECK_THROWS_AS(Vocabulary({"a", "a"}, {1, 1}, {TokenClass::Word, TokenClass::Word}), Error);
}
