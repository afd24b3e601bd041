#include "xling/synthetic.hpp"
#include "xling/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

namespace xling {

Square random_orthogonal(Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Square g(d, d);
    for (Index r = 0; r < d; ++r)
        for (Index c = 0; c < d; ++c) g(r, c) = gauss(rng);
    Eigen::HouseholderQR<Square> qr(g);
    Square q = qr.householderQ();
    const Square r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index c = 0; c < d; ++c)
        if (r(c, c) < 0) q.col(c) *= -1.0;
    return q;
}

Matrix random_unit_rows(Index n, Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Matrix m(n, d);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < d; ++c) m(r, c) = gauss(rng);
    return unit_rows(m);
}

std::string utf8(char32_t cp) {
    std::string s;
    if (cp < 0x80) {
        s += static_cast<char>(cp);
    } else if (cp < 0x800) {
        s += static_cast<char>(0xC0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        s += static_cast<char>(0xE0 | (cp >> 12));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        s += static_cast<char>(0xF0 | (cp >> 18));
        s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return s;
}

namespace {

std::vector<std::string> emoji_tokens(std::size_t count) {
    std::vector<std::string> out;
    for (char32_t cp = 0x1F300; cp < 0x1FB00 && out.size() < count; ++cp) {
        auto s = utf8(cp);
        if (classify_token(s) == TokenClass::Emoji) out.push_back(std::move(s));
    }
    if (out.size() < count) throw PreconditionError("not enough single code point emoji for the benchmark");
    return out;
}

// Rows given in concept order; the vocabulary is sorted by frequency, then token.
EmbeddingSpace make_space(const std::vector<std::string>& tokens, const std::vector<std::uint64_t>& freq,
                          const Matrix& rows, NormState state) {
    std::vector<std::size_t> order(tokens.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (freq[a] != freq[b]) return freq[a] > freq[b];
        return tokens[a] < tokens[b];
    });
    std::vector<std::string> t;
    std::vector<std::uint64_t> f;
    std::vector<TokenClass> c;
    Matrix m(rows.rows(), rows.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        t.push_back(tokens[order[i]]);
        f.push_back(freq[order[i]]);
        c.push_back(classify_token(tokens[order[i]]));
        m.row(static_cast<Index>(i)) = rows.row(static_cast<Index>(order[i]));
    }
    return {Vocabulary(std::move(t), std::move(f), std::move(c)), std::move(m), state};
}

Matrix noisy_rotation(const Matrix& x, const Square& q, double noise, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Matrix y = x * q;
    if (noise > 0)
        for (Index r = 0; r < y.rows(); ++r)
            for (Index c = 0; c < y.cols(); ++c) y(r, c) += noise * gauss(rng);
    return unit_rows(y);
}

std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

}  // namespace

RotationBenchmark make_rotation_benchmark(const RotationBenchmarkConfig& cfg) {
    const auto n = static_cast<std::size_t>(cfg.n);
    if (cfg.d < 1 || cfg.n < 1) throw PreconditionError("benchmark needs n >= 1 and d >= 1");
    if (cfg.identical + cfg.test_pairs > n)
        throw PreconditionError("benchmark: identical + test pairs exceed the vocabulary size");
    if (cfg.identical_test_share < 0 || cfg.identical_test_share >= 1)
        throw PreconditionError("benchmark: identical test share must lie in [0, 1)");

    std::mt19937_64 rng(cfg.seed);
    RotationBenchmark out;
    out.rotation = random_orthogonal(cfg.d, rng);
    const Matrix x = random_unit_rows(cfg.n, cfg.d, rng);
    const Matrix y = noisy_rotation(x, out.rotation, cfg.noise, rng);

    const auto n_num = static_cast<std::size_t>(std::llround(cfg.identical * cfg.numeral_share));
    const auto n_emo_group =
        std::min(cfg.identical - n_num, static_cast<std::size_t>(std::llround(cfg.identical * cfg.emoji_share)));
    const auto n_emoticon = std::min(n_emo_group / 5, emoticon_lexicon().size());
    const auto emoji = emoji_tokens(n_emo_group - n_emoticon);

    std::vector<std::string> src_tokens(n);
    std::vector<std::string> tgt_tokens(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::string shared;
        if (c < n_num)
            shared = std::to_string(c);
        else if (c < n_num + n_emoticon)
            shared = std::string(emoticon_lexicon()[c - n_num]);
        else if (c < n_num + n_emo_group)
            shared = emoji[c - n_num - n_emoticon];
        else if (c < cfg.identical)
            shared = "w" + std::to_string(c);
        if (!shared.empty()) {
            src_tokens[c] = tgt_tokens[c] = shared;
        } else {
            src_tokens[c] = "en" + std::to_string(c);
            tgt_tokens[c] = "es" + std::to_string(c);
        }
    }

    // Zipf-like base frequency over a random concept ranking, perturbed per language.
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::shuffle(rank.begin(), rank.end(), rng);
    std::uniform_real_distribution<double> jitter(0.5, 2.0);
    std::vector<std::uint64_t> f_src(n);
    std::vector<std::uint64_t> f_tgt(n);
    for (std::size_t c = 0; c < n; ++c) {
        const double base = 1e6 / static_cast<double>(rank[c] + 10);
        f_src[c] = std::max<std::uint64_t>(5, static_cast<std::uint64_t>(base * jitter(rng)));
        f_tgt[c] = std::max<std::uint64_t>(5, static_cast<std::uint64_t>(base * jitter(rng)));
    }
    out.src = make_space(src_tokens, f_src, x, {true, false});
    out.tgt = make_space(tgt_tokens, f_tgt, y, {true, false});

    std::vector<std::size_t> other(n - cfg.identical);
    std::iota(other.begin(), other.end(), cfg.identical);
    std::shuffle(other.begin(), other.end(), rng);
    for (std::size_t i = 0; i < other.size(); ++i) {
        const auto c = other[i];
        if (i < cfg.test_pairs) {
            out.heldout.add(src_tokens[c], tgt_tokens[c]);
            out.mixed.add(src_tokens[c], tgt_tokens[c]);
        } else {
            out.train.add(src_tokens[c], tgt_tokens[c]);
        }
    }
    const double share = cfg.identical_test_share;
    auto n_same = static_cast<std::size_t>(std::ceil(share * static_cast<double>(cfg.test_pairs) / (1.0 - share) - 1e-9));
    n_same = std::min(n_same, cfg.identical);
    std::vector<std::size_t> same(cfg.identical);
    std::iota(same.begin(), same.end(), std::size_t{0});
    std::shuffle(same.begin(), same.end(), rng);
    for (std::size_t i = 0; i < n_same; ++i) out.mixed.add(src_tokens[same[i]], tgt_tokens[same[i]]);
    return out;
}

SentimentBenchmark make_sentiment_benchmark(const SentimentBenchmarkConfig& cfg) {
    if (cfg.emoji < 2 || cfg.words < 1 || cfg.d < 2) throw PreconditionError("sentiment benchmark too small");
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;
    const Index d = cfg.d;
    const Square q = random_orthogonal(d, rng);

    const Eigen::RowVectorXd u_a = random_unit_rows(1, d, rng).row(0);
    const Eigen::RowVectorXd u_aq = u_a * q;
    Eigen::RowVectorXd g = random_unit_rows(1, d, rng).row(0);
    g -= g.dot(u_aq) * u_aq;
    const Eigen::RowVectorXd u_b = g.normalized();

    const auto ne = static_cast<Index>(cfg.emoji);
    const auto nn = static_cast<Index>(cfg.numerals);
    const auto nw = static_cast<Index>(cfg.words);
    const double a = cfg.polarity_weight;
    // Emoji 2k and 2k+1 share a topic component and differ only in polarity.
    const Matrix rand_a = random_unit_rows((ne + 1) / 2, d, rng);
    const Matrix rand_b = random_unit_rows((ne + 1) / 2, d, rng);
    Matrix emoji_a(ne, d);
    Matrix emoji_b(ne, d);
    for (Index i = 0; i < ne; ++i) {
        const double s = (i % 2 == 1) ? 1.0 : -1.0;
        emoji_a.row(i) = a * s * u_a + (1 - a) * rand_a.row(i / 2);
        emoji_b.row(i) = a * s * u_b + (1 - a) * rand_b.row(i / 2);
    }
    const Matrix num_a = random_unit_rows(nn, d, rng);
    const Matrix num_b = noisy_rotation(num_a, q, cfg.noise, rng);
    const Matrix word_a = random_unit_rows(nw, d, rng);
    const Matrix word_b = noisy_rotation(word_a, q, cfg.noise, rng);

    Matrix rows_a(ne + nn + nw, d);
    Matrix rows_b(ne + nn + nw, d);
    rows_a << unit_rows(emoji_a), num_a, word_a;
    rows_b << unit_rows(emoji_b), num_b, word_b;

    const auto emoji = emoji_tokens(cfg.emoji);
    std::vector<std::string> tok_a;
    std::vector<std::string> tok_b;
    for (const auto& e : emoji) {
        tok_a.push_back(e);
        tok_b.push_back(e);
    }
    for (std::size_t i = 0; i < cfg.numerals; ++i) {
        tok_a.push_back(std::to_string(i));
        tok_b.push_back(std::to_string(i));
    }
    for (std::size_t i = 0; i < cfg.words; ++i) {
        tok_a.push_back("wa" + std::to_string(i));
        tok_b.push_back("wb" + std::to_string(i));
    }
    std::vector<std::uint64_t> f_a(tok_a.size());
    std::vector<std::uint64_t> f_b(tok_b.size());
    for (std::size_t i = 0; i < tok_a.size(); ++i) {
        const bool is_emoji = i < cfg.emoji;
        f_a[i] = is_emoji ? uniform_int(rng, 50, 500) : uniform_int(rng, 5, 1000);
        f_b[i] = is_emoji ? uniform_int(rng, 50, 500) : uniform_int(rng, 5, 1000);
    }

    SentimentBenchmark out;
    out.src = normalize(make_space(tok_a, f_a, rows_a, {true, false}));
    out.tgt = normalize(make_space(tok_b, f_b, rows_b, {true, false}));

    auto sample = [&](std::size_t count, const std::string& prefix) {
        SentimentDataset data;
        data.scheme = Scheme::Binary;
        for (std::size_t k = 0; k < count; ++k) {
            SentimentExample ex;
            const auto e = uniform_int(rng, 0, cfg.emoji - 1);
            for (std::size_t w = 0; w < cfg.filler; ++w)
                ex.tokens.push_back(prefix + std::to_string(uniform_int(rng, 0, cfg.words - 1)));
            ex.tokens.push_back(emoji[e]);
            ex.label = (e % 2 == 1) ? Polarity::Positive : Polarity::Negative;
            data.examples.push_back(std::move(ex));
        }
        return data;
    };
    out.train = sample(cfg.train_size, "wa");
    out.test = sample(cfg.test_size, "wb");
    return out;
}

void write_test_dictionary(std::ostream& out, const TestDictionary& dict) {
    for (const auto& e : dict.entries())
        for (const auto& t : e.targets) out << e.source << '\t' << t << '\n';
}

void write_sentiment_dataset(std::ostream& out, const SentimentDataset& data) {
    for (const auto& ex : data.examples) {
        out << to_string(ex.label) << '\t';
        for (std::size_t i = 0; i < ex.tokens.size(); ++i) out << (i ? " " : "") << ex.tokens[i];
        out << '\n';
    }
}

namespace {

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    fn(out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_spaces(const std::filesystem::path& dir, const EmbeddingSpace& src, const EmbeddingSpace& tgt) {
    std::filesystem::create_directories(dir);
    write_file(dir / "src.vec", [&](std::ostream& o) { write_embeddings(o, src); });
    write_file(dir / "tgt.vec", [&](std::ostream& o) { write_embeddings(o, tgt); });
    write_file(dir / "src.vocab.tsv", [&](std::ostream& o) { write_vocabulary_tsv(o, src.vocab()); });
    write_file(dir / "tgt.vocab.tsv", [&](std::ostream& o) { write_vocabulary_tsv(o, tgt.vocab()); });
}

}  // namespace

void write_rotation_fixture(const std::string& dir, const RotationBenchmark& bench) {
    const std::filesystem::path root(dir);
    write_spaces(root, bench.src, bench.tgt);
    write_file(root / "test.txt", [&](std::ostream& o) { write_test_dictionary(o, bench.heldout); });
    write_file(root / "mixed.txt", [&](std::ostream& o) { write_test_dictionary(o, bench.mixed); });
    write_file(root / "train.txt", [&](std::ostream& o) { write_test_dictionary(o, bench.train); });
}

void write_sentiment_fixture(const std::string& dir, const SentimentBenchmark& bench) {
    const std::filesystem::path root(dir);
    write_spaces(root, bench.src, bench.tgt);
    write_file(root / "train.tsv", [&](std::ostream& o) { write_sentiment_dataset(o, bench.train); });
    write_file(root / "test.tsv", [&](std::ostream& o) { write_sentiment_dataset(o, bench.test); });
}

}  // namespace xling
