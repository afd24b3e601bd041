#include "xling/embed_store.hpp"
#include "xling/diagnostics.hpp"
#include "xling/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace xling {

EmbeddingSpace::EmbeddingSpace(Vocabulary vocab, Matrix matrix, NormState state)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)), state_(state) {
    if (static_cast<std::size_t>(matrix_.rows()) != vocab_.size())
        throw Error("embedding space: " + std::to_string(matrix_.rows()) + " rows for " +
                    std::to_string(vocab_.size()) + " tokens");
    if (matrix_.cols() < 1) throw Error("embedding space: dimension must be at least 1");
    if (!matrix_.allFinite()) throw NumericalError("embedding space: non-finite entries");
    if (state_.unit_rows) {
        for (Index i = 0; i < matrix_.rows(); ++i) {
            if (std::abs(matrix_.row(i).norm() - 1.0) > 1e-6)
                throw Error("embedding space: row '" + vocab_.token(i) + "' is not unit-norm");
        }
    }
}

std::vector<NormStep> default_normalization() {
    return {NormStep::UnitRows, NormStep::CenterColumns, NormStep::UnitRows};
}

std::string_view to_string(NormStep step) {
    return step == NormStep::UnitRows ? "unit" : "center";
}

std::vector<NormStep> parse_normalization(const std::vector<std::string>& names) {
    std::vector<NormStep> steps;
    for (const auto& n : names) {
        if (n == "unit")
            steps.push_back(NormStep::UnitRows);
        else if (n == "center")
            steps.push_back(NormStep::CenterColumns);
        else
            throw ConfigError("unknown normalization step '" + n + "' (expected unit or center)");
    }
    return steps;
}

EmbeddingSpace normalize(const EmbeddingSpace& space, const std::vector<NormStep>& steps) {
    Matrix m = space.matrix();
    NormState state = space.norm_state();
    for (const auto step : steps) {
        if (step == NormStep::UnitRows) {
            for (Index i = 0; i < m.rows(); ++i) {
                if (m.row(i).squaredNorm() == 0.0)
                    throw PreconditionError("cannot unit-normalize zero vector of token '" + space.vocab().token(i) +
                                            "'");
            }
            m = unit_rows(m);
            state.unit_rows = true;
        } else {
            m = center_columns(m);
            state.mean_centered = true;
            state.unit_rows = false;
        }
    }
    return space.with_matrix(std::move(m), state);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const auto start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    return ec == std::errc() && ptr == end;
}

}  // namespace

EmbeddingSpace read_embeddings(std::istream& in, const std::string& name, const LoadOptions& options,
                               const Vocabulary* sidecar) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError(name, lineno, "missing header");
    const auto header = split_ws(line);
    long long n = 0;
    long long d = 0;
    if (header.size() != 2 || !parse_number(header[0], n) || !parse_number(header[1], d) || n < 0 || d < 1)
        throw ParseError(name, lineno, "malformed header, expected `n d`");
    if (options.expected_dim && *options.expected_dim != d)
        throw ParseError(name, lineno,
                         "dimension " + std::to_string(d) + " does not match expected " +
                             std::to_string(*options.expected_dim));

    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(n));
    Matrix m(n, d);
    std::unordered_set<std::string, StringHash, std::equal_to<>> seen;
    std::size_t duplicates = 0;
    Index row = 0;
    for (long long r = 0; r < n; ++r) {
        ++lineno;
        if (!std::getline(in, line))
            throw ParseError(name, lineno, "expected " + std::to_string(n) + " rows, found " + std::to_string(r));
        const auto fields = split_ws(line);
        if (fields.empty()) throw ParseError(name, lineno, "empty row");
        if (static_cast<long long>(fields.size()) - 1 != d)
            throw ParseError(name, lineno,
                             "row has " + std::to_string(fields.size() - 1) + " values, expected " + std::to_string(d));
        for (long long c = 0; c < d; ++c) {
            double v = 0;
            if (!parse_number(fields[c + 1], v))
                throw ParseError(name, lineno, "invalid number '" + std::string(fields[c + 1]) + "'");
            if (!std::isfinite(v)) throw ParseError(name, lineno, "non-finite value");
            m(row, c) = v;
        }
        if (!seen.emplace(fields[0]).second) {
            ++duplicates;
            continue;
        }
        tokens.emplace_back(fields[0]);
        ++row;
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (!split_ws(line).empty())
            throw ParseError(name, lineno, "more rows than the header's " + std::to_string(n));
    }
    if (duplicates > 0) warn(name + ": " + std::to_string(duplicates) + " duplicate token(s) ignored (first kept)");
    m.conservativeResize(row, d);

    std::vector<std::uint64_t> freq(tokens.size());
    std::vector<TokenClass> classes(tokens.size());
    std::size_t missing = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        classes[i] = classify_token(tokens[i]);
        if (sidecar) {
            if (auto j = sidecar->find(tokens[i])) {
                freq[i] = sidecar->freq(*j);
                classes[i] = sidecar->token_class(*j);
            } else {
                ++missing;
            }
        } else {
            freq[i] = tokens.size() - i;
        }
    }
    if (missing > 0) warn(name + ": " + std::to_string(missing) + " token(s) missing from sidecar vocabulary, frequency 0");
    return EmbeddingSpace(Vocabulary(std::move(tokens), std::move(freq), std::move(classes)), std::move(m));
}

EmbeddingSpace load_embeddings(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embeddings '" + path + "'");
    std::optional<Vocabulary> sidecar;
    if (options.sidecar) sidecar = load_vocabulary_tsv(*options.sidecar);
    return read_embeddings(in, path, options, sidecar ? &*sidecar : nullptr);
}

void write_embeddings(std::ostream& out, const EmbeddingSpace& space) {
    out << space.size() << ' ' << space.dim() << '\n';
    char buf[64];
    for (Index i = 0; i < space.size(); ++i) {
        out << space.vocab().token(i);
        for (Index c = 0; c < space.dim(); ++c) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, space.matrix()(i, c), std::chars_format::general, 6);
            out << ' ' << std::string_view(buf, ptr - buf);
        }
        out << '\n';
    }
}

void save_embeddings(const std::string& path, const EmbeddingSpace& space) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write_embeddings(out, space);
}

}  // namespace xling
