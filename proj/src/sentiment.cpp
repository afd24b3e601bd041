#include "xling/sentiment.hpp"
#include "xling/diagnostics.hpp"
#include "xling/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>

namespace xling {

std::string_view to_string(Polarity p) {
    switch (p) {
        case Polarity::Negative: return "negative";
        case Polarity::Neutral: return "neutral";
        case Polarity::Positive: return "positive";
    }
    return "neutral";
}

Polarity parse_polarity(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "positive" || s == "pos" || s == "p") return Polarity::Positive;
    if (s == "negative" || s == "neg" || s == "n") return Polarity::Negative;
    if (s == "neutral" || s == "neu" || s == "none") return Polarity::Neutral;
    throw Error("unknown sentiment label '" + std::string(name) + "'");
}

int class_count(Scheme scheme) { return static_cast<int>(scheme); }

int class_index(Polarity p, Scheme scheme) {
    if (scheme == Scheme::Ternary) return static_cast<int>(p);
    if (p == Polarity::Neutral) throw PreconditionError("neutral label in a binary dataset");
    return p == Polarity::Negative ? 0 : 1;
}

Polarity class_polarity(int index, Scheme scheme) {
    if (scheme == Scheme::Ternary) return static_cast<Polarity>(index);
    return index == 0 ? Polarity::Negative : Polarity::Positive;
}

void SentimentDataset::validate() const {
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (examples[i].tokens.empty()) throw PreconditionError("example " + std::to_string(i) + " has no tokens");
        if (scheme == Scheme::Binary && examples[i].label == Polarity::Neutral)
            throw PreconditionError("example " + std::to_string(i) + " is neutral in a binary dataset");
    }
}

SentimentDataset read_sentiment_dataset(std::istream& in, const std::string& name, const TokenizerConfig& config,
                                        std::optional<Scheme> scheme) {
    SentimentDataset data;
    Tokenizer tokenizer(config);
    std::string line;
    std::size_t lineno = 0;
    std::size_t empty = 0;
    bool neutral = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(name, lineno, "expected label<TAB>text");
        SentimentExample ex;
        try {
            ex.label = parse_polarity(line.substr(0, tab));
        } catch (const Error& e) {
            throw ParseError(name, lineno, e.what());
        }
        ex.tokens = tokenizer(std::string_view(line).substr(tab + 1));
        if (ex.tokens.empty()) {
            ++empty;
            continue;
        }
        neutral = neutral || ex.label == Polarity::Neutral;
        data.examples.push_back(std::move(ex));
    }
    if (empty > 0) warn(name + ": skipped " + std::to_string(empty) + " example(s) without tokens");
    data.scheme = scheme.value_or(neutral ? Scheme::Ternary : Scheme::Binary);
    if (data.scheme == Scheme::Binary && neutral) data = to_binary(data);
    return data;
}

SentimentDataset load_sentiment_dataset(const std::string& path, const TokenizerConfig& config,
                                        std::optional<Scheme> scheme) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open sentiment dataset '" + path + "'");
    return read_sentiment_dataset(in, path, config, scheme);
}

SentimentDataset to_binary(const SentimentDataset& data) {
    SentimentDataset out;
    out.scheme = Scheme::Binary;
    for (const auto& ex : data.examples)
        if (ex.label != Polarity::Neutral) out.examples.push_back(ex);
    return out;
}

SentenceEmbedding embed_sentence(const EmbeddingSpace& space, const std::vector<std::string>& tokens) {
    SentenceEmbedding out{Vector::Zero(space.dim()), true};
    int known = 0;
    for (const auto& t : tokens) {
        if (auto i = space.find(t)) {
            out.vector += space.row(*i).transpose();
            ++known;
        }
    }
    if (known > 0) {
        out.vector /= static_cast<double>(known);
        out.all_oov = false;
    }
    return out;
}

Matrix sentence_features(const EmbeddingSpace& space, const SentimentDataset& data) {
    Matrix f(static_cast<Index>(data.examples.size()), space.dim());
    for (Index r = 0; r < f.rows(); ++r)
        f.row(r) = embed_sentence(space, data.examples[static_cast<std::size_t>(r)].tokens).vector.transpose();
    return f;
}

namespace {

std::vector<int> labels_of(const SentimentDataset& data) {
    std::vector<int> out;
    out.reserve(data.examples.size());
    for (const auto& ex : data.examples) out.push_back(class_index(ex.label, data.scheme));
    return out;
}

int argmax_row(const auto& row) {
    int best = 0;
    for (int c = 1; c < row.size(); ++c)
        if (row(c) > row(best)) best = c;
    return best;
}

}  // namespace

ProbeObjective probe_objective(const Square& weights, const Vector& bias, const Matrix& features,
                               const std::vector<int>& labels, double l2) {
    const Index n = features.rows();
    const Index classes = weights.cols();
    Matrix logits = features * weights;
    logits.rowwise() += bias.transpose();
    Matrix residual(n, classes);
    double loss = 0;
    for (Index i = 0; i < n; ++i) {
        const double m = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
        const double z = e.sum();
        residual.row(i) = e / z;
        const int y = labels[static_cast<std::size_t>(i)];
        loss += std::log(z) + m - logits(i, y);
        residual(i, y) -= 1.0;
    }
    ProbeObjective out;
    const double inv = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    out.loss = loss * inv + 0.5 * l2 * weights.squaredNorm();
    out.grad_weights = features.transpose() * residual * inv + l2 * weights;
    out.grad_bias = residual.colwise().sum().transpose() * inv;
    return out;
}

std::vector<int> ProbeModel::predict(const Matrix& features) const {
    Matrix logits = features * weights;
    logits.rowwise() += bias.transpose();
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_row(logits.row(i));
    return out;
}

ProbeModel train_probe(const SentimentDataset& train, const EmbeddingSpace& space, const ProbeConfig& config) {
    train.validate();
    const int classes = class_count(train.scheme);
    const auto labels = labels_of(train);
    std::vector<std::size_t> per_class(static_cast<std::size_t>(classes), 0);
    for (const int y : labels) ++per_class[static_cast<std::size_t>(y)];
    for (int c = 0; c < classes; ++c)
        if (per_class[static_cast<std::size_t>(c)] == 0)
            throw PreconditionError("no training examples for class '" +
                                    std::string(to_string(class_polarity(c, train.scheme))) + "'");

    const Matrix features = sentence_features(space, train);
    ProbeModel model;
    model.scheme = train.scheme;
    model.weights = Square::Zero(space.dim(), classes);
    model.bias = Vector::Zero(classes);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto obj = probe_objective(model.weights, model.bias, features, labels, config.l2);
        if (!std::isfinite(obj.loss))
            throw NumericalError("probe loss became non-finite at epoch " + std::to_string(epoch) +
                                 " (last finite loss " +
                                 (model.loss_log.empty() ? std::string("n/a") : std::to_string(model.loss_log.back())) +
                                 ")");
        model.loss_log.push_back(obj.loss);
        model.weights -= config.learning_rate * obj.grad_weights;
        model.bias -= config.learning_rate * obj.grad_bias;
    }
    return model;
}

SentimentReport score_predictions(const std::vector<int>& gold, const std::vector<int>& predicted, Scheme scheme) {
    if (gold.size() != predicted.size()) throw PreconditionError("gold and predicted lengths differ");
    const auto classes = static_cast<std::size_t>(class_count(scheme));
    SentimentReport r;
    r.scheme = scheme;
    r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        ++r.confusion[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(predicted[i])];
        if (gold[i] == predicted[i]) ++correct;
    }
    r.accuracy = gold.empty() ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(gold.size());
    double f1_sum = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::size_t tp = r.confusion[c][c];
        std::size_t gold_c = 0;
        std::size_t pred_c = 0;
        for (std::size_t k = 0; k < classes; ++k) {
            gold_c += r.confusion[c][k];
            pred_c += r.confusion[k][c];
        }
        ClassMetrics m;
        m.precision = pred_c ? 100.0 * static_cast<double>(tp) / static_cast<double>(pred_c) : 0.0;
        m.recall = gold_c ? 100.0 * static_cast<double>(tp) / static_cast<double>(gold_c) : 0.0;
        m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        f1_sum += m.f1;
        r.per_class.push_back(m);
    }
    r.macro_f1 = f1_sum / static_cast<double>(classes);
    return r;
}

SentimentReport eval_probe(const ProbeModel& model, const SentimentDataset& test, const EmbeddingSpace& space) {
    if (model.scheme != test.scheme)
        throw PreconditionError("scheme mismatch: model has " + std::to_string(class_count(model.scheme)) +
                                " classes, test set " + std::to_string(class_count(test.scheme)));
    test.validate();
    return score_predictions(labels_of(test), model.predict(sentence_features(space, test)), test.scheme);
}

int majority_class(const SentimentDataset& train) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count(train.scheme)), 0);
    for (const int y : labels_of(train)) ++counts[static_cast<std::size_t>(y)];
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

SentimentReport eval_majority(const SentimentDataset& train, const SentimentDataset& test) {
    if (train.scheme != test.scheme) throw PreconditionError("scheme mismatch between training and test data");
    const auto gold = labels_of(test);
    return score_predictions(gold, std::vector<int>(gold.size(), majority_class(train)), test.scheme);
}

}  // namespace xling
