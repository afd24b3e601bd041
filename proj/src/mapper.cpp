#include "xling/mapper.hpp"
#include "xling/error.hpp"
#include "xling/retrieval.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace xling {

std::string_view to_string(Retrieval r) { return r == Retrieval::Cosine ? "cosine" : "csls"; }

Retrieval parse_retrieval(std::string_view name) {
    if (name == "cosine") return Retrieval::Cosine;
    if (name == "csls") return Retrieval::Csls;
    throw ConfigError("unknown retrieval '" + std::string(name) + "' (expected cosine or csls)");
}

Square Reweighting::source_transform() const {
    const Vector scaled = sigma.array().pow(exponent).matrix();
    return u * scaled.asDiagonal() * v.transpose();
}

Square Reweighting::target_transform() const {
    const Vector scaled = sigma.array().pow(exponent).matrix();
    return v * scaled.asDiagonal() * v.transpose();
}

namespace {

void check_pair(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualDictionary& dict) {
    if (dict.empty()) throw PreconditionError("alignment needs a non-empty dictionary");
    if (src.dim() != tgt.dim())
        throw PreconditionError("dimension mismatch: source " + std::to_string(src.dim()) + ", target " +
                                std::to_string(tgt.dim()));
    if (!src.norm_state().unit_rows || !tgt.norm_state().unit_rows)
        throw PreconditionError("alignment expects unit-normalized spaces");
    dict.validate(static_cast<std::size_t>(src.size()), static_cast<std::size_t>(tgt.size()));
}

std::pair<Matrix, Matrix> gather(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                 const BilingualDictionary& dict) {
    Matrix x(static_cast<Index>(dict.size()), src.dim());
    Matrix y(static_cast<Index>(dict.size()), tgt.dim());
    Index r = 0;
    for (const auto& p : dict) {
        x.row(r) = src.row(static_cast<Index>(p.src));
        y.row(r) = tgt.row(static_cast<Index>(p.tgt));
        ++r;
    }
    return {std::move(x), std::move(y)};
}

Square procrustes_or_throw(const Matrix& x, const Matrix& y) {
    try {
        return orthogonal_procrustes(x, y);
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }
}

}  // namespace

AlignmentModel solve_procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                const BilingualDictionary& dict) {
    check_pair(src, tgt, dict);
    const auto [x, y] = gather(src, tgt, dict);
    AlignmentModel model;
    model.w = procrustes_or_throw(x, y);
    model.diagnostics.iterations = 1;
    model.diagnostics.dictionary_size = dict.size();
    model.diagnostics.objective.push_back(mean_dictionary_cosine(src, tgt, model.w, dict));
    return model;
}

double mean_dictionary_cosine(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Square& w,
                              const BilingualDictionary& dict) {
    if (dict.empty()) return 0.0;
    double sum = 0;
    for (const auto& p : dict) {
        const Eigen::RowVectorXd mapped = src.row(static_cast<Index>(p.src)) * w;
        sum += cosine(mapped, tgt.row(static_cast<Index>(p.tgt)));
    }
    return sum / static_cast<double>(dict.size());
}

BilingualDictionary induce_dictionary(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Square& w,
                                      const BilingualDictionary& seed, const SelfLearnConfig& config) {
    const Index cutoff = std::min<Index>({static_cast<Index>(config.induce_vocab_cutoff), src.size(), tgt.size()});
    const Matrix xs = unit_rows((src.matrix().topRows(cutoff) * w).eval());
    const Matrix ys = unit_rows(tgt.matrix().topRows(cutoff));

    std::vector<std::vector<Neighbor>> forward;
    std::vector<std::vector<Neighbor>> backward;
    if (config.retrieval == Retrieval::Csls) {
        const Vector r_tgt = mean_top_k_similarity(xs, ys, config.csls_k, config.threads);
        const Vector r_src = mean_top_k_similarity(ys, xs, config.csls_k, config.threads);
        forward = top_k(xs, ys, 1, {2.0, &r_tgt, &r_src}, config.threads);
        backward = top_k(ys, xs, 1, {2.0, &r_src, &r_tgt}, config.threads);
    } else {
        forward = top_k(xs, ys, 1, {}, config.threads);
        backward = top_k(ys, xs, 1, {}, config.threads);
    }

    std::set<std::pair<std::size_t, std::size_t>> keys;
    for (Index i = 0; i < cutoff; ++i) {
        keys.emplace(static_cast<std::size_t>(i), static_cast<std::size_t>(forward[i].front().index));
        keys.emplace(static_cast<std::size_t>(backward[i].front().index), static_cast<std::size_t>(i));
    }
    for (const auto& p : seed) keys.emplace(p.src, p.tgt);

    BilingualDictionary out;
    for (const auto& [i, j] : keys) {
        out.add({i, j, src.vocab().token_class(i), static_cast<double>(src.vocab().freq(i)),
                 static_cast<double>(tgt.vocab().freq(j))});
    }
    return out;
}

AlignmentModel self_learn(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualDictionary& seed,
                          const SelfLearnConfig& config, BilingualDictionary* induced) {
    check_pair(src, tgt, seed);
    if (config.max_iters < 1) throw PreconditionError("max_iters must be at least 1");

    AlignmentModel best;
    double best_score = -std::numeric_limits<double>::infinity();
    BilingualDictionary dict = seed;
    BilingualDictionary best_dict;
    int iterations = 0;
    for (int it = 1; it <= config.max_iters; ++it) {
        iterations = it;
        const auto [x, y] = gather(src, tgt, dict);
        const Square w = procrustes_or_throw(x, y);
        auto next = induce_dictionary(src, tgt, w, seed, config);
        const double score = mean_dictionary_cosine(src, tgt, w, next);
        const bool improved = score > best_score;
        const double gain = score - best_score;
        if (improved) {
            best.w = w;
            best.diagnostics.objective.push_back(score);
            best_score = score;
            best_dict = next;
        }
        if (!improved || gain < config.tol) break;
        dict = std::move(next);
    }
    best.diagnostics.iterations = iterations;
    best.diagnostics.dictionary_size = best_dict.size();
    if (induced) *induced = std::move(best_dict);
    return best;
}

ReweightResult reweight(const AlignmentModel& model, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                        const BilingualDictionary& dict, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw PreconditionError("re-weighting exponent must lie in [0, 1]");
    if (dict.empty()) throw PreconditionError("re-weighting needs a non-empty dictionary");
    if (src.dim() != model.dim() || tgt.dim() != model.dim()) throw PreconditionError("dimension mismatch");
    dict.validate(static_cast<std::size_t>(src.size()), static_cast<std::size_t>(tgt.size()));
    const auto [x, y] = gather(src, tgt, dict);
    const Matrix aligned = x * model.w;
    CrossCovarianceSvd<double> svd;
    try {
        svd = cross_covariance_svd(aligned, y);
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }
    ReweightResult out{model, {}, {}};
    out.model.reweight = Reweighting{s, svd.sigma, svd.u, svd.v};
    out.src = apply_mapping(out.model, src, Side::Source);
    out.tgt = apply_mapping(out.model, tgt, Side::Target);
    return out;
}

EmbeddingSpace apply_mapping(const AlignmentModel& model, const EmbeddingSpace& space, Side side) {
    if (space.dim() != model.dim())
        throw PreconditionError("dimension mismatch: space " + std::to_string(space.dim()) + ", model " +
                                std::to_string(model.dim()));
    Matrix m = space.matrix();
    if (side == Side::Source) m = m * model.w;
    NormState state = space.norm_state();
    if (model.reweight) {
        m = m * (side == Side::Source ? model.reweight->source_transform() : model.reweight->target_transform());
        state.unit_rows = false;
    } else if (state.unit_rows && side == Side::Source) {
        // Orthogonal maps keep unit rows up to rounding; re-validate rather than trust.
        for (Index i = 0; i < m.rows(); ++i)
            if (std::abs(m.row(i).norm() - 1.0) > 1e-6) {
                state.unit_rows = false;
                break;
            }
    }
    return space.with_matrix(std::move(m), state);
}

namespace {

void write_row(std::ostream& out, const auto& row) {
    for (Index c = 0; c < row.size(); ++c) out << (c ? " " : "") << row(c);
    out << '\n';
}

Eigen::RowVectorXd read_row(std::istream& in, Index d, const std::string& name, std::size_t& lineno) {
    std::string line;
    ++lineno;
    if (!std::getline(in, line)) throw ParseError(name, lineno, "unexpected end of model file");
    std::istringstream ss(line);
    Eigen::RowVectorXd row(d);
    for (Index c = 0; c < d; ++c)
        if (!(ss >> row(c))) throw ParseError(name, lineno, "expected " + std::to_string(d) + " values");
    std::string extra;
    if (ss >> extra) throw ParseError(name, lineno, "expected " + std::to_string(d) + " values");
    return row;
}

}  // namespace

void write_model(std::ostream& out, const AlignmentModel& model) {
    const auto precision = out.precision(17);
    const Index d = model.dim();
    out << d << ' ';
    if (model.reweight)
        out << model.reweight->exponent << '\n';
    else
        out << "-\n";
    for (Index r = 0; r < d; ++r) write_row(out, model.w.row(r));
    if (model.reweight) {
        write_row(out, model.reweight->sigma.transpose());
        for (Index r = 0; r < d; ++r) write_row(out, model.reweight->u.row(r));
        for (Index r = 0; r < d; ++r) write_row(out, model.reweight->v.row(r));
    }
    out.precision(precision);
}

void save_model(const std::string& path, const AlignmentModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write_model(out, model);
}

AlignmentModel read_model(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError(name, lineno, "missing header");
    std::istringstream header(line);
    Index d = 0;
    std::string s;
    if (!(header >> d >> s) || d < 1) throw ParseError(name, lineno, "malformed header, expected `d s`");
    AlignmentModel model;
    model.w.resize(d, d);
    for (Index r = 0; r < d; ++r) model.w.row(r) = read_row(in, d, name, lineno);
    if (s != "-") {
        Reweighting rw;
        try {
            rw.exponent = std::stod(s);
        } catch (const std::exception&) {
            throw ParseError(name, 1, "invalid exponent '" + s + "'");
        }
        rw.sigma = read_row(in, d, name, lineno).transpose();
        rw.u.resize(d, d);
        rw.v.resize(d, d);
        for (Index r = 0; r < d; ++r) rw.u.row(r) = read_row(in, d, name, lineno);
        for (Index r = 0; r < d; ++r) rw.v.row(r) = read_row(in, d, name, lineno);
        model.reweight = std::move(rw);
    }
    return model;
}

AlignmentModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model '" + path + "'");
    return read_model(in, path);
}

}  // namespace xling
