#include "xling/experiment.hpp"
#include "xling/error.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace xling {

std::string_view to_string(MapMethod m) { return m == MapMethod::Procrustes ? "procrustes" : "self-learning"; }

MapMethod parse_map_method(std::string_view name) {
    if (name == "procrustes") return MapMethod::Procrustes;
    if (name == "self-learning" || name == "self_learning") return MapMethod::SelfLearning;
    throw ConfigError("unknown mapping method '" + std::string(name) + "'");
}

std::string_view to_string(RefineMode m) {
    switch (m) {
        case RefineMode::None: return "none";
        case RefineMode::Plain: return "plain";
        case RefineMode::Weighted: return "weighted";
        case RefineMode::Meemi: return "meemi";
    }
    return "none";
}

RefineMode parse_refine_mode(std::string_view name) {
    if (name == "none") return RefineMode::None;
    if (name == "plain") return RefineMode::Plain;
    if (name == "weighted") return RefineMode::Weighted;
    if (name == "meemi") return RefineMode::Meemi;
    throw ConfigError("unknown refine mode '" + std::string(name) + "'");
}

Alignment align_spaces(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualDictionary& seed,
                       const MapperSettings& settings) {
    BilingualDictionary induced = seed;
    AlignmentModel model = settings.method == MapMethod::Procrustes
                               ? solve_procrustes(src, tgt, seed)
                               : self_learn(src, tgt, seed, settings.self_learn, &induced);
    nlohmann::json record = {{"stage", "align"},
                             {"method", to_string(settings.method)},
                             {"seed_pairs", seed.size()},
                             {"iterations", model.diagnostics.iterations},
                             {"dictionary_size", model.diagnostics.dictionary_size}};
    if (settings.reweight) {
        auto rw = reweight(model, src, tgt, induced, *settings.reweight);
        record["reweight"] = *settings.reweight;
        CrossLingualSpace space(std::move(rw.src), std::move(rw.tgt), {record});
        return {std::move(rw.model), std::move(space), std::move(induced)};
    }
    CrossLingualSpace space(apply_mapping(model, src, Side::Source), tgt, {record});
    return {std::move(model), std::move(space), std::move(induced)};
}

CrossLingualSpace refine_space(const CrossLingualSpace& space, const BilingualDictionary& dict, RefineMode mode,
                               FrequencyMode frequencies) {
    switch (mode) {
        case RefineMode::None: return space;
        case RefineMode::Plain: return average_plain(space, dict);
        case RefineMode::Weighted:
            if (frequencies == FrequencyMode::Relative)
                return average_weighted(space, to_relative_frequencies(dict,
                                                                       double(space.src().vocab().total_frequency()),
                                                                       double(space.tgt().vocab().total_frequency())));
            return average_weighted(space, dict);
        case RefineMode::Meemi: return meemi_transform(space, dict);
    }
    return space;
}

const AblationCell* AblationTable::find(ClassGroup group, std::string_view system) const {
    for (const auto& c : cells)
        if (c.group == group && c.system == system) return &c;
    return nullptr;
}

namespace {

void evaluate(AblationCell& cell, const CrossLingualSpace& space, const TestDictionary* test,
              const SentimentTask* sentiment, const TranslationOptions& options) {
    if (test) cell.translation = precision_at_k(space, *test, options);
    if (sentiment) {
        const auto probe = train_probe(sentiment->train, space.src(), sentiment->probe);
        cell.sentiment = eval_probe(probe, sentiment->test, space.tgt());
    }
}

}  // namespace

AblationTable run_ablation(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualDictionary& all,
                           const TestDictionary* test, const SentimentTask* sentiment, const AblationConfig& config) {
    if (all.empty()) throw PreconditionError("ablation needs a non-empty full dictionary");
    AblationTable table;
    table.has_translation = test != nullptr;
    table.has_sentiment = sentiment != nullptr;
    for (const auto group : all_class_groups()) {
        const auto dict = filter_by_class(all, classes_of(group));
        AblationCell base{group, "base", dict.size(), {}, {}, {}};
        AblationCell weighted{group, "weighted", dict.size(), {}, {}, {}};
        if (dict.empty()) {
            base.failure = weighted.failure = "n/a";
        } else {
            std::optional<Alignment> aligned;
            try {
                aligned = align_spaces(src, tgt, dict, config.mapper);
                evaluate(base, aligned->space, test, sentiment, config.translation);
            } catch (const std::exception& e) {
                base.failure = e.what();
            }
            if (!aligned) {
                weighted.failure = base.failure;
            } else {
                try {
                    const auto refined = refine_space(aligned->space, dict, RefineMode::Weighted, config.frequencies);
                    evaluate(weighted, refined, test, sentiment, config.translation);
                } catch (const std::exception& e) {
                    weighted.failure = e.what();
                }
            }
        }
        table.cells.push_back(std::move(base));
        table.cells.push_back(std::move(weighted));
    }
    return table;
}

std::string format_fixed(const std::optional<double>& v, int digits) {
    if (!v) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
    return buf;
}

namespace {

std::vector<std::string> header_of(const AblationTable& t) {
    std::vector<std::string> h{"Dictionary", "Pairs", "System"};
    if (t.has_translation) h.insert(h.end(), {"P@1", "P@5", "P@10"});
    if (t.has_sentiment) h.insert(h.end(), {"Acc", "F1"});
    return h;
}

std::vector<std::string> row_of(const AblationTable& t, const AblationCell& c) {
    std::vector<std::string> r{std::string(to_string(c.group)), std::to_string(c.pairs), c.system};
    const std::string mark = !c.failure ? "" : (*c.failure == "n/a" ? "n/a" : "error");
    auto p = [&](int k) -> std::string {
        if (!mark.empty()) return mark;
        const auto it = c.translation->p_at.find(k);
        return it == c.translation->p_at.end() ? "n/a" : format_percent(it->second);
    };
    if (t.has_translation) r.insert(r.end(), {p(1), p(5), p(10)});
    if (t.has_sentiment) {
        if (!mark.empty())
            r.insert(r.end(), {mark, mark});
        else
            r.insert(r.end(), {format_fixed(c.sentiment->accuracy), format_fixed(c.sentiment->macro_f1)});
    }
    return r;
}

}  // namespace

void write_ablation_markdown(std::ostream& out, const AblationTable& table) {
    std::vector<std::vector<std::string>> rows{header_of(table)};
    for (const auto& c : table.cells) rows.push_back(row_of(table, c));
    std::vector<std::size_t> width(rows.front().size(), 3);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    auto line = [&](const std::vector<std::string>& r) {
        out << '|';
        for (std::size_t i = 0; i < r.size(); ++i) {
            const bool left = i == 0 || i == 2;
            const std::string pad(width[i] - r[i].size(), ' ');
            out << ' ' << (left ? r[i] + pad : pad + r[i]) << " |";
        }
        out << '\n';
    };
    line(rows.front());
    out << '|';
    for (std::size_t i = 0; i < width.size(); ++i) {
        const bool left = i == 0 || i == 2;
        out << (left ? " :" : " ") << std::string(width[i] - 1, '-') << (left ? "" : ":") << " |";
    }
    out << '\n';
    for (std::size_t r = 1; r < rows.size(); ++r) line(rows[r]);
    for (const auto& c : table.cells)
        if (c.failure && *c.failure != "n/a")
            out << "\n- " << to_string(c.group) << "/" << c.system << ": " << *c.failure;
    out << '\n';
}

void write_ablation_tsv(std::ostream& out, const AblationTable& table) {
    auto emit = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "\t" : "") << r[i];
        out << '\n';
    };
    emit(header_of(table));
    for (const auto& c : table.cells) emit(row_of(table, c));
}

}  // namespace xling
