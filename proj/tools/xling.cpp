// Command-line front end.
#include "xling/experiment.hpp"
#include "xling/parallel.hpp"
#include "xling/pipeline.hpp"
#include "xling/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace xling;
using nlohmann::json;

namespace {

struct SpaceArgs {
    std::string emb;
    std::string vocab;

    EmbeddingSpace load() const {
        LoadOptions opt;
        if (!vocab.empty()) opt.sidecar = vocab;
        return load_embeddings(emb, opt);
    }
};

void add_space(CLI::App* cmd, SpaceArgs& src, SpaceArgs& tgt) {
    cmd->add_option("--src", src.emb, "Source embeddings (word2vec text)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tgt", tgt.emb, "Target embeddings (word2vec text)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--src-vocab", src.vocab, "Source vocabulary TSV with frequencies")->check(CLI::ExistingFile);
    cmd->add_option("--tgt-vocab", tgt.vocab, "Target vocabulary TSV with frequencies")->check(CLI::ExistingFile);
}

std::vector<NormStep> norm_steps(const std::string& text) {
    std::vector<std::string> names;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) names.push_back(item);
    return parse_normalization(names);
}

std::vector<int> parse_ks(const std::string& text) {
    std::vector<int> ks;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) ks.push_back(std::stoi(item));
    return ks;
}

void fail(const std::string& kind, const std::string& message, const std::string& stage = {}) {
    json j = {{"error", kind}, {"message", message}};
    if (!stage.empty()) j["stage"] = stage;
    std::cerr << j.dump() << '\n';
}

void print_pairs(const BilingualDictionary& dict) {
    std::cout << "pairs\t" << dict.size() << '\n';
    for (const auto g : all_class_groups())
        if (g != ClassGroup::All) std::cout << to_string(g) << '\t' << filter_by_class(dict, classes_of(g)).size() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-lingual embedding alignment from identical tokens"};
    app.require_subcommand(1);
    int threads = default_thread_count();
    app.add_option("--threads", threads, "Worker threads (default: XLING_THREADS or hardware)")->check(CLI::PositiveNumber);
    bool no_lowercase = false;
    app.add_flag("--no-lowercase", no_lowercase, "Keep word case when tokenizing");

    // stats
    auto* stats = app.add_subcommand("stats", "Tweet, token and unique-token counts per corpus");
    std::vector<std::string> corpora;
    stats->add_option("corpus", corpora, "Corpus files, one tweet per line")->required()->check(CLI::ExistingFile);

    // vocab
    auto* vocab = app.add_subcommand("vocab", "Build a frequency-sorted vocabulary TSV");
    std::string corpus_path;
    std::string out_path;
    std::uint64_t min_count = 5;
    vocab->add_option("corpus", corpus_path, "Corpus file")->required()->check(CLI::ExistingFile);
    vocab->add_option("-o,--out", out_path, "Output TSV (stdout if omitted)");
    vocab->add_option("--min-count", min_count, "Minimum frequency")->check(CLI::PositiveNumber);

    // dict
    auto* dict = app.add_subcommand("dict", "Identical-token dictionary or an external seed sample");
    std::string src_vocab;
    std::string tgt_vocab;
    std::string classes = "all";
    std::string seed_from;
    std::size_t seed_k = 100;
    std::uint64_t rng_seed = 1;
    dict->add_option("--src-vocab", src_vocab, "Source vocabulary TSV")->required()->check(CLI::ExistingFile);
    dict->add_option("--tgt-vocab", tgt_vocab, "Target vocabulary TSV")->required()->check(CLI::ExistingFile);
    dict->add_option("--classes", classes, "all, numerals, emoji or words");
    dict->add_option("--seed-from", seed_from, "Sample k pairs from this gold dictionary instead")->check(CLI::ExistingFile);
    dict->add_option("-k", seed_k, "Number of pairs to sample");
    dict->add_option("--rng-seed", rng_seed, "Sampling seed");
    dict->add_option("-o,--out", out_path, "Output dictionary TSV (stdout if omitted)");

    // align
    auto* align = app.add_subcommand("align", "Learn the orthogonal mapping");
    SpaceArgs src;
    SpaceArgs tgt;
    add_space(align, src, tgt);
    std::string dict_path;
    std::string method = "self-learning";
    std::string retrieval = "cosine";
    std::string normalization = "unit,center,unit";
    std::size_t cutoff = 20000;
    int max_iters = 50;
    double tol = 1e-6;
    std::optional<double> reweight_s;
    std::string out_src;
    std::string out_tgt;
    align->add_option("--dict", dict_path, "Seed dictionary (identical tokens if omitted)")->check(CLI::ExistingFile);
    align->add_option("--method", method, "self-learning or procrustes");
    align->add_option("--retrieval", retrieval, "Induction retrieval: cosine or csls");
    align->add_option("--normalize", normalization, "Comma-separated steps: unit, center");
    align->add_option("--cutoff", cutoff, "Most frequent tokens used for induction");
    align->add_option("--max-iters", max_iters, "Self-learning iteration limit");
    align->add_option("--tol", tol, "Minimum objective gain");
    align->add_option("--reweight", reweight_s, "Re-weighting exponent in [0, 1]");
    align->add_option("-o,--model", out_path, "Model output file")->required();
    align->add_option("--out-src", out_src, "Write the mapped source space");
    align->add_option("--out-tgt", out_tgt, "Write the (re-weighted) target space");

    // refine
    auto* refine = app.add_subcommand("refine", "Average or Meemi post-processing of an aligned pair");
    SpaceArgs rsrc;
    SpaceArgs rtgt;
    add_space(refine, rsrc, rtgt);
    std::string mode = "weighted";
    bool relative = false;
    refine->add_option("--dict", dict_path, "Anchor dictionary (identical tokens if omitted)")->check(CLI::ExistingFile);
    refine->add_option("--mode", mode, "plain, weighted or meemi");
    refine->add_flag("--relative", relative, "Use relative instead of absolute frequencies");
    refine->add_option("--out-src", out_src, "Refined source space")->required();
    refine->add_option("--out-tgt", out_tgt, "Refined target space")->required();

    // eval-translate
    auto* evt = app.add_subcommand("eval-translate", "Precision at k on a gold test dictionary");
    SpaceArgs esrc;
    SpaceArgs etgt;
    add_space(evt, esrc, etgt);
    std::string test_path;
    std::string ks_text = "1,5,10";
    bool oov_as_wrong = false;
    bool exclude_identical = false;
    std::string candidates_path;
    evt->add_option("--test", test_path, "Test dictionary")->required()->check(CLI::ExistingFile);
    evt->add_option("--retrieval", retrieval, "cosine or csls");
    evt->add_option("--k", ks_text, "Comma-separated k values");
    evt->add_flag("--oov-as-wrong", oov_as_wrong, "Count out-of-vocabulary sources as errors");
    evt->add_flag("--exclude-identical-test-pairs", exclude_identical, "Drop gold targets equal to the source");
    evt->add_option("--candidates", candidates_path, "Write ranked candidates per query (TSV)");

    // eval-sentiment
    auto* evs = app.add_subcommand("eval-sentiment", "Train the probe on the source side, test on the target side");
    SpaceArgs ssrc;
    SpaceArgs stgt;
    add_space(evs, ssrc, stgt);
    std::string train_path;
    std::string scheme_name;
    ProbeConfig probe;
    evs->add_option("--train", train_path, "Source-language training TSV")->required()->check(CLI::ExistingFile);
    evs->add_option("--test", test_path, "Target-language test TSV")->required()->check(CLI::ExistingFile);
    evs->add_option("--scheme", scheme_name, "binary or ternary (inferred if omitted)");
    evs->add_option("--epochs", probe.epochs, "Gradient descent epochs");
    evs->add_option("--lr", probe.learning_rate, "Learning rate");
    evs->add_option("--l2", probe.l2, "L2 penalty");

    // ablation / pipeline
    std::string config_path;
    std::vector<std::string> overrides;
    auto* abl = app.add_subcommand("ablation", "Class ablation table from a pipeline config");
    abl->add_option("config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    abl->add_option("--set", overrides, "Override a config key: key=value");
    auto* pipe = app.add_subcommand("pipeline", "Run every stage from a config into a new run directory");
    pipe->add_option("config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    pipe->add_option("--set", overrides, "Override a config key: key=value");

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark fixture");
    std::string kind;
    std::string out_dir;
    RotationBenchmarkConfig rot;
    SentimentBenchmarkConfig sen;
    synth->add_option("kind", kind, "rotation or sentiment")->required()->check(CLI::IsMember({"rotation", "sentiment"}));
    synth->add_option("-o,--out", out_dir, "Output directory")->required();
    synth->add_option("--n", rot.n, "Rotation: vocabulary size");
    synth->add_option("--d", rot.d, "Rotation: dimension");
    synth->add_option("--noise", rot.noise, "Rotation: target noise");
    synth->add_option("--identical", rot.identical, "Rotation: identical tokens");
    synth->add_option("--seed", rng_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fail("usage", e.what());
        return 2;
    }

    const TokenizerConfig tok{!no_lowercase};
    auto write_to = [&](const std::string& path, auto&& fn) {
        if (path.empty()) {
            fn(std::cout);
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path + "'");
        fn(out);
    };

    try {
        if (*stats) {
            std::cout << corpus_stats_markdown(corpora, tok, threads);
        } else if (*vocab) {
            const auto built = build_vocabulary(count_corpus_file(corpus_path, tok, threads), min_count);
            write_to(out_path, [&](std::ostream& o) { write_vocabulary_tsv(o, built.vocab); });
            std::cerr << "tweets " << built.stats.tweets << ", tokens " << built.stats.tokens << ", unique "
                      << built.stats.unique << ", kept " << built.vocab.size() << '\n';
        } else if (*dict) {
            const auto sv = load_vocabulary_tsv(src_vocab);
            const auto tv = load_vocabulary_tsv(tgt_vocab);
            auto d = seed_from.empty() ? build_identical_dictionary(sv, tv)
                                       : sample_seed(load_test_dictionary(seed_from), sv, tv, seed_k, rng_seed);
            d = filter_by_class(d, classes_of(parse_class_group(classes)));
            write_to(out_path, [&](std::ostream& o) { write_dictionary(o, d, sv, tv); });
            if (!out_path.empty()) print_pairs(d);
        } else if (*align) {
            const auto steps = norm_steps(normalization);
            const auto s = normalize(src.load(), steps);
            const auto t = normalize(tgt.load(), steps);
            const auto seed = dict_path.empty() ? build_identical_dictionary(s.vocab(), t.vocab())
                                                : load_dictionary(dict_path, s.vocab(), t.vocab());
            MapperSettings settings;
            settings.method = parse_map_method(method);
            settings.self_learn.retrieval = parse_retrieval(retrieval);
            settings.self_learn.induce_vocab_cutoff = cutoff;
            settings.self_learn.max_iters = max_iters;
            settings.self_learn.tol = tol;
            settings.self_learn.threads = threads;
            settings.reweight = reweight_s;
            const auto aligned = align_spaces(s, t, seed, settings);
            save_model(out_path, aligned.model);
            if (!out_src.empty()) save_embeddings(out_src, aligned.space.src());
            if (!out_tgt.empty()) save_embeddings(out_tgt, aligned.space.tgt());
            const auto& diag = aligned.model.diagnostics;
            std::cout << "seed_pairs\t" << seed.size() << "\niterations\t" << diag.iterations << "\ndictionary_size\t"
                      << diag.dictionary_size << "\nobjective\t"
                      << (diag.objective.empty() ? "n/a" : format_fixed(diag.objective.back(), 6)) << '\n';
        } else if (*refine) {
            const CrossLingualSpace space(rsrc.load(), rtgt.load());
            const auto d = dict_path.empty() ? build_identical_dictionary(space.src().vocab(), space.tgt().vocab())
                                             : load_dictionary(dict_path, space.src().vocab(), space.tgt().vocab());
            const auto out = refine_space(space, d, parse_refine_mode(mode),
                                          relative ? FrequencyMode::Relative : FrequencyMode::Absolute);
            save_embeddings(out_src, out.src());
            save_embeddings(out_tgt, out.tgt());
            std::cout << "pairs\t" << d.size() << '\n';
        } else if (*evt) {
            const CrossLingualSpace space(esrc.load(), etgt.load());
            auto test = load_test_dictionary(test_path);
            if (exclude_identical) test = exclude_identical_pairs(test);
            TranslationOptions opt;
            opt.ks = parse_ks(ks_text);
            opt.retrieval = parse_retrieval(retrieval);
            opt.oov_as_wrong = oov_as_wrong;
            opt.keep_candidates = !candidates_path.empty();
            opt.threads = threads;
            const auto report = precision_at_k(space, test, opt);
            const auto cov = coverage_stats(test, space.src().vocab(), space.tgt().vocab());
            std::cout << "entries\t" << report.total << "\ncovered\t" << report.covered << "\nskipped\t"
                      << report.skipped << "\nidentical_rate\t" << format_fixed(100.0 * cov.identical_rate()) << '\n';
            for (const auto& [k, p] : report.p_at) std::cout << "P@" << k << '\t' << format_percent(p) << '\n';
            if (!candidates_path.empty())
                write_to(candidates_path, [&](std::ostream& o) {
                    for (const auto& q : report.per_query) {
                        o << q.source << '\t' << (q.rank ? std::to_string(*q.rank) : "-");
                        for (const auto& c : q.candidates) o << '\t' << c.token << ':' << format_fixed(c.score, 4);
                        o << '\n';
                    }
                });
        } else if (*evs) {
            std::optional<Scheme> scheme;
            if (scheme_name == "binary") scheme = Scheme::Binary;
            else if (scheme_name == "ternary") scheme = Scheme::Ternary;
            else if (!scheme_name.empty()) throw ConfigError("--scheme must be binary or ternary");
            const auto train = load_sentiment_dataset(train_path, tok, scheme);
            const auto test = load_sentiment_dataset(test_path, tok, scheme ? scheme : std::optional(train.scheme));
            const auto s = ssrc.load();
            const auto t = stgt.load();
            const auto model = train_probe(train, s, probe);
            const auto r = eval_probe(model, test, t);
            const auto maj = eval_majority(train, test);
            std::cout << "accuracy\t" << format_fixed(r.accuracy) << "\nmacro_f1\t" << format_fixed(r.macro_f1)
                      << "\nmajority_accuracy\t" << format_fixed(maj.accuracy) << "\nmajority_macro_f1\t"
                      << format_fixed(maj.macro_f1) << '\n';
            for (std::size_t c = 0; c < r.per_class.size(); ++c)
                std::cout << to_string(class_polarity(static_cast<int>(c), r.scheme)) << "\tP "
                          << format_fixed(r.per_class[c].precision) << "\tR " << format_fixed(r.per_class[c].recall)
                          << "\tF1 " << format_fixed(r.per_class[c].f1) << '\n';
        } else if (*abl || *pipe) {
            const auto config = load_pipeline_config(config_path, overrides);
            const auto result = *abl ? run_ablation_pipeline(config, threads) : run_pipeline(config, threads);
            std::cout << result.report_markdown;
            std::cerr << "run directory: " << result.run_dir.string() << '\n';
        } else if (*synth) {
            if (kind == "rotation") {
                rot.seed = rng_seed;
                write_rotation_fixture(out_dir, make_rotation_benchmark(rot));
            } else {
                sen.seed = rng_seed;
                write_sentiment_fixture(out_dir, make_sentiment_benchmark(sen));
            }
            std::cout << "wrote " << kind << " fixture to " << out_dir << '\n';
        }
    } catch (const StageError& e) {
        fail(e.cause_kind(), e.what(), e.stage());
        return 1;
    } catch (const Error& e) {
        fail(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        fail("error", e.what());
        return 1;
    }
    return 0;
}
