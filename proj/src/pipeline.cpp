#include "xling/pipeline.hpp"
#include "xling/diagnostics.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace xling {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json default_config_json() {
    const json side = {{"embeddings", nullptr}, {"vocab", nullptr}, {"corpus", nullptr}};
    return {
        {"seed", 1},
        {"tokenizer", {{"lowercase", true}}},
        {"min_count", 5},
        {"src", side},
        {"tgt", side},
        {"dictionary", {{"mode", "identical"}, {"k", 100}, {"path", nullptr}, {"classes", "all"}}},
        {"normalize", {"unit", "center", "unit"}},
        {"mapper",
         {{"method", "self-learning"},
          {"retrieval", "cosine"},
          {"csls_k", 10},
          {"cutoff", 20000},
          {"max_iters", 50},
          {"tol", 1e-6},
          {"reweight", nullptr}}},
        {"refine", {{"mode", "weighted"}, {"frequencies", "absolute"}, {"classes", "all"}, {"dictionary", "identical"}}},
        {"eval",
         {{"translation", json::array()},
          {"retrieval", "cosine"},
          {"ks", {1, 5, 10}},
          {"oov_as_wrong", false},
          {"exclude_identical_test_pairs", false},
          {"sentiment", nullptr},
          {"ablation", false}}},
        {"probe", {{"epochs", 500}, {"learning_rate", 0.1}, {"l2", 1e-4}}},
        {"output_dir", "runs"},
    };
}

namespace {

void merge_into(json& base, const json& user, const std::string& prefix) {
    if (!user.is_object()) throw ConfigError("configuration" + (prefix.empty() ? "" : " key '" + prefix + "'") +
                                             " must be an object");
    for (const auto& [key, value] : user.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!base.contains(key)) throw ConfigError("unknown configuration key '" + path + "'");
        if (base[key].is_object() && value.is_object())
            merge_into(base[key], value, path);
        else
            base[key] = value;
    }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("configuration key '" + where + key + "' has the wrong type");
    }
}

std::optional<fs::path> optional_path(const json& j, const char* key, const fs::path& base, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return base / get<std::string>(j, key, where);
}

void require_file(const std::optional<fs::path>& p, const std::string& what) {
    if (p && !fs::is_regular_file(*p)) throw ConfigError(what + " '" + p->string() + "' does not exist");
}

SideInputs parse_side(const json& j, const fs::path& base, const std::string& name) {
    SideInputs s;
    const auto emb = optional_path(j, "embeddings", base, name + ".");
    if (!emb) throw ConfigError("configuration key '" + name + ".embeddings' is required");
    s.embeddings = *emb;
    s.vocab = optional_path(j, "vocab", base, name + ".");
    s.corpus = optional_path(j, "corpus", base, name + ".");
    require_file(emb, name + " embeddings");
    require_file(s.vocab, name + " vocabulary");
    require_file(s.corpus, name + " corpus");
    return s;
}

template <typename Fn>
auto as_config_error(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

void apply_override(json& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) throw ConfigError("override must look like key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("malformed override key '" + key + "'");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

PipelineConfig parse_pipeline_config(const json& user, const fs::path& base_dir) {
    json merged = default_config_json();
    merge_into(merged, user, "");
    // A sentiment block is an object with fixed keys.
    if (!merged["eval"]["sentiment"].is_null()) {
        json s = {{"train", nullptr}, {"test", nullptr}, {"scheme", nullptr}};
        merge_into(s, merged["eval"]["sentiment"], "eval.sentiment");
        merged["eval"]["sentiment"] = s;
    }

    PipelineConfig c;
    c.resolved = merged;
    c.hash = hex64(fnv1a64(merged.dump()));
    c.seed = get<std::uint64_t>(merged, "seed", "");
    c.tokenizer.lowercase = get<bool>(merged["tokenizer"], "lowercase", "tokenizer.");
    c.min_count = get<std::uint64_t>(merged, "min_count", "");
    if (c.min_count < 1) throw ConfigError("min_count must be at least 1");
    c.src = parse_side(merged["src"], base_dir, "src");
    c.tgt = parse_side(merged["tgt"], base_dir, "tgt");

    const auto& d = merged["dictionary"];
    const auto mode = get<std::string>(d, "mode", "dictionary.");
    if (mode == "identical")
        c.dictionary = DictionaryMode::Identical;
    else if (mode == "external-seed")
        c.dictionary = DictionaryMode::ExternalSeed;
    else if (mode == "file")
        c.dictionary = DictionaryMode::File;
    else
        throw ConfigError("dictionary.mode must be identical, external-seed or file");
    c.seed_k = get<std::size_t>(d, "k", "dictionary.");
    c.dictionary_path = optional_path(d, "path", base_dir, "dictionary.");
    if (c.dictionary != DictionaryMode::Identical && !c.dictionary_path)
        throw ConfigError("dictionary.path is required for dictionary mode '" + mode + "'");
    if (c.dictionary == DictionaryMode::Identical && c.dictionary_path)
        throw ConfigError("dictionary.path is only valid with the external-seed or file modes");
    require_file(c.dictionary_path, "dictionary");
    c.map_classes = as_config_error([&] { return parse_class_group(get<std::string>(d, "classes", "dictionary.")); });

    c.normalize = as_config_error(
        [&] { return parse_normalization(get<std::vector<std::string>>(merged, "normalize", "")); });

    const auto& m = merged["mapper"];
    c.mapper.method = parse_map_method(get<std::string>(m, "method", "mapper."));
    c.mapper.self_learn.retrieval = as_config_error([&] { return parse_retrieval(get<std::string>(m, "retrieval", "mapper.")); });
    c.mapper.self_learn.csls_k = get<int>(m, "csls_k", "mapper.");
    c.mapper.self_learn.induce_vocab_cutoff = get<std::size_t>(m, "cutoff", "mapper.");
    c.mapper.self_learn.max_iters = get<int>(m, "max_iters", "mapper.");
    c.mapper.self_learn.tol = get<double>(m, "tol", "mapper.");
    if (!m["reweight"].is_null()) {
        const double s = get<double>(m, "reweight", "mapper.");
        if (s < 0 || s > 1) throw ConfigError("mapper.reweight must lie in [0, 1]");
        c.mapper.reweight = s;
    }
    if (c.mapper.self_learn.max_iters < 1) throw ConfigError("mapper.max_iters must be at least 1");
    if (c.mapper.self_learn.csls_k < 1) throw ConfigError("mapper.csls_k must be at least 1");

    const auto& r = merged["refine"];
    c.refine = parse_refine_mode(get<std::string>(r, "mode", "refine."));
    const auto freq = get<std::string>(r, "frequencies", "refine.");
    if (freq != "absolute" && freq != "relative") throw ConfigError("refine.frequencies must be absolute or relative");
    c.frequencies = freq == "relative" ? FrequencyMode::Relative : FrequencyMode::Absolute;
    c.refine_classes = as_config_error([&] { return parse_class_group(get<std::string>(r, "classes", "refine.")); });
    const auto rdict = get<std::string>(r, "dictionary", "refine.");
    if (rdict != "identical" && rdict != "seed") throw ConfigError("refine.dictionary must be identical or seed");
    c.refine_with_seed = rdict == "seed";

    const auto& e = merged["eval"];
    for (const auto& p : get<std::vector<std::string>>(e, "translation", "eval.")) {
        c.translation_tests.push_back(base_dir / p);
        require_file(c.translation_tests.back(), "translation test set");
    }
    c.eval_retrieval = as_config_error([&] { return parse_retrieval(get<std::string>(e, "retrieval", "eval.")); });
    c.ks = get<std::vector<int>>(e, "ks", "eval.");
    if (c.ks.empty()) throw ConfigError("eval.ks must not be empty");
    for (const int k : c.ks)
        if (k < 1) throw ConfigError("eval.ks entries must be at least 1");
    c.oov_as_wrong = get<bool>(e, "oov_as_wrong", "eval.");
    c.exclude_identical_test_pairs = get<bool>(e, "exclude_identical_test_pairs", "eval.");
    c.ablation = get<bool>(e, "ablation", "eval.");
    if (!e["sentiment"].is_null()) {
        const auto& s = e["sentiment"];
        SentimentInputs si;
        const auto train = optional_path(s, "train", base_dir, "eval.sentiment.");
        const auto test = optional_path(s, "test", base_dir, "eval.sentiment.");
        if (!train || !test) throw ConfigError("eval.sentiment needs both train and test");
        require_file(train, "sentiment training set");
        require_file(test, "sentiment test set");
        si.train = *train;
        si.test = *test;
        if (!s["scheme"].is_null()) {
            const auto scheme = get<std::string>(s, "scheme", "eval.sentiment.");
            if (scheme == "binary")
                si.scheme = Scheme::Binary;
            else if (scheme == "ternary")
                si.scheme = Scheme::Ternary;
            else
                throw ConfigError("eval.sentiment.scheme must be binary or ternary");
        }
        c.sentiment = si;
    }

    const auto& p = merged["probe"];
    c.probe.epochs = get<int>(p, "epochs", "probe.");
    c.probe.learning_rate = get<double>(p, "learning_rate", "probe.");
    c.probe.l2 = get<double>(p, "l2", "probe.");
    if (c.probe.epochs < 0) throw ConfigError("probe.epochs must not be negative");

    c.output_dir = base_dir / get<std::string>(merged, "output_dir", "");
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration '" + path.string() + "'");
    json user = json::parse(in, nullptr, false);
    if (user.is_discarded()) throw ConfigError("configuration '" + path.string() + "' is not valid JSON");
    for (const auto& o : overrides) apply_override(user, o);
    return parse_pipeline_config(user, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

namespace {

constexpr int kStageVersion = 1;
const char* const kStages[] = {"corpus", "load", "dictionary", "normalize", "align", "refine", "evaluate"};

std::string stage_versions() {
    std::string s;
    for (const char* st : kStages) s += std::string(s.empty() ? "" : " ") + st + "=" + std::to_string(kStageVersion);
    return s;
}

std::string utc_stamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

fs::path make_run_dir(const PipelineConfig& c) {
    fs::create_directories(c.output_dir);
    const std::string stem = "run-" + utc_stamp() + "-" + c.hash.substr(0, 8);
    for (int i = 1;; ++i) {
        const fs::path dir = c.output_dir / (i == 1 ? stem : stem + "-" + std::to_string(i));
        if (fs::create_directory(dir)) return dir;
    }
}

/// Records every written file for the manifest.
class RunWriter {
public:
    RunWriter(fs::path dir, const PipelineConfig& c) : dir_(std::move(dir)), config_(c) {}

    void write(const std::string& name, const std::string& stage, const std::string& bytes) {
        std::ofstream out(dir_ / name, std::ios::binary);
        out << bytes;
        if (!out) throw Error("cannot write '" + (dir_ / name).string() + "'");
        artifacts_.push_back({{"file", name}, {"stage", stage}, {"fnv1a64", hex64(fnv1a64(bytes))}});
    }

    template <typename Fn>
    void write_with(const std::string& name, const std::string& stage, Fn&& fn) {
        std::ostringstream os;
        fn(os);
        write(name, stage, os.str());
    }

    void manifest(const std::string& status, const std::string& failed_stage = {}, const std::string& error = {}) {
        json m = {{"config_hash", config_.hash},
                  {"seed", config_.seed},
                  {"stage_versions", stage_versions()},
                  {"status", status},
                  {"artifacts", artifacts_}};
        if (!failed_stage.empty()) {
            m["failed_stage"] = failed_stage;
            m["error"] = error;
        }
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        out << m.dump(2) << '\n';
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    const PipelineConfig& config_;
    json artifacts_ = json::array();
};

struct Report {
    std::ostringstream md;
    std::ostringstream tsv;

    explicit Report(const PipelineConfig& c) {
        md << "<!-- config_hash=" << c.hash << " seed=" << c.seed << " stages: " << stage_versions() << " -->\n";
        md << "# Run report\n";
        tsv << "# config_hash\t" << c.hash << "\n# seed\t" << c.seed << "\n# stages\t" << stage_versions() << '\n';
        tsv << "section\tname\tmetric\tvalue\n";
    }
    void row(const std::string& section, const std::string& name, const std::string& metric, const std::string& v) {
        tsv << section << '\t' << name << '\t' << metric << '\t' << v << '\n';
    }
};

struct Loaded {
    EmbeddingSpace src;
    EmbeddingSpace tgt;
};

struct StageTracker {
    std::string current = "config";
    template <typename Fn>
    auto run(const char* name, Fn&& fn) {
        current = name;
        return fn();
    }
};

EmbeddingSpace load_side(const SideInputs& side, const std::string& name, const PipelineConfig& c, int threads,
                         StageTracker& st, Report& report, std::vector<json>& log) {
    std::optional<Vocabulary> sidecar;
    if (side.corpus) {
        st.current = "corpus";
        const auto built = build_vocabulary(count_corpus_file(side.corpus->string(), c.tokenizer, threads), c.min_count);
        report.md << "- " << name << " corpus: " << built.stats.tweets << " tweets, " << built.stats.tokens
                  << " tokens, " << built.stats.unique << " unique, " << built.stats.duplicates_removed
                  << " duplicates removed\n";
        report.row("corpus", name, "tweets", std::to_string(built.stats.tweets));
        report.row("corpus", name, "tokens", std::to_string(built.stats.tokens));
        report.row("corpus", name, "unique", std::to_string(built.stats.unique));
        log.push_back({{"stage", "corpus"}, {"side", name}, {"tweets", built.stats.tweets},
                       {"tokens", built.stats.tokens}, {"vocabulary", built.vocab.size()}});
        sidecar = built.vocab;
        st.current = "load";
    } else if (side.vocab) {
        sidecar = load_vocabulary_tsv(side.vocab->string());
    }
    std::ifstream in(side.embeddings, std::ios::binary);
    if (!in) throw Error("cannot open embeddings '" + side.embeddings.string() + "'");
    auto space = read_embeddings(in, side.embeddings.string(), {}, sidecar ? &*sidecar : nullptr);
    log.push_back({{"stage", "load"}, {"side", name}, {"tokens", space.size()}, {"dim", space.dim()}});
    return space;
}

void class_breakdown(const BilingualDictionary& dict, const std::string& name, Report& report) {
    report.md << "\n| " << name << " | Pairs |\n| :--- | ---: |\n";
    for (const auto g : all_class_groups()) {
        const auto n = filter_by_class(dict, classes_of(g)).size();
        report.md << "| " << to_string(g) << " | " << n << " |\n";
        report.row("dictionary", name, std::string(to_string(g)), std::to_string(n));
    }
}

std::string fixed(double v, int digits) { return format_fixed(std::optional<double>(v), digits); }

}  // namespace

namespace {

struct Prepared {
    EmbeddingSpace src;  // normalized
    EmbeddingSpace tgt;
    BilingualDictionary identical;
    BilingualDictionary seed;
};

Prepared prepare(const PipelineConfig& c, int threads, StageTracker& st, Report& report, std::vector<json>& log) {
    report.md << "\n## Inputs\n\n";
    Loaded raw = st.run("load", [&] {
        auto s = load_side(c.src, "src", c, threads, st, report, log);
        auto t = load_side(c.tgt, "tgt", c, threads, st, report, log);
        if (s.dim() != t.dim())
            throw PreconditionError("embedding dimensions differ (" + std::to_string(s.dim()) + " vs " +
                                    std::to_string(t.dim()) + ")");
        return Loaded{std::move(s), std::move(t)};
    });
    report.md << "- src: " << raw.src.size() << " tokens, dimension " << raw.src.dim() << '\n';
    report.md << "- tgt: " << raw.tgt.size() << " tokens, dimension " << raw.tgt.dim() << '\n';
    report.row("inputs", "src", "tokens", std::to_string(raw.src.size()));
    report.row("inputs", "tgt", "tokens", std::to_string(raw.tgt.size()));
    report.row("inputs", "src", "dim", std::to_string(raw.src.dim()));

    Prepared p;
    st.run("dictionary", [&] {
        p.identical = build_identical_dictionary(raw.src.vocab(), raw.tgt.vocab());
        BilingualDictionary seed;
        std::string mode = "identical";
        if (c.dictionary == DictionaryMode::Identical) {
            seed = p.identical;
        } else if (c.dictionary == DictionaryMode::ExternalSeed) {
            mode = "external-seed";
            seed = sample_seed(load_test_dictionary(c.dictionary_path->string()), raw.src.vocab(), raw.tgt.vocab(),
                               c.seed_k, c.seed);
        } else {
            mode = "file";
            seed = load_dictionary(c.dictionary_path->string(), raw.src.vocab(), raw.tgt.vocab());
        }
        p.seed = filter_by_class(seed, classes_of(c.map_classes));
        log.push_back({{"stage", "dictionary"},
                       {"mode", mode},
                       {"classes", to_string(c.map_classes)},
                       {"pairs", p.seed.size()},
                       {"identical_pairs", p.identical.size()}});
        report.md << "\n## Dictionary\n\n- mode: " << mode << " (" << to_string(c.map_classes) << ")\n- seed pairs: "
                  << p.seed.size() << "\n- identical pairs: " << p.identical.size() << '\n';
        report.row("dictionary", "seed", "pairs", std::to_string(p.seed.size()));
        class_breakdown(p.identical, "Identical", report);
        if (p.seed.empty()) throw PreconditionError("the seed dictionary is empty");
        return 0;
    });
    st.run("normalize", [&] {
        p.src = normalize(raw.src, c.normalize);
        p.tgt = normalize(raw.tgt, c.normalize);
        json steps = json::array();
        for (const auto s : c.normalize) steps.push_back(to_string(s));
        log.push_back({{"stage", "normalize"}, {"steps", steps}});
        return 0;
    });
    return p;
}

void translation_section(const PipelineConfig& c, int threads, const std::vector<std::pair<std::string, const CrossLingualSpace*>>& systems,
                         const BilingualDictionary& anchor, Report& report) {
    if (c.translation_tests.empty()) return;
    report.md << "\n## Word translation\n\n| Test set | System | Entries | Covered | Identical |";
    for (const int k : c.ks) report.md << " P@" << k << " |";
    report.md << "\n| :--- | :--- | ---: | ---: | ---: |";
    for (std::size_t i = 0; i < c.ks.size(); ++i) report.md << " ---: |";
    report.md << '\n';
    TranslationOptions opt;
    opt.ks = c.ks;
    opt.retrieval = c.eval_retrieval;
    opt.oov_as_wrong = c.oov_as_wrong;
    opt.threads = threads;
    for (const auto& path : c.translation_tests) {
        auto test = load_test_dictionary(path.string());
        if (c.exclude_identical_test_pairs) test = exclude_identical_pairs(test);
        const std::string name = path.filename().string();
        for (const auto& [system, space] : systems) {
            const auto cov = coverage_stats(test, space->src().vocab(), space->tgt().vocab(), &anchor);
            const auto r = precision_at_k(*space, test, opt);
            report.md << "| " << name << " | " << system << " | " << r.total << " | " << r.covered << " | "
                      << fixed(100.0 * cov.identical_rate(), 1) << "% |";
            for (const int k : c.ks) report.md << ' ' << format_percent(r.p_at.at(k)) << " |";
            report.md << '\n';
            report.row("translation", name + "/" + system, "covered", std::to_string(r.covered));
            report.row("translation", name + "/" + system, "skipped", std::to_string(r.skipped));
            for (const int k : c.ks)
                report.row("translation", name + "/" + system, "P@" + std::to_string(k), format_percent(r.p_at.at(k)));
        }
    }
}

void sentiment_section(const PipelineConfig& c, const std::vector<std::pair<std::string, const CrossLingualSpace*>>& systems,
                       Report& report) {
    if (!c.sentiment) return;
    const auto train = load_sentiment_dataset(c.sentiment->train.string(), c.tokenizer, c.sentiment->scheme);
    const auto test = load_sentiment_dataset(c.sentiment->test.string(), c.tokenizer,
                                             c.sentiment->scheme ? c.sentiment->scheme : std::optional(train.scheme));
    report.md << "\n## Sentiment transfer\n\n- train: " << train.examples.size()
              << " examples, test: " << test.examples.size() << " examples, " << class_count(train.scheme)
              << " classes\n\n| System | Accuracy | Macro-F1 |\n| :--- | ---: | ---: |\n";
    auto emit = [&](const std::string& name, const SentimentReport& r) {
        report.md << "| " << name << " | " << fixed(r.accuracy, 1) << " | " << fixed(r.macro_f1, 1) << " |\n";
        report.row("sentiment", name, "accuracy", fixed(r.accuracy, 1));
        report.row("sentiment", name, "macro_f1", fixed(r.macro_f1, 1));
    };
    emit("majority", eval_majority(train, test));
    for (const auto& [name, space] : systems) {
        const auto model = train_probe(train, space->src(), c.probe);
        emit(name, eval_probe(model, test, space->tgt()));
    }
}

std::optional<SentimentTask> sentiment_task(const PipelineConfig& c) {
    if (!c.sentiment) return std::nullopt;
    SentimentTask t;
    t.train = load_sentiment_dataset(c.sentiment->train.string(), c.tokenizer, c.sentiment->scheme);
    t.test = load_sentiment_dataset(c.sentiment->test.string(), c.tokenizer,
                                    c.sentiment->scheme ? c.sentiment->scheme : std::optional(t.train.scheme));
    t.probe = c.probe;
    return t;
}

AblationTable ablation_of(const PipelineConfig& c, const Prepared& p, int threads) {
    AblationConfig ac;
    ac.mapper = c.mapper;
    ac.mapper.self_learn.threads = threads;
    ac.translation.ks = c.ks;
    ac.translation.retrieval = c.eval_retrieval;
    ac.translation.oov_as_wrong = c.oov_as_wrong;
    ac.translation.threads = threads;
    ac.frequencies = c.frequencies;
    std::optional<TestDictionary> test;
    if (!c.translation_tests.empty()) {
        test = load_test_dictionary(c.translation_tests.front().string());
        if (c.exclude_identical_test_pairs) test = exclude_identical_pairs(*test);
    }
    const auto task = sentiment_task(c);
    return run_ablation(p.src, p.tgt, p.identical, test ? &*test : nullptr, task ? &*task : nullptr, ac);
}

std::string jsonl(const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) out += r.dump() + "\n";
    return out;
}

template <typename Body>
PipelineResult run_stages(const PipelineConfig& c, Body&& body) {
    RunWriter writer(make_run_dir(c), c);
    StageTracker st;
    try {
        writer.write("config.json", "config", c.resolved.dump(2) + "\n");
        Report report(c);
        std::vector<json> log;
        body(writer, st, report, log);
        st.current = "write";
        PipelineResult result{writer.dir(), report.md.str(), report.tsv.str()};
        writer.write("report.md", "evaluate", result.report_markdown);
        writer.write("report.tsv", "evaluate", result.report_tsv);
        json header = {{"config_hash", c.hash}, {"seed", c.seed}, {"stage_versions", stage_versions()}};
        log.insert(log.begin(), header);
        writer.write("provenance.jsonl", "write", jsonl(log));
        writer.manifest("complete");
        return result;
    } catch (const std::exception& e) {
        const auto* err = dynamic_cast<const Error*>(&e);
        writer.manifest("failed", st.current, e.what());
        throw StageError(st.current, e.what(), err ? err->kind() : "error");
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& c, int threads) {
    return run_stages(c, [&](RunWriter& writer, StageTracker& st, Report& report, std::vector<json>& log) {
        const Prepared p = prepare(c, threads, st, report, log);

        MapperSettings settings = c.mapper;
        settings.self_learn.threads = threads;
        const Alignment aligned = st.run("align", [&] { return align_spaces(p.src, p.tgt, p.seed, settings); });
        for (const auto& r : aligned.space.provenance()) log.push_back(r);
        const auto& diag = aligned.model.diagnostics;
        report.md << "\n## Alignment\n\n- method: " << to_string(c.mapper.method) << "\n- iterations: "
                  << diag.iterations << "\n- dictionary size: " << diag.dictionary_size
                  << "\n- mean dictionary cosine: " << (diag.objective.empty() ? "n/a" : fixed(diag.objective.back(), 6))
                  << "\n- re-weighting: "
                  << (c.mapper.reweight ? fixed(*c.mapper.reweight, 2) : std::string("off")) << '\n';
        report.row("align", "model", "iterations", std::to_string(diag.iterations));
        report.row("align", "model", "dictionary_size", std::to_string(diag.dictionary_size));
        if (!diag.objective.empty()) report.row("align", "model", "objective", fixed(diag.objective.back(), 6));
        writer.write_with("model.txt", "align", [&](std::ostream& o) { write_model(o, aligned.model); });
        writer.write_with("dictionary.tsv", "dictionary",
                          [&](std::ostream& o) { write_dictionary(o, p.seed, p.src.vocab(), p.tgt.vocab()); });
        if (c.mapper.method == MapMethod::SelfLearning)
            writer.write_with("induced_dictionary.tsv", "align",
                              [&](std::ostream& o) { write_dictionary(o, aligned.induced, p.src.vocab(), p.tgt.vocab()); });

        const auto anchor = c.refine_with_seed ? filter_by_class(p.seed, classes_of(c.refine_classes))
                                               : filter_by_class(p.identical, classes_of(c.refine_classes));
        const CrossLingualSpace refined = st.run("refine", [&] {
            if (c.refine != RefineMode::None && anchor.empty())
                throw PreconditionError("the refinement dictionary is empty");
            return refine_space(aligned.space, anchor, c.refine, c.frequencies);
        });
        if (c.refine != RefineMode::None) log.push_back(refined.provenance().back());
        report.md << "\n## Refinement\n\n- mode: " << to_string(c.refine) << "\n- pairs: "
                  << (c.refine == RefineMode::None ? 0 : anchor.size()) << '\n';
        writer.write_with("src.aligned.vec", "refine", [&](std::ostream& o) { write_embeddings(o, refined.src()); });
        writer.write_with("tgt.aligned.vec", "refine", [&](std::ostream& o) { write_embeddings(o, refined.tgt()); });

        st.run("evaluate", [&] {
            std::vector<std::pair<std::string, const CrossLingualSpace*>> systems{{"base", &aligned.space}};
            if (c.refine != RefineMode::None) systems.emplace_back(std::string(to_string(c.refine)), &refined);
            translation_section(c, threads, systems, anchor, report);
            sentiment_section(c, systems, report);
            if (c.ablation) {
                const auto table = ablation_of(c, p, threads);
                report.md << "\n## Ablation\n\n";
                write_ablation_markdown(report.md, table);
                writer.write_with("ablation.tsv", "evaluate", [&](std::ostream& o) { write_ablation_tsv(o, table); });
            }
            return 0;
        });
    });
}

PipelineResult run_ablation_pipeline(const PipelineConfig& c, int threads) {
    return run_stages(c, [&](RunWriter& writer, StageTracker& st, Report& report, std::vector<json>& log) {
        const Prepared p = prepare(c, threads, st, report, log);
        st.run("evaluate", [&] {
            const auto table = ablation_of(c, p, threads);
            report.md << "\n## Ablation\n\n";
            write_ablation_markdown(report.md, table);
            writer.write_with("ablation.md", "evaluate", [&](std::ostream& o) { write_ablation_markdown(o, table); });
            writer.write_with("ablation.tsv", "evaluate", [&](std::ostream& o) { write_ablation_tsv(o, table); });
            log.push_back({{"stage", "evaluate"}, {"ablation_cells", table.cells.size()}});
            return 0;
        });
    });
}

std::string corpus_stats_markdown(const std::vector<std::string>& paths, const TokenizerConfig& tokenizer, int threads) {
    std::ostringstream md;
    md << "| Corpus | Tweets | Tokens | Unique | Duplicates removed |\n| :--- | ---: | ---: | ---: | ---: |\n";
    for (const auto& path : paths) {
        const auto counted = count_corpus_file(path, tokenizer, threads);
        md << "| " << fs::path(path).filename().string() << " | " << counted.counter.tweets() << " | "
           << counted.counter.tokens() << " | " << counted.counter.counts().size() << " | "
           << counted.duplicates_removed << " |\n";
    }
    return md.str();
}

}  // namespace xling
