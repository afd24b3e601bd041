// Acceptance suite: one PASS/FAIL line per criterion, detail lines indented.
#include "oracles.hpp"
#include "xling/experiment.hpp"
#include "xling/parallel.hpp"
#include "xling/pipeline.hpp"
#include "xling/synthetic.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace xling;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;
    void note(const std::string& s) { details.push_back(s); }
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            details.push_back("violated: " + what);
        }
    }
};

// Every translation report produced anywhere in the run, for the monotonicity check.
std::vector<TranslationReport> g_reports;

TranslationReport evaluate(const CrossLingualSpace& space, const TestDictionary& test) {
    TranslationOptions opt;
    opt.threads = default_thread_count();
    auto r = precision_at_k(space, test, opt);
    g_reports.push_back(r);
    return r;
}

double p1(const TranslationReport& r) { return r.p_at.at(1).value_or(-1); }

BilingualDictionary identity_pairs(std::size_t n) {
    BilingualDictionary d;
    for (std::size_t i = 0; i < n; ++i) d.add({i, i, TokenClass::Word, 1, 1});
    return d;
}

Outcome orthogonality() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    const Index dims[] = {2, 10, 50, 100};
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index d = dims[trial % 4];
        const auto n = static_cast<Index>(std::uniform_int_distribution<int>(50, 5000)(rng));
        const auto tokens = oracle::numbered("t", static_cast<std::size_t>(n));
        const auto src = oracle::space_of(tokens, oracle::gaussian_unit(n, d, rng), true);
        const auto tgt = oracle::space_of(tokens, oracle::gaussian_unit(n, d, rng), true);
        const auto m = solve_procrustes(src, tgt, identity_pairs(static_cast<std::size_t>(n)));
        const Square gram = m.w.transpose() * m.w - Square::Identity(d, d);
        worst = std::max(worst, gram.cwiseAbs().maxCoeff());
    }
    const double secs = seconds_since(t0);
    o.note("max |W^T W - I| = " + fmt("%.3g", worst) + " over 100 instances in " + fmt("%.1f", secs) + " s");
    o.require(worst < 1e-6, "orthogonality error < 1e-6");
    o.require(secs < 30, "runtime < 30 s");
    return o;
}

Outcome procrustes_oracle() {
    Outcome o;
    std::mt19937_64 rng(202);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
    double worst_gap = -INFINITY;
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 40;
        const Matrix x = oracle::gaussian_unit(n, 2, rng);
        const double t = angle(rng);
        Eigen::Matrix2d w;
        if (trial % 2 == 0)
            w << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
        else
            w << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
        Matrix y = x * w;
        for (Index r = 0; r < n; ++r)
            for (Index c = 0; c < 2; ++c) y(r, c) += 0.2 * g(rng);
        y = unit_rows(y);
        const auto tokens = oracle::numbered("t", static_cast<std::size_t>(n));
        const auto m = solve_procrustes(oracle::space_of(tokens, x, true), oracle::space_of(tokens, y, true),
                                        identity_pairs(static_cast<std::size_t>(n)));
        const double solved = oracle::frobenius_error(x, y, m.w);
        const double grid = oracle::grid_best_error(x, y, 0.01);
        worst_gap = std::max(worst_gap, solved - grid);
    }
    o.note("max (solve - best grid) Frobenius error = " + fmt("%.3g", worst_gap) + " over 20 instances");
    o.require(worst_gap <= 1e-8, "solve error <= grid minimum + 1e-8");
    return o;
}

Outcome synthetic_recovery() {
    Outcome o;
    {
        RotationBenchmarkConfig cfg;
        cfg.noise = 0.0;
        cfg.seed = 303;
        const auto bench = make_rotation_benchmark(cfg);
        const auto seed = build_identical_dictionary(bench.src.vocab(), bench.tgt.vocab());
        const auto m = solve_procrustes(bench.src, bench.tgt, seed);
        const auto r = evaluate(CrossLingualSpace(apply_mapping(m, bench.src), bench.tgt), bench.heldout);
        o.note("noise 0, " + std::to_string(seed.size()) + " identical seeds, one-shot: P@1 = " + fmt("%.1f", p1(r)) +
               " on " + std::to_string(r.covered) + " held-out pairs");
        o.require(seed.size() == 500 && r.covered == 200, "500 seeds and 200 held-out pairs");
        o.require(p1(r) >= 99.0, "one-shot P@1 >= 99");
    }
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto t0 = Clock::now();
        RotationBenchmarkConfig cfg;
        cfg.noise = 0.05;
        cfg.seed = 310 + s;
        const auto bench = make_rotation_benchmark(cfg);
        const auto all = build_identical_dictionary(bench.src.vocab(), bench.tgt.vocab());
        BilingualDictionary seed;
        for (std::size_t i = 0; i < 25; ++i) seed.add(all[i]);
        SelfLearnConfig sc;
        sc.threads = default_thread_count();
        const auto m = self_learn(bench.src, bench.tgt, seed, sc);
        const auto r = evaluate(CrossLingualSpace(apply_mapping(m, bench.src), bench.tgt), bench.heldout);
        const double secs = seconds_since(t0);
        o.note("noise 0.05, trial " + std::to_string(s) + ", 25 seeds, self-learning: P@1 = " + fmt("%.1f", p1(r)) +
               " after " + std::to_string(m.diagnostics.iterations) + " iterations, " + fmt("%.1f", secs) + " s");
        o.require(p1(r) >= 90.0, "self-learning P@1 >= 90 (trial " + std::to_string(s) + ")");
        o.require(secs < 60, "trial < 60 s");
    }
    return o;
}

Outcome anchoring() {
    Outcome o;
    RotationBenchmarkConfig cfg;
    cfg.n = 3000;
    cfg.noise = 0.05;
    cfg.seed = 404;
    const auto bench = make_rotation_benchmark(cfg);
    const auto dict = build_identical_dictionary(bench.src.vocab(), bench.tgt.vocab());
    const auto model = solve_procrustes(bench.src, bench.tgt, dict);
    const CrossLingualSpace base(apply_mapping(model, bench.src), bench.tgt);
    TestDictionary self;
    for (const auto& p : dict) self.add(bench.src.vocab().token(p.src), bench.tgt.vocab().token(p.tgt));
    for (const auto& [name, refined] : {std::pair{"plain", average_plain(base, dict)},
                                        std::pair{"weighted", average_weighted(base, dict)}}) {
        std::size_t unequal = 0;
        for (const auto& p : dict)
            if (!(refined.src().row(Index(p.src)) == refined.tgt().row(Index(p.tgt)))) ++unequal;
        const auto r = evaluate(refined, self);
        o.note(std::string(name) + ": " + std::to_string(dict.size()) + " anchored pairs, " + std::to_string(unequal) +
               " not bit-equal, P@1 on (w, {w}) = " + fmt("%.1f", p1(r)));
        o.require(unequal == 0, std::string(name) + " pairs bit-equal");
        o.require(p1(r) == 100.0 && r.covered == dict.size(), std::string(name) + " anchored entries correct at k=1");
    }
    return o;
}

Outcome weighted_formula() {
    Outcome o;
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> freq(1, 1e4);
    const std::size_t n = 1000;
    const Index d = 20;
    const auto tokens = oracle::numbered("w", n);
    const Matrix x = oracle::gaussian_unit(Index(n), d, rng);
    const Matrix y = oracle::gaussian_unit(Index(n), d, rng);
    const CrossLingualSpace space(oracle::space_of(tokens, x), oracle::space_of(tokens, y));
    BilingualDictionary weighted;
    BilingualDictionary equal;
    for (std::size_t i = 0; i < n; ++i) {
        weighted.add({i, i, TokenClass::Word, freq(rng), freq(rng)});
        const double f = freq(rng);
        equal.add({i, i, TokenClass::Word, f, f});
    }
    const auto out = average_weighted(space, weighted);
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f1 = weighted[i].f_src;
        const double f2 = weighted[i].f_tgt;
        for (Index c = 0; c < d; ++c) {
            const double mu = (f1 * x(Index(i), c) + f2 * y(Index(i), c)) / (f1 + f2);
            worst = std::max({worst, std::abs(out.src().matrix()(Index(i), c) - mu),
                              std::abs(out.tgt().matrix()(Index(i), c) - mu)});
        }
    }
    const auto eq = average_weighted(space, equal);
    const auto plain = average_plain(space, equal);
    const double gap = std::max((eq.src().matrix() - plain.src().matrix()).cwiseAbs().maxCoeff(),
                                (eq.tgt().matrix() - plain.tgt().matrix()).cwiseAbs().maxCoeff());
    o.note("max deviation from direct evaluation over 1000 pairs = " + fmt("%.3g", worst));
    o.note("max deviation from the plain average at f1 = f2 = " + fmt("%.3g", gap));
    o.require(worst <= 1e-12, "weighted average within 1e-12 of the formula");
    o.require(gap <= 1e-12, "equal frequencies reduce to the plain average");
    return o;
}

Outcome qualitative_trends() {
    Outcome o;
    AblationConfig ac;
    ac.mapper.self_learn.threads = default_thread_count();
    ac.translation.threads = default_thread_count();
    for (std::uint64_t s = 0; s < 5; ++s) {
        RotationBenchmarkConfig cfg;
        cfg.noise = 0.05;
        cfg.seed = 600 + s;
        const auto bench = make_rotation_benchmark(cfg);
        const auto dict = build_identical_dictionary(bench.src.vocab(), bench.tgt.vocab());
        const auto cov = coverage_stats(bench.mixed, bench.src.vocab(), bench.tgt.vocab());
        o.require(cov.identical_rate() >= 0.10, "test set has >= 10% identical pairs");
        const auto table = run_ablation(bench.src, bench.tgt, dict, &bench.mixed, nullptr, ac);
        std::string line = "seed " + std::to_string(s) + " (" + fmt("%.1f", 100 * cov.identical_rate()) +
                           "% identical):";
        const auto* all_base = table.find(ClassGroup::All, "base");
        const auto* all_weighted = table.find(ClassGroup::All, "weighted");
        o.require(!all_base->failure && !all_weighted->failure, "All cells evaluated");
        if (all_base->failure || all_weighted->failure) continue;
        const double all_p1 = p1(*all_base->translation);
        for (const auto& cell : table.cells) {
            if (cell.failure) {
                line += " " + std::string(to_string(cell.group)) + "/" + cell.system + "=" + *cell.failure;
                continue;
            }
            g_reports.push_back(*cell.translation);
            line += " " + std::string(to_string(cell.group)) + "/" + cell.system + "=" +
                    fmt("%.1f", p1(*cell.translation));
        }
        o.note(line);
        for (const auto g : all_class_groups()) {
            const auto* b = table.find(g, "base");
            const auto* w = table.find(g, "weighted");
            if (b->failure || w->failure) continue;
            o.require(p1(*w->translation) >= p1(*b->translation),
                      "weighted >= base for " + std::string(to_string(g)) + " (seed " + std::to_string(s) + ")");
            if (g != ClassGroup::All)
                o.require(all_p1 >= p1(*b->translation) - 1.0,
                          "All >= " + std::string(to_string(g)) + " - 1 (seed " + std::to_string(s) + ")");
        }
    }
    return o;
}

Outcome sentiment_transfer() {
    Outcome o;
    double sum_none = 0;
    double sum_weighted = 0;
    const int seeds = 5;
    for (int s = 0; s < seeds; ++s) {
        SentimentBenchmarkConfig cfg;
        cfg.seed = 700 + static_cast<std::uint64_t>(s);
        const auto bench = make_sentiment_benchmark(cfg);
        o.require(bench.train.examples.size() == 500 && bench.test.examples.size() == 500, "500 + 500 examples");
        const auto all = build_identical_dictionary(bench.src.vocab(), bench.tgt.vocab());
        const auto numerals = filter_by_class(all, classes_of(ClassGroup::Numerals));
        const auto emoji = filter_by_class(all, classes_of(ClassGroup::Emoji));
        MapperSettings ms;
        ms.method = MapMethod::Procrustes;
        const auto aligned = align_spaces(bench.src, bench.tgt, numerals, ms);
        const auto weighted = refine_space(aligned.space, emoji, RefineMode::Weighted);
        const auto none = eval_probe(train_probe(bench.train, aligned.space.src()), bench.test, aligned.space.tgt());
        const auto avg = eval_probe(train_probe(bench.train, weighted.src()), bench.test, weighted.tgt());
        const auto maj = eval_majority(bench.train, bench.test);
        o.note("seed " + std::to_string(s) + ": no refinement " + fmt("%.1f", none.accuracy) + ", weighted " +
               fmt("%.1f", avg.accuracy) + ", majority " + fmt("%.1f", maj.accuracy) + " (" +
               std::to_string(numerals.size()) + " numeral map pairs, " + std::to_string(emoji.size()) +
               " emoji anchors)");
        o.require(avg.accuracy >= 90.0, "weighted accuracy >= 90 (seed " + std::to_string(s) + ")");
        o.require(none.accuracy <= 60.0, "unrefined accuracy <= 60 (seed " + std::to_string(s) + ")");
        sum_none += none.accuracy;
        sum_weighted += avg.accuracy;
    }
    o.note("mean over seeds: no refinement " + fmt("%.1f", sum_none / seeds) + ", weighted " +
           fmt("%.1f", sum_weighted / seeds));
    return o;
}

Outcome probe_contract() {
    Outcome o;
    std::mt19937_64 rng(808);
    const Matrix f = oracle::gaussian_unit(5, 10, rng);
    const std::vector<int> y{2, 0, 1, 2, 1};
    Square w = 0.5 * oracle::gaussian_unit(10, 3, rng);
    Vector b = Vector::Constant(3, 0.1);
    const double l2 = 1e-4;
    const auto obj = probe_objective(w, b, f, y, l2);
    const double h = 1e-5;
    double worst = 0;
    auto rel = [](double a, double c) { return std::abs(a - c) / std::max(1e-10, std::max(std::abs(a), std::abs(c))); };
    for (Index i = 0; i < w.size(); ++i) {
        Square wp = w;
        Square wm = w;
        wp.data()[i] += h;
        wm.data()[i] -= h;
        const double fd = (probe_objective(wp, b, f, y, l2).loss - probe_objective(wm, b, f, y, l2).loss) / (2 * h);
        worst = std::max(worst, rel(fd, obj.grad_weights.data()[i]));
    }
    for (Index i = 0; i < b.size(); ++i) {
        Vector bp = b;
        Vector bm = b;
        bp(i) += h;
        bm(i) -= h;
        const double fd = (probe_objective(w, bp, f, y, l2).loss - probe_objective(w, bm, f, y, l2).loss) / (2 * h);
        worst = std::max(worst, rel(fd, obj.grad_bias(i)));
    }
    o.note("max relative gradient error = " + fmt("%.3g", worst));
    o.require(worst < 1e-5, "relative error < 1e-5");

    SentimentBenchmarkConfig cfg;
    cfg.seed = 809;
    const auto bench = make_sentiment_benchmark(cfg);
    const Matrix src_before = bench.src.matrix();
    const Matrix tgt_before = bench.tgt.matrix();
    const auto model = train_probe(bench.train, bench.src);
    eval_probe(model, bench.test, bench.tgt);
    const bool frozen = bench.src.matrix() == src_before && bench.tgt.matrix() == tgt_before;
    o.note(std::string("embedding matrices ") + (frozen ? "bit-identical" : "changed") + " after training");
    o.require(frozen, "embeddings unchanged by training");
    return o;
}

Outcome metric_sanity() {
    Outcome o;
    std::size_t bad = 0;
    for (const auto& r : g_reports) {
        const auto a = r.p_at.at(1);
        const auto b = r.p_at.at(5);
        const auto c = r.p_at.at(10);
        if (a && b && c && !(*a <= *b && *b <= *c && *c <= 100.0 && *a >= 0.0)) ++bad;
    }
    o.note(std::to_string(g_reports.size()) + " reports checked, " + std::to_string(bad) + " non-monotone");
    o.require(!g_reports.empty() && bad == 0, "P@1 <= P@5 <= P@10 on every report");

    SentimentDataset train;
    SentimentDataset test;
    train.scheme = test.scheme = Scheme::Ternary;
    auto add = [](SentimentDataset& d, Polarity p, int n) {
        for (int i = 0; i < n; ++i) d.examples.push_back({{"tok"}, p});
    };
    add(train, Polarity::Positive, 3094);
    add(train, Polarity::Neutral, 2043);
    add(train, Polarity::Negative, 863);
    add(test, Polarity::Positive, 642);
    add(test, Polarity::Neutral, 216);
    add(test, Polarity::Negative, 768);
    const auto r = eval_majority(train, test);
    o.note("majority baseline on InterTASS proportions: accuracy " + fmt("%.2f", r.accuracy) + ", macro-F1 " +
           fmt("%.2f", r.macro_f1));
    o.require(std::abs(r.accuracy - 39.5) <= 0.5, "majority accuracy 39.5 +- 0.5");
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto dir = fs::temp_directory_path() / "xling-acceptance-determinism";
    fs::remove_all(dir);
    RotationBenchmarkConfig cfg;
    cfg.n = 2000;
    cfg.noise = 0.05;
    cfg.identical = 300;
    cfg.seed = 1001;
    write_rotation_fixture(dir.string(), make_rotation_benchmark(cfg));
    const nlohmann::json user = {{"seed", 7},
                                 {"src", {{"embeddings", "src.vec"}, {"vocab", "src.vocab.tsv"}}},
                                 {"tgt", {{"embeddings", "tgt.vec"}, {"vocab", "tgt.vocab.tsv"}}},
                                 {"refine", {{"mode", "weighted"}}},
                                 {"eval", {{"translation", {"test.txt", "mixed.txt"}}, {"ablation", true}}},
                                 {"output_dir", "runs"}};
    const auto config = parse_pipeline_config(user, dir);
    const auto a = run_pipeline(config, 1);
    const auto b = run_pipeline(config, 4);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    for (const auto* f : {"report.md", "report.tsv", "ablation.tsv", "model.txt", "src.aligned.vec", "tgt.aligned.vec"}) {
        const bool same = slurp(a.run_dir / f) == slurp(b.run_dir / f) && !slurp(a.run_dir / f).empty();
        o.note(std::string(f) + (same ? " identical" : " DIFFERS") + " (1 vs 4 threads)");
        o.require(same, std::string(f) + " byte-identical");
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 orthogonality of every Procrustes solve", orthogonality},
        {"2 Procrustes optimal against a 0.01 degree grid", procrustes_oracle},
        {"3 synthetic rotation recovery", synthetic_recovery},
        {"4 anchored pairs bit-equal and correct at k=1", anchoring},
        {"5 weighted average exactness", weighted_formula},
        {"6 weighted >= base and All >= single classes", qualitative_trends},
        {"7 sentiment transfer through emoji anchors", sentiment_transfer},
        {"8 probe gradient and frozen embeddings", probe_contract},
        {"9 metric sanity and majority baseline", metric_sanity},
        {"10 pipeline reports deterministic across thread counts", determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome out;
        const auto t0 = Clock::now();
        try {
            out = fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.note(std::string("exception: ") + e.what());
        }
        std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion " << name << "  [" << fmt("%.1f", seconds_since(t0))
                  << " s]\n";
        for (const auto& d : out.details) std::cout << "      " << d << '\n';
        std::cout.flush();
        if (!out.pass) ++failed;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
