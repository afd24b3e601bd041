#include "xling/pipeline.hpp"
#include "xling/synthetic.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace xling;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("xling-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path rotation_fixture(const std::string& name) {
    const auto dir = scratch(name);
    RotationBenchmarkConfig cfg;
    cfg.n = 600;
    cfg.d = 16;
    cfg.identical = 150;
    cfg.test_pairs = 80;
    cfg.noise = 0.05;
    write_rotation_fixture(dir.string(), make_rotation_benchmark(cfg));
    return dir;
}

json base_config() {
    return {{"src", {{"embeddings", "src.vec"}, {"vocab", "src.vocab.tsv"}}},
            {"tgt", {{"embeddings", "tgt.vec"}, {"vocab", "tgt.vocab.tsv"}}},
            {"eval", {{"translation", {"test.txt", "mixed.txt"}}}},
            {"output_dir", "runs"}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("config merging, overrides and validation") {
    const auto dir = rotation_fixture("config");
    auto user = base_config();
    apply_override(user, "mapper.method=procrustes");
    apply_override(user, "refine.mode=plain");
    apply_override(user, "mapper.max_iters=3");
    const auto c = parse_pipeline_config(user, dir);
    CHECK(c.mapper.method == MapMethod::Procrustes);
    CHECK(c.refine == RefineMode::Plain);
    CHECK(c.mapper.self_learn.max_iters == 3);
    CHECK(c.hash.size() == 16);
    CHECK(parse_pipeline_config(user, dir).hash == c.hash);

    auto typo = base_config();
    typo["mapper"]["methdo"] = "x";
    CHECK_THROWS_AS(parse_pipeline_config(typo, dir), ConfigError);
    auto missing = base_config();
    missing["src"]["embeddings"] = "nope.vec";
    CHECK_THROWS_AS(parse_pipeline_config(missing, dir), ConfigError);
    auto mode = base_config();
    mode["dictionary"]["mode"] = "file";
    CHECK_THROWS_AS(parse_pipeline_config(mode, dir), ConfigError);
    auto refine = base_config();
    refine["refine"]["mode"] = "sideways";
    CHECK_THROWS_AS(parse_pipeline_config(refine, dir), ConfigError);
    json bad;
    CHECK_THROWS_AS(apply_override(bad, "novalue"), ConfigError);
}

TEST_CASE("pipeline writes a complete run and repeats byte for byte") {
    const auto dir = rotation_fixture("repeat");
    const auto c = parse_pipeline_config(base_config(), dir);
    const auto a = run_pipeline(c, 1);
    const auto b = run_pipeline(c, 3);
    CHECK(a.run_dir != b.run_dir);
    CHECK(a.report_markdown == b.report_markdown);
    CHECK(a.report_tsv == b.report_tsv);
    for (const auto* f : {"report.md", "report.tsv", "model.txt", "src.aligned.vec", "tgt.aligned.vec",
                          "dictionary.tsv", "provenance.jsonl", "config.json", "manifest.json"}) {
        CHECK(fs::exists(a.run_dir / f));
        if (std::string(f) != "manifest.json") CHECK(slurp(a.run_dir / f) == slurp(b.run_dir / f));
    }
    CHECK(a.report_markdown.find("P@10") != std::string::npos);
    CHECK(a.report_markdown.find(c.hash) != std::string::npos);
    const auto manifest = json::parse(slurp(a.run_dir / "manifest.json"));
    CHECK(manifest["status"] == "complete");
    CHECK(manifest["config_hash"] == c.hash);
}

TEST_CASE("external seed dictionary logs its size") {
    const auto dir = rotation_fixture("seed");
    auto user = base_config();
    user["dictionary"] = {{"mode", "external-seed"}, {"k", 100}, {"path", "train.txt"}};
    user["mapper"]["max_iters"] = 2;
    const auto r = run_pipeline(parse_pipeline_config(user, dir));
    std::istringstream log(slurp(r.run_dir / "provenance.jsonl"));
    bool found = false;
    for (std::string line; std::getline(log, line);) {
        const auto j = json::parse(line);
        if (j.value("stage", "") == "dictionary") {
            CHECK(j["pairs"] == 100);
            CHECK(j["mode"] == "external-seed");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("stage failures name the stage and leave a partial manifest") {
    const auto dir = rotation_fixture("fail");
    auto user = base_config();
    user["dictionary"]["classes"] = "emoji";
    user["refine"]["classes"] = "emoji";
    user["mapper"]["method"] = "procrustes";
    {
        std::ofstream(dir / "tgt.vec") << "1 16\nonly 1 2 3\n";
    }
    const auto c = parse_pipeline_config(user, dir);
    try {
        run_pipeline(c);
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "load");
        CHECK(e.cause_kind() == std::string("parse"));
    }
    bool saw_failed = false;
    for (const auto& entry : fs::directory_iterator(dir / "runs")) {
        const auto m = json::parse(slurp(entry.path() / "manifest.json"));
        saw_failed = saw_failed || (m["status"] == "failed" && m["failed_stage"] == "load");
    }
    CHECK(saw_failed);
}

TEST_CASE("ablation pipeline emits the 4x2 grid") {
    const auto dir = rotation_fixture("ablation");
    auto user = base_config();
    user["mapper"]["method"] = "procrustes";
    const auto r = run_ablation_pipeline(parse_pipeline_config(user, dir));
    const auto tsv = slurp(r.run_dir / "ablation.tsv");
    std::istringstream lines(tsv);
    int rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == 9);
    CHECK(tsv.find("Acc") == std::string::npos);
}

TEST_CASE("corpus statistics table") {
    const auto dir = scratch("stats");
    { std::ofstream(dir / "a.txt") << "hola mundo\nhola mundo\nadios 🎉\n"; }
    { std::ofstream(dir / "empty.txt") << ""; }
    const auto md = corpus_stats_markdown({(dir / "a.txt").string(), (dir / "empty.txt").string()});
    CHECK(md.find("| a.txt | 2 | 4 | 4 | 1 |") != std::string::npos);
    CHECK(md.find("| empty.txt | 0 | 0 | 0 | 0 |") != std::string::npos);
}
