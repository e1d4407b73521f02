#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "cmlevy/experiments.hpp"

namespace fs = std::filesystem;
using cmlevy::json;

namespace {

const fs::path work = fs::path(CMLEVY_TEST_WORKDIR) / "cli";

int shell(const std::string& cmd) {
    const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path fresh(const std::string& name) {
    const fs::path d = work / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_config(const json& config, const fs::path& dir, const std::string& extra = "") {
    const fs::path cfg = dir / "config.json";
    cmlevy::write_text(cfg.string(), config.dump());
    return shell(std::string(CMLEVY_CLI) + " run --config " + cfg.string() + " --out-dir " + (dir / "out").string() +
                 " " + extra);
}

std::vector<fs::path> outputs(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> v;
    for (const auto& e : fs::directory_iterator(dir / "out"))
        if (e.path().extension() == ext && e.path().filename() != "report.csv")
            v.push_back(e.path());
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string l; std::getline(ss, l);)
        out.push_back(l);
    return out;
}

json sample_path_config() {
    return {{"experiment", "sample-path"},
            {"seed", 12},
            {"model", {{"kind", "stable"}, {"alpha", 1.5}, {"rho", 0.5}}},
            {"numeric", {{"n", 17}}}};
}

} // namespace

TEST(Cli, SamplePathWritesNRows) {
    const auto dir = fresh("sample_path");
    ASSERT_EQ(run_config(sample_path_config(), dir), 0);
    const auto csv = outputs(dir, ".csv");
    ASSERT_EQ(csv.size(), 1u);
    const auto rows = lines(cmlevy::read_text(csv[0].string()));
    ASSERT_EQ(rows.size(), 18u);
    EXPECT_EQ(rows[0], "t,x,config_hash,seed");
    const std::string hash = cmlevy::config_hash(sample_path_config());
    EXPECT_EQ(csv[0].filename().string(), "sample-path-" + hash + ".csv");
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_NE(rows[i].find("," + hash + ",12"), std::string::npos);
    EXPECT_EQ(rows[1].substr(0, 4), "0,0,");
    const json doc = json::parse(cmlevy::read_text(outputs(dir, ".json")[0].string()));
    EXPECT_EQ(doc["config_hash"], hash);
    EXPECT_EQ(doc["seed"], 12);
}

TEST(Cli, RerunIsByteIdentical) {
    const auto a = fresh("rerun_a"), b = fresh("rerun_b");
    ASSERT_EQ(run_config(sample_path_config(), a), 0);
    ASSERT_EQ(run_config(sample_path_config(), b), 0);
    for (const std::string ext : {".csv", ".json"}) {
        const auto x = outputs(a, ext), y = outputs(b, ext);
        ASSERT_EQ(x.size(), 1u);
        ASSERT_EQ(y.size(), 1u);
        EXPECT_EQ(cmlevy::read_text(x[0].string()), cmlevy::read_text(y[0].string()));
    }
}

TEST(Cli, SeedOverrideChangesHashAndPath) {
    const auto a = fresh("seed_a"), b = fresh("seed_b");
    ASSERT_EQ(run_config(sample_path_config(), a), 0);
    ASSERT_EQ(run_config(sample_path_config(), b, "--seed-override 13"), 0);
    const auto x = outputs(a, ".csv"), y = outputs(b, ".csv");
    EXPECT_NE(x[0].filename(), y[0].filename());
    EXPECT_NE(cmlevy::read_text(x[0].string()), cmlevy::read_text(y[0].string()));
    const json doc = json::parse(cmlevy::read_text(outputs(b, ".json")[0].string()));
    EXPECT_EQ(doc["seed"], 13);
}

TEST(Cli, CauchyCriteriaTimeZero) {
    const auto dir = fresh("criteria_is");
    const json cfg = {{"experiment", "criteria-is"},
                      {"seed", 1},
                      {"model", {{"kind", "cauchy"}}},
                      {"function", {{"kind", "power"}, {"p", 0.5}}},
                      {"require_determinate", true}};
    ASSERT_EQ(run_config(cfg, dir), 0);
    const json doc = json::parse(cmlevy::read_text(outputs(dir, ".json")[0].string()));
    EXPECT_EQ(doc["summary"]["large"], "converging");
    EXPECT_EQ(doc["results"]["large"]["verdict"], "converging");
}

TEST(Cli, SchemaViolationsExit64) {
    auto bad = sample_path_config();
    bad["model"]["colour"] = "red";
    EXPECT_EQ(run_config(bad, fresh("bad_field")), 64);
    bad = sample_path_config();
    bad["numeric"]["bogus"] = 1;
    EXPECT_EQ(run_config(bad, fresh("bad_numeric")), 64);
    bad = sample_path_config();
    bad["experiment"] = "nonsense";
    EXPECT_EQ(run_config(bad, fresh("bad_kind")), 64);
    bad = sample_path_config();
    bad.erase("model");
    EXPECT_EQ(run_config(bad, fresh("no_model")), 64);
    bad = sample_path_config();
    bad["model"]["alpha"] = 3.0;
    EXPECT_EQ(run_config(bad, fresh("bad_alpha")), 64);
    bad = sample_path_config();
    bad["numeric"]["n"] = "many";
    EXPECT_EQ(run_config(bad, fresh("bad_type")), 64);

    const auto dir = fresh("bad_json");
    cmlevy::write_text((dir / "config.json").string(), "{not json");
    EXPECT_EQ(shell(std::string(CMLEVY_CLI) + " run --config " + (dir / "config.json").string()), 64);
    EXPECT_EQ(shell(std::string(CMLEVY_CLI) + " frobnicate"), 64);
    EXPECT_EQ(shell(std::string(CMLEVY_CLI) + " run"), 64);
}

TEST(Cli, ComputationErrorsExit1) {
    const json cfg = {{"experiment", "criteria-is"},
                      {"seed", 1},
                      {"model", {{"kind", "stable"}, {"alpha", 0.7}}},
                      {"function", {{"kind", "power"}, {"p", 0.5}}}};
    EXPECT_EQ(run_config(cfg, fresh("error")), 1);
}

TEST(Cli, IndeterminateWithRequirementExits2) {
    const json cfg = {{"experiment", "mc-fluctuation"},
                      {"seed", 3},
                      {"model", {{"kind", "cauchy"}}},
                      {"function", {{"kind", "inverse_log"}}},
                      {"numeric", {{"sampler", "cauchy-exact"}, {"n_paths", 200}, {"n_boot", 20}}},
                      {"require_determinate", true}};
    const auto dir = fresh("indeterminate");
    EXPECT_EQ(run_config(cfg, dir), 2);
    const json doc = json::parse(cmlevy::read_text(outputs(dir, ".json")[0].string()));
    EXPECT_EQ(doc["summary"]["trend"], "indeterminate");
    auto relaxed = cfg;
    relaxed["require_determinate"] = false;
    EXPECT_EQ(run_config(relaxed, fresh("indeterminate_ok")), 0);
}

TEST(Report, EmptyDirectory) {
    const auto dir = fresh("report_empty");
    EXPECT_TRUE(cmlevy::report_directory(dir).empty());
    EXPECT_EQ(shell(std::string(CMLEVY_CLI) + " report " + dir.string()), 0);
    EXPECT_EQ(cmlevy::read_text((dir / "report.csv").string()), "file,experiment,config_hash,status,summary\n");
}

TEST(Report, CorruptAndTamperedFilesAreListed) {
    const auto dir = fresh("report_mixed");
    ASSERT_EQ(run_config(sample_path_config(), dir), 0);
    auto other = sample_path_config();
    other["seed"] = 99;
    ASSERT_EQ(run_config(other, dir), 0);
    const auto out = dir / "out";
    cmlevy::write_text((out / "broken.json").string(), "{\"experiment\": ");
    // tamper with one artifact's embedded config
    const auto first = outputs(dir, ".json");
    json doc = json::parse(cmlevy::read_text(first.back().string()));
    doc["config"]["numeric"]["n"] = 18;
    cmlevy::write_text(first.back().string(), doc.dump(2));

    const auto rows = cmlevy::report_directory(out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].file, "broken.json");
    EXPECT_EQ(rows[0].status.rfind("corrupt", 0), 0u);
    EXPECT_EQ(rows[1].status, "ok");
    EXPECT_EQ(rows[1].experiment, "sample-path");
    EXPECT_EQ(rows[2].status, "hash mismatch");
    EXPECT_EQ(shell(std::string(CMLEVY_CLI) + " report " + out.string() + " --csv " + (dir / "r.csv").string()), 0);
    EXPECT_EQ(lines(cmlevy::read_text((dir / "r.csv").string())).size(), 4u);
}

TEST(Report, CompanionCsvHashIsChecked) {
    const auto dir = fresh("report_csv");
    ASSERT_EQ(run_config(sample_path_config(), dir), 0);
    const auto csv = outputs(dir, ".csv")[0];
    std::string text = cmlevy::read_text(csv.string());
    const std::string hash = cmlevy::config_hash(sample_path_config());
    text.replace(text.find(hash), hash.size(), std::string(hash.size(), '0'));
    cmlevy::write_text(csv.string(), text);
    EXPECT_EQ(cmlevy::report_directory(dir / "out")[0].status, "csv hash mismatch");
    fs::remove(csv);
    EXPECT_EQ(cmlevy::report_directory(dir / "out")[0].status, "csv missing");
}

TEST(Config, HashIsCanonical) {
    const json a = json::parse(R"({"b": 1, "a": {"y": 2, "x": 3}})");
    const json b = json::parse(R"({"a": {"x": 3, "y": 2}, "b": 1})");
    EXPECT_EQ(cmlevy::config_hash(a), cmlevy::config_hash(b));
    EXPECT_EQ(cmlevy::config_hash(a).size(), 16u);
    // SHA-256 of "{}" starts with 44136fa355b3678a
    EXPECT_EQ(cmlevy::config_hash(json::object()), "44136fa355b3678a");
}

TEST(Config, ModelAndFunctionBlocks) {
    json m = {{"kind", "stable_plus_perturbation"},
              {"base", {{"alpha", 0.6}, {"rho", 0.4}}},
              {"perturbation", {{"rate", 2.0}, {"jumps", {{"kind", "normal"}, {"a", 0.0}, {"b", 0.5}}}}}};
    const auto model = cmlevy::model_from(cmlevy::ConfigBlock(m, "model"));
    EXPECT_EQ(model.kind_name(), "stable_plus_perturbation");
    m["perturbation"]["jumps"]["c"] = 1;
    EXPECT_THROW(cmlevy::model_from(cmlevy::ConfigBlock(m, "model")), cmlevy::ConfigError);

    json f = {{"kind", "custom"}, {"t", {0.5, 1.0}}, {"y", {0.2, 1.0}}};
    EXPECT_EQ(cmlevy::function_from(cmlevy::ConfigBlock(f, "function")).kind(), cmlevy::TestFunction::Kind::custom);
    f["y"] = {1.0, 0.2};
    EXPECT_THROW(cmlevy::function_from(cmlevy::ConfigBlock(f, "function")), cmlevy::ConfigError);
}

TEST(Csv, DialectAndRowWidth) {
    cmlevy::CsvTable t({"a", "b"});
    t.row() << 0.1 << 3;
    EXPECT_EQ(t.str(), "a,b\n0.10000000000000001,3\n");
    t.row() << 1.0;
    EXPECT_THROW(t.str(), cmlevy::ArgumentError);
}
