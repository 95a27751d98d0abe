#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bslab/experiment.hpp"

using namespace bslab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "bslab_test_experiment" / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string line; std::getline(ss, line);) out.push_back(line);
    return out;
}

const json kScalarA = {{"kind", "diagonal"}, {"spectrum", {0.0}}, {"weights", {1.0}}, {"signs", {1.0}}, {"interval", {-1.0, 2.0}}};

RunOutcome run(const json& cfg, const fs::path& out, const std::string& command = "") {
    RunOptions o;
    o.command = command.empty() ? cfg.value("command", std::string{}) : command;
    o.out_dir = out;
    return run_experiment(cfg, o);
}

}  // namespace

TEST_CASE("format_double round-trips with 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("validate on scalar-A: pass flag and no CSVs") {
    const auto out = scratch("validate");
    const auto o = run({{"command", "validate"}, {"model", kScalarA}}, out);
    REQUIRE(o.status == RunStatus::Ok);
    CHECK(o.manifest["result"]["pass"] == true);
    CHECK(o.manifest["files"].empty());
    int entries = 0;
    for (const auto& e : fs::directory_iterator(out)) {
        ++entries;
        CHECK(e.path().filename() == "manifest.json");
    }
    CHECK(entries == 1);
}

TEST_CASE("resonance-locate on scalar-A at z = i yields r = i") {
    const auto out = scratch("locate");
    const json cfg = {{"command", "resonance-locate"},
                      {"model", kScalarA},
                      {"params", {{"lambda", 0.0}, {"y", 1.0}, {"box", {-2, 2, -2, 2}}}}};
    const auto o = run(cfg, out);
    REQUIRE(o.status == RunStatus::Ok);
    const auto rows = lines(slurp(out / "resonances.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "schema_version,point,re_r,im_r,multiplicity,det_residual,riesz_frobenius");
    std::stringstream ss(rows[1]);
    std::vector<std::string> cells;
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 7);
    CHECK(cells[0] == "1");
    CHECK(std::abs(std::stod(cells[2])) < 1e-10);
    CHECK(std::abs(std::stod(cells[3]) - 1.0) < 1e-10);
    CHECK(cells[4] == "1");
    CHECK(std::stod(cells[5]) < 1e-10);
}

TEST_CASE("stability-scan on schrodinger1d N=200 has one row per r") {
    const auto out = scratch("scan");
    const json cfg = {{"command", "stability-scan"},
                      {"model", {{"kind", "schrodinger1d"}, {"sites", 200}, {"alpha", 0.5}, {"disorder", 1.0}, {"seed", 3}}},
                      {"params", {{"r_grid", {{"start", 0.0}, {"stop", 1.0}, {"step", 0.1}}}, {"k_set", {-0.5, 0.5}}}}};
    const auto o = run(cfg, out);
    REQUIRE(o.status == RunStatus::Ok);
    const auto rows = lines(slurp(out / "stability_scan.csv"));
    CHECK(rows.size() == 12);
    CHECK(rows[0] == "schema_version,r,hs_norm,eig_count");
    CHECK(o.manifest["files"][0]["rows"] == 11);
}

TEST_CASE("every file in the output directory is listed in the manifest") {
    const auto out = scratch("complete");
    const json cfg = {{"command", "lap-probe"},
                      {"model", kScalarA},
                      {"params", {{"lambda_grid", {0.5, 1.0}}, {"y_schedule", {{"start", 0.1}, {"ratio", 0.5}, {"count", 6}}}}}};
    const auto o = run(cfg, out);
    REQUIRE(o.status == RunStatus::Ok);
    std::set<std::string> listed{"manifest.json"};
    for (const auto& f : o.manifest["files"]) listed.insert(f["name"].get<std::string>());
    std::set<std::string> present;
    for (const auto& e : fs::directory_iterator(out)) present.insert(e.path().filename().string());
    CHECK(listed == present);
    CHECK(o.manifest["config"]["params"]["y_schedule"].size() == 6);
}

TEST_CASE("rerun into the same directory removes stale files") {
    const auto out = scratch("stale");
    const json locate = {{"command", "resonance-locate"}, {"model", kScalarA}, {"params", {{"lambda", 0.0}, {"y", 1.0}}}};
    REQUIRE(run(locate, out).status == RunStatus::Ok);
    CHECK(fs::exists(out / "riesz.csv"));
    REQUIRE(run({{"command", "validate"}, {"model", kScalarA}}, out).status == RunStatus::Ok);
    CHECK_FALSE(fs::exists(out / "riesz.csv"));
    CHECK_FALSE(fs::exists(out / "resonances.csv"));
}

TEST_CASE("identical configs give byte-identical CSVs") {
    const json cfg = {{"command", "stone-check"},
                      {"model", kScalarA},
                      {"params", {{"r", 0.0}, {"phi", {{"tent", {{"a", 0.5}, {"b", 1.5}}}}}}}};
    const auto a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run(cfg, a).status == RunStatus::Ok);
    REQUIRE(run(cfg, b).status == RunStatus::Ok);
    for (const auto& f : {"stone_errors.csv", "stone_values.csv"}) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("manifest keys are sorted and the echo is complete") {
    const auto out = scratch("manifest");
    const auto o = run({{"command", "validate"}, {"model", kScalarA}, {"seed", 11}}, out);
    const std::string text = slurp(out / "manifest.json");
    const json m = json::parse(text);
    std::string prev;
    for (auto it = m.begin(); it != m.end(); ++it) {
        CHECK(prev < it.key());
        prev = it.key();
    }
    CHECK(text.find("\"config\"") < text.find("\"tool\""));
    CHECK(m["seed"] == 11);
    CHECK(m["config"]["model"]["seed"] == 11);
    CHECK(m["tool"]["version"] == kToolVersion);
    CHECK(m.contains("started_at"));
    CHECK(m.contains("finished_at"));
    CHECK(o.status == RunStatus::Ok);
}

TEST_CASE("seed option overrides the config seed") {
    const auto out = scratch("seed");
    RunOptions o;
    o.command = "validate";
    o.out_dir = out;
    o.seed = 99;
    const auto r = run_experiment({{"command", "validate"}, {"model", kScalarA}, {"seed", 5}}, o);
    CHECK(r.manifest["seed"] == 99);
}

TEST_CASE("invalid configs map to status 2") {
    const auto out = scratch("invalid");
    SUBCASE("unknown parameter") {
        const auto o = run({{"command", "riesz"}, {"model", kScalarA}, {"params", {{"lambda", 0}, {"y", 1}, {"r", 0}, {"radius", 0.1}, {"bogus", 1}}}}, out);
        CHECK(o.status == RunStatus::InvalidConfig);
        CHECK(o.manifest["failure"]["message"].get<std::string>().find("bogus") != std::string::npos);
    }
    SUBCASE("missing required parameter") {
        CHECK(run({{"command", "riesz"}, {"model", kScalarA}, {"params", {{"lambda", 0}}}}, out).status == RunStatus::InvalidConfig);
    }
    SUBCASE("command mismatch") {
        CHECK(run({{"command", "riesz"}, {"model", kScalarA}}, out, "validate").status == RunStatus::InvalidConfig);
    }
    SUBCASE("non-Hermitian explicit model") {
        const json model = {{"kind", "explicit"}, {"h0", {{0, 1}, {0, 0}}}, {"f", {{1, 0}, {0, 1}}}, {"j", {{1, 0}, {0, 1}}}};
        CHECK(run({{"command", "validate"}, {"model", model}}, out).status == RunStatus::InvalidConfig);
    }
    SUBCASE("empty grid") {
        CHECK(run({{"command", "lap-probe"}, {"model", kScalarA}, {"params", {{"lambda_grid", json::array()}}}}, out).status ==
              RunStatus::InvalidConfig);
    }
    SUBCASE("unknown top-level key") {
        CHECK(run({{"command", "validate"}, {"model", kScalarA}, {"extra", 1}}, out).status == RunStatus::InvalidConfig);
    }
    CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("module errors surface as status 3 with the operation name") {
    const auto out = scratch("compute");
    // contour passes through the pole r = i at z = i
    const json cfg = {{"command", "riesz"}, {"model", kScalarA}, {"params", {{"lambda", 0.0}, {"y", 1.0}, {"r", {0.0, 0.5}}, {"radius", 0.5}}}};
    const auto o = run(cfg, out);
    CHECK(o.status == RunStatus::ComputeError);
    CHECK(o.manifest["failure"]["category"] == "ComputeError");
    CHECK(o.manifest["failure"]["operation"] == "riesz_operator");
    CHECK(o.manifest["files"].empty());
}

TEST_CASE("I/O problems map to status 4") {
    const auto base = scratch("io");
    fs::create_directories(base);
    SUBCASE("missing model file") {
        RunOptions o;
        o.command = "validate";
        o.base_dir = base;
        o.out_dir = base / "out";
        CHECK(run_experiment({{"command", "validate"}, {"model", "absent.json"}}, o).status == RunStatus::IoError);
    }
    SUBCASE("output path is a regular file") {
        std::ofstream(base / "blocker") << "x";
        CHECK(run({{"command", "validate"}, {"model", kScalarA}}, base / "blocker" / "sub").status == RunStatus::IoError);
    }
}

TEST_CASE("model given as a path is resolved against the base directory") {
    const auto base = scratch("model_path");
    fs::create_directories(base / "models");
    std::ofstream(base / "models" / "a.json") << kScalarA.dump();
    RunOptions o;
    o.command = "validate";
    o.base_dir = base;
    o.out_dir = base / "out";
    const auto r = run_experiment({{"command", "validate"}, {"model", "models/a.json"}}, o);
    CHECK(r.status == RunStatus::Ok);
    CHECK(r.manifest["config"]["model"]["kind"] == "diagonal");
}

TEST_CASE("batch configs run in order, one manifest per run") {
    const auto out = scratch("batch");
    RunOptions o;
    o.command = "validate";
    o.out_dir = out;
    const json batch = json::array({{{"command", "validate"}, {"model", kScalarA}},
                                    {{"command", "validate"}, {"model", {{"kind", "diagonal"}, {"spectrum", {0.0}}, {"weights", {0.0}}}}}});
    const auto outcomes = run_config(batch, o);
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].status == RunStatus::Ok);
    CHECK(fs::exists(out / "run-000" / "manifest.json"));
    CHECK(fs::exists(out / "run-001" / "manifest.json"));
    CHECK(combined_status(outcomes) == outcomes[1].status);
}

TEST_CASE("select-k via stability-scan writes the selected set") {
    const auto out = scratch("scan_select");
    const json cfg = {{"command", "stability-scan"},
                      {"model", kScalarA},
                      {"params",
                       {{"r_grid", {0.0, 0.5}},
                        {"select", {{"epsilon", 0.1}, {"lambda_grid", {{"start", -0.5}, {"stop", 1.5}, {"count", 5}}}, {"y_min", 1e-4}}}}}};
    const auto o = run(cfg, out);
    REQUIRE(o.status == RunStatus::Ok);
    CHECK(fs::exists(out / "k_set.csv"));
    CHECK(o.manifest["result"]["excised_measure"].get<double>() <= 0.1);
    CHECK(o.manifest["config"]["params"]["select"]["epsilon"] == 0.1);
}

TEST_CASE("experiment_commands lists all ten commands") {
    CHECK(experiment_commands().size() == 10);
}
