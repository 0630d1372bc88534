#include "gg/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gg::cli;

namespace {

struct RunResult {
    int code;
    std::string out, err;
};

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("ggctl_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunResult run_config(const std::string& scenario, const json& cfg, const fs::path& dir,
                     std::vector<std::string> extra = {})
{
    const fs::path cfg_path = dir / "config.json";
    std::ofstream(cfg_path) << cfg.dump(2);
    std::vector<std::string> args{"ggctl", scenario, "--config", cfg_path.string(), "--out", (dir / "out").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json base(const std::string& scenario)
{
    return json{{"schema_version", 1}, {"scenario", scenario}};
}

}  // namespace

TEST_CASE("critical-list writes the first critical length first")
{
    const auto dir = scratch("critical_list");
    json cfg = base("critical-list");
    cfg["critical_list"] = {{"Lmax", 20}};
    const auto r = run_config("critical-list", cfg, dir);
    REQUIRE(r.code == kOk);
    const auto t = read_csv((dir / "out" / "critical.csv").string());
    REQUIRE(!t.rows.empty());
    CHECK(t.header == std::vector<std::string>{"value", "family", "indices"});
    CHECK(std::stod(t.rows[0][0]) == doctest::Approx(5.4414).epsilon(1e-4));
    CHECK(t.rows[0][1] == "F1");
    bool f2 = false;
    for (const auto& row : t.rows)
        if (row[1] == "F2" && row[2] == "1 1 1 1 1") {
            f2 = true;
            CHECK(std::stod(row[0]) == doctest::Approx(16.0190).epsilon(1e-4));
        }
    CHECK(f2);
}

TEST_CASE("simulate with zero data writes a zero trajectory")
{
    const auto dir = scratch("simulate_zero");
    json cfg = base("simulate");
    cfg["grid"] = {{"nx", 40}, {"nt", 80}};
    cfg["simulate"] = {{"init", {{"kind", "zero"}}}, {"boundary", {{"kind", "zero"}}}};
    const auto r = run_config("simulate", cfg, dir);
    REQUIRE(r.code == kOk);
    const auto t = read_csv((dir / "out" / "trajectory.csv").string());
    CHECK(t.header == std::vector<std::string>{"t", "x", "u", "v"});
    REQUIRE(!t.rows.empty());
    for (const auto& row : t.rows) {
        CHECK(std::stod(row[2]) == 0.0);
        CHECK(std::stod(row[3]) == 0.0);
    }
}

TEST_CASE("summary echoes the resolved configuration")
{
    const auto dir = scratch("echo");
    json cfg = base("simulate");
    cfg["grid"] = {{"nx", 40}, {"nt", 80}};
    REQUIRE(run_config("simulate", cfg, dir).code == kOk);
    const json s = json::parse(slurp(dir / "out" / "summary.json"));
    CHECK(s["scenario"] == "simulate");
    CHECK(s["config"]["params"]["a"] == 0.5);
    CHECK(s["config"]["params"]["r"] == 1.0);
    CHECK(s["config"]["grid"]["T"] == 1.0);
    CHECK(s["config"]["grid"]["nx"] == 40);
    CHECK(s["config"]["config"] == "C3");
    CHECK(s["config"]["seed"] == 0);
    CHECK(s["config"]["simulate"].contains("init"));
    CHECK(fs::exists(dir / "out" / "timings.txt"));
}

TEST_CASE("hum at a critical length needs --force")
{
    const auto dir = scratch("hum_critical");
    json cfg = base("hum");
    cfg["config"] = "C1";
    cfg["grid"] = {{"L", 2.0 * M_PI * std::sqrt(0.75)}, {"nx", 40}, {"nt", 80}};
    const auto r = run_config("hum", cfg, dir);
    CHECK(r.code == kPreconditionFailure);
    CHECK(r.err.find("F1(1)") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out" / "summary.json"));

    const auto forced = run_config("hum", cfg, dir, {"--force"});
    CHECK(forced.code != kPreconditionFailure);
}

TEST_CASE("hum with a failing one-control certificate exits 3")
{
    const auto dir = scratch("hum_c5");
    json cfg = base("hum");
    cfg["config"] = "C5";
    cfg["grid"] = {{"nx", 40}, {"nt", 80}};
    cfg["hum"] = {{"certificate", {{"C_T", 1.0}, {"beta", 1.0}}}};
    const auto r = run_config("hum", cfg, dir);
    CHECK(r.code == kPreconditionFailure);
    CHECK(r.err.find("certificate") != std::string::npos);
}

TEST_CASE("configuration errors exit 1")
{
    const auto dir = scratch("config_errors");
    json no_version = json{{"scenario", "simulate"}};
    CHECK(run_config("simulate", no_version, dir).code == kConfigError);

    json wrong_version = base("simulate");
    wrong_version["schema_version"] = 2;
    CHECK(run_config("simulate", wrong_version, dir).code == kConfigError);

    json unknown = base("simulate");
    unknown["grid"] = {{"nxx", 40}};
    const auto r = run_config("simulate", unknown, dir);
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("nxx") != std::string::npos);

    json mismatch = base("hum");
    CHECK(run_config("simulate", mismatch, dir).code == kConfigError);

    json bad_params = base("simulate");
    bad_params["params"] = {{"a", 2.0}};
    CHECK(run_config("simulate", bad_params, dir).code == kConfigError);

    json bad_config = base("simulate");
    bad_config["config"] = "C9";
    CHECK(run_config("simulate", bad_config, dir).code == kConfigError);

    std::ofstream(dir / "broken.json") << "{ not json";
    std::vector<std::string> args{"ggctl", "simulate", "--config", (dir / "broken.json").string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CHECK(run(static_cast<int>(argv.size()), argv.data(), out, err) == kConfigError);

    const char* no_scenario[] = {"ggctl", "--config", "x.json"};
    CHECK(run(3, no_scenario, out, err) == kConfigError);
}

TEST_CASE("solver errors exit 2 with the error name")
{
    const auto dir = scratch("solver_error");
    json cfg = base("simulate");
    cfg["grid"] = {{"nx", 40}, {"nt", 40}};
    cfg["simulate"] = {{"nonlinear", true},
                       {"init", {{"kind", "profile"}, {"amplitude", 1e4}}}};
    const auto r = run_config("simulate", cfg, dir);
    CHECK(r.code == kSolverError);
    CHECK(r.err.find("PicardDivergence") != std::string::npos);
}

TEST_CASE("identical configuration and seed give identical outputs")
{
    json cfg = base("hum");
    cfg["grid"] = {{"nx", 40}, {"nt", 100}};
    cfg["seed"] = 7;
    cfg["hum"] = {{"target", {{"kind", "random"}, {"norm", 1e-2}}}};
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    REQUIRE(run_config("hum", cfg, d1).code == kOk);
    REQUIRE(run_config("hum", cfg, d2).code == kOk);
    int compared = 0;
    for (const auto& e : fs::directory_iterator(d1 / "out")) {
        const auto ext = e.path().extension();
        if (ext != ".csv" && ext != ".json") continue;
        CHECK(slurp(e.path()) == slurp(d2 / "out" / e.path().filename()));
        ++compared;
    }
    CHECK(compared >= 5);
}

TEST_CASE("plots reproduce the CSV cells")
{
    const auto dir = scratch("plots");
    json cfg = base("simulate");
    cfg["grid"] = {{"nx", 40}, {"nt", 80}};
    cfg["simulate"] = {{"init", {{"kind", "profile"}}}};
    REQUIRE(run_config("simulate", cfg, dir).code == kOk);
    const auto t = read_csv((dir / "out" / "energy.csv").string());
    const auto svg = (dir / "out" / "energy.svg").string();
    REQUIRE(fs::exists(svg));
    const auto cells = read_plot_series(svg, "x_norm");
    REQUIRE(cells.size() == t.rows.size());
    const int c = t.column("x_norm");
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(cells[i] == t.rows[i][c]);
    CHECK(read_plot_series(svg, "t").size() == t.rows.size());
}

TEST_CASE("emit_plots")
{
    const auto dir = scratch("emit");
    std::ostringstream warn;
    CHECK(emit_plots({}, warn).empty());
    CHECK(warn.str().find("warning") != std::string::npos);
    CHECK(fs::is_empty(dir));

    std::ofstream(dir / "scan.csv") << "lambda,sigma\n0,1\n0.5,0.25\n1,0.125\n";
    std::ostringstream w2;
    const auto files = emit_plots({PlotSpec{(dir / "scan.csv").string(), "lambda", {"sigma"},
                                            (dir / "scan.svg").string(), "scan"}},
                                  w2);
    REQUIRE(files.size() == 1);
    CHECK(fs::exists(dir / "scan.svg"));
    CHECK(read_plot_series(files[0], "sigma") == std::vector<std::string>{"1", "0.25", "0.125"});

    std::ostringstream w3;
    CHECK(emit_plots({PlotSpec{(dir / "missing.csv").string(), "x", {"y"}, (dir / "m.svg").string(), ""}}, w3)
              .empty());
    CHECK(w3.str().find("skipped") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "m.svg"));
}
