#include "hjlab/errors.hpp"
#include "hjlab/experiment.hpp"
#include "hjlab/initial_data.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace hjlab;

namespace {

RunOptions in_memory(std::size_t count = 1) {
    RunOptions o;
    o.count = count;
    o.write = false;
    return o;
}

double at(const InitialData& u, std::vector<double> x) { return u(x); }

}  // namespace

TEST_CASE("initial data catalog examples") {
    InitialDataSpec s;
    CHECK(at(make_initial_data(s, 2), {0.3, 0.4}) == 0.0);
    s.name = "constant";
    s.value = 0.5;
    CHECK(at(make_initial_data(s, 2), {0.3, 0.4}) == 0.5);
    s.name = "abs";
    s.amplitude = 2.0;
    s.offset = 1.0;
    CHECK(at(make_initial_data(s, 2), {0.3, 0.4}) == doctest::Approx(2.0));
    s.name = "linear";
    CHECK(at(make_initial_data(s, 2), {0.3, 0.4}) == doctest::Approx(1.6));
    s.name = "sine";
    s.frequency = 2.0;
    CHECK(at(make_initial_data(s, 2), {0.0, 0.0}) == 1.0);
    CHECK(at(make_initial_data(s, 1), {M_PI / 4}) == doctest::Approx(3.0));
    s.name = "spiral";
    CHECK_THROWS_AS(make_initial_data(s, 2), InvalidArgument);
    s.name = "barrier-psi";
    CHECK_THROWS_AS(make_initial_data(s, 2), InvalidArgument);
    const auto ch = build_constant_chain(2, 1.5, 1.0, 1.0);
    s.offset = 0.0;
    CHECK(at(make_initial_data(s, 2, &ch), {1.0, 0.0}) == doctest::Approx(-2.0));
}

TEST_CASE("trig-random is seeded and bounded by the amplitude") {
    InitialDataSpec s;
    s.name = "trig-random";
    s.amplitude = 0.7;
    s.offset = -0.1;
    s.seed = 42;
    const auto a = make_initial_data(s, 2);
    const auto b = make_initial_data(s, 2);
    s.seed = 43;
    const auto c = make_initial_data(s, 2);
    bool differs = false;
    for (double x = -2; x <= 2; x += 0.05)
        for (double y = -2; y <= 2; y += 0.05) {
            const double v = at(a, {x, y});
            CHECK(v == at(b, {x, y}));
            CHECK(std::abs(v + 0.1) <= 0.7 + 1e-12);
            differs = differs || v != at(c, {x, y});
        }
    CHECK(differs);
}

TEST_CASE("zero-data scenario with every check passes") {
    const auto cfg = parse_config_text("scenario: zero-data\n");
    const auto rep = execute(cfg, in_memory());
    CHECK(rep.status == "pass");
    CHECK(exit_code(rep.status) == 0);
    const auto& verdicts = rep.report["members"][0]["verdicts"];
    for (const auto& name : check_names()) {
        REQUIRE(verdicts.contains(name));
        CHECK(verdicts[name]["status"] == "pass");
    }
    CHECK(rep.report["version"] == kReportVersion);
    CHECK(rep.report["chain"]["K0"] == 13);
}

TEST_CASE("ensemble members merge in index order and are deterministic") {
    auto cfg = parse_config_text("scenario: comparison-pairs\ngrid: {cells: 12, t1: 0.25}\n");
    RunOptions o = in_memory(3);
    o.ensemble = true;
    const auto a = execute(cfg, o);
    o.workers = 3;
    const auto b = execute(cfg, o);
    CHECK(report_without_timings(a.report) == report_without_timings(b.report));
    CHECK(a.report["members"].size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.report["members"][i]["index"] == i);
    CHECK(a.report["members"][0]["seed"] != a.report["members"][1]["seed"]);
    CHECK(a.report.contains("timings"));
    CHECK(report_without_timings(a.report).find("timings") == std::string::npos);
}

TEST_CASE("count one ensemble reduces to a run") {
    auto cfg = parse_config_text("scenario: comparison-pairs\ngrid: {cells: 12, t1: 0.25}\n");
    const auto run = execute(cfg, in_memory());
    RunOptions o = in_memory();
    o.ensemble = true;
    const auto ens = execute(cfg, o);
    CHECK(run.report["members"] == ens.report["members"]);
    CHECK(run.report["summary"] == ens.report["summary"]);
}

TEST_CASE("refutation, solver error and exit codes") {
    const auto refuted = parse_config_text("grid: {cells: 12, t0: 0.0, t1: 2.0, dt: 0.125}\n"
                                           "hamiltonian: {kind: scaled-power-law, offset: -1.0}\n"
                                           "initial: {name: constant, value: 0.5}\n"
                                           "chain: {delta: 100.0}\nchecks: [lemma1]\n");
    const auto r = execute(refuted, in_memory());
    CHECK(r.status == "refuted");
    CHECK(exit_code(r.status) == 1);
    CHECK(r.report["summary"]["refutations"].size() == 1);

    const auto broken = parse_config_text("grid: {cells: 12, t1: 0.5}\ninitial: {name: sine}\nsolver: {sigma: 1.0e-6}\n");
    const auto e = execute(broken, in_memory());
    CHECK(e.status == "error");
    CHECK(exit_code(e.status) == 3);
    CHECK(e.report["members"][0]["error"].get<std::string>().find("step") != std::string::npos);
    CHECK(exit_code("vacuous") == 0);
}

TEST_CASE("empirical alpha_dg mode keeps lemma2 diagnostic") {
    const auto cfg = parse_config_text("scenario: zero-data\nchain: {alpha_dg: empirical}\n"
                                       "checks: [lemma2]\n");
    const auto rep = execute(cfg, in_memory());
    const auto& v = rep.report["members"][0]["verdicts"]["lemma2"];
    CHECK(v["diagnostic_only"] == true);
    CHECK(rep.report["summary"].contains("alpha_dg_empirical"));
}

TEST_CASE("run directory layout") {
    const auto dir = std::filesystem::temp_directory_path() / "hjlab_layout_test";
    std::filesystem::remove_all(dir);
    auto cfg = parse_config_text("scenario: zero-data\ngrid: {cells: 12}\n");
    RunOptions o;
    o.out_dir = dir;
    const auto rep = execute(cfg, o);
    CHECK(rep.run_dir.parent_path() == dir);
    CHECK(rep.run_dir.filename().string().rfind("zero-data-1-", 0) == 0);
    CHECK(std::filesystem::exists(rep.run_dir / "report.json"));
    CHECK(std::filesystem::exists(rep.run_dir / "chain.json"));
    CHECK(std::filesystem::exists(rep.run_dir / "snapshots" / "member_0.csv"));
    CHECK(std::filesystem::exists(rep.run_dir / "cascades" / "cascade_m000_p000.csv"));
    std::ifstream in(rep.run_dir / "report.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["status"] == "pass");
    for (const auto& a : j["artifacts"]) CHECK(std::filesystem::exists(rep.run_dir / a.get<std::string>()));
    std::filesystem::remove_all(dir);
}
