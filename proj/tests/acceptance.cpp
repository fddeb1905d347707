// Acceptance criteria 1-10. Each criterion prints one PASS/FAIL line; the
// process exits nonzero if any fails. Scenario criteria drive the CLI binary.

#include "hjlab/degiorgi.hpp"
#include "hjlab/experiment.hpp"
#include "hjlab/oscillation.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kFixtures = HJLAB_FIXTURE_DIR;
const fs::path kOut = HJLAB_ACCEPTANCE_OUT;

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (!pass) note << "; ";
            note << what;
            pass = false;
        }
    }
};

// Runs the CLI with output under a fresh directory; returns its exit code.
int cli(const std::string& args, const fs::path& out) {
    fs::remove_all(out);
    fs::create_directories(out);
    const std::string cmd = std::string("\"") + HJLAB_CLI + "\" " + args + " --out \"" + out.string() + "\" > \"" +
                            (out / "stdout.txt").string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

int cli_plain(const std::string& args) {
    const std::string cmd = std::string("\"") + HJLAB_CLI + "\" " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

json load_report(const fs::path& out) {
    for (const auto& e : fs::directory_iterator(out))
        if (e.is_directory() && fs::exists(e.path() / "report.json")) {
            std::ifstream in(e.path() / "report.json");
            return json::parse(in);
        }
    throw std::runtime_error("no report.json under " + out.string());
}

fs::path run_dir(const fs::path& out) {
    for (const auto& e : fs::directory_iterator(out))
        if (e.is_directory() && fs::exists(e.path() / "report.json")) return e.path();
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config(const std::string& name) { return "--config \"" + (kFixtures / name).string() + "\""; }

int refutations(const json& rep) { return static_cast<int>(rep["summary"]["refutations"].size()); }

void criterion1(Outcome& o) {
    const int code = cli("run " + config("hopf_lax.yaml"), kOut / "c1");
    o.require(code == 0, "exit code " + std::to_string(code));
    const auto rep = load_report(kOut / "c1");
    const auto& cfg = rep["config"];
    o.require(cfg["grid"]["dimension"] == 1 && cfg["hamiltonian"]["p"] == 2.0 && cfg["initial"]["name"] == "abs" &&
                  cfg["grid"]["t1"] == 1.0,
              "scenario is not N=1, p=2, |x|, T=1");
    const auto& rows = rep["members"][0]["details"]["hopf_lax"]["rows"];
    const std::vector<double> widths{1.0 / 64, 1.0 / 128, 1.0 / 256};
    o.require(rows.size() == widths.size(), "expected three widths");
    double prev = INFINITY;
    for (std::size_t i = 0; i < rows.size() && i < widths.size(); ++i) {
        o.require(rows[i]["width"] == widths[i], "width mismatch");
        const double e = rows[i]["sup_error"];
        o.require(e < prev, "error not monotonically decreasing");
        prev = e;
        o.note << (i ? ", " : "errors ") << e;
    }
    for (const auto& ord : rep["members"][0]["details"]["hopf_lax"]["orders"]) {
        o.require(ord.get<double>() >= 0.4, "order below 0.4");
        o.note << "; order " << ord.get<double>();
    }
    o.require(prev <= 0.02, "error at 1/256 above 0.02");
}

void criterion2(Outcome& o) {
    const int code = cli("ensemble " + config("comparison.yaml") + " --count 50 --seed 2024", kOut / "c2");
    o.require(code == 0, "exit code " + std::to_string(code));
    const auto rep = load_report(kOut / "c2");
    o.require(rep["config"]["grid"]["dimension"] == 2 && rep["config"]["hamiltonian"]["p"] == 1.5, "not N=2, p=1.5");
    o.require(rep["members"].size() == 50, "expected 50 pairs");
    double worst = 0.0;
    for (const auto& m : rep["members"]) {
        const auto& v = m["verdicts"]["comparison"];
        o.require(v["hypothesis_satisfied"] == true, "pair not ordered initially");
        const double viol = v["conclusion_values"]["max_violation"];
        o.require(viol <= v["tolerances"]["conclusion"].get<double>(), "ordering violated");
        worst = std::max(worst, viol);
    }
    o.note << "50 pairs, worst violation " << worst;
}

void criterion3(Outcome& o) {
    const auto ch = hjlab::build_constant_chain(2, 1.5, 1.0, 1.0);
    o.require(ch.K0 == 13, "K0 != 13");
    o.require(ch.lambda == std::ldexp(1.0, -14), "lambda != 2^-14");
    const auto slacks = hjlab::validate_chain(ch);
    o.require(slacks.size() == 9, "expected nine invariants");
    for (const auto& s : slacks) o.require(s.slack >= 0.0, "negative slack on " + s.name);
    o.require(ch.alpha_H > 0.0 && ch.alpha_H < 1.0, "alpha_H outside (0,1)");
    o.require(cli_plain("chain --N 2 --p 1.5 --lambda 1 --alpha 1") == 0, "chain subcommand failed");
    o.note << "K0 " << ch.K0 << ", lambda " << ch.lambda << ", alpha_H " << ch.alpha_H;
}

void criterion4(Outcome& o) {
    int worst = 0;
    for (double D : {1.0, 10.0, 100.0})
        for (double beta : {0.25, 0.75, 2.0}) {
            const auto a = hjlab::simulate_recurrence(D, beta, hjlab::fast_convergence_threshold(D, beta), 40);
            int hit = -1;
            for (std::size_t k = 0; k < a.size(); ++k)
                if (a[k] < 1e-12) {
                    hit = static_cast<int>(k) + 1;
                    break;
                }
            o.require(hit > 0, "no convergence for D=" + std::to_string(D) + " beta=" + std::to_string(beta));
            worst = std::max(worst, hit);
        }
    o.note << "slowest cell reaches 1e-12 at k = " << worst;
}

void criterion5(Outcome& o) {
    const int code = cli("ensemble " + config("pointwise_bound.yaml") + " --count 20 --seed 11", kOut / "c5");
    o.require(code == 0, "exit code " + std::to_string(code));
    const auto rep = load_report(kOut / "c5");
    o.require(rep["config"]["envelope"]["lambda"] == 1.0 && rep["config"]["hamiltonian"]["p"] == 1.5, "not p=1.5, Lambda=1");
    o.require(rep["members"].size() == 20, "expected 20 members");
    int held = 0;
    for (const auto& m : rep["members"]) {
        const auto& v = m["verdicts"]["lemma1"];
        held += v["hypothesis_satisfied"].get<bool>() ? 1 : 0;
    }
    o.require(held == 20, "mass hypothesis not met by every member");
    o.require(refutations(rep) == 0, "refutations found");
    o.note << held << " members with mass <= delta = " << rep["delta"].get<double>() << ", "
           << refutations(rep) << " refutations";
}

void criterion6(Outcome& o) {
    const int code = cli("run " + config("barrier.yaml"), kOut / "c6");
    o.require(code == 0, "exit code " + std::to_string(code));
    const auto rep = load_report(kOut / "c6");
    const auto& v = rep["members"][0]["verdicts"];
    const double h = v["barrier_residual"]["cell_width"];
    const double res = v["barrier_residual"]["conclusion_values"]["max_abs_residual"];
    const double margin = v["barrier_comparison"]["conclusion_values"]["min_margin"];
    o.require(res <= 5 * h, "residual above 5 dx");
    o.require(margin >= -5 * h, "margin below -5 dx");
    o.note << "max residual " << res << ", min margin " << margin << ", dx " << h;
}

void criterion7(Outcome& o) {
    for (const auto& [name, key] : {std::pair{"osc_above.yaml", "osc_above"}, std::pair{"osc_below.yaml", "osc_below"}}) {
        const auto out = kOut / (std::string("c7_") + key);
        const int code = cli("ensemble " + config(name) + " --count 20 --seed 5", out);
        o.require(code == 0, std::string(key) + " exit code " + std::to_string(code));
        const auto rep = load_report(out);
        const auto& counts = rep["summary"]["per_check"][key];
        const int pass = counts["pass"], vac = counts["vacuous"], pre = counts["precondition_violated"];
        o.require(refutations(rep) == 0, std::string(key) + " refuted");
        o.require(pass == 20, std::string(key) + " has fewer than 20 hypothesis-satisfying fields");
        o.note << key << ": " << pass << " pass, " << vac << " vacuous, " << pre << " precondition-violated, "
               << refutations(rep) << " refuted; ";
    }
}

void criterion8(Outcome& o) {
    const int code = cli("run " + config("kink_cascade.yaml"), kOut / "c8");
    o.require(code == 0, "exit code " + std::to_string(code));
    const auto rep = load_report(kOut / "c8");
    const auto& m = rep["members"][0];
    o.require(rep["config"]["cascade"]["zooms"] == 6 && rep["config"]["initial"]["name"] == "sine", "not M=6 sine data");
    const auto& points = m["details"]["theorem"]["points"];
    double min_alpha = INFINITY;
    std::size_t records = 0;
    for (const auto& p : points) {
        o.require(p["error"].is_null(), "cascade aborted at a base point");
        o.require(p["records"].size() == 7, "expected 7 records per point");
        for (const auto& r : p["records"]) {
            o.require(r["satisfied"] == true, "record not satisfied");
            ++records;
        }
        min_alpha = std::min(min_alpha, p["holder"]["alpha_est"].get<double>());
    }
    o.require(min_alpha >= 0.5, "alpha_est below 0.5");
    o.require(m["verdicts"]["holder_self_test"]["status"] == "pass", "holder self-test failed");
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(run_dir(kOut / "c8") / "cascades")) csvs += e.path().extension() == ".csv";
    o.require(csvs == points.size(), "missing cascade CSVs");
    o.note << points.size() << " base points, " << records << " records, min alpha_est " << min_alpha;
}

void criterion9(Outcome& o) {
    const int code = cli("run " + config("eta_sweep.yaml"), kOut / "c9");
    o.require(code == 0, "exit code " + std::to_string(code));
    const auto rep = load_report(kOut / "c9");
    const auto& table = rep["members"][0]["details"]["eta_sweep"];
    const std::vector<double> etas{0.25, 0.0625, 0.015625};
    o.require(table.size() == etas.size(), "expected three etas");
    o.require(rep["config"]["envelope"]["lambda"] == 2.0 && rep["config"]["hamiltonian"]["lambda"] == 2.0, "Lambda != 2");
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < table.size() && i < etas.size(); ++i) {
        o.require(table[i]["eta"] == etas[i], "eta mismatch");
        o.require(table[i]["coercivity_violations"] == 0, "coercivity violation");
        const double a = table[i]["min_alpha_est"];
        lo = std::min(lo, a);
        hi = std::max(hi, a);
        o.note << (i ? ", " : "min alpha_est ") << a;
    }
    o.require(lo > 0.0 && hi / lo < 2.0, "alpha_est varies by a factor >= 2");
}

void criterion10(Outcome& o) {
    const std::string args = "ensemble " + config("osc_above.yaml") + " --count 4 --seed 99";
    o.require(cli(args, kOut / "c10a") == 0, "first ensemble failed");
    o.require(cli(args, kOut / "c10b") == 0, "second ensemble failed");
    const auto a = hjlab::report_without_timings(load_report(kOut / "c10a"));
    const auto b = hjlab::report_without_timings(load_report(kOut / "c10b"));
    o.require(a == b, "reports differ outside timings");
    const auto ra = slurp(run_dir(kOut / "c10a") / "report.json");
    o.require(ra.find("\"timings\"") != std::string::npos, "report lacks timings block");

    const std::vector<std::pair<std::string, int>> fixtures{
        {"exit_pass.yaml", 0}, {"exit_refuted.yaml", 1}, {"exit_config_error.yaml", 2}, {"exit_solver_error.yaml", 3}};
    for (const auto& [name, expected] : fixtures) {
        const int got = cli("run " + config(name), kOut / ("c10_" + name));
        o.require(got == expected, name + " exited " + std::to_string(got) + ", expected " + std::to_string(expected));
    }
    const auto diag = slurp(kOut / "c10_exit_config_error.yaml" / "stdout.txt");
    o.require(diag.find("'foo'") != std::string::npos, "config error does not name the key");
    o.note << "identical reports (" << a.size() << " bytes), exit codes 0/1/2/3 as expected";
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        double limit_seconds;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Hopf-Lax oracle agreement", 60, criterion1},
        {2, "discrete comparison principle", 300, criterion2},
        {3, "constant chain", 1, criterion3},
        {4, "recurrence fast convergence", 1, criterion4},
        {5, "pointwise bound ensemble", 600, criterion5},
        {6, "barrier residual and comparison", 120, criterion6},
        {7, "improved oscillation ensembles", 900, criterion7},
        {8, "zoom cascade on kink-forming data", 1200, criterion8},
        {9, "Hamiltonian roughness independence", 1200, criterion9},
        {10, "determinism and exit codes", 120, criterion10},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs <= c.limit_seconds, "runtime over " + std::to_string(static_cast<int>(c.limit_seconds)) + " s");
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << ", " << secs
                  << " s): " << o.note.str() << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
