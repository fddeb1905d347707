#include "hjlab/errors.hpp"
#include "hjlab/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hjlab {

namespace {

using json = nlohmann::json;

using LineMap = std::map<std::string, int>;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"grid", {"dimension", "half_width", "cells", "t0", "t1", "dt"}},
        {"hamiltonian", {"kind", "p", "scale", "offset", "lambda", "eta"}},
        {"envelope", {"lambda", "p"}},
        {"initial", {"name", "value", "amplitude", "offset", "frequency", "modes", "bandwidth", "seed"}},
        {"chain", {"alpha_dg", "alpha_fallback", "delta", "D"}},
        {"output", {"dir", "snapshots"}},
        {"tolerances",
         {"lemma1", "osc_above", "osc_below", "residual", "barrier_cells", "cascade", "order", "hopf_lax_error",
          "alpha_min", "eta_ratio"}},
        {"solver", {"c_cfl", "sigma", "sigma_inflation", "sigma_floor"}},
        {"cascade", {"zooms", "mode", "cells", "points_per_axis", "delta_time", "rho", "x_radius", "half_width"}},
        {"sweep", {"widths", "etas", "oracle_radius"}},
        {"ensemble", {"max_attempts", "bisection_steps", "amplitude_max", "pair_gap"}},
    };
    return s;
}

const std::set<std::string>& top_level_keys() {
    static const std::set<std::string> k{"scenario", "seed",   "grid",       "hamiltonian", "envelope",
                                         "initial",  "chain",  "checks",     "output",      "tolerances",
                                         "solver",   "cascade", "sweep",     "ensemble"};
    return k;
}

const json& base_defaults() {
    static const json d = json::parse(R"({
        "scenario": "custom",
        "seed": 1,
        "grid": {"dimension": 2, "half_width": 1.25, "cells": 40, "t0": -2.0, "t1": 2.0, "dt": 0.0625},
        "hamiltonian": {"kind": "power-law", "p": 1.5, "scale": 1.0, "offset": 0.0, "lambda": 2.0, "eta": 0.25},
        "envelope": {"lambda": 1.0, "p": null},
        "initial": {"name": "zero", "value": 0.0, "amplitude": 1.0, "offset": 0.0, "frequency": 1.0,
                    "modes": 6, "bandwidth": 3, "seed": 0},
        "chain": {"alpha_dg": 1.0, "alpha_fallback": 1.0, "delta": "auto", "D": 10.0},
        "checks": [],
        "output": {"dir": "runs", "snapshots": true},
        "tolerances": {"lemma1": "cell", "osc_above": 0.0, "osc_below": 0.0, "residual": null,
                       "barrier_cells": 5.0, "cascade": 0.0, "order": 0.4, "hopf_lax_error": 0.02,
                       "alpha_min": 0.5, "eta_ratio": 2.0},
        "solver": {"c_cfl": 0.9, "sigma": null, "sigma_inflation": 1.5, "sigma_floor": 0.001},
        "cascade": {"zooms": 6, "mode": "resolve", "cells": 32, "points_per_axis": 5, "delta_time": 0.5,
                    "rho": 0.25, "x_radius": 0.5, "half_width": 2.0},
        "sweep": {"widths": [0.015625, 0.0078125, 0.00390625], "etas": [0.25, 0.0625, 0.015625],
                  "oracle_radius": 2.0},
        "ensemble": {"max_attempts": 8, "bisection_steps": 20, "amplitude_max": 8.0, "pair_gap": 0.5}
    })");
    return d;
}

json scenario_defaults(const std::string& name) {
    if (name == "zero-data")
        return json::parse(R"({
            "grid": {"cells": 20, "dt": 0.125},
            "checks": ["lemma1", "lemma2", "osc_above", "osc_below", "cascade", "theorem"],
            "cascade": {"zooms": 2, "cells": 16, "points_per_axis": 2, "delta_time": 0.0}
        })");
    if (name == "hopf-lax-validation")
        return json::parse(R"({
            "grid": {"dimension": 1, "half_width": 4.0, "cells": 512, "t0": 0.0, "t1": 1.0, "dt": 0.0625},
            "hamiltonian": {"kind": "power-law", "p": 2.0},
            "initial": {"name": "abs", "amplitude": 1.0}
        })");
    if (name == "comparison-pairs")
        return json::parse(R"({
            "grid": {"cells": 32, "t0": 0.0, "t1": 1.0, "dt": 0.0625},
            "initial": {"name": "trig-random", "amplitude": 1.0}
        })");
    if (name == "pointwise-bound-ensemble")
        return json::parse(R"({
            "grid": {"cells": 40, "t0": 0.0, "t1": 2.0, "dt": 0.0625},
            "hamiltonian": {"kind": "scaled-power-law", "scale": 1.0, "offset": -1.0},
            "initial": {"name": "trig-random", "offset": -2.0},
            "checks": ["lemma1"]
        })");
    if (name == "osc-above-ensemble")
        return json::parse(R"({
            "grid": {"cells": 40, "dt": 0.03125},
            "initial": {"name": "trig-random", "amplitude": 0.001, "offset": -0.0005},
            "tolerances": {"residual": 0.01},
            "checks": ["osc_above"]
        })");
    if (name == "osc-below-ensemble")
        return json::parse(R"({
            "grid": {"cells": 40, "dt": 0.03125},
            "initial": {"name": "trig-random", "amplitude": 0.001, "offset": 0.0005},
            "tolerances": {"residual": 0.01},
            "checks": ["osc_below"]
        })");
    if (name == "barrier") return json::parse(R"({"grid": {"cells": 80, "dt": 0.03125}})");
    if (name == "kink-cascade")
        return json::parse(R"({
            "grid": {"half_width": 3.2, "cells": 64, "t0": 0.0, "t1": 1.0, "dt": 0.0625},
            "initial": {"name": "sine", "amplitude": 1.0, "frequency": 2.0},
            "cascade": {"x_radius": 1.0}
        })");
    if (name == "rough-eta-sweep")
        return json::parse(R"({
            "grid": {"half_width": 3.2, "cells": 64, "t0": 0.0, "t1": 1.0, "dt": 0.0625},
            "hamiltonian": {"kind": "rough-coefficient", "lambda": 2.0},
            "envelope": {"lambda": 2.0},
            "initial": {"name": "sine", "amplitude": 1.0, "frequency": 2.0},
            "cascade": {"x_radius": 1.0, "points_per_axis": 3}
        })");
    return json::object();
}

void merge_into(json& base, const json& over) {
    for (auto it = over.begin(); it != over.end(); ++it) {
        if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
            merge_into(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

json scalar_value(const YAML::Node& n) {
    const std::string& s = n.Scalar();
    if (n.Tag() == "!") return s;  // quoted
    if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
    if (s == "true" || s == "True" || s == "TRUE") return true;
    if (s == "false" || s == "False" || s == "FALSE") return false;
    long long iv = 0;
    auto [ip, iec] = std::from_chars(s.data(), s.data() + s.size(), iv);
    if (iec == std::errc() && ip == s.data() + s.size()) return iv;
    char* end = nullptr;
    const double dv = std::strtod(s.c_str(), &end);
    if (end && *end == '\0') return dv;
    return s;
}

json yaml_to_json(const YAML::Node& n, const std::string& path, LineMap& lines) {
    if (n.Mark().line >= 0) lines.emplace(path, n.Mark().line + 1);
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            json j = json::object();
            for (const auto& kv : n) {
                const auto key = kv.first.as<std::string>();
                const auto sub = path.empty() ? key : path + "." + key;
                if (kv.first.Mark().line >= 0) lines[sub] = kv.first.Mark().line + 1;
                j[key] = yaml_to_json(kv.second, sub, lines);
            }
            return j;
        }
        case YAML::NodeType::Sequence: {
            json j = json::array();
            std::size_t i = 0;
            for (const auto& item : n) j.push_back(yaml_to_json(item, path + "[" + std::to_string(i++) + "]", lines));
            return j;
        }
        case YAML::NodeType::Scalar:
            return scalar_value(n);
        default:
            return nullptr;
    }
}

class Reader {
public:
    Reader(const json& root, std::string origin, const LineMap* lines)
        : root_(root), origin_(std::move(origin)), lines_(lines) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        std::string where = origin_;
        if (lines_) {
            std::string p = path;
            while (!p.empty()) {
                if (auto it = lines_->find(p); it != lines_->end()) {
                    where += ":" + std::to_string(it->second);
                    break;
                }
                const auto dot = p.find_last_of(".[");
                p = dot == std::string::npos ? "" : p.substr(0, dot);
            }
        }
        throw ConfigError(where + ": " + path + ": " + msg);
    }

    const json& at(const std::string& section, const std::string& key) const {
        return root_.at(section).at(key);
    }

    double num(const std::string& section, const std::string& key) const {
        const auto& v = at(section, key);
        if (!v.is_number()) fail(section + "." + key, "expected a number, got " + v.dump());
        return v.get<double>();
    }

    std::optional<double> opt_num(const std::string& section, const std::string& key) const {
        if (at(section, key).is_null()) return std::nullopt;
        return num(section, key);
    }

    long long integer(const std::string& section, const std::string& key) const {
        const auto& v = at(section, key);
        if (!v.is_number_integer()) fail(section + "." + key, "expected an integer, got " + v.dump());
        return v.get<long long>();
    }

    std::string str(const std::string& section, const std::string& key) const {
        const auto& v = at(section, key);
        if (!v.is_string()) fail(section + "." + key, "expected a string, got " + v.dump());
        return v.get<std::string>();
    }

    bool boolean(const std::string& section, const std::string& key) const {
        const auto& v = at(section, key);
        if (!v.is_boolean()) fail(section + "." + key, "expected true or false, got " + v.dump());
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& section, const std::string& key) const {
        const auto& v = at(section, key);
        if (!v.is_array()) fail(section + "." + key, "expected a list of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(section + "." + key, "expected a list of numbers, got " + e.dump());
            out.push_back(e.get<double>());
        }
        return out;
    }

private:
    const json& root_;
    std::string origin_;
    const LineMap* lines_;
};

void check_keys(const json& user, const Reader& r) {
    if (!user.is_object()) r.fail("", "top level must be a mapping");
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!top_level_keys().count(it.key())) r.fail(it.key(), "unknown key '" + it.key() + "'");
        auto sec = schema().find(it.key());
        if (sec == schema().end()) continue;
        if (!it.value().is_object()) r.fail(it.key(), "section '" + it.key() + "' must be a mapping");
        for (auto kv = it.value().begin(); kv != it.value().end(); ++kv)
            if (!sec->second.count(kv.key()))
                r.fail(it.key() + "." + kv.key(), "unknown key '" + kv.key() + "' in section '" + it.key() + "'");
    }
}

bool needs_theorem_scope(const ExperimentConfig& c) {
    static const std::set<std::string> scoped_scenarios{"pointwise-bound-ensemble", "osc-above-ensemble", "osc-below-ensemble",
                                                        "barrier",         "kink-cascade",    "rough-eta-sweep"};
    if (scoped_scenarios.count(c.scenario)) return true;
    return !c.checks.empty();
}

ExperimentConfig build(const json& user, const std::string& origin, const LineMap* lines) {
    Reader ur(user, origin, lines);
    check_keys(user, ur);

    std::string scenario = "custom";
    if (user.contains("scenario")) {
        if (!user["scenario"].is_string()) ur.fail("scenario", "expected a string");
        scenario = user["scenario"].get<std::string>();
    }
    const auto& list = scenarios();
    if (std::none_of(list.begin(), list.end(), [&](const ScenarioInfo& s) { return s.name == scenario; }))
        ur.fail("scenario", "unknown scenario '" + scenario + "'");

    json merged = base_defaults();
    merge_into(merged, scenario_defaults(scenario));
    merge_into(merged, user);
    merged["scenario"] = scenario;
    Reader r(merged, origin, lines);

    ExperimentConfig c;
    c.scenario = scenario;
    if (!merged["seed"].is_number_integer() || merged["seed"].get<long long>() < 0)
        r.fail("seed", "expected a nonnegative integer");
    c.seed = merged["seed"].get<std::uint64_t>();

    c.grid.dimension = static_cast<int>(r.integer("grid", "dimension"));
    c.grid.half_width = r.num("grid", "half_width");
    c.grid.cells = static_cast<int>(r.integer("grid", "cells"));
    c.grid.t0 = r.num("grid", "t0");
    c.grid.t1 = r.num("grid", "t1");
    c.grid.dt = r.num("grid", "dt");

    const double p = r.num("hamiltonian", "p");
    const auto kind_name = r.str("hamiltonian", "kind");
    try {
        switch (hamiltonian_kind_from_string(kind_name)) {
            case HamiltonianKind::PowerLaw:
            case HamiltonianKind::ScaledPowerLaw:
                c.hamiltonian = HamiltonianSpec::scaled_power_law(p, r.num("hamiltonian", "scale"),
                                                                  r.num("hamiltonian", "offset"));
                c.hamiltonian.kind = hamiltonian_kind_from_string(kind_name);
                break;
            case HamiltonianKind::RoughCoefficient:
                c.hamiltonian = HamiltonianSpec::rough(p, r.num("hamiltonian", "lambda"), r.num("hamiltonian", "eta"));
                c.hamiltonian.scale = r.num("hamiltonian", "scale");
                c.hamiltonian.offset = r.num("hamiltonian", "offset");
                break;
            case HamiltonianKind::Tabulated:
                r.fail("hamiltonian.kind", "tabulated Hamiltonians are library-only (no table source in configs)");
        }
        c.hamiltonian.validate();
    } catch (const InvalidArgument& e) {
        r.fail("hamiltonian", e.what());
    }

    c.envelope.lambda = r.num("envelope", "lambda");
    c.envelope.p = r.opt_num("envelope", "p").value_or(p);
    try {
        c.envelope.validate();
    } catch (const InvalidArgument& e) {
        r.fail("envelope", e.what());
    }

    c.initial.name = r.str("initial", "name");
    c.initial.value = r.num("initial", "value");
    c.initial.amplitude = r.num("initial", "amplitude");
    c.initial.offset = r.num("initial", "offset");
    c.initial.frequency = r.num("initial", "frequency");
    c.initial.modes = static_cast<int>(r.integer("initial", "modes"));
    c.initial.bandwidth = static_cast<int>(r.integer("initial", "bandwidth"));
    c.initial.seed = static_cast<std::uint64_t>(r.integer("initial", "seed"));
    const auto& names = initial_data_names();
    if (std::find(names.begin(), names.end(), c.initial.name) == names.end())
        r.fail("initial.name", "unknown initial data '" + c.initial.name + "'");

    const auto& a = merged["chain"]["alpha_dg"];
    if (a.is_string() && a.get<std::string>() == "empirical")
        c.chain.alpha_dg.reset();
    else
        c.chain.alpha_dg = r.num("chain", "alpha_dg");
    c.chain.alpha_fallback = r.num("chain", "alpha_fallback");
    const auto& d = merged["chain"]["delta"];
    if (!(d.is_string() && d.get<std::string>() == "auto")) c.chain.delta = r.num("chain", "delta");
    c.chain.D = r.num("chain", "D");
    if (c.chain.alpha_dg && !(*c.chain.alpha_dg > 0.0)) r.fail("chain.alpha_dg", "must be positive or 'empirical'");
    if (c.chain.delta && !(*c.chain.delta > 0.0)) r.fail("chain.delta", "must be positive or 'auto'");
    if (!(c.chain.D > 0.0)) r.fail("chain.D", "must be positive");

    const auto& checks = merged["checks"];
    if (!checks.is_array()) r.fail("checks", "expected a list");
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto path = "checks[" + std::to_string(i) + "]";
        if (!checks[i].is_string()) r.fail(path, "expected a check name");
        const auto name = checks[i].get<std::string>();
        const auto& known = check_names();
        if (std::find(known.begin(), known.end(), name) == known.end())
            r.fail(path, "unknown check '" + name + "'");
        c.checks.push_back(name);
    }

    c.output_dir = r.str("output", "dir");
    c.snapshots = r.boolean("output", "snapshots");

    const auto& l1 = merged["tolerances"]["lemma1"];
    if (!(l1.is_string() && l1.get<std::string>() == "cell")) c.tolerances.lemma1 = r.num("tolerances", "lemma1");
    c.tolerances.osc_above = r.num("tolerances", "osc_above");
    c.tolerances.osc_below = r.num("tolerances", "osc_below");
    c.tolerances.residual = r.opt_num("tolerances", "residual");
    c.tolerances.barrier_cells = r.num("tolerances", "barrier_cells");
    c.tolerances.cascade = r.num("tolerances", "cascade");
    c.tolerances.order = r.num("tolerances", "order");
    c.tolerances.hopf_lax_error = r.num("tolerances", "hopf_lax_error");
    c.tolerances.alpha_min = r.num("tolerances", "alpha_min");
    c.tolerances.eta_ratio = r.num("tolerances", "eta_ratio");

    c.solver.c_cfl = r.num("solver", "c_cfl");
    c.solver.sigma = r.opt_num("solver", "sigma");
    c.solver.sigma_inflation = r.num("solver", "sigma_inflation");
    c.solver.sigma_floor = r.num("solver", "sigma_floor");
    if (!(c.solver.c_cfl > 0.0 && c.solver.c_cfl <= 1.0)) r.fail("solver.c_cfl", "must lie in (0, 1]");
    if (c.solver.sigma && !(*c.solver.sigma > 0.0)) r.fail("solver.sigma", "must be positive");
    if (!(c.solver.sigma_inflation >= 1.0)) r.fail("solver.sigma_inflation", "must be >= 1");
    if (!(c.solver.sigma_floor > 0.0)) r.fail("solver.sigma_floor", "must be positive");

    c.cascade.zooms = static_cast<int>(r.integer("cascade", "zooms"));
    try {
        c.cascade.mode = zoom_mode_from_string(r.str("cascade", "mode"));
    } catch (const InvalidArgument& e) {
        r.fail("cascade.mode", e.what());
    }
    c.cascade.cells = static_cast<int>(r.integer("cascade", "cells"));
    c.cascade.points_per_axis = static_cast<int>(r.integer("cascade", "points_per_axis"));
    c.cascade.delta_time = r.num("cascade", "delta_time");
    c.cascade.rho = r.num("cascade", "rho");
    c.cascade.x_radius = r.num("cascade", "x_radius");
    c.cascade.half_width = r.num("cascade", "half_width");
    if (c.cascade.zooms < 0) r.fail("cascade.zooms", "must be >= 0");
    if (c.cascade.cells < 4) r.fail("cascade.cells", "must be >= 4");
    if (c.cascade.points_per_axis < 1) r.fail("cascade.points_per_axis", "must be >= 1");
    if (!(c.cascade.rho > 0.0)) r.fail("cascade.rho", "must be positive");
    if (!(c.cascade.half_width >= 1.0)) r.fail("cascade.half_width", "must be >= 1");

    c.sweep.widths = r.numbers("sweep", "widths");
    c.sweep.etas = r.numbers("sweep", "etas");
    c.sweep.oracle_radius = r.num("sweep", "oracle_radius");
    for (double w : c.sweep.widths)
        if (!(w > 0.0)) r.fail("sweep.widths", "widths must be positive");
    for (double e : c.sweep.etas)
        if (!(e > 0.0)) r.fail("sweep.etas", "etas must be positive");

    c.ensemble.max_attempts = static_cast<int>(r.integer("ensemble", "max_attempts"));
    c.ensemble.bisection_steps = static_cast<int>(r.integer("ensemble", "bisection_steps"));
    c.ensemble.amplitude_max = r.num("ensemble", "amplitude_max");
    c.ensemble.pair_gap = r.num("ensemble", "pair_gap");
    if (c.ensemble.max_attempts < 1) r.fail("ensemble.max_attempts", "must be >= 1");
    if (c.ensemble.bisection_steps < 1) r.fail("ensemble.bisection_steps", "must be >= 1");

    try {
        c.grid.validate();
    } catch (const InvalidArgument& e) {
        r.fail("grid", e.what());
    }
    if (needs_theorem_scope(c) && !(p > 1.0 && p < c.grid.dimension)) {
        std::ostringstream os;
        os << "p < N required for the De Giorgi and cascade checks, got p = " << p << ", N = " << c.grid.dimension;
        r.fail(user.contains("checks") ? "checks" : "hamiltonian.p", os.str());
    }

    c.echo = merged;
    c.echo.erase("output");
    return c;
}

}  // namespace

const std::vector<ScenarioInfo>& scenarios() {
    static const std::vector<ScenarioInfo> s{
        {"zero-data", "zero initial data with every check enabled"},
        {"hopf-lax-validation", "solver against the Hopf-Lax formula over a grid-refinement sweep"},
        {"comparison-pairs", "ordered initial data stay ordered under the scheme"},
        {"pointwise-bound-ensemble", "small positive mass implies u <= 1 late; amplitude bisected to the mass budget"},
        {"osc-above-ensemble", "improved oscillation from above on solved subsolutions"},
        {"osc-below-ensemble", "improved oscillation from below on solved supersolutions"},
        {"barrier", "barrier residual and comparison of a solver run against the barrier"},
        {"kink-cascade", "zoom cascades on kink-forming sine data and Hoelder fits"},
        {"rough-eta-sweep", "Hoelder fits under checkerboard coefficients of shrinking cell size"},
        {"custom", "solve the configured data and run the listed checks"},
    };
    return s;
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> n{"lemma1", "lemma2", "osc_above", "osc_below", "cascade", "theorem"};
    return n;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    LineMap lines;
    json user = root.IsNull() ? json::object() : yaml_to_json(root, "", lines);
    return build(user, origin, &lines);
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

ExperimentConfig config_from_json(const nlohmann::json& user, const std::string& origin) {
    return build(user, origin, nullptr);
}

void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed, std::optional<int> resolution) {
    if (seed) {
        cfg.seed = *seed;
        cfg.echo["seed"] = *seed;
    }
    if (resolution) {
        cfg.grid.cells = *resolution;
        try {
            cfg.grid.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("--resolution: ") + e.what());
        }
        cfg.echo["grid"]["cells"] = *resolution;
    }
}

}  // namespace hjlab
