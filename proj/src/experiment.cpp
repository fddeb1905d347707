#include "hjlab/experiment.hpp"

#include "hjlab/degiorgi.hpp"
#include "hjlab/errors.hpp"
#include "hjlab/field_io.hpp"
#include "hjlab/oscillation.hpp"
#include "hjlab/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace hjlab {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ (index + 1));
}

std::string hash8(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 8);
}

// One ensemble member's output, merged into the report in index order.
struct Member {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, LemmaVerdict>> verdicts;
    std::vector<std::string> diagnostic_only;  ///< verdicts reported but not counted
    json details = json::object();
    std::optional<std::string> error;
    double seconds = 0.0;

    // artifacts are collected here and written by the caller
    std::vector<std::pair<std::string, ScalarField>> snapshots;
    std::vector<std::pair<std::string, std::vector<OscillationRecord>>> cascades;

    void add(const std::string& key, LemmaVerdict v) { verdicts.emplace_back(key, std::move(v)); }

    bool counted(const std::string& key) const {
        return std::find(diagnostic_only.begin(), diagnostic_only.end(), key) == diagnostic_only.end();
    }

    std::string status() const {
        if (error) return "error";
        bool pass = false;
        for (const auto& [k, v] : verdicts) {
            if (!counted(k)) continue;
            const auto s = v.status();
            if (s == VerdictStatus::Refuted) return "refuted";
            pass = pass || s == VerdictStatus::Pass;
        }
        return pass ? "pass" : "vacuous";
    }
};

struct Context {
    const ExperimentConfig& cfg;
    std::optional<ConstantChain> chain;
    std::optional<double> delta;
    unsigned workers = 1;
};

LemmaVerdict plain_verdict(const std::string& name, double cell_width) {
    LemmaVerdict v;
    v.name = name;
    v.cell_width = cell_width;
    v.hypothesis_satisfied = true;
    return v;
}

SolveConfig solve_config(const ExperimentConfig& cfg, const GridSpec& grid, const HamiltonianSpec& H,
                         const CoercivityEnvelope& env, InitialData u0) {
    SolveConfig sc;
    sc.grid = grid;
    sc.hamiltonian = H;
    sc.envelope = env;
    sc.initial = std::move(u0);
    sc.c_cfl = cfg.solver.c_cfl;
    sc.sigma = cfg.solver.sigma;
    sc.sigma_inflation = cfg.solver.sigma_inflation;
    sc.sigma_floor = cfg.solver.sigma_floor;
    return sc;
}

InitialDataSpec member_initial(const ExperimentConfig& cfg, std::uint64_t member_seed) {
    InitialDataSpec s = cfg.initial;
    s.seed = derive_seed(member_seed, cfg.initial.seed);
    return s;
}

const ConstantChain& need_chain(const Context& ctx) {
    if (!ctx.chain) throw OutOfTheoremScope("this check needs the constant chain, which requires 1 < p < N");
    return *ctx.chain;
}

double cylinder_volume(int N) { return cylinder_measure(Cylinder::centered(-2.0, 2.0, N, 1.0), N); }

TheoremOptions theorem_options(const Context& ctx) {
    const auto& c = ctx.cfg.cascade;
    TheoremOptions o;
    o.points_per_axis = c.points_per_axis;
    o.x_radius = c.x_radius;
    o.anchor.rho = c.rho;
    o.anchor.half_width = c.half_width;
    o.anchor.cells = c.cells;
    o.zooms = c.zooms;
    o.schedule.mode = c.mode;
    o.schedule.cells = c.cells;
    o.schedule.c_cfl = ctx.cfg.solver.c_cfl;
    o.schedule.tolerance = ctx.cfg.tolerances.cascade;
    o.workers = ctx.workers;
    return o;
}

std::string point_stem(const std::string& prefix, std::size_t member, std::size_t point) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_m%03zu_p%03zu", prefix.c_str(), member, point);
    return buf;
}

LemmaVerdict records_verdict(const std::string& name, const TheoremReport& rep, double cell_width) {
    auto v = plain_verdict(name, cell_width);
    std::size_t records = 0, unsatisfied = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& bp : rep.points)
        for (const auto& r : bp.records) {
            ++records;
            if (!r.satisfied) ++unsatisfied;
            worst = std::max(worst, r.osc_measured - r.osc_bound);
        }
    v.hypothesis_values["base_points"] = static_cast<double>(rep.points.size());
    v.conclusion_values["records"] = static_cast<double>(records);
    v.conclusion_values["unsatisfied_records"] = static_cast<double>(unsatisfied);
    v.conclusion_values["failed_points"] = static_cast<double>(rep.failed_points);
    v.conclusion_values["max_osc_minus_bound"] = records ? worst : 0.0;
    v.conclusion_satisfied = unsatisfied == 0 && rep.failed_points == 0;
    return v;
}

void add_theorem(Member& m, const Context& ctx, const Trajectory& traj, const std::string& key,
                 const std::string& prefix) {
    const auto& chain = need_chain(ctx);
    const auto rep = theorem_check(traj, ctx.cfg.cascade.delta_time, chain, theorem_options(ctx));
    m.add(key, records_verdict("theorem-cascades", rep, traj.field.spec().cell_width()));
    m.details[key] = rep;
    for (std::size_t i = 0; i < rep.points.size(); ++i)
        m.cascades.emplace_back(point_stem(prefix, m.index, i), rep.points[i].records);
}

// Generic checks on one solved trajectory, for custom and zero-data runs.
void run_checks(Member& m, const Context& ctx, const Trajectory& traj) {
    const auto& cfg = ctx.cfg;
    const auto& f = traj.field;
    const auto& env = cfg.envelope;
    const int N = f.spec().dimension;
    for (const auto& name : cfg.checks) {
        try {
            if (name == "lemma1") {
                m.add(name, lemma_one_check(f, env, ctx.delta.value(), cfg.tolerances.lemma1));
            } else if (name == "lemma2") {
                const double a = cfg.chain.alpha_dg.value_or(cylinder_volume(N));
                m.add(name, lemma_two_check(f, env, a, ctx.delta.value()));
                if (!cfg.chain.alpha_dg) m.diagnostic_only.push_back(name);
            } else if (name == "osc_above") {
                const auto& chain = need_chain(ctx);
                auto v = oscillation_above_check(f, chain, cfg.tolerances.osc_above);
                if (cfg.tolerances.residual) {
                    const auto res = residual_subsolution(f, env, chain.S / chain.Lambda, chain.Lambda * chain.lambda);
                    const auto ext = residual_extremes(res.residual, Cylinder::centered(-2.0, 2.0, N, 1.0));
                    attach_residual_precondition(v, "subsolution_residual", ext.max_value, *cfg.tolerances.residual);
                }
                m.add(name, std::move(v));
            } else if (name == "osc_below") {
                const auto& chain = need_chain(ctx);
                auto v = oscillation_below_check(f, chain, cfg.tolerances.osc_below);
                if (cfg.tolerances.residual) {
                    const auto sup = residual_supersolution(f, env, chain.S * chain.Lambda);
                    attach_residual_precondition(v, "supersolution_residual", -sup.min_value,
                                                 *cfg.tolerances.residual);
                    const auto sub = residual_subsolution(f, env, chain.S / chain.Lambda, chain.Lambda * chain.lambda);
                    const auto ext = residual_extremes(sub.residual, Cylinder::centered(-2.0, 2.0, N, 1.0));
                    attach_residual_precondition(v, "subsolution_residual", ext.max_value, *cfg.tolerances.residual);
                }
                m.add(name, std::move(v));
            } else if (name == "cascade") {
                const auto& chain = need_chain(ctx);
                const auto& spec = f.spec();
                const std::vector<double> origin(static_cast<std::size_t>(N), 0.0);
                AnchorOptions ao;
                ao.tau = (spec.t1 - spec.t0) / 4.0;
                ao.rho = cfg.cascade.rho;
                ao.half_width = cfg.cascade.half_width;
                ao.cells = cfg.cascade.cells;
                const auto an = anchor_frame(traj, spec.t1, origin, ao);
                RefineSchedule sch;
                sch.mode = cfg.cascade.mode;
                sch.cells = cfg.cascade.cells;
                sch.c_cfl = cfg.solver.c_cfl;
                sch.tolerance = cfg.tolerances.cascade;
                const auto cas = zoom_cascade(an.frame, chain, cfg.cascade.zooms, sch);
                auto v = plain_verdict("zoom-cascade", spec.cell_width());
                std::size_t unsatisfied = 0;
                for (const auto& r : cas.records) unsatisfied += r.satisfied ? 0 : 1;
                v.conclusion_values["records"] = static_cast<double>(cas.records.size());
                v.conclusion_values["unsatisfied_records"] = static_cast<double>(unsatisfied);
                v.conclusion_satisfied = unsatisfied == 0 && !cas.error;
                if (cas.error) v.precondition_note = *cas.error;
                m.add(name, std::move(v));
                m.details["cascade"] = {{"records", cas.records},
                                        {"holder", holder_estimate(cas.records, chain)},
                                        {"error", cas.error ? json(*cas.error) : json(nullptr)}};
                m.cascades.emplace_back(point_stem("cascade", m.index, 0), cas.records);
            } else if (name == "theorem") {
                add_theorem(m, ctx, traj, name, "theorem");
            }
        } catch (const Error& e) {
            throw Error("check '" + name + "': " + e.what());
        }
    }
}

void scenario_custom(Member& m, const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto init = member_initial(cfg, m.seed);
    const auto traj = solve(solve_config(cfg, cfg.grid, cfg.hamiltonian, cfg.envelope,
                                         make_initial_data(init, cfg.grid.dimension, ctx.chain ? &*ctx.chain : nullptr)));
    m.details["solver"] = {{"substeps", traj.substeps}, {"max_sigma", traj.max_sigma}};
    run_checks(m, ctx, traj);
    m.snapshots.emplace_back("member_" + std::to_string(m.index), traj.field);
}

void scenario_hopf_lax(Member& m, const Context& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.grid.dimension != 1) throw InvalidArgument("hopf-lax-validation runs in one dimension");
    const auto u0 = make_initial_data(member_initial(cfg, m.seed), 1);
    const double p = cfg.hamiltonian.p;
    const double lip = std::abs(cfg.initial.amplitude) + 1.0;
    json rows = json::array();
    std::vector<double> errors;
    for (double w : cfg.sweep.widths) {
        GridSpec g = cfg.grid;
        g.cells = static_cast<int>(std::lround(2.0 * g.half_width / w));
        const auto traj = solve(solve_config(cfg, g, HamiltonianSpec::power_law(p), cfg.envelope, u0));
        double err = 0.0;
        const std::size_t last = g.time_steps();
        const double t = g.time(last);
        double x[1];
        for (int c = 0; c < g.cells; ++c) {
            x[0] = g.center(c);
            if (std::abs(x[0]) > cfg.sweep.oracle_radius) continue;
            const double exact = t > 0.0 ? hopf_lax(u0, t, x, p, {lip, 1e-9}) : u0(x);
            err = std::max(err, std::abs(traj.field.at(last, static_cast<std::size_t>(c)) - exact));
        }
        errors.push_back(err);
        rows.push_back({{"width", w}, {"cells", g.cells}, {"sup_error", err}, {"substeps", traj.substeps}});
    }
    json orders = json::array();
    double min_order = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const double order = std::log(errors[i - 1] / errors[i]) / std::log(cfg.sweep.widths[i - 1] / cfg.sweep.widths[i]);
        orders.push_back(order);
        min_order = std::min(min_order, order);
        monotone = monotone && errors[i] < errors[i - 1];
    }
    auto v = plain_verdict("hopf-lax-agreement", 2.0 * cfg.grid.half_width / cfg.grid.cells);
    v.hypothesis_satisfied = errors.size() >= 2;
    v.conclusion_values["min_order"] = errors.size() >= 2 ? min_order : 0.0;
    v.conclusion_values["finest_error"] = errors.empty() ? 0.0 : errors.back();
    v.conclusion_values["monotone"] = monotone ? 1.0 : 0.0;
    v.tolerances["order"] = cfg.tolerances.order;
    v.tolerances["error"] = cfg.tolerances.hopf_lax_error;
    v.conclusion_satisfied = monotone && min_order >= cfg.tolerances.order &&
                             !errors.empty() && errors.back() <= cfg.tolerances.hopf_lax_error;
    m.add("hopf_lax", std::move(v));
    m.details["hopf_lax"] = {{"rows", rows}, {"orders", orders}, {"oracle_radius", cfg.sweep.oracle_radius}};
}

std::vector<double> sample_slice(const GridSpec& g, const InitialData& u0) {
    std::vector<double> out(g.cells_per_slice());
    std::vector<double> x(static_cast<std::size_t>(g.dimension));
    for (std::size_t c = 0; c < out.size(); ++c) {
        g.cell_center(c, x);
        out[c] = u0(x);
    }
    return out;
}

void scenario_comparison(Member& m, const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const int N = cfg.grid.dimension;
    auto lower_spec = member_initial(cfg, m.seed);
    auto gap_spec = lower_spec;
    gap_spec.seed = derive_seed(lower_spec.seed, 1);
    const auto g1 = make_initial_data(lower_spec, N);
    const auto g2 = make_initial_data(gap_spec, N);
    const double gap = cfg.ensemble.pair_gap;
    const double off = gap_spec.offset, amp = gap_spec.amplitude;
    const InitialData lower = g1;
    const InitialData upper = [=](std::span<const double> x) {
        const double g = amp != 0.0 ? (g2(x) - off) / amp : 0.0;
        return g1(x) + gap * (1.0 + g) / 2.0;
    };

    const auto& H = cfg.hamiltonian;
    const auto coeff = slice_coefficients(cfg.grid, H, cfg.grid.t0);
    const auto a = sample_slice(cfg.grid, lower), b = sample_slice(cfg.grid, upper);
    // shared fixed sigma so both members take identical substeps
    const double sigma = cfg.solver.sigma.value_or(
        2.0 * cfg.solver.sigma_inflation *
        std::max({required_sigma(cfg.grid, coeff, H.p, a), required_sigma(cfg.grid, coeff, H.p, b), cfg.solver.sigma_floor}));
    auto sc = solve_config(cfg, cfg.grid, H, cfg.envelope, lower);
    sc.sigma = sigma;
    const auto lo = solve(sc);
    sc.initial = upper;
    const auto hi = solve(sc);

    double initial_gap = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < a.size(); ++c) initial_gap = std::min(initial_gap, b[c] - a[c]);
    double violation = 0.0, scale = 0.0;
    const auto lv = lo.field.values(), hv = hi.field.values();
    for (std::size_t i = 0; i < lv.size(); ++i) {
        violation = std::max(violation, lv[i] - hv[i]);
        scale = std::max({scale, std::abs(lv[i]), std::abs(hv[i])});
    }
    const double tol = 1e-12 + 2.0 * std::numeric_limits<double>::epsilon() * scale;
    auto v = plain_verdict("discrete-comparison", cfg.grid.cell_width());
    v.hypothesis_values["initial_min_gap"] = initial_gap;
    v.hypothesis_satisfied = initial_gap >= 0.0;
    v.conclusion_values["max_violation"] = violation;
    v.tolerances["conclusion"] = tol;
    v.conclusion_satisfied = violation <= tol;
    m.add("comparison", std::move(v));
    m.details["comparison"] = {{"sigma", sigma}, {"substeps", lo.substeps}};
}

void scenario_lemma1(Member& m, const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& env = cfg.envelope;
    const int N = cfg.grid.dimension;
    const double delta = ctx.delta.value();
    // lower envelope of the coercivity bounds: the extreme subsolution
    const auto H = HamiltonianSpec::scaled_power_law(env.p, 1.0 / env.lambda, -env.lambda);
    const auto base = member_initial(cfg, m.seed);

    auto run = [&](double s) {
        auto spec = base;
        spec.amplitude = s;
        return solve(solve_config(cfg, cfg.grid, H, env, make_initial_data(spec, N)));
    };
    auto mass_of = [&](const Trajectory& t) {
        return lemma_one_check(t.field, env, delta, cfg.tolerances.lemma1).hypothesis_values.at("positive_mass");
    };

    double s_lo = 0.0, s_hi = cfg.ensemble.amplitude_max;
    auto best = run(s_hi);
    double best_mass = mass_of(best);
    int solves = 1;
    if (best_mass > delta) {
        best = run(s_lo);
        best_mass = mass_of(best);
        ++solves;
        for (int i = 0; i < cfg.ensemble.bisection_steps; ++i) {
            const double mid = 0.5 * (s_lo + s_hi);
            auto t = run(mid);
            ++solves;
            const double mass = mass_of(t);
            if (mass <= delta) {
                s_lo = mid;
                best = std::move(t);
                best_mass = mass;
            } else {
                s_hi = mid;
            }
        }
    } else {
        s_lo = s_hi;
    }
    m.add("lemma1", lemma_one_check(best.field, env, delta, cfg.tolerances.lemma1));
    const auto ladder = energy_ladder(best.field, 6, env);
    json fit = nullptr;
    try {
        fit = recurrence_fit(ladder, N, env.p);
    } catch (const InvalidArgument&) {
    }
    m.details["lemma1"] = {{"amplitude", s_lo}, {"positive_mass", best_mass}, {"delta", delta},
                           {"solves", solves},  {"energy_ladder", ladder},   {"recurrence_fit", fit}};
    m.snapshots.emplace_back("member_" + std::to_string(m.index), best.field);
}

void scenario_prop(Member& m, const Context& ctx, bool above) {
    const auto& cfg = ctx.cfg;
    const auto& chain = need_chain(ctx);
    const int N = cfg.grid.dimension;
    const auto H = above ? HamiltonianSpec::scaled_power_law(chain.p, chain.S / chain.Lambda, -chain.Lambda * chain.lambda)
                         : HamiltonianSpec::scaled_power_law(chain.p, chain.S * chain.Lambda);
    const std::string key = above ? "osc_above" : "osc_below";
    auto local = cfg;
    local.checks = {key};
    const Context lctx{local, ctx.chain, ctx.delta, ctx.workers};

    json attempts = json::array();
    for (int attempt = 0; attempt < cfg.ensemble.max_attempts; ++attempt) {
        auto init = member_initial(cfg, derive_seed(m.seed, static_cast<std::uint64_t>(attempt)));
        const auto u0 = make_initial_data(init, N);
        // subsolution data must start below the conclusion's level
        const double cap = 2.0 - 4.0 * chain.Lambda * chain.lambda;
        const InitialData capped = [u0, cap](std::span<const double> x) { return std::min(u0(x), cap); };
        const auto traj = solve(solve_config(cfg, cfg.grid, H, cfg.envelope, capped));
        Member trial;
        trial.index = m.index;
        run_checks(trial, lctx, traj);
        const auto& v = trial.verdicts.front().second;
        attempts.push_back({{"attempt", attempt}, {"status", to_string(v.status())}});
        const bool last = attempt + 1 == cfg.ensemble.max_attempts;
        const auto st = v.status();
        if (st == VerdictStatus::Pass || st == VerdictStatus::Refuted || last) {
            m.add(key, v);
            m.details[key] = {{"attempts", attempts}, {"substeps", traj.substeps}};
            m.snapshots.emplace_back("member_" + std::to_string(m.index), traj.field);
            return;
        }
    }
}

void scenario_barrier(Member& m, const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& chain = need_chain(ctx);
    const auto& g = cfg.grid;
    if (g.t0 > -2.0 + 1e-9 || g.t1 < 2.0 - 1e-9) throw DomainMismatch("barrier: grid must cover [-2, 2]");
    const int N = g.dimension;
    const double h = g.cell_width();
    const double tol = cfg.tolerances.barrier_cells * h;
    const CoercivityEnvelope env{chain.Lambda, chain.p};
    const double A = chain.S * chain.Lambda;

    const auto psi = barrier_field(chain, g);
    const auto res = residual_supersolution(psi, env, A);
    // switchover where q (1 - |x|) - lambda1/8 (t + 2) = lambda1, plus the cone tip
    const auto keep = [&](double t, std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        const double r = std::sqrt(r2);
        const double switch_r = 1.0 - (chain.lambda1 + chain.lambda1 / 8.0 * (t + 2.0)) / chain.q;
        return std::abs(r - switch_r) > 2.0 * h && r > 2.0 * h;
    };
    const auto ext = residual_extremes(res.residual, Cylinder::centered(g.t0, g.t1, N, g.half_width), keep);
    auto rv = plain_verdict("barrier-residual", h);
    rv.hypothesis_values["cells"] = static_cast<double>(ext.cells);
    rv.hypothesis_satisfied = ext.cells > 0;
    rv.conclusion_values["max_abs_residual"] = std::max(std::abs(ext.max_value), std::abs(ext.min_value));
    rv.tolerances["conclusion"] = tol;
    rv.conclusion_satisfied = rv.conclusion_values["max_abs_residual"] <= tol;
    // psi moves by O(lambda1) over the box, far below the cell-width tolerance
    rv.diagnostics["residual_over_lambda1"] = rv.conclusion_values["max_abs_residual"] / chain.lambda1;
    m.add("barrier_residual", std::move(rv));

    const auto H = HamiltonianSpec::scaled_power_law(chain.p, A);
    const InitialData u0 = [&chain](std::span<const double> x) { return barrier_psi(chain, -2.0, x); };
    const auto traj = solve(solve_config(cfg, g, H, env, u0));
    const auto cmp = comparison_check(traj.field, chain, tol);
    auto cv = plain_verdict("barrier-comparison", h);
    cv.conclusion_values["min_margin"] = cmp.min_margin;
    cv.conclusion_values["violating_cells"] = static_cast<double>(cmp.violating_cells);
    cv.tolerances["conclusion"] = tol;
    cv.conclusion_satisfied = cmp.min_margin >= -tol;
    cv.diagnostics["margin_over_lambda1"] = cmp.min_margin / chain.lambda1;
    m.add("barrier_comparison", std::move(cv));
    m.details["barrier"] = {{"comparison", cmp}, {"substeps", traj.substeps}, {"kink_band_cells", 2}};
    m.snapshots.emplace_back("member_" + std::to_string(m.index), traj.field);
}

LemmaVerdict holder_self_test(const ConstantChain& chain) {
    auto v = plain_verdict("holder-self-test", 0.0);
    double worst = 0.0;
    for (double a : {0.25, 0.5, 1.0}) {
        std::vector<OscillationRecord> recs;
        for (int m = 0; m <= 6; ++m) {
            OscillationRecord r;
            r.m = m;
            r.cylinder.radius = 0.5 * std::pow(chain.epsilon1, m);
            r.osc_measured = 3.0 * std::pow(r.cylinder.radius, a);
            recs.push_back(r);
        }
        worst = std::max(worst, std::abs(holder_estimate(recs, chain).alpha_est - a));
    }
    v.conclusion_values["max_exponent_error"] = worst;
    v.tolerances["conclusion"] = 1e-6;
    v.conclusion_satisfied = worst <= 1e-6;
    return v;
}

void scenario_kink_cascade(Member& m, const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& chain = need_chain(ctx);
    const auto traj = solve(solve_config(cfg, cfg.grid, cfg.hamiltonian, cfg.envelope,
                                         make_initial_data(member_initial(cfg, m.seed), cfg.grid.dimension)));
    const auto rep = theorem_check(traj, cfg.cascade.delta_time, chain, theorem_options(ctx));
    m.add("cascade_records", records_verdict("cascade-records", rep, cfg.grid.cell_width()));

    auto hv = plain_verdict("holder-exponent", cfg.grid.cell_width());
    hv.conclusion_values["min_alpha_est"] = rep.min_alpha_est;
    hv.conclusion_values["alpha_theory"] = rep.alpha_theory;
    hv.conclusion_values["max_quotient"] = rep.max_quotient;
    hv.tolerances["alpha_min"] = cfg.tolerances.alpha_min;
    hv.conclusion_satisfied = rep.min_alpha_est >= cfg.tolerances.alpha_min;
    m.add("holder_exponent", std::move(hv));
    m.add("holder_self_test", holder_self_test(chain));
    m.details["theorem"] = rep;
    for (std::size_t i = 0; i < rep.points.size(); ++i)
        m.cascades.emplace_back(point_stem("kink", m.index, i), rep.points[i].records);
    m.snapshots.emplace_back("member_" + std::to_string(m.index), traj.field);
}

void scenario_eta_sweep(Member& m, const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& chain = need_chain(ctx);
    const int N = cfg.grid.dimension;
    const auto u0 = make_initial_data(member_initial(cfg, m.seed), N);
    const auto samples = coercivity_samples(N, cfg.grid.t0, cfg.grid.t1, cfg.grid.half_width, 10.0, 2000,
                                            derive_seed(m.seed, 7));
    json table = json::array();
    std::size_t violations = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool failures = false;
    for (std::size_t i = 0; i < cfg.sweep.etas.size(); ++i) {
        const double eta = cfg.sweep.etas[i];
        auto H = HamiltonianSpec::rough(cfg.hamiltonian.p, cfg.hamiltonian.lambda, eta);
        const auto coer = coercivity_check(H, cfg.envelope, samples);
        violations += coer.violations.size();
        const auto traj = solve(solve_config(cfg, cfg.grid, H, cfg.envelope, u0));
        const auto rep = theorem_check(traj, cfg.cascade.delta_time, chain, theorem_options(ctx));
        lo = std::min(lo, rep.min_alpha_est);
        hi = std::max(hi, rep.min_alpha_est);
        failures = failures || rep.failed_points > 0;
        table.push_back({{"eta", eta},
                         {"min_alpha_est", rep.min_alpha_est},
                         {"max_quotient", rep.max_quotient},
                         {"failed_points", rep.failed_points},
                         {"coercivity_violations", coer.violations.size()},
                         {"coercivity_margin", coer.margin},
                         {"substeps", traj.substeps}});
        for (std::size_t k = 0; k < rep.points.size(); ++k)
            m.cascades.emplace_back(point_stem("eta" + std::to_string(i), m.index, k), rep.points[k].records);
    }
    auto cv = plain_verdict("coercivity", cfg.grid.cell_width());
    cv.hypothesis_values["samples"] = static_cast<double>(samples.size());
    cv.conclusion_values["violations"] = static_cast<double>(violations);
    cv.conclusion_satisfied = violations == 0;
    m.add("coercivity", std::move(cv));

    auto ev = plain_verdict("eta-independence", cfg.grid.cell_width());
    ev.hypothesis_values["etas"] = static_cast<double>(cfg.sweep.etas.size());
    ev.hypothesis_satisfied = !cfg.sweep.etas.empty();
    ev.conclusion_values["min_alpha_est_low"] = lo;
    ev.conclusion_values["min_alpha_est_high"] = hi;
    ev.conclusion_values["ratio"] = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    ev.conclusion_values["failed_cascades"] = failures ? 1.0 : 0.0;
    ev.tolerances["ratio"] = cfg.tolerances.eta_ratio;
    ev.conclusion_satisfied = lo > 0.0 && hi / lo < cfg.tolerances.eta_ratio && !failures;
    m.add("eta_independence", std::move(ev));
    m.details["eta_sweep"] = table;
}

void run_member(Member& m, const Context& ctx) {
    const auto& s = ctx.cfg.scenario;
    if (s == "hopf-lax-validation") return scenario_hopf_lax(m, ctx);
    if (s == "comparison-pairs") return scenario_comparison(m, ctx);
    if (s == "pointwise-bound-ensemble") return scenario_lemma1(m, ctx);
    if (s == "osc-above-ensemble") return scenario_prop(m, ctx, true);
    if (s == "osc-below-ensemble") return scenario_prop(m, ctx, false);
    if (s == "barrier") return scenario_barrier(m, ctx);
    if (s == "kink-cascade") return scenario_kink_cascade(m, ctx);
    if (s == "rough-eta-sweep") return scenario_eta_sweep(m, ctx);
    return scenario_custom(m, ctx);
}

json member_json(const Member& m) {
    json verdicts = json::object();
    for (const auto& [k, v] : m.verdicts) {
        json j = v;
        if (!m.counted(k)) j["diagnostic_only"] = true;
        verdicts[k] = j;
    }
    return {{"index", m.index},
            {"seed", m.seed},
            {"status", m.status()},
            {"verdicts", verdicts},
            {"details", m.details},
            {"error", m.error ? json(*m.error) : json(nullptr)}};
}

json summarize(const std::vector<Member>& members, const ExperimentConfig& cfg, int N) {
    json counts = {{"pass", 0}, {"vacuous", 0}, {"refuted", 0}, {"error", 0}};
    json per_check = json::object();
    json refutations = json::array();
    json errors = json::array();
    std::optional<double> alpha_empirical;
    bool lemma2_seen = false;
    for (const auto& m : members) {
        counts[m.status()] = counts[m.status()].get<int>() + 1;
        if (m.error) errors.push_back({{"member", m.index}, {"message", *m.error}});
        for (const auto& [k, v] : m.verdicts) {
            if (!per_check.contains(k))
                per_check[k] = {{"pass", 0}, {"vacuous", 0}, {"refuted", 0}, {"precondition_violated", 0}};
            const auto s = to_string(v.status());
            per_check[k][s] = per_check[k][s].get<int>() + 1;
            if (m.counted(k) && v.status() == VerdictStatus::Refuted)
                refutations.push_back({{"member", m.index}, {"check", k}});
            // empirical alpha_dg: the smallest middle-set measure at which the lemma fails
            if (!m.counted(k) && k == "lemma2") {
                lemma2_seen = true;
                const bool below_half =
                    v.hypothesis_values.at("measure_nonpositive") >= v.hypothesis_values.at("half_cylinder");
                if (v.precondition_satisfied && below_half && !v.conclusion_satisfied) {
                    const double mid = v.hypothesis_values.at("measure_middle");
                    alpha_empirical = std::min(alpha_empirical.value_or(mid), mid);
                }
            }
        }
    }
    json out = {{"members", members.size()}, {"counts", counts},       {"per_check", per_check},
                {"refutations", refutations}, {"errors", errors}};
    if (!cfg.chain.alpha_dg && lemma2_seen) {
        out["alpha_dg_empirical"] = alpha_empirical.value_or(cylinder_volume(N));
        out["alpha_dg_empirical_bounded"] = alpha_empirical.has_value();
    }
    return out;
}

std::string overall_status(const std::vector<Member>& members) {
    bool error = false, pass = false;
    for (const auto& m : members) {
        const auto s = m.status();
        if (s == "refuted") return "refuted";
        error = error || s == "error";
        pass = pass || s == "pass";
    }
    if (error) return "error";
    return pass ? "pass" : "vacuous";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

}  // namespace

RunReport execute(const ExperimentConfig& cfg, const RunOptions& options) {
    if (options.count < 1) throw ConfigError("count must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    const int N = cfg.grid.dimension;
    const double p = cfg.hamiltonian.p;

    Context ctx{cfg, std::nullopt, cfg.chain.delta, std::max(1u, options.workers)};
    json chain_json = nullptr;
    if (p > 1.0 && p < N) {
        ctx.chain = build_constant_chain(N, p, cfg.envelope.lambda, cfg.chain.alpha_dg.value_or(cfg.chain.alpha_fallback));
        if (!ctx.delta) ctx.delta = delta_constant(fast_convergence_threshold(cfg.chain.D, p / N), cfg.envelope.lambda);
        chain_json = *ctx.chain;
    }

    std::vector<Member> members(options.count);
    for (std::size_t i = 0; i < members.size(); ++i) {
        members[i].index = i;
        members[i].seed = derive_seed(cfg.seed, i);
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < members.size(); i = next++) {
            auto& m = members[i];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                run_member(m, ctx);
            } catch (const Error& e) {
                m.error = e.what();
            } catch (const std::exception& e) {
                m.error = std::string("unexpected: ") + e.what();
            }
            m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const unsigned nthreads = std::min<unsigned>(ctx.workers, static_cast<unsigned>(members.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    }

    const std::string mode = options.ensemble ? "ensemble" : "run";
    RunReport out;
    out.status = overall_status(members);
    json& r = out.report;
    r["version"] = kReportVersion;
    r["scenario"] = cfg.scenario;
    r["mode"] = mode;
    r["seed"] = cfg.seed;
    r["count"] = options.count;
    r["status"] = out.status;
    r["config"] = cfg.echo;
    r["chain"] = chain_json;
    r["delta"] = ctx.delta ? json(*ctx.delta) : json(nullptr);
    json ms = json::array();
    for (const auto& m : members) ms.push_back(member_json(m));
    r["members"] = ms;
    r["summary"] = summarize(members, cfg, N);

    json artifacts = json::array();
    if (options.write) {
        const fs::path root = options.out_dir.empty() ? cfg.output_dir : options.out_dir;
        const auto stamp = hash8(cfg.echo.dump() + "|" + mode + "|" + std::to_string(options.count));
        out.run_dir = root / (cfg.scenario + "-" + std::to_string(cfg.seed) + "-" + stamp);
        fs::create_directories(out.run_dir);
        if (!chain_json.is_null()) {
            write_text(out.run_dir / "chain.json", chain_json.dump(2) + "\n");
            artifacts.push_back("chain.json");
        }
        for (const auto& m : members) {
            if (!m.cascades.empty()) fs::create_directories(out.run_dir / "cascades");
            for (const auto& [stem, recs] : m.cascades) {
                std::ofstream csv(out.run_dir / "cascades" / (stem + ".csv"));
                write_cascade_csv(recs, csv);
                artifacts.push_back("cascades/" + stem + ".csv");
            }
            if (!cfg.snapshots) continue;
            for (const auto& [stem, field] : m.snapshots) {
                write_snapshot(field, out.run_dir / "snapshots", stem, field.spec().time_steps());
                artifacts.push_back("snapshots/" + stem + ".csv");
                artifacts.push_back("snapshots/" + stem + ".json");
            }
        }
        artifacts.push_back("report.json");
    }
    r["artifacts"] = artifacts;

    json member_seconds = json::array();
    for (const auto& m : members) member_seconds.push_back(m.seconds);
    r["timings"] = {{"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
                    {"member_seconds", member_seconds},
                    {"workers", ctx.workers}};
    if (options.write) write_text(out.run_dir / "report.json", r.dump(2) + "\n");
    return out;
}

int exit_code(const std::string& status) {
    if (status == "pass" || status == "vacuous") return 0;
    if (status == "refuted") return 1;
    return 3;
}

std::string report_without_timings(const nlohmann::json& report) {
    auto copy = report;
    copy.erase("timings");
    return copy.dump(2);
}

}  // namespace hjlab
