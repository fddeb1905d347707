#include "hjlab/oscillation.hpp"

#include "hjlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace hjlab {

double ConstantChain::cylinder_volume() const { return 4.0 * ball_volume(N, 1.0); }

namespace {

const double ln2 = std::numbers::ln2;

/// Smallest x in [lo, hi] with pred(x) true, for pred monotone false -> true.
double bisect_threshold(const std::function<bool(double)>& pred, double lo, double hi, const char* what) {
    if (pred(lo)) return lo;
    int expansions = 0;
    while (!pred(hi)) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 2000 || !std::isfinite(hi)) {
            std::ostringstream os;
            os << what << ": no bracket found, last tried [" << lo << ", " << hi << "]";
            throw ConvergenceError(os.str());
        }
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * std::abs(hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (pred(mid) ? hi : lo) = mid;
    }
    return hi;
}

/// Root of an increasing function on [lo, hi].
double bisect_root(const std::function<double(double)>& g, double lo, double hi, const char* what) {
    if (!(g(lo) < 0.0) || !(g(hi) > 0.0)) {
        std::ostringstream os;
        os << what << ": root not bracketed by [" << lo << ", " << hi << "] (values " << g(lo) << ", " << g(hi) << ")";
        throw ConvergenceError(os.str());
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double eq_slack(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return 1e-12 - std::abs(a - b) / scale;
}

}  // namespace

ConstantChain build_constant_chain(int N, double p, double Lambda, double alpha_dg) {
    require_theorem_scope(N, p);
    if (!(Lambda >= 1.0)) throw InvalidArgument("build_constant_chain: need Lambda >= 1");
    if (!(alpha_dg > 0.0) || !std::isfinite(alpha_dg)) throw InvalidArgument("build_constant_chain: need alpha > 0");

    ConstantChain ch;
    ch.N = N;
    ch.p = p;
    ch.Lambda = Lambda;
    ch.alpha_dg = alpha_dg;
    ch.K0 = static_cast<int>(std::floor(ch.cylinder_volume() / alpha_dg)) + 1;
    ch.lambda = std::ldexp(1.0, -(ch.K0 + 1));
    const double log_S = (p - 1.0) * (ch.K0 + 1) * ln2;
    ch.S = std::exp(log_S);
    const double log_c = std::log(8.0 * Lambda) + log_S;
    ch.c = std::exp(log_c);

    // 2 l = (l / c)^{1/p}, solved for y = log l
    const double y = bisect_root([&](double v) { return ln2 + v - (v - log_c) / p; }, -1e4, 10.0, "lambda1_max");
    ch.lambda1_max = std::exp(y);
    ch.lambda1 = 0.5 * std::min(ch.lambda, ch.lambda1_max);
    ch.q = std::exp((std::log(ch.lambda1) - log_c) / p);
    ch.lambda_tilde = 0.5 * ch.lambda1;
    ch.theta = (4.0 - ch.lambda_tilde) / 4.0;
    ch.log_theta = std::log1p(-ch.lambda_tilde / 4.0);
    ch.a_exp = 1.0;
    ch.epsilon = std::ldexp(1.0, -(ch.K0 + 1));

    // both zoom conditions are monotone in r = (p - 1) / (p - alpha1)
    const double need3 = std::log(2.0 * (ch.lambda_tilde / (ch.theta * ch.q) + 1.0));
    const auto ok = [&](double r) {
        const bool check3 = -r * ch.log_theta >= need3;
        const bool check4 = -(r * p - (p - 1.0)) * ch.log_theta > std::log(4.0);
        return check3 && check4;
    };
    ch.r_min = bisect_threshold(ok, 1.0, 2.0, "alpha1");
    ch.r = 2.0 * ch.r_min;
    ch.alpha1_gap = (p - 1.0) / ch.r;
    ch.alpha1 = p - ch.alpha1_gap;
    ch.epsilon1 = std::exp(ch.r * ch.log_theta);
    ch.alpha_H = 1.0 / ch.r;

    for (const auto& inv : validate_chain(ch)) {
        if (!(inv.slack >= 0.0)) {
            std::ostringstream os;
            os << "build_constant_chain: invariant " << inv.name << " fails with slack " << inv.slack;
            throw ConvergenceError(os.str());
        }
    }
    return ch;
}

std::vector<InvariantSlack> validate_chain(const ConstantChain& ch) {
    std::vector<InvariantSlack> out;
    const double p = ch.p;
    const double K1 = ch.K0 + 1;

    const int K0_expected = static_cast<int>(std::floor(4.0 * ball_volume(ch.N, 1.0) / ch.alpha_dg)) + 1;
    out.push_back({"K0", ch.K0 == K0_expected ? 1e-12 : -1.0});
    out.push_back({"lambda", eq_slack(ch.lambda, std::pow(2.0, -K1))});

    const double c = 8.0 * ch.Lambda * std::pow(2.0, (p - 1.0) * K1);
    const double q_formula = std::pow(ch.lambda1 / c, 1.0 / p);
    out.push_back({"lambda1", std::min({ch.lambda1 / ch.lambda, 1.0 - ch.lambda1 / ch.lambda,
                                        1.0 - 2.0 * ch.lambda1 / q_formula})});
    out.push_back({"q", eq_slack(ch.q, q_formula)});
    out.push_back({"lambda_tilde", eq_slack(ch.lambda_tilde, ch.lambda1 / 2.0)});

    const double log_eps = std::log(ch.epsilon);
    const double required = eq_slack(-(p - ch.a_exp) * log_eps, K1 * (p - 1.0) * ln2);
    const double small = (-ch.a_exp * log_eps - K1 * ln2) / (K1 * ln2) + 1e-12;
    out.push_back({"epsilon", std::min(required, small)});

    const double log_theta = std::log1p(-ch.lambda_tilde / 4.0);
    out.push_back({"epsilon1", std::min({eq_slack(ch.theta, (4.0 - ch.lambda_tilde) / 4.0),
                                         eq_slack(ch.alpha1, p - ch.alpha1_gap),
                                         eq_slack(std::log(ch.epsilon1), (p - 1.0) / ch.alpha1_gap * log_theta)})});

    const double lhs = (4.0 / (4.0 - ch.lambda_tilde)) * (2.0 + ch.lambda_tilde / 2.0);
    const double rhs = 2.0 + ch.q * (1.0 / (2.0 * ch.epsilon1) - 1.0);
    const double check3 = (rhs - lhs) / ch.q;
    const double check4 = (std::pow(ch.epsilon1, -ch.alpha1) - 4.0) / 4.0;
    out.push_back({"alpha1", std::min({ch.alpha1 - 1.0, ch.alpha1_gap / p, check3, check4})});

    out.push_back({"alpha_H", std::min({ch.alpha_H, 1.0 - ch.alpha_H, eq_slack(ch.alpha_H, ch.alpha1_gap / (p - 1.0))})});
    return out;
}

void to_json(nlohmann::json& j, const ConstantChain& ch) {
    j = nlohmann::json{{"N", ch.N},
                       {"p", ch.p},
                       {"Lambda", ch.Lambda},
                       {"alpha_dg", ch.alpha_dg},
                       {"K0", ch.K0},
                       {"lambda", ch.lambda},
                       {"S", ch.S},
                       {"c", ch.c},
                       {"lambda1_max", ch.lambda1_max},
                       {"lambda1", ch.lambda1},
                       {"q", ch.q},
                       {"lambda_tilde", ch.lambda_tilde},
                       {"theta", ch.theta},
                       {"log_theta", ch.log_theta},
                       {"a_exp", ch.a_exp},
                       {"epsilon", ch.epsilon},
                       {"r", ch.r},
                       {"r_min", ch.r_min},
                       {"alpha1_gap", ch.alpha1_gap},
                       {"alpha1", ch.alpha1},
                       {"epsilon1", ch.epsilon1},
                       {"alpha_H", ch.alpha_H}};
    nlohmann::json inv = nlohmann::json::object();
    for (const auto& s : validate_chain(ch)) inv[s.name] = s.slack;
    j["invariant_slack"] = inv;
}

void from_json(const nlohmann::json& j, ConstantChain& ch) {
    j.at("N").get_to(ch.N);
    j.at("p").get_to(ch.p);
    j.at("Lambda").get_to(ch.Lambda);
    j.at("alpha_dg").get_to(ch.alpha_dg);
    j.at("K0").get_to(ch.K0);
    j.at("lambda").get_to(ch.lambda);
    j.at("S").get_to(ch.S);
    j.at("c").get_to(ch.c);
    j.at("lambda1_max").get_to(ch.lambda1_max);
    j.at("lambda1").get_to(ch.lambda1);
    j.at("q").get_to(ch.q);
    j.at("lambda_tilde").get_to(ch.lambda_tilde);
    j.at("theta").get_to(ch.theta);
    j.at("log_theta").get_to(ch.log_theta);
    j.at("a_exp").get_to(ch.a_exp);
    j.at("epsilon").get_to(ch.epsilon);
    j.at("r").get_to(ch.r);
    j.at("r_min").get_to(ch.r_min);
    j.at("alpha1_gap").get_to(ch.alpha1_gap);
    j.at("alpha1").get_to(ch.alpha1);
    j.at("epsilon1").get_to(ch.epsilon1);
    j.at("alpha_H").get_to(ch.alpha_H);
}

ScalarField dyadic_ladder(const ScalarField& f, int k) {
    if (k < 1) throw InvalidArgument("dyadic_ladder: need k >= 1");
    const double shift = 2.0 * (1.0 - std::ldexp(1.0, -k));
    return map_values(f, [k, shift](double, std::span<const double>, double u) { return std::ldexp(u - shift, k); });
}

namespace {

struct Extremes {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
};

Extremes extremes(const ScalarField& f, const Cylinder& cyl) {
    const auto sel = select_cells(f.spec(), cyl);
    Extremes e;
    for (std::size_t i : sel.slices) {
        const auto s = f.slice(i);
        for (std::size_t c : sel.cells) {
            e.lo = std::min(e.lo, s[c]);
            e.hi = std::max(e.hi, s[c]);
        }
    }
    return e;
}

void require_lab_cylinder(const GridSpec& spec, const char* who) {
    const double eps = 1e-9;
    if (spec.t0 > -2.0 + eps || spec.t1 < 2.0 - eps || spec.half_width < 1.0) {
        std::ostringstream os;
        os << who << ": field must cover [-2,2] x B(1)";
        throw DomainMismatch(os.str());
    }
}

}  // namespace

LemmaVerdict oscillation_above_check(const ScalarField& f, const ConstantChain& chain, double tolerance) {
    const GridSpec& spec = f.spec();
    require_lab_cylinder(spec, "oscillation_above_check");
    const int N = spec.dimension;
    const auto cyl = Cylinder::centered(-2.0, 2.0, N, 1.0);
    const auto late = Cylinder::centered(1.0, 2.0, N, 1.0);

    LemmaVerdict v;
    v.name = "oscillation-above";
    v.cell_width = spec.cell_width();
    const double top = extremes(f, cyl).hi;
    v.diagnostics["max"] = top;
    if (top > 2.0) {
        v.precondition_satisfied = false;
        std::ostringstream os;
        os << "f exceeds 2 on [-2,2] x B(1): max " << top;
        v.precondition_note = os.str();
    }
    const double total = level_set_measure(f, cyl, LevelRange::everything()).measure;
    const double below = level_set_measure(f, cyl, LevelRange::at_most(0.0)).measure;
    v.hypothesis_values["measure_nonpositive"] = below;
    v.hypothesis_values["half_cylinder"] = 0.5 * total;
    v.hypothesis_satisfied = below >= 0.5 * total;

    const double late_max = extremes(f, late).hi;
    v.conclusion_values["max_late"] = late_max;
    v.conclusion_values["bound"] = 2.0 - chain.lambda;
    v.tolerances["conclusion"] = tolerance;
    v.conclusion_satisfied = late_max <= 2.0 - chain.lambda + tolerance;

    // pigeonhole witness: some ladder level has a thin middle set
    int j0 = -1;
    double middle_j0 = 0.0;
    for (int k = 1; k <= chain.K0; ++k) {
        const double lo = 2.0 - std::ldexp(1.0, 1 - k);
        const double middle = level_set_measure(f, cyl, LevelRange::open(lo, lo + std::ldexp(1.0, -k))).measure;
        if (middle <= chain.alpha_dg) {
            j0 = k;
            middle_j0 = middle;
            break;
        }
    }
    v.diagnostics["j0"] = j0;
    v.diagnostics["middle_measure_j0"] = middle_j0;
    v.diagnostics["cell_oscillation"] = cell_oscillation(f, late);
    return v;
}

ScalarField time_reverse(const ScalarField& f) {
    const GridSpec& spec = f.spec();
    if (std::abs(spec.t0 + spec.t1) > 1e-12 * std::max(1.0, std::abs(spec.t1)))
        throw InvalidArgument("time_reverse: time interval is not symmetric about 0");
    const std::size_t n = spec.time_steps();
    const std::size_t per = spec.cells_per_slice();
    std::vector<double> values(f.values().size());
    for (std::size_t i = 0; i <= n; ++i) {
        const auto s = f.slice(n - i);
        for (std::size_t c = 0; c < per; ++c) values[i * per + c] = -s[c];
    }
    return ScalarField(spec, std::move(values));
}

double barrier_psi(const ConstantChain& chain, double t, std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double moving = -2.0 - (chain.lambda1 / 8.0) * (t + 2.0) + chain.q * (1.0 - std::sqrt(r2));
    return std::min(-2.0 + chain.lambda1, moving);
}

ScalarField barrier_field(const ConstantChain& chain, const GridSpec& spec) {
    return make_field(spec, [&chain](double t, std::span<const double> x) { return barrier_psi(chain, t, x); });
}

ComparisonReport comparison_check(const ScalarField& f, const ConstantChain& chain, double tolerance,
                                  double initial_slack) {
    const GridSpec& spec = f.spec();
    ComparisonReport rep;
    rep.tolerance = tolerance;
    rep.min_margin = std::numeric_limits<double>::infinity();
    std::vector<double> x(static_cast<std::size_t>(spec.dimension));
    for (std::size_t i = 0; i < spec.time_slices(); ++i) {
        const double t = spec.time(i);
        const auto s = f.slice(i);
        for (std::size_t c = 0; c < s.size(); ++c) {
            spec.cell_center(c, x);
            const double margin = s[c] - barrier_psi(chain, t, x);
            if (i == 0 && margin < -initial_slack) {
                std::ostringstream os;
                os << "comparison_check: initial slice lies below the barrier by " << -margin << " at x=(";
                for (std::size_t a = 0; a < x.size(); ++a) os << (a ? ", " : "") << x[a];
                os << ")";
                throw PreconditionError(os.str());
            }
            if (margin < -tolerance) ++rep.violating_cells;
            if (margin < rep.min_margin) {
                rep.min_margin = margin;
                rep.worst_t = t;
                rep.worst_x = x;
            }
        }
    }
    return rep;
}

void to_json(nlohmann::json& j, const ComparisonReport& r) {
    j = nlohmann::json{{"min_margin", r.min_margin},
                       {"violating_cells", r.violating_cells},
                       {"tolerance", r.tolerance},
                       {"worst_t", r.worst_t},
                       {"worst_x", r.worst_x}};
}

LemmaVerdict oscillation_below_check(const ScalarField& f, const ConstantChain& chain, double tolerance) {
    const GridSpec& spec = f.spec();
    require_lab_cylinder(spec, "oscillation_below_check");
    const int N = spec.dimension;
    const auto cyl = Cylinder::centered(-2.0, 2.0, N, 1.0);

    LemmaVerdict v;
    v.name = "oscillation-below";
    v.cell_width = spec.cell_width();

    const double bottom = extremes(f, cyl).lo;
    const double total = level_set_measure(f, cyl, LevelRange::everything()).measure;
    const double above = level_set_measure(f, cyl, LevelRange::at_least(0.0)).measure;

    // growth envelope on the whole box over [-2, 2]
    double envelope_slack = std::numeric_limits<double>::infinity();
    std::vector<double> x(static_cast<std::size_t>(N));
    const auto window = select_cells(spec, Cylinder{-2.0, 2.0, std::vector<double>(N, 0.0), 1.0});
    for (std::size_t i : window.slices) {
        const auto s = f.slice(i);
        for (std::size_t c = 0; c < s.size(); ++c) {
            spec.cell_center(c, x);
            double r2 = 0.0;
            for (double xi : x) r2 += xi * xi;
            const double floor_value = -2.0 - chain.q * std::max(std::sqrt(r2) - 1.0, 0.0);
            envelope_slack = std::min(envelope_slack, s[c] - floor_value);
        }
    }

    v.hypothesis_values["min"] = bottom;
    v.hypothesis_values["measure_nonnegative"] = above;
    v.hypothesis_values["half_cylinder"] = 0.5 * total;
    v.hypothesis_values["envelope_slack"] = envelope_slack;
    v.hypothesis_satisfied = bottom >= -2.0 && above >= 0.5 * total && envelope_slack >= 0.0;

    const double late_min = extremes(f, Cylinder::centered(1.0, 2.0, N, 0.5)).lo;
    v.conclusion_values["min_late"] = late_min;
    v.conclusion_values["bound"] = -2.0 + chain.lambda_tilde;
    v.tolerances["conclusion"] = tolerance;
    v.conclusion_satisfied = late_min >= -2.0 + chain.lambda_tilde - tolerance;

    const double early_min = extremes(f, Cylinder::centered(-2.0, -1.0, N, 1.0)).lo;
    v.diagnostics["min_early"] = early_min;
    v.diagnostics["early_bound"] = -2.0 + chain.lambda;
    v.diagnostics["early_holds"] = early_min >= -2.0 + chain.lambda ? 1.0 : 0.0;
    return v;
}

void attach_residual_precondition(LemmaVerdict& v, const std::string& name, double residual, double tolerance) {
    v.diagnostics[name] = residual;
    v.tolerances[name] = tolerance;
    if (residual > tolerance) {
        v.precondition_satisfied = false;
        std::ostringstream os;
        os << name << " residual " << residual << " exceeds " << tolerance;
        v.precondition_note += (v.precondition_note.empty() ? "" : "; ") + os.str();
    }
}

}  // namespace hjlab
