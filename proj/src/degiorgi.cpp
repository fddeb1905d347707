#include "hjlab/degiorgi.hpp"

#include "hjlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hjlab {

std::string to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::Pass: return "pass";
        case VerdictStatus::Vacuous: return "vacuous";
        case VerdictStatus::Refuted: return "refuted";
        case VerdictStatus::PreconditionViolated: return "precondition-violated";
    }
    return "unknown";
}

VerdictStatus LemmaVerdict::status() const {
    if (!precondition_satisfied) return VerdictStatus::PreconditionViolated;
    if (!hypothesis_satisfied) return VerdictStatus::Vacuous;
    return conclusion_satisfied ? VerdictStatus::Pass : VerdictStatus::Refuted;
}

void to_json(nlohmann::json& j, const LemmaVerdict& v) {
    j = nlohmann::json{{"name", v.name},
                       {"status", to_string(v.status())},
                       {"hypothesis_values", v.hypothesis_values},
                       {"hypothesis_satisfied", v.hypothesis_satisfied},
                       {"conclusion_values", v.conclusion_values},
                       {"conclusion_satisfied", v.conclusion_satisfied},
                       {"precondition_satisfied", v.precondition_satisfied},
                       {"tolerances", v.tolerances},
                       {"cell_width", v.cell_width}};
    if (!v.precondition_note.empty()) j["precondition_note"] = v.precondition_note;
    if (!v.diagnostics.empty()) j["diagnostics"] = v.diagnostics;
}

void require_theorem_scope(int dimension, double p) {
    if (!(p > 1.0) || !(p < dimension)) {
        std::ostringstream os;
        os << "exponent p=" << p << " outside 1 < p < N=" << dimension;
        throw OutOfTheoremScope(os.str());
    }
}

namespace {

void require_cover(const GridSpec& spec, double t_lo, double t_hi, double radius, const char* who) {
    const double eps = 1e-9 * std::max(1.0, spec.t1 - spec.t0);
    if (spec.t0 > t_lo + eps || spec.t1 < t_hi - eps || spec.half_width < radius) {
        std::ostringstream os;
        os << who << ": field on [" << spec.t0 << ", " << spec.t1 << "] x [-" << spec.half_width << ", "
           << spec.half_width << "]^N does not cover [" << t_lo << ", " << t_hi << "] x B(" << radius << ")";
        throw DomainMismatch(os.str());
    }
}

/// Integral of g(f) over a cylinder.
template <class G>
double integrate(const ScalarField& f, const Cylinder& cyl, G g) {
    const auto sel = select_cells(f.spec(), cyl);
    double total = 0.0;
    for (std::size_t k = 0; k < sel.slices.size(); ++k) {
        const auto s = f.slice(sel.slices[k]);
        double sum = 0.0;
        for (std::size_t c : sel.cells) sum += g(s[c]);
        total += sum * sel.time_weights[k];
    }
    return total * sel.cell_volume;
}

double max_over(const ScalarField& f, const Cylinder& cyl) {
    const auto sel = select_cells(f.spec(), cyl);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i : sel.slices) {
        const auto s = f.slice(i);
        for (std::size_t c : sel.cells) m = std::max(m, s[c]);
    }
    return m;
}

double grad_p(const GridSpec& spec, std::span<const double> v, std::size_t c, double p, std::span<double> g) {
    forward_gradient(spec, v, c, g);
    double n2 = 0.0;
    for (double gi : g) n2 += gi * gi;
    return n2 == 0.0 ? 0.0 : std::pow(n2, 0.5 * p);
}

}  // namespace

ScalarField truncate(const ScalarField& f, int k) {
    if (k < 1) throw InvalidArgument("truncate: need k >= 1");
    const double level = 1.0 - std::ldexp(1.0, -k);
    return map_values(f, [level](double, std::span<const double>, double u) { return std::max(u - level, 0.0); });
}

EnergyEntry truncated_energy(const ScalarField& f, int k, const CoercivityEnvelope& env) {
    if (k < 1) throw InvalidArgument("truncated_energy: need k >= 1");
    const GridSpec& spec = f.spec();
    require_theorem_scope(spec.dimension, env.p);
    EnergyEntry e;
    e.k = k;
    e.T = 1.0 - std::ldexp(1.0, -k);
    require_cover(spec, e.T, 2.0, 1.0, "truncated_energy");
    const auto sel = select_cells(spec, Cylinder::centered(e.T, 2.0, spec.dimension, 1.0));
    std::vector<double> v(spec.cells_per_slice());
    std::vector<double> g(static_cast<std::size_t>(spec.dimension));
    for (std::size_t n = 0; n < sel.slices.size(); ++n) {
        const auto s = f.slice(sel.slices[n]);
        for (std::size_t c = 0; c < v.size(); ++c) v[c] = std::max(s[c] - e.T, 0.0);
        double mass = 0.0;
        double grad = 0.0;
        for (std::size_t c : sel.cells) {
            mass += v[c];
            grad += grad_p(spec, v, c, env.p, g);
        }
        e.mass_sup = std::max(e.mass_sup, mass * sel.cell_volume);
        e.gradient += grad * sel.cell_volume * sel.time_weights[n];
    }
    e.U = e.mass_sup + e.gradient;
    return e;
}

EnergyLadder energy_ladder(const ScalarField& f, int k_max, const CoercivityEnvelope& env) {
    if (k_max < 2) throw InvalidArgument("energy_ladder: need k_max >= 2");
    EnergyLadder ladder;
    ladder.envelope = env;
    ladder.cylinder = Cylinder::centered(0.5, 2.0, f.spec().dimension, 1.0);
    for (int k = 1; k <= k_max; ++k) ladder.entries.push_back(truncated_energy(f, k, env));
    return ladder;
}

void to_json(nlohmann::json& j, const EnergyLadder& ladder) {
    j = nlohmann::json::array();
    for (const auto& e : ladder.entries)
        j.push_back({{"k", e.k}, {"T_k", e.T}, {"U_k", e.U}, {"mass_sup", e.mass_sup}, {"gradient", e.gradient}});
}

RecurrenceFit recurrence_fit(const EnergyLadder& ladder, int dimension, double p) {
    if (ladder.entries.size() < 3) throw InvalidArgument("recurrence_fit: need at least 3 ladder entries");
    RecurrenceFit fit;
    const double power = 1.0 + p / dimension;
    fit.all_zero = std::all_of(ladder.entries.begin(), ladder.entries.end(), [](const auto& e) { return e.U == 0.0; });
    for (std::size_t k = 1; k < ladder.entries.size(); ++k) {
        const double prev = ladder.entries[k - 1].U;
        if (prev <= 0.0) continue;
        const double r = ladder.entries[k].U / std::pow(prev, power);
        fit.ratios.push_back(r);
        fit.D_fit = std::max(fit.D_fit, r);
    }
    return fit;
}

void to_json(nlohmann::json& j, const RecurrenceFit& fit) {
    j = nlohmann::json{{"D_fit", fit.D_fit},
                       {"satisfied_fraction", fit.satisfied_fraction},
                       {"ratios", fit.ratios},
                       {"all_zero", fit.all_zero}};
}

double fast_convergence_threshold(double D, double beta) {
    if (!(D > 0.0) || !(beta > 0.0)) throw InvalidArgument("fast_convergence_threshold: need D > 0 and beta > 0");
    return 0.5 * std::pow(D, -1.0 / beta);
}

std::vector<double> simulate_recurrence(double D, double beta, double a1, int iterations) {
    std::vector<double> a;
    a.reserve(static_cast<std::size_t>(std::max(iterations, 0)));
    double cur = a1;
    for (int k = 0; k < iterations; ++k) {
        a.push_back(cur);
        cur = D * std::pow(cur, 1.0 + beta);
    }
    return a;
}

double delta_constant(double eps0, double lambda) {
    if (!(eps0 > 0.0) || !(eps0 <= 1.0)) throw InvalidArgument("delta_constant: need eps0 in (0, 1]");
    if (!(lambda >= 1.0)) throw InvalidArgument("delta_constant: need Lambda >= 1");
    return eps0 / (2.0 * lambda * (1.0 + lambda));
}

LemmaVerdict lemma_one_check(const ScalarField& f, const CoercivityEnvelope& env, double delta,
                             std::optional<double> tolerance) {
    const GridSpec& spec = f.spec();
    require_theorem_scope(spec.dimension, env.p);
    require_cover(spec, 0.0, 2.0, 1.0, "lemma_one_check");
    const int N = spec.dimension;
    const auto whole = Cylinder::centered(0.0, 2.0, N, 1.0);
    const auto late = Cylinder::centered(1.0, 2.0, N, 1.0);

    LemmaVerdict v;
    v.name = "pointwise-bound";
    v.cell_width = spec.cell_width();
    const double mass = integrate(f, whole, [](double u) { return std::max(u, 0.0); });
    const double top = max_over(f, late);
    const double tol = tolerance.value_or(cell_oscillation(f, late));
    v.hypothesis_values["positive_mass"] = mass;
    v.hypothesis_values["delta"] = delta;
    v.conclusion_values["max_late"] = top;
    v.tolerances["conclusion"] = tol;
    v.hypothesis_satisfied = mass <= delta;
    v.conclusion_satisfied = top <= 1.0 + tol;
    return v;
}

AprioriReport a_priori_bounds_check(const ScalarField& f, const CoercivityEnvelope& env, double relative_margin) {
    const GridSpec& spec = f.spec();
    require_cover(spec, -2.0, 2.0, 1.0, "a_priori_bounds_check");
    const auto sel = select_cells(spec, Cylinder::centered(-2.0, 2.0, spec.dimension, 1.0));
    const double ball = ball_volume(spec.dimension, 1.0);
    AprioriReport r;
    r.relative_margin = relative_margin;

    std::vector<double> v(spec.cells_per_slice());
    std::vector<double> g(static_cast<std::size_t>(spec.dimension));
    std::vector<double> prev;
    double initial_mass = 0.0;
    for (std::size_t n = 0; n < sel.slices.size(); ++n) {
        const auto s = f.slice(sel.slices[n]);
        for (std::size_t c = 0; c < v.size(); ++c) v[c] = std::max(s[c], 0.0);
        double grad = 0.0;
        double mass = 0.0;
        double up = 0.0;
        double down = 0.0;
        for (std::size_t c : sel.cells) {
            grad += grad_p(spec, v, c, env.p, g);
            mass += v[c];
            if (!prev.empty()) {
                const double d = v[c] - prev[c];
                (d > 0.0 ? up : down) += std::abs(d);
            }
        }
        if (n == 0) initial_mass = mass * sel.cell_volume;
        r.gradient_Lp += grad * sel.cell_volume * sel.time_weights[n];
        r.positive_variation += up * sel.cell_volume;
        r.negative_variation += down * sel.cell_volume;
        prev = v;
    }
    r.gradient_bound = env.lambda * (initial_mass + 4.0 * env.lambda * ball);
    r.positive_bound = 4.0 * env.lambda * ball;
    r.negative_bound = 4.0 * ball * (1.0 + env.lambda);
    r.dt_measure = r.positive_variation + r.negative_variation;
    const double m = 1.0 + relative_margin;
    r.gradient_ok = r.gradient_Lp <= m * r.gradient_bound;
    r.dt_ok = r.positive_variation <= m * r.positive_bound && r.negative_variation <= m * r.negative_bound;
    return r;
}

void to_json(nlohmann::json& j, const AprioriReport& r) {
    j = nlohmann::json{{"gradient_Lp", r.gradient_Lp},
                       {"gradient_bound", r.gradient_bound},
                       {"positive_variation", r.positive_variation},
                       {"negative_variation", r.negative_variation},
                       {"positive_bound", r.positive_bound},
                       {"negative_bound", r.negative_bound},
                       {"dt_measure", r.dt_measure},
                       {"relative_margin", r.relative_margin},
                       {"gradient_ok", r.gradient_ok},
                       {"dt_ok", r.dt_ok}};
}

LemmaVerdict lemma_two_check(const ScalarField& f, const CoercivityEnvelope& env, double alpha_dg, double delta) {
    const GridSpec& spec = f.spec();
    require_theorem_scope(spec.dimension, env.p);
    require_cover(spec, -2.0, 2.0, 1.0, "lemma_two_check");
    const int N = spec.dimension;
    const auto cyl = Cylinder::centered(-2.0, 2.0, N, 1.0);

    LemmaVerdict v;
    v.name = "measure-splitting";
    v.cell_width = spec.cell_width();
    const double top = max_over(f, cyl);
    v.diagnostics["max"] = top;
    if (top > 2.0) {
        v.precondition_satisfied = false;
        std::ostringstream os;
        os << "f exceeds 2 on [-2,2] x B(1): max " << top;
        v.precondition_note = os.str();
    }
    const double total = level_set_measure(f, cyl, LevelRange::everything()).measure;
    const double below = level_set_measure(f, cyl, LevelRange::at_most(0.0)).measure;
    const double middle = level_set_measure(f, cyl, LevelRange::open(0.0, 1.0)).measure;
    const double excess = integrate(f, Cylinder::centered(0.0, 2.0, N, 1.0),
                                    [](double u) { return std::max(u - 1.0, 0.0); });
    v.hypothesis_values["measure_nonpositive"] = below;
    v.hypothesis_values["half_cylinder"] = 0.5 * total;
    v.hypothesis_values["measure_middle"] = middle;
    v.hypothesis_values["alpha_dg"] = alpha_dg;
    v.conclusion_values["excess_integral"] = excess;
    v.conclusion_values["half_delta"] = 0.5 * delta;
    v.hypothesis_satisfied = below >= 0.5 * total && middle <= alpha_dg;
    v.conclusion_satisfied = excess < 0.5 * delta;
    return v;
}

std::string to_string(SliceClass c) {
    switch (c) {
        case SliceClass::Below: return "below";
        case SliceClass::Above: return "above";
        case SliceClass::Mixed: return "mixed";
    }
    return "unknown";
}

std::vector<SliceScan> isoperimetric_scan(const ScalarField& f, double t_lo, double t_hi,
                                          std::span<const double> center, double radius) {
    const GridSpec& spec = f.spec();
    const Cylinder cyl{t_lo, t_hi, std::vector<double>(center.begin(), center.end()), radius};
    const auto sel = select_cells(spec, cyl);
    std::vector<SliceScan> out;
    for (std::size_t i : sel.slices) {
        const auto s = f.slice(i);
        std::size_t lo = 0, mid = 0, hi = 0;
        for (std::size_t c : sel.cells) {
            if (s[c] <= 0.0) ++lo;
            else if (s[c] < 1.0) ++mid;
            else ++hi;
        }
        SliceScan scan;
        scan.slice = i;
        scan.t = spec.time(i);
        scan.middle_measure = static_cast<double>(mid) * sel.cell_volume;
        if (mid == 0) scan.cls = lo >= hi ? SliceClass::Below : SliceClass::Above;
        else scan.cls = SliceClass::Mixed;
        out.push_back(scan);
    }
    return out;
}

}  // namespace hjlab
