#pragma once

// Truncated energies v_k = (u - (1 - 2^-k))_+, the superlinear recurrence
// U_k <= D U_{k-1}^{1+p/N}, its fast-convergence threshold, and verdict
// checkers for the pointwise-bound and measure-splitting lemmas.

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hjlab {

enum class VerdictStatus { Pass, Vacuous, Refuted, PreconditionViolated };

std::string to_string(VerdictStatus s);

/// Outcome of checking "hypothesis => conclusion" on one field. Only a true
/// hypothesis with a false conclusion is a refutation.
struct LemmaVerdict {
    std::string name;
    std::map<std::string, double> hypothesis_values;
    std::map<std::string, double> conclusion_values;
    std::map<std::string, double> tolerances;
    std::map<std::string, double> diagnostics;
    bool hypothesis_satisfied = false;
    bool conclusion_satisfied = false;
    bool precondition_satisfied = true;
    std::string precondition_note;
    double cell_width = 0.0;

    VerdictStatus status() const;
};

void to_json(nlohmann::json& j, const LemmaVerdict& v);

/// Throws OutOfTheoremScope unless 1 < p < N.
void require_theorem_scope(int dimension, double p);

ScalarField truncate(const ScalarField& f, int k);

struct EnergyEntry {
    int k = 0;
    double T = 0.0;         ///< 1 - 2^-k
    double U = 0.0;         ///< mass_sup + gradient
    double mass_sup = 0.0;  ///< max over slices in [T_k, 2] of the integral of v_k over B(1)
    double gradient = 0.0;  ///< integral of |grad v_k|^p over [T_k, 2] x B(1)
};

EnergyEntry truncated_energy(const ScalarField& f, int k, const CoercivityEnvelope& env);

struct EnergyLadder {
    std::vector<EnergyEntry> entries;
    CoercivityEnvelope envelope;
    Cylinder cylinder;  ///< [T_1, 2] x B(1)
};

EnergyLadder energy_ladder(const ScalarField& f, int k_max, const CoercivityEnvelope& env);

void to_json(nlohmann::json& j, const EnergyLadder& ladder);

struct RecurrenceFit {
    double D_fit = 0.0;
    double satisfied_fraction = 1.0;
    std::vector<double> ratios;  ///< U_k / U_{k-1}^{1+p/N} for k = 2.. with U_{k-1} > 0
    bool all_zero = false;
};

RecurrenceFit recurrence_fit(const EnergyLadder& ladder, int dimension, double p);

void to_json(nlohmann::json& j, const RecurrenceFit& fit);

/// 1/2 D^{-1/beta}: with b_k = D^{1/beta} a_k the recurrence becomes b_k <= b_{k-1}^{1+beta}.
double fast_convergence_threshold(double D, double beta);

/// a_1 = a1, a_k = D a_{k-1}^{1+beta}; returns a_1 .. a_iterations.
std::vector<double> simulate_recurrence(double D, double beta, double a1, int iterations);

/// eps0 / (2 Lambda (1 + Lambda)).
double delta_constant(double eps0, double lambda);

/// Integral of u_+ over [0,2] x B(1) <= delta  =>  u <= 1 on [1,2] x B(1).
/// The conclusion is judged with `tolerance`, by default the largest
/// neighbouring-cell jump of f on [1,2] x B(1).
LemmaVerdict lemma_one_check(const ScalarField& f, const CoercivityEnvelope& env, double delta,
                             std::optional<double> tolerance = std::nullopt);

struct AprioriReport {
    double gradient_Lp = 0.0;
    double gradient_bound = 0.0;
    double positive_variation = 0.0;  ///< sum over slices of the integral of (f+(t_{i+1}) - f+(t_i))_+
    double negative_variation = 0.0;
    double positive_bound = 0.0;      ///< 4 Lambda |B(1)|
    double negative_bound = 0.0;      ///< 4 |B(1)| (1 + Lambda)
    double dt_measure = 0.0;          ///< positive + negative
    double relative_margin = 0.0;
    bool gradient_ok = false;
    bool dt_ok = false;
};

AprioriReport a_priori_bounds_check(const ScalarField& f, const CoercivityEnvelope& env,
                                    double relative_margin = 0.05);

void to_json(nlohmann::json& j, const AprioriReport& r);

/// Measure-splitting lemma on [-2,2] x B(1): if half the cylinder has f <= 0
/// and |{0 < f < 1}| <= alpha_dg, then the integral of (f-1)_+ over [0,2] x B(1) is below delta/2.
LemmaVerdict lemma_two_check(const ScalarField& f, const CoercivityEnvelope& env, double alpha_dg, double delta);

enum class SliceClass { Below, Above, Mixed };

std::string to_string(SliceClass c);

struct SliceScan {
    std::size_t slice = 0;
    double t = 0.0;
    double middle_measure = 0.0;  ///< |{0 < f < 1} in the ball|
    SliceClass cls = SliceClass::Mixed;
};

/// Per-slice dichotomy over B(center, radius). Slices whose middle set is
/// smaller than one cell are pure: below if the f <= 0 part dominates, else above.
std::vector<SliceScan> isoperimetric_scan(const ScalarField& f, double t_lo, double t_hi,
                                          std::span<const double> center, double radius);

}  // namespace hjlab
