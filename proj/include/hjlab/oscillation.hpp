#pragma once

// The explicit constant chain behind improved oscillation, the dyadic ladder
// u_k = 2^k (u - 2(1 - 2^-k)), time reversal, the barrier psi and the
// improved-oscillation verdicts from above and below.

#include "hjlab/degiorgi.hpp"
#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace hjlab {

struct ConstantChain {
    int N = 2;
    double p = 1.5;
    double Lambda = 1.0;
    double alpha_dg = 1.0;

    int K0 = 0;
    double lambda = 0.0;        ///< 2^-(K0+1)
    double S = 0.0;             ///< 2^{(K0+1)(p-1)}, the rescaled gradient weight
    double c = 0.0;             ///< 8 Lambda S
    double lambda1_max = 0.0;   ///< root of 2 l = (l / c)^{1/p}
    double lambda1 = 0.0;
    double q = 0.0;             ///< (lambda1 / c)^{1/p}
    double lambda_tilde = 0.0;  ///< lambda1 / 2
    double theta = 0.0;         ///< (4 - lambda_tilde) / 4
    double log_theta = 0.0;     ///< log(theta), computed without cancellation
    double a_exp = 1.0;
    double epsilon = 0.0;       ///< 2^-(K0+1) for a_exp = 1
    double r = 0.0;             ///< (p - 1) / (p - alpha1)
    double r_min = 0.0;         ///< smallest r meeting both zoom conditions
    double alpha1_gap = 0.0;    ///< p - alpha1, stored to avoid cancellation
    double alpha1 = 0.0;
    double epsilon1 = 0.0;      ///< theta^r
    double alpha_H = 0.0;       ///< (p - alpha1) / (p - 1) = 1 / r

    /// |[-2,2] x B(1)|.
    double cylinder_volume() const;
};

/// Throws OutOfTheoremScope unless 1 < p < N, InvalidArgument for Lambda < 1 or
/// alpha_dg <= 0, ConvergenceError if a root cannot be bracketed.
ConstantChain build_constant_chain(int N, double p, double Lambda, double alpha_dg);

struct InvariantSlack {
    std::string name;
    double slack = 0.0;  ///< >= 0 when the invariant holds
};

/// Re-evaluates every invariant from the finished chain alone.
std::vector<InvariantSlack> validate_chain(const ConstantChain& chain);

void to_json(nlohmann::json& j, const ConstantChain& chain);
void from_json(const nlohmann::json& j, ConstantChain& chain);

/// 2^k (f - 2 (1 - 2^-k)).
ScalarField dyadic_ladder(const ScalarField& f, int k);

/// Improved oscillation from above on [-2,2] x B(1): if |{f <= 0}| covers half
/// the cylinder then f <= 2 - lambda on [1,2] x B(1). Reports the ladder
/// witness j0 (first k <= K0 with |{0 < u_k < 1}| <= alpha_dg, or -1).
LemmaVerdict oscillation_above_check(const ScalarField& f, const ConstantChain& chain, double tolerance = 0.0);

/// v(t, x) = -f(-t, x). Needs t0 = -t1.
ScalarField time_reverse(const ScalarField& f);

/// min(-2 + lambda1, -2 - (lambda1/8)(t + 2) + q (1 - |x|)).
double barrier_psi(const ConstantChain& chain, double t, std::span<const double> x);

ScalarField barrier_field(const ConstantChain& chain, const GridSpec& spec);

struct ComparisonReport {
    double min_margin = 0.0;       ///< min of f - psi over the whole lattice
    std::size_t violating_cells = 0;
    double tolerance = 0.0;
    double worst_t = 0.0;
    std::vector<double> worst_x;
};

/// Margin f - psi. Throws PreconditionError if f(t0, .) < psi(t0, .) - initial_slack
/// anywhere; cells with margin below -tolerance are counted as violations.
ComparisonReport comparison_check(const ScalarField& f, const ConstantChain& chain, double tolerance = 0.0,
                                  double initial_slack = 1e-12);

void to_json(nlohmann::json& j, const ComparisonReport& r);

/// Improved oscillation from below: f >= -2 on [-2,2] x B(1), |{f >= 0}| covers
/// half the cylinder and f >= -2 - q(|x| - 1)_+ on the box imply f >= -2 + lambda_tilde
/// on [1,2] x B(1/2). The time-reversed window [-2,-1] x B(1) is a diagnostic.
LemmaVerdict oscillation_below_check(const ScalarField& f, const ConstantChain& chain, double tolerance = 0.0);

/// Folds a residual check into a verdict's precondition.
void attach_residual_precondition(LemmaVerdict& v, const std::string& name, double residual, double tolerance);

}  // namespace hjlab
