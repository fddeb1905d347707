#pragma once

// Hamiltonians H(t, x, P) of the form  c(t, x) |P|^p + b(t, x),  the coercivity
// envelope  |P|^p / Lambda - Lambda <= H <= Lambda |P|^p + Lambda,  and the
// gauge shift u -> u + Lambda t.

#include "hjlab/grid.hpp"

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hjlab {

struct CoercivityEnvelope {
    double lambda = 1.0;
    double p = 2.0;

    void validate() const;
    double lower(double norm_p) const { return std::pow(norm_p, p) / lambda - lambda; }
    double upper(double norm_p) const { return lambda * std::pow(norm_p, p) + lambda; }
};

enum class HamiltonianKind { PowerLaw, ScaledPowerLaw, RoughCoefficient, Tabulated };

std::string to_string(HamiltonianKind kind);
HamiltonianKind hamiltonian_kind_from_string(const std::string& name);

/// Piecewise-constant coefficient and offset tables over a uniform (t, x) lattice.
/// Lookups outside the table clamp to the nearest bin.
struct CoefficientTable {
    int dimension = 1;
    double t_lo = 0.0;
    double t_hi = 1.0;
    int time_bins = 1;
    double half_width = 1.0;
    int space_bins = 1;
    std::vector<double> coefficient;  ///< time-major, then axis 0 fastest
    std::vector<double> offset;       ///< same layout, or empty for zero

    void validate() const;
    std::size_t bin(double t, std::span<const double> x) const;
};

/// Affine change of variables (t, x) -> (t_origin + t_scale t, x_origin + x_scale x)
/// applied before the coefficient lookup.
struct FrameMap {
    double t_origin = 0.0;
    double t_scale = 1.0;
    std::vector<double> x_origin;  ///< empty means the origin
    double x_scale = 1.0;
};

struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::PowerLaw;
    double p = 2.0;
    double scale = 1.0;         ///< multiplies the |P|^p part
    double offset = 0.0;        ///< additive constant
    double offset_scale = 1.0;  ///< multiplies the tabulated offset
    double lambda = 1.0;        ///< checkerboard contrast: a in {lambda, 1/lambda}
    double eta = 0.25;          ///< checkerboard cell size
    std::shared_ptr<const CoefficientTable> table;
    FrameMap frame;

    static HamiltonianSpec power_law(double p);
    static HamiltonianSpec scaled_power_law(double p, double scale, double offset = 0.0);
    static HamiltonianSpec rough(double p, double lambda, double eta);
    static HamiltonianSpec tabulated(double p, CoefficientTable table);

    void validate() const;

    /// c(t, x): the factor in front of |P|^p.
    double coefficient(double t, std::span<const double> x) const;
    /// b(t, x): H(t, x, 0).
    double offset_at(double t, std::span<const double> x) const;
    double eval(double t, std::span<const double> x, std::span<const double> P) const;
    /// Upper bound on |dH/dP| at gradients of norm |P|.
    double slope_bound(double t, std::span<const double> x, double norm_p) const;

    /// H + delta.
    HamiltonianSpec shifted(double delta) const;

    /// Hamiltonian of  v(t, x) = value_scale * (u(t_origin + t_scale t, x_origin + x_scale x) - d)
    /// when u solves  u_t + H = 0.
    HamiltonianSpec zoomed(double t_origin, double t_scale, std::span<const double> x_origin, double x_scale,
                           double value_scale) const;
};

struct CoercivitySample {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> P;
};

struct CoercivityReport {
    std::vector<std::size_t> violations;  ///< indices of samples with negative slack
    double margin = 0.0;                  ///< smallest slack over all samples
};

CoercivityReport coercivity_check(const HamiltonianSpec& H, const CoercivityEnvelope& env,
                                  std::span<const CoercivitySample> samples);

/// Deterministic sample cloud over [t_lo, t_hi] x [-half_width, half_width]^N with
/// gradient norms up to max_gradient.
std::vector<CoercivitySample> coercivity_samples(int dimension, double t_lo, double t_hi, double half_width,
                                                 double max_gradient, std::size_t count, unsigned long long seed);

/// (t, x) -> f(t, x) + Lambda t.
ScalarField gauge_shift(const ScalarField& f, const CoercivityEnvelope& env);
/// (t, x) -> f(t, x) - Lambda t.
ScalarField remove_gauge_shift(const ScalarField& f, const CoercivityEnvelope& env);

}  // namespace hjlab
