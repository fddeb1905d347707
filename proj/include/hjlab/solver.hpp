#pragma once

// Explicit local Lax-Friedrichs scheme for  u_t + H(t, x, grad u) = 0,
//
//   u^{n+1} = u^n - dt * [ H(t, x, (D+ u + D- u)/2) - sum_a sigma (D+_a u - D-_a u)/2 ],
//
// with constant-extrapolation ghost cells. The scheme is monotone when
// sigma >= max |dH/dP| over the stencil and dt * N * sigma / h <= 1.
// Also: a Hopf-Lax oracle for H = |P|^p and discrete residuals of
// u_t + A |grad u|^p - B.

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hjlab {

using InitialData = std::function<double(std::span<const double> x)>;

struct SolveConfig {
    GridSpec grid;  ///< grid.dt is the recording interval; the scheme substeps inside it
    HamiltonianSpec hamiltonian;
    CoercivityEnvelope envelope;
    InitialData initial;
    double c_cfl = 0.9;
    /// Fixed dissipation. When set, every substep uses this sigma and the run
    /// aborts if the slice ever needs more. When empty, sigma is re-estimated
    /// from each slice and inflated by sigma_inflation.
    std::optional<double> sigma;
    double sigma_inflation = 1.5;
    /// Lower bound on the adaptive sigma, so flat data still advance with a finite dt.
    double sigma_floor = 1e-3;
};

struct Trajectory {
    ScalarField field;
    std::vector<double> max_update;  ///< per recording interval: largest |u^{n+1} - u^n| over its substeps
    std::vector<double> cfl_margin;  ///< per recording interval: smallest 1 - dt N sigma_needed / h
    std::size_t substeps = 0;
    double max_sigma = 0.0;
    HamiltonianSpec hamiltonian;
    CoercivityEnvelope envelope;
};

/// c_cfl * h / (N sigma).
double cfl_dt(const GridSpec& spec, double sigma, double c_cfl);

/// Per-cell c(t, x) and b(t, x) of H = c |P|^p + b at one time.
struct SliceCoefficients {
    std::vector<double> coefficient;
    std::vector<double> offset;
};

SliceCoefficients slice_coefficients(const GridSpec& spec, const HamiltonianSpec& H, double t);

/// Smallest sigma making the scheme monotone on this slice.
double required_sigma(const GridSpec& spec, const SliceCoefficients& coeff, double p, std::span<const double> u);

/// One forward-Euler step from time t. Throws SolverError (step 0) on a non-finite update.
std::vector<double> step(const GridSpec& spec, const HamiltonianSpec& H, double t, std::span<const double> u,
                         double sigma, double dt);

/// Same, with precomputed coefficients; writes into `out` and returns max |update|.
double step_into(const GridSpec& spec, const SliceCoefficients& coeff, double p, std::span<const double> u,
                 double sigma, double dt, std::span<double> out);

Trajectory solve(const SolveConfig& cfg);

/// Same, starting from an explicit first slice.
Trajectory solve_from(const SolveConfig& cfg, std::vector<double> first_slice);

struct HopfLaxOptions {
    double lipschitz = 1.0;    ///< Lipschitz bound of u0; sets the search radius
    double tolerance = 1e-6;   ///< lattice refinement stops when the minimum moves less than this
};

/// min_y u0(y) + t c_p (|x - y| / t)^{p'}  with  p' = p / (p - 1),  c_p = (p - 1) p^{-p'}.
double hopf_lax(const InitialData& u0, double t, std::span<const double> x, double p,
                const HopfLaxOptions& options = {});

/// Residual field on slices 0 .. n-1 (forward time differences, central space differences).
struct ResidualReport {
    ScalarField residual;
    double max_positive = 0.0;
    double min_value = 0.0;
};

/// D_t f + A |grad f|^p - B; a subsolution has residual <= 0.
ResidualReport residual_subsolution(const ScalarField& f, const CoercivityEnvelope& env, double A, double B);

/// D_t f + A |grad f|^p; a supersolution has residual >= 0.
ResidualReport residual_supersolution(const ScalarField& f, const CoercivityEnvelope& env, double A);

struct ResidualExtremes {
    double max_value = 0.0;
    double min_value = 0.0;
    std::size_t cells = 0;
};

/// Extremes of a residual over a cylinder, skipping points the predicate rejects.
ResidualExtremes residual_extremes(const ScalarField& residual, const Cylinder& cyl,
                                   const std::function<bool(double t, std::span<const double> x)>& keep = {});

}  // namespace hjlab
