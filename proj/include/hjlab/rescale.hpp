#pragma once

// The zoom cascade: initial rescale, recentring, the affine recurrence
// u_{m+1}(t, x) = (4 / (4 - lambda_tilde)) (u_m(eps1^alpha1 t, eps1 x) - d_m),
// per-scale oscillation records over Q_m = [-eps1^{m alpha1}, 0] x B(eps1^m / 2),
// and Hoelder exponent fits from those records.

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/oscillation.hpp"
#include "hjlab/solver.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hjlab {

/// u_1(t, x) = f(eps^a t, eps x). The lattice maps onto itself, so values are
/// copied unchanged and only the GridSpec is stretched by 1/eps.
/// Throws DomainMismatch unless f lives on [t0 <= -4, 0] x box with half width >= 1.
ScalarField initial_rescale(const ScalarField& f, const ConstantChain& chain);

/// eps1^alpha1, the time contraction of one zoom.
double zoom_time_factor(const ConstantChain& chain);

/// 4 / (4 - lambda_tilde).
double zoom_value_factor(const ConstantChain& chain);

struct Recenter {
    double d = 0.0;
    double bound = 0.0;  ///< achieved max |f - d| on [-1, 0] x B(1/2)
    double min_value = 0.0;
    double max_value = 0.0;
};

/// Range midpoint on [-1, 0] x B(1/2), clamped to the admissible set
/// {|d| <= lambda_tilde / 2, |f - d| <= 2 - lambda_tilde / 2}. Throws
/// PreconditionError naming the range when that set is empty.
Recenter select_recenter(const ScalarField& f, const ConstantChain& chain);

/// Resampled zoom on the same lattice, then the envelope assertion.
ScalarField zoom_step(const ScalarField& f, double d, const ConstantChain& chain);

/// Throws EnvelopeError at the first cell with |f| > 2 + q(|x| - 1)_+ (or > 2 inside
/// [-1/eps1^alpha1, 0] x B(1/(2 eps1))), allowing `slack` on top.
void check_zoom_envelope(const ScalarField& f, const ConstantChain& chain, double slack = 1e-12);

/// A cascade frame: field on [-4, 0] x box and, for re-solving, the equation it solves.
struct ZoomFrame {
    ScalarField field;
    std::optional<HamiltonianSpec> hamiltonian;
    CoercivityEnvelope envelope;
};

enum class ZoomMode { Interpolate, Resolve };

std::string to_string(ZoomMode mode);
ZoomMode zoom_mode_from_string(const std::string& name);

/// Resolve re-solves every zoom on a fresh [-4, 0] x box lattice with `cells`
/// cells per axis (0 keeps the incoming count), so the cell width shrinks like
/// eps1^m in the coordinates of the first frame. Interpolate only resamples.
struct RefineSchedule {
    ZoomMode mode = ZoomMode::Resolve;
    int cells = 0;
    double c_cfl = 0.9;
    double tolerance = 0.0;  ///< added to osc_bound when deciding `satisfied`
};

ScalarField zoom_step_resolve(const ZoomFrame& frame, double d, const ConstantChain& chain,
                              const RefineSchedule& schedule, HamiltonianSpec* zoomed_out = nullptr);

struct OscillationRecord {
    int m = 0;
    Cylinder cylinder;          ///< Q_m in the coordinates of the first frame
    double osc_measured = 0.0;  ///< in the units of the first frame
    double osc_bound = 0.0;     ///< 4 theta^{m+1}
    double d = 0.0;             ///< recentring used for the next zoom (0 for the last record)
    bool satisfied = false;
};

struct CascadeResult {
    std::vector<OscillationRecord> records;
    std::optional<std::string> error;  ///< set when a step aborted; records are partial
};

/// Records m = 0 .. M. Step errors are caught and reported in `error`.
CascadeResult zoom_cascade(const ZoomFrame& frame, const ConstantChain& chain, int M, const RefineSchedule& schedule);

void write_cascade_csv(const std::vector<OscillationRecord>& records, std::ostream& out);

struct HolderEstimate {
    double alpha_est = 1.0;
    double C_est = 0.0;
    double alpha_theory = 0.0;
    double fit_residual = 0.0;  ///< root-mean-square residual of the log-log fit
    int points_used = 0;
    double radius_min = 0.0;
    double radius_max = 0.0;
    bool degenerate = false;  ///< fewer than 3 positive oscillations; alpha_est = 1 by convention
};

/// Least squares of log osc against log radius; slope = alpha_est, exp(intercept) = C_est.
HolderEstimate holder_estimate(const std::vector<OscillationRecord>& records, const ConstantChain& chain);

void to_json(nlohmann::json& j, const OscillationRecord& r);
void to_json(nlohmann::json& j, const HolderEstimate& h);

/// Frame at base point (t0, x0): A(t, x) = (2 / M)(u(t0 + tau t, x0 + rho x) - mid) on
/// [-4, 0] x [-L, L]^N, where mid and M are the range midpoint and half range of the
/// sampled values. A constant window gives A = 0.
struct AnchorOptions {
    double tau = 0.0;
    double rho = 0.25;
    double half_width = 2.0;
    int cells = 32;
    double dt = 1.0 / 16;
};

struct Anchor {
    ZoomFrame frame;
    double mid = 0.0;
    double half_range = 0.0;
};

Anchor anchor_frame(const Trajectory& traj, double t0, std::span<const double> x0, const AnchorOptions& options);

struct TheoremOptions {
    int points_per_axis = 5;
    double t_hi = 0.0;              ///< upper end of the base-time window (0: last slice)
    double x_radius = 0.5;          ///< base points cover [-x_radius, x_radius]^N
    AnchorOptions anchor;           ///< tau = 0 picks delta_time / 4
    int zooms = 6;
    RefineSchedule schedule;
    unsigned workers = 1;
};

struct BasePointResult {
    double t0 = 0.0;
    std::vector<double> x0;
    std::vector<OscillationRecord> records;
    HolderEstimate holder;
    double half_range = 0.0;     ///< M, the value scale of the frame
    double max_quotient = 0.0;   ///< max over m of osc / radius^alpha in original units
    std::optional<std::string> error;
};

struct TheoremReport {
    std::vector<BasePointResult> points;
    double min_alpha_est = 1.0;
    double alpha_quotient = 1.0;  ///< exponent used for the quotients: min_alpha_est clipped to (0, 1]
    double max_quotient = 0.0;
    double alpha_theory = 0.0;
    std::size_t failed_points = 0;
};

/// Cascades at a lattice of base points (t0, x0) with t0 in [delta_time, t_hi];
/// independent points run on `workers` threads and are stored in lattice order.
TheoremReport theorem_check(const Trajectory& traj, double delta_time, const ConstantChain& chain,
                            const TheoremOptions& options);

void to_json(nlohmann::json& j, const BasePointResult& r);
void to_json(nlohmann::json& j, const TheoremReport& r);

}  // namespace hjlab
