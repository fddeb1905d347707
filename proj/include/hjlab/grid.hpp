#pragma once

// Lattice geometry, field storage, and measure / oscillation / gradient
// primitives on space-time cylinders.
//
// Space is the box [-L, L]^N cut into n_x cells per axis; values live at cell
// centres. Time is sampled at the nodes t0, t0 + dt, ..., t1. A slice stands for
// the dual interval [t_i - dt/2, t_i + dt/2] clipped to the region of interest,
// so space-time integrals are cell-volume times clipped-time-weight sums.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace hjlab {

struct GridSpec {
    int dimension = 1;
    double half_width = 1.0;
    int cells = 4;
    double t0 = 0.0;
    double t1 = 1.0;
    double dt = 0.1;

    /// Throws InvalidArgument when an invariant fails.
    void validate() const;

    double cell_width() const { return 2.0 * half_width / cells; }
    double cell_volume() const;
    std::size_t time_steps() const;
    std::size_t time_slices() const { return time_steps() + 1; }
    /// Exact spacing (t1 - t0) / steps; equals dt up to the accepted 1e-6 slack.
    double time_step() const { return (t1 - t0) / static_cast<double>(time_steps()); }
    std::size_t cells_per_slice() const;
    std::size_t stride(int axis) const;

    double time(std::size_t slice) const;
    double center(int index) const { return -half_width + (index + 0.5) * cell_width(); }

    /// Multi-index of a flat spatial cell id (axis 0 varies fastest).
    void decompose(std::size_t cell, std::span<int> index) const;
    void cell_center(std::size_t cell, std::span<double> x) const;

    bool operator==(const GridSpec&) const = default;
};

struct Cylinder {
    double t_lo = 0.0;
    double t_hi = 1.0;
    std::vector<double> center;
    double radius = 1.0;

    void validate(int dimension) const;
    static Cylinder centered(double t_lo, double t_hi, int dimension, double radius);
};

/// Exact N-ball volume pi^{N/2} r^N / Gamma(N/2 + 1).
double ball_volume(int dimension, double radius);

/// (t_hi - t_lo) * |B(r)|.
double cylinder_measure(const Cylinder& cyl, int dimension);

class ScalarField {
public:
    ScalarField(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> slice(std::size_t i) const;
    double at(std::size_t slice, std::size_t cell) const { return values_[slice * per_slice_ + cell]; }

    /// Multilinear interpolation in (t, x); constant extrapolation past the
    /// outermost cell centres and time nodes.
    double sample(double t, std::span<const double> x) const;

private:
    GridSpec spec_;
    std::size_t per_slice_;
    std::vector<double> values_;
};

using FieldInitializer = std::function<double(double t, std::span<const double> x)>;

/// Evaluates the initializer at every (t_i, cell centre). Throws InvalidArgument
/// naming (t, x) for non-finite output.
ScalarField make_field(const GridSpec& spec, const FieldInitializer& initializer);

/// Builds a field from a pointwise map of another field's values on the same lattice.
ScalarField map_values(const ScalarField& f, const std::function<double(double t, std::span<const double> x, double u)>& fn);

/// Time slices and spatial cells of a lattice that fall inside a cylinder.
struct CylinderCells {
    std::vector<std::size_t> slices;
    std::vector<double> time_weights;   ///< clipped dual-interval lengths
    std::vector<std::size_t> cells;     ///< cells with centre inside the ball
    double cell_volume = 0.0;
};

/// Throws EmptyIntersection if no slice or no cell centre lies in the cylinder.
CylinderCells select_cells(const GridSpec& spec, const Cylinder& cyl);

/// Spatial cells whose centre lies in the open ball.
std::vector<std::size_t> cells_in_ball(const GridSpec& spec, std::span<const double> center, double radius);

/// Value window for level sets. Bounds are strict unless the matching closed
/// flag is set; infinite bounds mean "no constraint".
struct LevelRange {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = false;
    bool hi_closed = false;

    bool contains(double v) const;

    static LevelRange at_most(double v) { return {-std::numeric_limits<double>::infinity(), v, false, true}; }
    static LevelRange at_least(double v) { return {v, std::numeric_limits<double>::infinity(), true, false}; }
    static LevelRange open(double lo, double hi) { return {lo, hi, false, false}; }
    static LevelRange everything() { return {}; }
};

struct MeasureReport {
    double measure = 0.0;
    std::size_t cells = 0;     ///< space-time cells counted
    double cell_width = 0.0;
    double time_step = 0.0;
};

MeasureReport level_set_measure(const ScalarField& f, const Cylinder& cyl, const LevelRange& range);

/// Spatial integral of |grad f|^p over the whole box at one slice, forward
/// differences per axis (backward on the last cell of an axis).
double discrete_gradient_norm_p(const ScalarField& f, std::size_t slice, double p);

/// Same integrand restricted to the given cells.
double gradient_energy(const ScalarField& f, std::size_t slice, double p, std::span<const std::size_t> cells);

/// Forward-difference gradient of one slice at one cell.
void forward_gradient(const GridSpec& spec, std::span<const double> slice, std::size_t cell, std::span<double> grad);

/// max - min over the cells of the cylinder.
double oscillation(const ScalarField& f, const Cylinder& cyl);

/// Largest jump between a cell and its forward neighbour over the cylinder;
/// the "one cell-width oscillation" used as a discretisation tolerance.
double cell_oscillation(const ScalarField& f, const Cylinder& cyl);

}  // namespace hjlab
