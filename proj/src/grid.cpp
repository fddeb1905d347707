#include "hjlab/grid.hpp"

#include "hjlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hjlab {

void GridSpec::validate() const {
    if (dimension < 1) throw InvalidArgument("GridSpec: dimension must be positive");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw InvalidArgument("GridSpec: half_width must be positive and finite");
    if (cells < 4) throw InvalidArgument("GridSpec: need at least 4 cells per axis");
    if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0))
        throw InvalidArgument("GridSpec: need finite t1 > t0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("GridSpec: dt must be positive");
    const double ratio = (t1 - t0) / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio) || std::round(ratio) < 1.0) {
        std::ostringstream os;
        os << "GridSpec: dt=" << dt << " does not divide [" << t0 << ", " << t1 << "]";
        throw InvalidArgument(os.str());
    }
}

double GridSpec::cell_volume() const { return std::pow(cell_width(), dimension); }

std::size_t GridSpec::time_steps() const {
    return static_cast<std::size_t>(std::llround((t1 - t0) / dt));
}

std::size_t GridSpec::cells_per_slice() const {
    std::size_t n = 1;
    for (int a = 0; a < dimension; ++a) n *= static_cast<std::size_t>(cells);
    return n;
}

std::size_t GridSpec::stride(int axis) const {
    std::size_t s = 1;
    for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(cells);
    return s;
}

double GridSpec::time(std::size_t slice) const {
    const std::size_t n = time_steps();
    if (slice >= n) return t1;
    return t0 + static_cast<double>(slice) * time_step();
}

void GridSpec::decompose(std::size_t cell, std::span<int> index) const {
    const auto n = static_cast<std::size_t>(cells);
    for (int a = 0; a < dimension; ++a) {
        index[a] = static_cast<int>(cell % n);
        cell /= n;
    }
}

void GridSpec::cell_center(std::size_t cell, std::span<double> x) const {
    const auto n = static_cast<std::size_t>(cells);
    for (int a = 0; a < dimension; ++a) {
        x[a] = center(static_cast<int>(cell % n));
        cell /= n;
    }
}

void Cylinder::validate(int dimension) const {
    if (!(t_lo < t_hi)) throw InvalidArgument("Cylinder: need t_lo < t_hi");
    if (!(radius > 0.0)) throw InvalidArgument("Cylinder: radius must be positive");
    if (static_cast<int>(center.size()) != dimension)
        throw InvalidArgument("Cylinder: centre dimension does not match the grid");
}

Cylinder Cylinder::centered(double t_lo, double t_hi, int dimension, double radius) {
    return Cylinder{t_lo, t_hi, std::vector<double>(static_cast<std::size_t>(dimension), 0.0), radius};
}

double ball_volume(int dimension, double radius) {
    const double n = dimension;
    return std::pow(std::numbers::pi, n / 2.0) * std::pow(radius, n) / std::tgamma(n / 2.0 + 1.0);
}

double cylinder_measure(const Cylinder& cyl, int dimension) {
    cyl.validate(dimension);
    return (cyl.t_hi - cyl.t_lo) * ball_volume(dimension, cyl.radius);
}

ScalarField::ScalarField(GridSpec spec, std::vector<double> values)
    : spec_(spec), per_slice_(0), values_(std::move(values)) {
    spec_.validate();
    per_slice_ = spec_.cells_per_slice();
    if (values_.size() != per_slice_ * spec_.time_slices())
        throw InvalidArgument("ScalarField: value array does not match the grid extents");
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidArgument("ScalarField: non-finite value");
}

std::span<const double> ScalarField::slice(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * per_slice_, per_slice_);
}

double ScalarField::sample(double t, std::span<const double> x) const {
    const int dim = spec_.dimension;
    const auto steps = static_cast<double>(spec_.time_steps());
    double ts = std::clamp((t - spec_.t0) / spec_.time_step(), 0.0, steps);
    auto i0 = static_cast<std::size_t>(std::floor(ts));
    if (i0 >= spec_.time_steps()) i0 = spec_.time_steps() - 1;
    const double ft = ts - static_cast<double>(i0);

    const double h = spec_.cell_width();
    const int n = spec_.cells;
    std::vector<int> base(static_cast<std::size_t>(dim));
    std::vector<double> frac(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
        double s = std::clamp((x[a] + spec_.half_width) / h - 0.5, 0.0, static_cast<double>(n - 1));
        int j = static_cast<int>(std::floor(s));
        if (j >= n - 1) j = n - 2;
        base[a] = j;
        frac[a] = s - j;
    }

    // Nested lerps a + w (b - a), so constant data reproduce exactly.
    const std::size_t corners = std::size_t{1} << dim;
    std::vector<double> v(2 * corners);
    for (std::size_t tc = 0; tc < 2; ++tc) {
        const std::size_t sl = std::min(i0 + tc, spec_.time_steps());
        for (std::size_t corner = 0; corner < corners; ++corner) {
            std::size_t cell = 0;
            for (int a = 0; a < dim; ++a)
                cell += static_cast<std::size_t>(base[a] + static_cast<int>((corner >> a) & 1U)) * spec_.stride(a);
            v[tc * corners + corner] = at(sl, cell);
        }
    }
    std::size_t len = 2 * corners;
    for (int a = 0; a <= dim; ++a) {
        const double w = a < dim ? frac[a] : ft;
        len /= 2;
        for (std::size_t k = 0; k < len; ++k) {
            const double lo = v[2 * k], hi = v[2 * k + 1];
            v[k] = w == 0.0 ? lo : lo + w * (hi - lo);
        }
    }
    return v[0];
}

ScalarField make_field(const GridSpec& spec, const FieldInitializer& initializer) {
    spec.validate();
    const std::size_t per = spec.cells_per_slice();
    std::vector<double> values(per * spec.time_slices());
    std::vector<double> x(static_cast<std::size_t>(spec.dimension));
    for (std::size_t i = 0; i < spec.time_slices(); ++i) {
        const double t = spec.time(i);
        for (std::size_t c = 0; c < per; ++c) {
            spec.cell_center(c, x);
            const double v = initializer(t, x);
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "make_field: non-finite initializer output at t=" << t << ", x=(";
                for (std::size_t a = 0; a < x.size(); ++a) os << (a ? ", " : "") << x[a];
                os << ")";
                throw InvalidArgument(os.str());
            }
            values[i * per + c] = v;
        }
    }
    return ScalarField(spec, std::move(values));
}

ScalarField map_values(const ScalarField& f,
                       const std::function<double(double, std::span<const double>, double)>& fn) {
    const GridSpec& spec = f.spec();
    const std::size_t per = spec.cells_per_slice();
    std::vector<double> values(f.values().size());
    std::vector<double> x(static_cast<std::size_t>(spec.dimension));
    for (std::size_t i = 0; i < spec.time_slices(); ++i) {
        const double t = spec.time(i);
        for (std::size_t c = 0; c < per; ++c) {
            spec.cell_center(c, x);
            values[i * per + c] = fn(t, x, f.at(i, c));
        }
    }
    return ScalarField(spec, std::move(values));
}

std::vector<std::size_t> cells_in_ball(const GridSpec& spec, std::span<const double> center, double radius) {
    std::vector<std::size_t> out;
    std::vector<double> x(static_cast<std::size_t>(spec.dimension));
    const double r2 = radius * radius;
    for (std::size_t c = 0; c < spec.cells_per_slice(); ++c) {
        spec.cell_center(c, x);
        double d2 = 0.0;
        for (int a = 0; a < spec.dimension; ++a) d2 += (x[a] - center[a]) * (x[a] - center[a]);
        if (d2 < r2) out.push_back(c);
    }
    return out;
}

CylinderCells select_cells(const GridSpec& spec, const Cylinder& cyl) {
    cyl.validate(spec.dimension);
    CylinderCells sel;
    const double ts = spec.time_step();
    const double eps = 1e-9 * ts;
    for (std::size_t i = 0; i < spec.time_slices(); ++i) {
        const double t = spec.time(i);
        if (t < cyl.t_lo - eps || t > cyl.t_hi + eps) continue;
        const double lo = std::max({t - 0.5 * ts, cyl.t_lo, spec.t0});
        const double hi = std::min({t + 0.5 * ts, cyl.t_hi, spec.t1});
        sel.slices.push_back(i);
        sel.time_weights.push_back(std::max(0.0, hi - lo));
    }
    sel.cells = cells_in_ball(spec, cyl.center, cyl.radius);
    sel.cell_volume = spec.cell_volume();
    if (sel.slices.empty() || sel.cells.empty())
        throw EmptyIntersection("cylinder does not intersect the sampled lattice");
    return sel;
}

bool LevelRange::contains(double v) const {
    const bool above = lo_closed ? v >= lo : v > lo;
    const bool below = hi_closed ? v <= hi : v < hi;
    return above && below;
}

MeasureReport level_set_measure(const ScalarField& f, const Cylinder& cyl, const LevelRange& range) {
    const auto sel = select_cells(f.spec(), cyl);
    MeasureReport rep;
    rep.cell_width = f.spec().cell_width();
    rep.time_step = f.spec().time_step();
    for (std::size_t k = 0; k < sel.slices.size(); ++k) {
        const auto s = f.slice(sel.slices[k]);
        std::size_t count = 0;
        for (std::size_t c : sel.cells)
            if (range.contains(s[c])) ++count;
        rep.cells += count;
        rep.measure += static_cast<double>(count) * sel.cell_volume * sel.time_weights[k];
    }
    return rep;
}

void forward_gradient(const GridSpec& spec, std::span<const double> slice, std::size_t cell, std::span<double> grad) {
    const double h = spec.cell_width();
    const auto n = static_cast<std::size_t>(spec.cells);
    std::size_t rest = cell;
    for (int a = 0; a < spec.dimension; ++a) {
        const std::size_t i = rest % n;
        rest /= n;
        const std::size_t st = spec.stride(a);
        grad[a] = (i + 1 < n) ? (slice[cell + st] - slice[cell]) / h : (slice[cell] - slice[cell - st]) / h;
    }
}

namespace {

double grad_power(const GridSpec& spec, std::span<const double> s, std::size_t c, double p, std::span<double> g) {
    forward_gradient(spec, s, c, g);
    double n2 = 0.0;
    for (double gi : g) n2 += gi * gi;
    return n2 == 0.0 ? 0.0 : std::pow(n2, 0.5 * p);
}

}  // namespace

double discrete_gradient_norm_p(const ScalarField& f, std::size_t slice, double p) {
    if (!(p > 1.0)) throw InvalidArgument("discrete_gradient_norm_p: need p > 1");
    const GridSpec& spec = f.spec();
    const auto s = f.slice(slice);
    std::vector<double> g(static_cast<std::size_t>(spec.dimension));
    double sum = 0.0;
    for (std::size_t c = 0; c < spec.cells_per_slice(); ++c) sum += grad_power(spec, s, c, p, g);
    return sum * spec.cell_volume();
}

double gradient_energy(const ScalarField& f, std::size_t slice, double p, std::span<const std::size_t> cells) {
    if (!(p > 1.0)) throw InvalidArgument("gradient_energy: need p > 1");
    const GridSpec& spec = f.spec();
    const auto s = f.slice(slice);
    std::vector<double> g(static_cast<std::size_t>(spec.dimension));
    double sum = 0.0;
    for (std::size_t c : cells) sum += grad_power(spec, s, c, p, g);
    return sum * spec.cell_volume();
}

double oscillation(const ScalarField& f, const Cylinder& cyl) {
    const auto sel = select_cells(f.spec(), cyl);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i : sel.slices) {
        const auto s = f.slice(i);
        for (std::size_t c : sel.cells) {
            lo = std::min(lo, s[c]);
            hi = std::max(hi, s[c]);
        }
    }
    return hi - lo;
}

double cell_oscillation(const ScalarField& f, const Cylinder& cyl) {
    const GridSpec& spec = f.spec();
    const auto sel = select_cells(spec, cyl);
    const auto n = static_cast<std::size_t>(spec.cells);
    std::vector<int> idx(static_cast<std::size_t>(spec.dimension));
    double worst = 0.0;
    for (std::size_t k = 0; k < sel.slices.size(); ++k) {
        const std::size_t i = sel.slices[k];
        const auto s = f.slice(i);
        const bool has_next = i + 1 < spec.time_slices();
        const auto next = has_next ? f.slice(i + 1) : s;
        for (std::size_t c : sel.cells) {
            spec.decompose(c, idx);
            for (int a = 0; a < spec.dimension; ++a) {
                const std::size_t st = spec.stride(a);
                if (static_cast<std::size_t>(idx[a]) + 1 < n) worst = std::max(worst, std::abs(s[c + st] - s[c]));
                if (idx[a] > 0) worst = std::max(worst, std::abs(s[c] - s[c - st]));
            }
            if (has_next) worst = std::max(worst, std::abs(next[c] - s[c]));
        }
    }
    return worst;
}

}  // namespace hjlab
