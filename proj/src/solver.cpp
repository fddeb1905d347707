#include "hjlab/solver.hpp"

#include "hjlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjlab {

double cfl_dt(const GridSpec& spec, double sigma, double c_cfl) {
    if (!(sigma > 0.0)) throw InvalidArgument("cfl_dt: sigma must be positive");
    if (!(c_cfl > 0.0) || c_cfl > 1.0) throw InvalidArgument("cfl_dt: c_cfl must lie in (0, 1]");
    return c_cfl * spec.cell_width() / (spec.dimension * sigma);
}

SliceCoefficients slice_coefficients(const GridSpec& spec, const HamiltonianSpec& H, double t) {
    const std::size_t n = spec.cells_per_slice();
    SliceCoefficients out;
    out.coefficient.resize(n);
    out.offset.resize(n);
    std::vector<double> x(static_cast<std::size_t>(spec.dimension));
    for (std::size_t c = 0; c < n; ++c) {
        spec.cell_center(c, x);
        out.coefficient[c] = H.coefficient(t, x);
        out.offset[c] = H.offset_at(t, x);
    }
    return out;
}

namespace {

struct Axes {
    std::vector<std::size_t> stride;
    std::size_t n;
    double h;
};

Axes axes_of(const GridSpec& spec) {
    Axes ax;
    for (int a = 0; a < spec.dimension; ++a) ax.stride.push_back(spec.stride(a));
    ax.n = static_cast<std::size_t>(spec.cells);
    ax.h = spec.cell_width();
    return ax;
}

}  // namespace

double required_sigma(const GridSpec& spec, const SliceCoefficients& coeff, double p, std::span<const double> u) {
    const Axes ax = axes_of(spec);
    double sigma = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        double m2 = 0.0;
        for (std::size_t s : ax.stride) {
            const std::size_t i = (c / s) % ax.n;
            const double dp = i + 1 < ax.n ? (u[c + s] - u[c]) / ax.h : 0.0;
            const double dm = i > 0 ? (u[c] - u[c - s]) / ax.h : 0.0;
            const double m = std::max(std::abs(dp), std::abs(dm));
            m2 += m * m;
        }
        if (m2 > 0.0) sigma = std::max(sigma, coeff.coefficient[c] * p * std::pow(m2, 0.5 * (p - 1.0)));
    }
    return sigma;
}

double step_into(const GridSpec& spec, const SliceCoefficients& coeff, double p, std::span<const double> u,
                 double sigma, double dt, std::span<double> out) {
    const Axes ax = axes_of(spec);
    const double half_p = 0.5 * p;
    double max_update = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        const double uc = u[c];
        double p2 = 0.0;
        double jump = 0.0;
        for (std::size_t s : ax.stride) {
            const std::size_t i = (c / s) % ax.n;
            const double dp = i + 1 < ax.n ? (u[c + s] - uc) / ax.h : 0.0;
            const double dm = i > 0 ? (uc - u[c - s]) / ax.h : 0.0;
            const double avg = 0.5 * (dp + dm);
            p2 += avg * avg;
            jump += dp - dm;
        }
        const double h_num = coeff.coefficient[c] * std::pow(p2, half_p) + coeff.offset[c] - 0.5 * sigma * jump;
        const double v = uc - dt * h_num;
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "non-finite update at cell " << c;
            throw SolverError(os.str(), 0);
        }
        out[c] = v;
        max_update = std::max(max_update, std::abs(v - uc));
    }
    return max_update;
}

std::vector<double> step(const GridSpec& spec, const HamiltonianSpec& H, double t, std::span<const double> u,
                         double sigma, double dt) {
    if (u.size() != spec.cells_per_slice()) throw InvalidArgument("step: slice size does not match the grid");
    std::vector<double> out(u.size());
    step_into(spec, slice_coefficients(spec, H, t), H.p, u, sigma, dt, out);
    return out;
}

Trajectory solve(const SolveConfig& cfg) {
    if (!cfg.initial) throw InvalidArgument("solve: missing initial data");
    cfg.grid.validate();
    std::vector<double> first(cfg.grid.cells_per_slice());
    std::vector<double> x(static_cast<std::size_t>(cfg.grid.dimension));
    for (std::size_t c = 0; c < first.size(); ++c) {
        cfg.grid.cell_center(c, x);
        first[c] = cfg.initial(x);
        if (!std::isfinite(first[c])) throw InvalidArgument("solve: non-finite initial data");
    }
    return solve_from(cfg, std::move(first));
}

Trajectory solve_from(const SolveConfig& cfg, std::vector<double> first_slice) {
    const GridSpec& spec = cfg.grid;
    spec.validate();
    cfg.hamiltonian.validate();
    cfg.envelope.validate();
    if (first_slice.size() != spec.cells_per_slice()) throw InvalidArgument("solve: first slice has the wrong size");
    if (!(cfg.c_cfl > 0.0) || cfg.c_cfl > 1.0) throw InvalidArgument("solve: c_cfl must lie in (0, 1]");
    if (cfg.sigma && !(*cfg.sigma > 0.0)) throw InvalidArgument("solve: fixed sigma must be positive");
    if (!(cfg.sigma_inflation >= 1.0)) throw InvalidArgument("solve: sigma_inflation must be >= 1");

    const std::size_t steps = spec.time_steps();
    const std::size_t per = spec.cells_per_slice();
    const double h = spec.cell_width();
    const int N = spec.dimension;
    const bool time_dependent = cfg.hamiltonian.kind == HamiltonianKind::Tabulated;

    std::vector<double> values;
    values.reserve(per * (steps + 1));
    values.insert(values.end(), first_slice.begin(), first_slice.end());

    Trajectory tr{ScalarField(spec, std::vector<double>(per * (steps + 1), 0.0)), {}, {}, 0, 0.0,
                  cfg.hamiltonian, cfg.envelope};
    tr.max_update.reserve(steps);
    tr.cfl_margin.reserve(steps);

    std::vector<double> cur = std::move(first_slice);
    std::vector<double> next(per);
    SliceCoefficients coeff = slice_coefficients(spec, cfg.hamiltonian, spec.t0);

    for (std::size_t i = 0; i < steps; ++i) {
        double t = spec.time(i);
        const double t_end = spec.time(i + 1);
        double margin = std::numeric_limits<double>::infinity();
        double update = 0.0;
        bool done = false;
        while (!done) {
            if (time_dependent) coeff = slice_coefficients(spec, cfg.hamiltonian, t);
            const double need = required_sigma(spec, coeff, cfg.hamiltonian.p, cur);
            double sigma;
            if (cfg.sigma) {
                sigma = *cfg.sigma;
                if (need > sigma) {
                    std::ostringstream os;
                    os << "fixed sigma " << sigma << " below the monotonicity requirement " << need << " at t=" << t;
                    throw SolverError(os.str(), tr.substeps);
                }
            } else {
                sigma = std::max(need * cfg.sigma_inflation, cfg.sigma_floor);
            }
            double dt = cfl_dt(spec, sigma, cfg.c_cfl);
            const double remaining = t_end - t;
            if (dt >= remaining) {
                dt = remaining;
                done = true;
            }
            margin = std::min(margin, 1.0 - dt * N * need / h);
            try {
                update = std::max(update, step_into(spec, coeff, cfg.hamiltonian.p, cur, sigma, dt, next));
            } catch (const SolverError& e) {
                throw SolverError(e.what(), tr.substeps);
            }
            cur.swap(next);
            t = done ? t_end : t + dt;
            tr.max_sigma = std::max(tr.max_sigma, sigma);
            ++tr.substeps;
        }
        tr.max_update.push_back(update);
        tr.cfl_margin.push_back(margin);
        values.insert(values.end(), cur.begin(), cur.end());
    }
    tr.field = ScalarField(spec, std::move(values));
    return tr;
}

namespace {

double lattice_minimum(const InitialData& u0, double t, std::span<const double> x, double p_conj, double c_p,
                       double radius, int half_count, std::vector<double>& best_y) {
    const std::size_t N = x.size();
    const auto cost = [&](std::span<const double> y) {
        double r2 = 0.0;
        for (std::size_t a = 0; a < N; ++a) r2 += (x[a] - y[a]) * (x[a] - y[a]);
        return u0(y) + t * c_p * std::pow(std::sqrt(r2) / t, p_conj);
    };
    std::vector<double> center(x.begin(), x.end());
    std::vector<double> y(N);
    std::vector<int> idx(N);
    double best = std::numeric_limits<double>::infinity();
    best_y = center;
    double box = radius;
    const int per_axis = 2 * half_count + 1;
    // coarse lattice, then repeatedly zoom onto the best point
    while (box > 1e-12 * std::max(1.0, radius)) {
        std::fill(idx.begin(), idx.end(), 0);
        std::vector<double> local_best_y = best_y;
        for (;;) {
            for (std::size_t a = 0; a < N; ++a)
                y[a] = center[a] + box * static_cast<double>(idx[a] - half_count) / half_count;
            const double v = cost(y);
            if (v < best) {
                best = v;
                local_best_y = y;
            }
            std::size_t a = 0;
            while (a < N && ++idx[a] == per_axis) idx[a++] = 0;
            if (a == N) break;
        }
        best_y = local_best_y;
        center = best_y;
        box *= 2.0 / half_count;
    }
    // golden-section polish along the ray from x through the best point
    std::vector<double> dir(N);
    double r0 = 0.0;
    for (std::size_t a = 0; a < N; ++a) {
        dir[a] = best_y[a] - x[a];
        r0 += dir[a] * dir[a];
    }
    r0 = std::sqrt(r0);
    if (r0 > 0.0) {
        for (double& d : dir) d /= r0;
        const auto along = [&](double r) {
            for (std::size_t a = 0; a < N; ++a) y[a] = x[a] + r * dir[a];
            return cost(y);
        };
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = std::max(0.0, r0 - 2.0 * radius / half_count), hi = r0 + 2.0 * radius / half_count;
        double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
        double f1 = along(m1), f2 = along(m2);
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, r0); ++it) {
            if (f1 < f2) {
                hi = m2;
                m2 = m1;
                f2 = f1;
                m1 = hi - g * (hi - lo);
                f1 = along(m1);
            } else {
                lo = m1;
                m1 = m2;
                f1 = f2;
                m2 = lo + g * (hi - lo);
                f2 = along(m2);
            }
        }
        best = std::min({best, f1, f2});
    }
    return best;
}

}  // namespace

double hopf_lax(const InitialData& u0, double t, std::span<const double> x, double p, const HopfLaxOptions& options) {
    if (!(t > 0.0)) throw InvalidArgument("hopf_lax: t must be positive");
    if (!(p > 1.0)) throw InvalidArgument("hopf_lax: p must exceed 1");
    if (x.empty()) throw InvalidArgument("hopf_lax: empty point");
    const double p_conj = p / (p - 1.0);
    const double c_p = (p - 1.0) * std::pow(p, -p_conj);
    // a minimiser y satisfies |x - y| <= t p Lip^{p-1}
    const double radius = std::max(1.25 * t * p * std::pow(std::max(options.lipschitz, 0.0), p - 1.0), 1e-9);
    const int max_half = x.size() == 1 ? 4096 : (x.size() == 2 ? 128 : 16);
    std::vector<double> y;
    int half = x.size() == 1 ? 32 : 8;
    double prev = lattice_minimum(u0, t, x, p_conj, c_p, radius, half, y);
    for (;;) {
        half *= 2;
        if (half > max_half) {
            std::ostringstream os;
            os << "hopf_lax: minimum not stable to " << options.tolerance << " at lattice size " << half / 2;
            throw ConvergenceError(os.str());
        }
        const double cur = lattice_minimum(u0, t, x, p_conj, c_p, radius, half, y);
        if (std::abs(cur - prev) <= options.tolerance) return std::min(cur, prev);
        prev = cur;
    }
}

namespace {

ResidualReport residual(const ScalarField& f, double A, double B, double p) {
    const GridSpec& spec = f.spec();
    const std::size_t slices = spec.time_slices();
    if (slices < 2) throw InvalidArgument("residual: need at least two time slices");
    const Axes ax = axes_of(spec);
    const double dt = spec.time_step();
    const std::size_t per = spec.cells_per_slice();
    std::vector<double> out(per * slices);
    ResidualReport rep{ScalarField(spec, std::vector<double>(per * slices, 0.0)), 0.0,
                       std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < slices; ++i) {
        const auto s = f.slice(i);
        // forward time difference; the last slice reuses the backward one
        const std::size_t a0 = i + 1 < slices ? i : i - 1;
        const auto s0 = f.slice(a0);
        const auto s1 = f.slice(a0 + 1);
        for (std::size_t c = 0; c < per; ++c) {
            double g2 = 0.0;
            for (std::size_t st : ax.stride) {
                const std::size_t j = (c / st) % ax.n;
                const double up = j + 1 < ax.n ? s[c + st] : s[c];
                const double dn = j > 0 ? s[c - st] : s[c];
                const double span = (j + 1 < ax.n ? 1.0 : 0.0) + (j > 0 ? 1.0 : 0.0);
                const double g = (up - dn) / (span * ax.h);
                g2 += g * g;
            }
            const double r = (s1[c] - s0[c]) / dt + A * std::pow(g2, 0.5 * p) - B;
            out[per * i + c] = r;
            rep.max_positive = std::max(rep.max_positive, r);
            rep.min_value = std::min(rep.min_value, r);
        }
    }
    rep.residual = ScalarField(spec, std::move(out));
    return rep;
}

}  // namespace

ResidualReport residual_subsolution(const ScalarField& f, const CoercivityEnvelope& env, double A, double B) {
    return residual(f, A, B, env.p);
}

ResidualReport residual_supersolution(const ScalarField& f, const CoercivityEnvelope& env, double A) {
    return residual(f, A, 0.0, env.p);
}

ResidualExtremes residual_extremes(const ScalarField& residual, const Cylinder& cyl,
                                   const std::function<bool(double t, std::span<const double> x)>& keep) {
    const GridSpec& spec = residual.spec();
    const CylinderCells sel = select_cells(spec, cyl);
    ResidualExtremes out{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0};
    std::vector<double> x(static_cast<std::size_t>(spec.dimension));
    for (std::size_t i : sel.slices) {
        const double t = spec.time(i);
        for (std::size_t c : sel.cells) {
            if (keep) {
                spec.cell_center(c, x);
                if (!keep(t, x)) continue;
            }
            const double r = residual.at(i, c);
            out.max_value = std::max(out.max_value, r);
            out.min_value = std::min(out.min_value, r);
            ++out.cells;
        }
    }
    if (out.cells == 0) {
        out.max_value = 0.0;
        out.min_value = 0.0;
    }
    return out;
}

}  // namespace hjlab
