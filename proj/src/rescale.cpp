#include "hjlab/rescale.hpp"

#include "hjlab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace hjlab {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// ln(eps1) = r ln(theta); both factors are stored, so no cancellation.
double log_eps1(const ConstantChain& chain) { return chain.r * chain.log_theta; }

double sq(double v) { return v * v; }

}  // namespace

ScalarField initial_rescale(const ScalarField& f, const ConstantChain& chain) {
    const auto& s = f.spec();
    if (std::abs(s.t1) > 1e-12 || s.t0 > -4.0 + 1e-12)
        throw DomainMismatch("initial_rescale: field must cover [-4, 0] in time, got [" + fmt(s.t0) + ", " +
                             fmt(s.t1) + "]");
    if (s.half_width < 1.0) throw DomainMismatch("initial_rescale: box half width " + fmt(s.half_width) + " < 1");
    if (!(chain.epsilon > 0.0 && chain.epsilon < 1.0))
        throw InvalidArgument("initial_rescale: chain epsilon " + fmt(chain.epsilon) + " outside (0, 1)");
    const double tstretch = std::pow(chain.epsilon, -chain.a_exp);
    GridSpec out = s;
    out.half_width = s.half_width / chain.epsilon;
    out.t0 = s.t0 * tstretch;
    out.t1 = s.t1 * tstretch;
    out.dt = s.dt * tstretch;
    return ScalarField(out, std::vector<double>(f.values().begin(), f.values().end()));
}

double zoom_time_factor(const ConstantChain& chain) { return std::exp(chain.alpha1 * log_eps1(chain)); }

double zoom_value_factor(const ConstantChain& chain) { return 4.0 / (4.0 - chain.lambda_tilde); }

Recenter select_recenter(const ScalarField& f, const ConstantChain& chain) {
    const auto& s = f.spec();
    // one extra cell so the interpolation stencil of the next frame is covered
    const double reach = 0.5 + s.cell_width() * std::sqrt(static_cast<double>(s.dimension));
    const auto cells = select_cells(s, Cylinder::centered(-1.0 - s.time_step(), 0.0, s.dimension, reach));
    Recenter rc;
    rc.min_value = std::numeric_limits<double>::infinity();
    rc.max_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i : cells.slices)
        for (std::size_t c : cells.cells) {
            const double v = f.at(i, c);
            rc.min_value = std::min(rc.min_value, v);
            rc.max_value = std::max(rc.max_value, v);
        }
    const double lt = chain.lambda_tilde;
    const double half = 2.0 - lt / 2;
    const double lo = std::max(rc.max_value - half, -lt / 2);
    const double hi = std::min(rc.min_value + half, lt / 2);
    // rounding in `half` can make a tight window look empty by a few ulps
    const double round = 8 * std::numeric_limits<double>::epsilon() * 2.0;
    if (lo > hi + round)
        throw PreconditionError("select_recenter: no admissible d, range [" + fmt(rc.min_value) + ", " +
                                fmt(rc.max_value) + "] has oscillation above 4 - lambda_tilde = " + fmt(4 - lt));
    const double mid = 0.5 * (rc.min_value + rc.max_value);
    rc.d = lo > hi ? 0.5 * (lo + hi) : std::clamp(mid, lo, hi);
    rc.bound = std::max(rc.max_value - rc.d, rc.d - rc.min_value);
    return rc;
}

void check_zoom_envelope(const ScalarField& f, const ConstantChain& chain, double slack) {
    const auto& s = f.spec();
    const double eps1 = std::exp(log_eps1(chain));
    const double inner_r = 1.0 / (2.0 * eps1);
    const double inner_t = -1.0 / zoom_time_factor(chain);
    std::vector<double> x(static_cast<std::size_t>(s.dimension));
    for (std::size_t c = 0; c < s.cells_per_slice(); ++c) {
        s.cell_center(c, x);
        const double r = norm(x);
        for (std::size_t i = 0; i < s.time_slices(); ++i) {
            const double t = s.time(i);
            const bool inner = r < inner_r && t >= inner_t;
            const double bound = inner ? 2.0 : 2.0 + chain.q * std::max(r - 1.0, 0.0);
            const double v = f.at(i, c);
            if (!(std::abs(v) <= bound + slack))
                throw EnvelopeError("zoom envelope violated: |u| = " + fmt(std::abs(v)) + " > " + fmt(bound) +
                                        " at t = " + fmt(t) + ", |x| = " + fmt(r),
                                    t, x, v, bound);
        }
    }
}

ScalarField zoom_step(const ScalarField& f, double d, const ConstantChain& chain) {
    const double tf = zoom_time_factor(chain);
    const double eps1 = std::exp(log_eps1(chain));
    const double denom = 4.0 - chain.lambda_tilde;
    std::vector<double> y(static_cast<std::size_t>(f.spec().dimension));
    auto out = make_field(f.spec(), [&](double t, std::span<const double> x) {
        for (std::size_t a = 0; a < y.size(); ++a) y[a] = eps1 * x[a];
        return 4.0 * (f.sample(tf * t, y) - d) / denom;
    });
    check_zoom_envelope(out, chain);
    return out;
}

std::string to_string(ZoomMode mode) { return mode == ZoomMode::Resolve ? "resolve" : "interpolate"; }

ZoomMode zoom_mode_from_string(const std::string& name) {
    if (name == "resolve") return ZoomMode::Resolve;
    if (name == "interpolate") return ZoomMode::Interpolate;
    throw InvalidArgument("unknown zoom mode '" + name + "' (expected resolve or interpolate)");
}

ScalarField zoom_step_resolve(const ZoomFrame& frame, double d, const ConstantChain& chain,
                              const RefineSchedule& schedule, HamiltonianSpec* zoomed_out) {
    if (!frame.hamiltonian) throw InvalidArgument("zoom_step_resolve: frame carries no Hamiltonian");
    const auto& s = frame.field.spec();
    const double tf = zoom_time_factor(chain);
    const double eps1 = std::exp(log_eps1(chain));
    const double kappa = zoom_value_factor(chain);
    const std::vector<double> origin(static_cast<std::size_t>(s.dimension), 0.0);

    SolveConfig cfg;
    cfg.grid = s;
    if (schedule.cells > 0) cfg.grid.cells = schedule.cells;
    cfg.hamiltonian = frame.hamiltonian->zoomed(0.0, tf, origin, eps1, kappa);
    cfg.envelope = frame.envelope;
    cfg.c_cfl = schedule.c_cfl;
    const double t_start = tf * s.t0;
    const double denom = 4.0 - chain.lambda_tilde;
    cfg.initial = [&, y = std::vector<double>(origin.size())](std::span<const double> x) mutable {
        for (std::size_t a = 0; a < y.size(); ++a) y[a] = eps1 * x[a];
        return 4.0 * (frame.field.sample(t_start, y) - d) / denom;
    };
    auto traj = solve(cfg);
    check_zoom_envelope(traj.field, chain);
    if (zoomed_out) *zoomed_out = cfg.hamiltonian;
    return std::move(traj.field);
}

CascadeResult zoom_cascade(const ZoomFrame& frame, const ConstantChain& chain, int M, const RefineSchedule& schedule) {
    if (M < 0) throw InvalidArgument("zoom_cascade: M = " + std::to_string(M) + " < 0");
    const auto& s0 = frame.field.spec();
    if (std::abs(s0.t1) > 1e-12 || s0.t0 > -4.0 + 1e-12)
        throw DomainMismatch("zoom_cascade: frame must cover [-4, 0] in time");
    if (s0.half_width < 1.0) throw DomainMismatch("zoom_cascade: frame box half width below 1");
    if (schedule.mode == ZoomMode::Resolve && !frame.hamiltonian)
        throw InvalidArgument("zoom_cascade: resolve mode needs the frame Hamiltonian");

    CascadeResult result;
    const double leps = log_eps1(chain);
    const int N = s0.dimension;
    ZoomFrame current = frame;
    double unit = 1.0;                // theta^m: frame-m values back to first-frame units
    double bound = 4.0 * chain.theta;  // 4 theta^{m+1}
    for (int m = 0; m <= M; ++m) {
        OscillationRecord rec;
        rec.m = m;
        rec.cylinder = Cylinder::centered(-std::exp(m * chain.alpha1 * leps), 0.0, N, 0.5 * std::exp(m * leps));
        try {
            rec.osc_measured = unit * oscillation(current.field, Cylinder::centered(-1.0, 0.0, N, 0.5));
        } catch (const Error& e) {
            result.error = "record " + std::to_string(m) + ": " + e.what();
            return result;
        }
        rec.osc_bound = bound;
        rec.satisfied = rec.osc_measured <= rec.osc_bound + schedule.tolerance;
        if (m == M) {
            result.records.push_back(rec);
            break;
        }
        try {
            const auto rc = select_recenter(current.field, chain);
            rec.d = rc.d;
            result.records.push_back(rec);
            if (schedule.mode == ZoomMode::Interpolate) {
                current.field = zoom_step(current.field, rc.d, chain);
                if (current.hamiltonian) {
                    const std::vector<double> origin(static_cast<std::size_t>(N), 0.0);
                    current.hamiltonian = current.hamiltonian->zoomed(0.0, zoom_time_factor(chain), origin,
                                                                      std::exp(leps), zoom_value_factor(chain));
                }
            } else {
                HamiltonianSpec next_h;
                current.field = zoom_step_resolve(current, rc.d, chain, schedule, &next_h);
                current.hamiltonian = next_h;
            }
        } catch (const Error& e) {
            if (result.records.size() <= static_cast<std::size_t>(m)) result.records.push_back(rec);
            result.error = "zoom " + std::to_string(m) + ": " + e.what();
            return result;
        }
        unit *= chain.theta;
        bound *= chain.theta;
    }
    return result;
}

void write_cascade_csv(const std::vector<OscillationRecord>& records, std::ostream& out) {
    out << "m,radius,t_depth,osc_measured,osc_bound,d_m,satisfied\n";
    out << std::setprecision(17);
    for (const auto& r : records)
        out << r.m << ',' << r.cylinder.radius << ',' << -r.cylinder.t_lo << ',' << r.osc_measured << ','
            << r.osc_bound << ',' << r.d << ',' << (r.satisfied ? "true" : "false") << '\n';
}

HolderEstimate holder_estimate(const std::vector<OscillationRecord>& records, const ConstantChain& chain) {
    HolderEstimate h;
    h.alpha_theory = chain.alpha_H;
    std::vector<double> xs, ys;
    for (const auto& r : records)
        if (r.osc_measured > 0.0 && std::isfinite(r.osc_measured) && r.cylinder.radius > 0.0) {
            xs.push_back(std::log(r.cylinder.radius));
            ys.push_back(std::log(r.osc_measured));
        }
    h.points_used = static_cast<int>(xs.size());
    if (!records.empty()) {
        h.radius_min = h.radius_max = records.front().cylinder.radius;
        for (const auto& r : records) {
            h.radius_min = std::min(h.radius_min, r.cylinder.radius);
            h.radius_max = std::max(h.radius_max, r.cylinder.radius);
        }
    }
    if (xs.size() < 3) {
        h.degenerate = true;
        return h;
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += sq(xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) {
        h.degenerate = true;
        return h;
    }
    h.alpha_est = sxy / sxx;
    const double intercept = my - h.alpha_est * mx;
    h.C_est = std::exp(intercept);
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) ss += sq(ys[i] - intercept - h.alpha_est * xs[i]);
    h.fit_residual = std::sqrt(ss / n);
    return h;
}

void to_json(nlohmann::json& j, const OscillationRecord& r) {
    j = nlohmann::json{{"m", r.m},
                       {"radius", r.cylinder.radius},
                       {"t_depth", -r.cylinder.t_lo},
                       {"osc_measured", r.osc_measured},
                       {"osc_bound", r.osc_bound},
                       {"d_m", r.d},
                       {"satisfied", r.satisfied}};
}

void to_json(nlohmann::json& j, const HolderEstimate& h) {
    j = nlohmann::json{{"alpha_est", h.alpha_est},       {"C_est", h.C_est},
                       {"alpha_theory", h.alpha_theory}, {"fit_residual", h.fit_residual},
                       {"points_used", h.points_used},   {"radius_range", {h.radius_min, h.radius_max}},
                       {"degenerate", h.degenerate}};
}

Anchor anchor_frame(const Trajectory& traj, double t0, std::span<const double> x0, const AnchorOptions& o) {
    const auto& ts = traj.field.spec();
    const int N = ts.dimension;
    if (static_cast<int>(x0.size()) != N) throw InvalidArgument("anchor_frame: base point dimension mismatch");
    if (!(o.tau > 0.0) || !(o.rho > 0.0)) throw InvalidArgument("anchor_frame: tau and rho must be positive");
    if (t0 - 4.0 * o.tau < ts.t0 - 1e-12 || t0 > ts.t1 + 1e-12)
        throw DomainMismatch("anchor_frame: window [" + fmt(t0 - 4.0 * o.tau) + ", " + fmt(t0) +
                             "] leaves the trajectory's time range");
    GridSpec fs{N, o.half_width, o.cells, -4.0, 0.0, o.dt};
    fs.validate();
    std::vector<double> y(static_cast<std::size_t>(N));
    auto raw = make_field(fs, [&](double t, std::span<const double> x) {
        for (int a = 0; a < N; ++a) y[a] = x0[a] + o.rho * x[a];
        return traj.field.sample(t0 + o.tau * t, y);
    });
    const auto [lo, hi] = std::minmax_element(raw.values().begin(), raw.values().end());
    Anchor an{ZoomFrame{raw, std::nullopt, traj.envelope}, 0.5 * (*lo + *hi), 0.5 * (*hi - *lo)};
    const bool flat = an.half_range <= 1e-12 * std::max(1.0, std::abs(an.mid));
    const double scale = flat ? 1.0 : 2.0 / an.half_range;
    if (flat) an.half_range = 0.0;
    const double mid = an.mid;
    an.frame.field = map_values(raw, [&](double, std::span<const double>, double u) {
        return flat ? 0.0 : std::clamp(scale * (u - mid), -2.0, 2.0);
    });
    an.frame.hamiltonian = traj.hamiltonian.zoomed(t0, o.tau, x0, o.rho, scale);
    return an;
}

TheoremReport theorem_check(const Trajectory& traj, double delta_time, const ConstantChain& chain,
                            const TheoremOptions& o) {
    const auto& ts = traj.field.spec();
    const int N = ts.dimension;
    const double t_hi = o.t_hi > 0.0 ? o.t_hi : ts.t1;
    if (!(delta_time > ts.t0 && delta_time < ts.t1))
        throw InvalidArgument("theorem_check: delta_time " + fmt(delta_time) + " outside (" + fmt(ts.t0) + ", " +
                              fmt(ts.t1) + ")");
    if (t_hi < delta_time || t_hi > ts.t1 + 1e-12) throw InvalidArgument("theorem_check: bad base-time window");
    if (o.points_per_axis < 1) throw InvalidArgument("theorem_check: points_per_axis < 1");
    AnchorOptions anchor = o.anchor;
    if (anchor.tau <= 0.0) anchor.tau = (delta_time - ts.t0) / 4.0;

    const int k = o.points_per_axis;
    auto axis_point = [k](double lo, double hi, int i) { return k == 1 ? lo : lo + (hi - lo) * i / (k - 1); };
    std::size_t total = 1;
    for (int a = 0; a <= N; ++a) total *= static_cast<std::size_t>(k);

    TheoremReport rep;
    rep.alpha_theory = chain.alpha_H;
    rep.points.resize(total);
    for (std::size_t id = 0; id < total; ++id) {
        auto& bp = rep.points[id];
        std::size_t rest = id;
        bp.t0 = axis_point(delta_time, t_hi, static_cast<int>(rest % k));
        rest /= k;
        bp.x0.resize(static_cast<std::size_t>(N));
        for (int a = 0; a < N; ++a) {
            bp.x0[a] = axis_point(-o.x_radius, o.x_radius, static_cast<int>(rest % k));
            rest /= k;
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t id = next++; id < total; id = next++) {
            auto& bp = rep.points[id];
            try {
                const auto an = anchor_frame(traj, bp.t0, bp.x0, anchor);
                bp.half_range = an.half_range;
                auto cas = zoom_cascade(an.frame, chain, o.zooms, o.schedule);
                bp.records = std::move(cas.records);
                bp.error = std::move(cas.error);
            } catch (const Error& e) {
                bp.error = e.what();
            }
            bp.holder = holder_estimate(bp.records, chain);
        }
    };
    const unsigned nthreads = std::max(1u, std::min<unsigned>(o.workers, static_cast<unsigned>(total)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    }

    rep.min_alpha_est = std::numeric_limits<double>::infinity();
    for (const auto& bp : rep.points) {
        if (bp.error) ++rep.failed_points;
        rep.min_alpha_est = std::min(rep.min_alpha_est, bp.holder.alpha_est);
    }
    rep.alpha_quotient = std::clamp(rep.min_alpha_est, 1e-3, 1.0);
    for (auto& bp : rep.points) {
        for (const auto& r : bp.records) {
            const double osc = r.osc_measured * bp.half_range / 2.0;
            const double radius = anchor.rho * r.cylinder.radius;
            bp.max_quotient = std::max(bp.max_quotient, osc / std::pow(radius, rep.alpha_quotient));
        }
        rep.max_quotient = std::max(rep.max_quotient, bp.max_quotient);
    }
    return rep;
}

void to_json(nlohmann::json& j, const BasePointResult& r) {
    j = nlohmann::json{{"t0", r.t0},
                       {"x0", r.x0},
                       {"records", r.records},
                       {"holder", r.holder},
                       {"half_range", r.half_range},
                       {"max_quotient", r.max_quotient},
                       {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)}};
}

void to_json(nlohmann::json& j, const TheoremReport& r) {
    j = nlohmann::json{{"points", r.points},
                       {"min_alpha_est", r.min_alpha_est},
                       {"alpha_quotient", r.alpha_quotient},
                       {"max_quotient", r.max_quotient},
                       {"alpha_theory", r.alpha_theory},
                       {"failed_points", r.failed_points}};
}

}  // namespace hjlab
