#include "hjlab/errors.hpp"
#include "hjlab/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hjlab;

namespace {

std::vector<double> slice_of(const GridSpec& spec, const std::function<double(std::span<const double>)>& f) {
    std::vector<double> out(spec.cells_per_slice());
    std::vector<double> x(static_cast<std::size_t>(spec.dimension));
    for (std::size_t c = 0; c < out.size(); ++c) {
        spec.cell_center(c, x);
        out[c] = f(x);
    }
    return out;
}

double abs_x(std::span<const double> x) { return std::abs(x[0]); }

// closed form for u0 = |x|, H = |P|^2
double kink_solution(double t, double x) { return std::abs(x) < 2 * t ? x * x / (4 * t) : std::abs(x) - t; }

}  // namespace

TEST_CASE("cfl_dt examples") {
    GridSpec spec{2, 0.2, 4, 0, 1, 0.5};  // h = 0.1
    CHECK(cfl_dt(spec, 2.0, 0.5) == doctest::Approx(0.0125));
    CHECK(cfl_dt(spec, 4.0, 0.5) == doctest::Approx(0.0125 / 2));
    GridSpec unit{1, 2.0, 4, 0, 1, 0.5};  // h = 1
    CHECK(cfl_dt(unit, 1.0, 1.0) == 1.0);
    CHECK_THROWS_AS(cfl_dt(unit, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("step examples") {
    const GridSpec spec{1, 2.0, 64, 0, 1, 0.5};
    const auto H = HamiltonianSpec::power_law(2.0);
    const auto c = slice_of(spec, [](auto) { return 1.25; });
    for (double v : step(spec, H, 0, c, 3.0, 0.01)) CHECK(v == 1.25);

    const auto u = slice_of(spec, abs_x);
    const double dt = 0.01;
    const auto next = step(spec, H, 0, u, 3.0, dt);
    std::vector<double> x(1);
    for (std::size_t k = 0; k < u.size(); ++k) {
        spec.cell_center(k, x);
        if (std::abs(x[0]) > 0.2 && std::abs(x[0]) < 1.8) CHECK(next[k] == doctest::Approx(std::abs(x[0]) - dt));
    }

    // gauge shift: u + Lambda t with H - Lambda advances like u with H
    const double Lambda = 2.0, t = 0.3;
    const auto shifted = slice_of(spec, [&](auto y) { return std::abs(y[0]) + Lambda * t; });
    const auto a = step(spec, H.shifted(-Lambda), t, shifted, 3.0, dt);
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(a[k] == doctest::Approx(next[k] + Lambda * (t + dt)).epsilon(1e-14));
}

TEST_CASE("step is monotone under the CFL condition") {
    const GridSpec spec{2, 1.25, 24, 0, 1, 0.5};
    const auto H = HamiltonianSpec::rough(1.5, 2.0, 0.25);
    const auto coeff = slice_coefficients(spec, H, 0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(spec.cells_per_slice()), w(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] = 0.1 * U(rng);
            w[k] = u[k] + 0.05 * (U(rng) + 1.0);
        }
        const double sigma = 1.01 * std::max(required_sigma(spec, coeff, 1.5, u), required_sigma(spec, coeff, 1.5, w));
        const double dt = cfl_dt(spec, sigma, 1.0);
        const auto su = step(spec, H, 0, u, sigma, dt);
        const auto sw = step(spec, H, 0, w, sigma, dt);
        for (std::size_t k = 0; k < u.size(); ++k) CHECK(su[k] <= sw[k] + 1e-15);
    }
}

TEST_CASE("step reproduces linear data exactly away from the boundary") {
    const GridSpec spec{2, 1.0, 16, 0, 1, 0.5};
    const auto H = HamiltonianSpec::scaled_power_law(1.5, 0.7, 0.2);
    const double g[2] = {0.3, -0.4};  // |g| = 0.5
    const auto u = slice_of(spec, [&](auto x) { return g[0] * x[0] + g[1] * x[1]; });
    const double dt = 0.01;
    const auto next = step(spec, H, 0, u, 2.0, dt);
    std::vector<int> idx(2);
    for (std::size_t k = 0; k < u.size(); ++k) {
        spec.decompose(k, idx);
        if (idx[0] == 0 || idx[0] == 15 || idx[1] == 0 || idx[1] == 15) continue;
        CHECK(next[k] == doctest::Approx(u[k] - dt * (0.7 * std::pow(0.5, 1.5) + 0.2)).epsilon(1e-14));
    }
}

TEST_CASE("solve: zero data and the sup-norm bound") {
    SolveConfig cfg;
    cfg.grid = GridSpec{2, 1.5, 32, 0, 0.5, 0.1};
    cfg.hamiltonian = HamiltonianSpec::power_law(1.5);
    cfg.envelope = CoercivityEnvelope{1.0, 1.5};
    cfg.initial = [](auto) { return 0.0; };
    const auto zero = solve(cfg);
    for (double v : zero.field.values()) CHECK(v == 0.0);

    cfg.hamiltonian = HamiltonianSpec::rough(1.5, 2.0, 0.25).shifted(1.0);
    cfg.envelope = CoercivityEnvelope{2.0, 1.5};
    cfg.initial = [](auto x) { return std::sin(3 * x[0]) * std::cos(2 * x[1]); };
    const auto tr = solve(cfg);
    const double h = cfg.grid.cell_width();
    for (std::size_t i = 0; i < cfg.grid.time_slices(); ++i) {
        const double bound = 1.0 + 2.0 * cfg.grid.time(i) + h;  // sup|u0| + t sup|H(.,.,0)| ... envelope Lambda
        for (double v : tr.field.slice(i)) CHECK(std::abs(v) <= bound);
    }
    for (double m : tr.cfl_margin) CHECK(m > 0.0);
    CHECK(tr.max_update.size() == cfg.grid.time_steps());
}

TEST_CASE("fixed sigma aborts when too small") {
    SolveConfig cfg;
    cfg.grid = GridSpec{1, 1.0, 32, 0, 0.5, 0.1};
    cfg.hamiltonian = HamiltonianSpec::power_law(2.0);
    cfg.envelope = CoercivityEnvelope{1.0, 2.0};
    cfg.initial = [](auto x) { return 5 * x[0]; };
    cfg.sigma = 1.0;
    CHECK_THROWS_AS(solve(cfg), SolverError);
}

TEST_CASE("hopf_lax examples") {
    const double one[1] = {1.0};
    const double three[1] = {3.0};
    CHECK(hopf_lax(abs_x, 1.0, one, 2.0) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(hopf_lax(abs_x, 1.0, three, 2.0) == doctest::Approx(2.0).epsilon(1e-6));
    const double x2[2] = {0.3, -0.7};
    CHECK(hopf_lax([](auto) { return 1.5; }, 0.7, x2, 1.5) == doctest::Approx(1.5).epsilon(1e-9));
    CHECK_THROWS_AS(hopf_lax(abs_x, 0.0, one, 2.0), InvalidArgument);

    // radial kink in 2D, p = 2: same profile in |x|
    const double x[2] = {0.6, 0.8};
    CHECK(hopf_lax([](auto y) { return std::hypot(y[0], y[1]); }, 1.0, x, 2.0, {1.0, 1e-8}) ==
          doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("solver approaches the Hopf-Lax solution") {
    SolveConfig cfg;
    cfg.grid = GridSpec{1, 4.0, 256, 0, 1, 0.25};
    cfg.hamiltonian = HamiltonianSpec::power_law(2.0);
    cfg.envelope = CoercivityEnvelope{1.0, 2.0};
    cfg.initial = abs_x;
    const auto tr = solve(cfg);
    std::vector<double> x(1);
    double err = 0;
    for (std::size_t k = 0; k < cfg.grid.cells_per_slice(); ++k) {
        cfg.grid.cell_center(k, x);
        if (std::abs(x[0]) <= 2) err = std::max(err, std::abs(tr.field.at(4, k) - kink_solution(1.0, x[0])));
    }
    CHECK(err < 0.1);
}

TEST_CASE("residual examples") {
    const GridSpec spec{2, 1.25, 20, 0, 1, 0.1};
    const CoercivityEnvelope env{2.0, 1.5};
    const auto lin = make_field(spec, [&](double t, std::span<const double>) { return env.lambda * t; });
    const auto sub = residual_subsolution(lin, env, 1 / env.lambda, env.lambda);
    CHECK(sub.max_positive == doctest::Approx(0.0).epsilon(1e-12));

    const auto tf = make_field(spec, [](double t, std::span<const double>) { return t; });
    CHECK(residual_supersolution(tf, env, env.lambda).min_value >= 1.0 - 1e-12);
    const auto c = make_field(spec, [](double, std::span<const double>) { return -0.4; });
    const auto rc = residual_supersolution(c, env, env.lambda);
    CHECK(rc.min_value == 0.0);
    CHECK(rc.max_positive == 0.0);

    // a solved subsolution of u_t + |grad u|^p / Lambda <= Lambda
    SolveConfig cfg;
    cfg.grid = GridSpec{2, 1.25, 40, 0, 1, 0.05};
    cfg.hamiltonian = HamiltonianSpec::scaled_power_law(1.5, 1 / env.lambda);
    cfg.envelope = env;
    cfg.initial = [](auto x) { return 0.5 * std::cos(2 * x[0]) * std::sin(x[1]); };
    const auto tr = solve(cfg);
    const auto r = residual_subsolution(tr.field, env, 1 / env.lambda, env.lambda);
    CHECK(r.max_positive <= 0.0);
}
