#include "hjlab/errors.hpp"
#include "hjlab/field_io.hpp"
#include "hjlab/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace hjlab;

namespace {

GridSpec unit_box(int dim, int cells, double L = 1.0, double t0 = 0.0, double t1 = 1.0, double dt = 0.25) {
    return GridSpec{dim, L, cells, t0, t1, dt};
}

// [-2,2] x [-1.25,1.25]^2, h = dt = 1/32
GridSpec padded_2d() { return GridSpec{2, 1.25, 80, -2.0, 2.0, 1.0 / 32}; }

}  // namespace

TEST_CASE("grid spec validation") {
    CHECK_NOTHROW(unit_box(2, 4).validate());
    CHECK_THROWS_AS(unit_box(2, 3).validate(), InvalidArgument);
    CHECK_THROWS_AS(unit_box(1, 8, 1.0, 1.0, 1.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(unit_box(1, 8, 1.0, 0.0, 1.0, 0.3).validate(), InvalidArgument);
    // dt within one part in 1e6 of dividing the interval
    CHECK_NOTHROW(unit_box(1, 8, 1.0, 0.0, 1.0, 0.1 * (1 + 1e-8)).validate());
    CHECK(unit_box(1, 8, 1.0, 0.0, 1.0, 0.1).time_slices() == 11);
}

TEST_CASE("make_field examples") {
    const auto spec = unit_box(2, 4);
    const auto zero = make_field(spec, [](double, std::span<const double>) { return 0.0; });
    for (double v : zero.values()) CHECK(v == 0.0);

    const auto tf = make_field(spec, [](double t, std::span<const double>) { return t; });
    for (std::size_t i = 0; i < spec.time_slices(); ++i)
        for (double v : tf.slice(i)) CHECK(v == doctest::Approx(0.25 * i));

    // hand-enumerated centres of 4 cells on [-1, 1]
    const double centres[4] = {-0.75, -0.25, 0.25, 0.75};
    const auto xf = make_field(spec, [](double, std::span<const double> x) { return x[0]; });
    for (std::size_t c = 0; c < 16; ++c) CHECK(xf.at(2, c) == centres[c % 4]);

    CHECK_THROWS_WITH_AS(make_field(spec, [](double, std::span<const double>) { return NAN; }),
                         doctest::Contains("t=0"), InvalidArgument);
}

TEST_CASE("cylinder_measure examples") {
    CHECK(cylinder_measure(Cylinder::centered(-2, 2, 2, 1), 2) == doctest::Approx(4 * std::numbers::pi));
    CHECK(cylinder_measure(Cylinder::centered(0, 1, 3, 1), 3) == doctest::Approx(4 * std::numbers::pi / 3));
    CHECK(cylinder_measure(Cylinder::centered(-2, 2, 1, 1), 1) == doctest::Approx(8.0));
    CHECK_THROWS_AS(cylinder_measure(Cylinder::centered(1, 0, 1, 1), 1), InvalidArgument);
}

TEST_CASE("level_set_measure examples") {
    const auto spec = padded_2d();
    const auto cyl = Cylinder::centered(-2, 2, 2, 1);
    const double h = spec.cell_width();
    const double layer = 2 * 2 * h;  // 2N h / r

    const auto tf = make_field(spec, [](double t, std::span<const double>) { return t; });
    const auto below = level_set_measure(tf, cyl, LevelRange::at_most(0.0));
    // the t = 0 slice carries a dual interval of dt
    CHECK(std::abs(below.measure - 2 * std::numbers::pi) <= 2 * std::numbers::pi * (layer + spec.dt));
    CHECK(below.cell_width == h);

    const auto five = make_field(spec, [](double, std::span<const double>) { return 5.0; });
    CHECK(level_set_measure(five, cyl, LevelRange::open(0, 1)).measure == 0.0);

    const auto xf = make_field(spec, [](double, std::span<const double> x) { return x[0]; });
    CHECK(std::abs(level_set_measure(xf, cyl, LevelRange::at_most(0.0)).measure - 2 * std::numbers::pi) <=
          2 * std::numbers::pi * layer);

    const Cylinder far{-2, 2, {10.0, 10.0}, 0.5};
    CHECK_THROWS_AS(level_set_measure(xf, far, LevelRange::everything()), EmptyIntersection);
}

TEST_CASE("level_set_measure additivity and total") {
    const auto spec = padded_2d();
    const auto cyl = Cylinder::centered(-1, 1.5, 2, 1);
    const auto f = make_field(spec, [](double t, std::span<const double> x) {
        return std::round(4 * (std::sin(3 * x[0]) + t * x[1])) / 4;  // plenty of ties at level 0.5
    });
    const double m = 0.5;
    const auto all = level_set_measure(f, cyl, LevelRange::open(-1, 2));
    const auto lower = level_set_measure(f, cyl, LevelRange::open(-1, m));
    const auto upper = level_set_measure(f, cyl, LevelRange::open(m, 2));
    const auto closed = level_set_measure(f, cyl, LevelRange{-1, m, false, true});
    const auto tie = closed.cells - lower.cells;
    CHECK(tie > 0);
    CHECK(lower.cells + upper.cells + tie == all.cells);

    const auto every = level_set_measure(f, cyl, LevelRange::everything());
    const double exact = cylinder_measure(cyl, 2);
    CHECK(std::abs(every.measure - exact) / exact <= 2 * 2 * spec.cell_width());
}

TEST_CASE("discrete_gradient_norm_p") {
    const auto spec = unit_box(2, 32, 1.0, 0.0, 1.0, 0.5);
    const auto c = make_field(spec, [](double, std::span<const double>) { return 3.0; });
    CHECK(discrete_gradient_norm_p(c, 0, 2.0) == 0.0);
    const auto xf = make_field(spec, [](double, std::span<const double> x) { return x[0]; });
    CHECK(discrete_gradient_norm_p(xf, 0, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(discrete_gradient_norm_p(xf, 1, 1.5) == doctest::Approx(4.0).epsilon(1e-12));

    // |a|^p homogeneity, exact in cell arithmetic up to rounding
    const auto f = make_field(spec, [](double t, std::span<const double> x) { return std::sin(3 * x[0]) * x[1] + t; });
    for (double a : {-2.0, 0.5, 3.0}) {
        const auto g = map_values(f, [a](double, std::span<const double>, double u) { return a * u; });
        CHECK(discrete_gradient_norm_p(g, 1, 1.5) ==
              doctest::Approx(std::pow(std::abs(a), 1.5) * discrete_gradient_norm_p(f, 1, 1.5)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(discrete_gradient_norm_p(f, 0, 1.0), InvalidArgument);
}

TEST_CASE("oscillation examples and monotonicity") {
    const auto spec = padded_2d();
    const auto seven = make_field(spec, [](double, std::span<const double>) { return 7.0; });
    CHECK(oscillation(seven, Cylinder::centered(-1, 0, 2, 1)) == 0.0);

    const auto xf = make_field(spec, [](double, std::span<const double> x) { return x[0]; });
    CHECK(std::abs(oscillation(xf, Cylinder::centered(-1, 0, 2, 0.5)) - 1.0) <= spec.cell_width());

    const auto tf = make_field(spec, [](double t, std::span<const double>) { return t; });
    CHECK(std::abs(oscillation(tf, Cylinder::centered(-1, 0, 2, 1)) - 1.0) <= spec.dt);

    const auto f = make_field(spec, [](double t, std::span<const double> x) { return std::cos(2 * x[0] - t) * x[1]; });
    const double inner = oscillation(f, Cylinder{-0.5, 0.5, {0.1, 0.0}, 0.3});
    const double outer = oscillation(f, Cylinder{-1.0, 1.0, {0.0, 0.0}, 0.9});
    CHECK(inner <= outer);
    CHECK(cell_oscillation(xf, Cylinder::centered(-1, 0, 2, 0.5)) == doctest::Approx(spec.cell_width()));
}

TEST_CASE("field sampling is exact on multilinear data") {
    const auto spec = unit_box(2, 8, 1.0, 0.0, 1.0, 0.25);
    const auto f = make_field(spec, [](double t, std::span<const double> x) { return 1 + 2 * t - x[0] + 0.5 * x[1]; });
    const double x[2] = {0.13, -0.41};
    CHECK(f.sample(0.3, x) == doctest::Approx(1 + 0.6 - 0.13 - 0.205).epsilon(1e-14));
}

TEST_CASE("snapshot round trip") {
    const auto spec = GridSpec{2, 1.0 / 3.0, 5, -0.1, 0.2, 0.1};
    const auto f = make_field(spec, [](double t, std::span<const double> x) { return std::exp(t) * x[0] / 3.0 + x[1]; });
    std::stringstream ss;
    write_field_csv(f, ss);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "t,x1,x2,u");
    ss.seekg(0);
    const auto back = read_field_csv(spec, ss);
    for (std::size_t i = 0; i < f.values().size(); ++i) CHECK(back.values()[i] == f.values()[i]);

    const auto dir = std::filesystem::temp_directory_path() / "hjlab_snapshot_test";
    const auto files = write_snapshot(f, dir, "snap", 2);
    CHECK(read_grid_descriptor(files.descriptor) == spec);
    std::filesystem::remove_all(dir);
}
