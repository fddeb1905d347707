#include "hjlab/errors.hpp"
#include "hjlab/experiment.hpp"

#include <doctest.h>

#include <string>

using namespace hjlab;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text, "cfg.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal config takes documented defaults") {
    const auto c = parse_config_text("scenario: custom\ngrid: {cells: 16}\nhamiltonian: {p: 1.5}\n");
    CHECK(c.scenario == "custom");
    CHECK(c.seed == 1);
    CHECK(c.grid.dimension == 2);
    CHECK(c.grid.cells == 16);
    CHECK(c.grid.half_width == 1.25);
    CHECK(c.hamiltonian.kind == HamiltonianKind::PowerLaw);
    CHECK(c.envelope.p == 1.5);
    CHECK(c.envelope.lambda == 1.0);
    CHECK(c.chain.alpha_dg == 1.0);
    CHECK_FALSE(c.chain.delta.has_value());
    CHECK_FALSE(c.tolerances.lemma1.has_value());
    CHECK(c.cascade.mode == ZoomMode::Resolve);
    CHECK(c.checks.empty());
    CHECK_FALSE(c.echo.contains("output"));
    CHECK(c.echo["grid"]["cells"] == 16);
}

TEST_CASE("empty document is the custom scenario") {
    const auto c = parse_config_text("");
    CHECK(c.scenario == "custom");
}

TEST_CASE("scenario defaults sit between base defaults and the user config") {
    const auto c = parse_config_text("scenario: hopf-lax-validation\n");
    CHECK(c.grid.dimension == 1);
    CHECK(c.grid.half_width == 4.0);
    CHECK(c.hamiltonian.p == 2.0);
    CHECK(c.initial.name == "abs");
    const auto d = parse_config_text("scenario: hopf-lax-validation\ngrid: {half_width: 3.0}\n");
    CHECK(d.grid.half_width == 3.0);
    CHECK(d.grid.dimension == 1);
}

TEST_CASE("unknown keys are rejected with their line") {
    const auto e = error_of("scenario: custom\ngrid:\n  cells: 20\n  foo: 3\n");
    CHECK(e.find("cfg.yaml:4") != std::string::npos);
    CHECK(e.find("'foo'") != std::string::npos);
    CHECK(error_of("foo: 1\n").find("'foo'") != std::string::npos);
    CHECK(error_of("scenario: nonsense\n").find("nonsense") != std::string::npos);
}

TEST_CASE("p < N gate for De Giorgi checks") {
    const auto e = error_of("grid: {dimension: 2}\nhamiltonian: {p: 2.0}\nchecks: [lemma1]\n");
    CHECK(e.find("p < N") != std::string::npos);
    CHECK_NOTHROW(parse_config_text("grid: {dimension: 2}\nhamiltonian: {p: 2.0}\n"));
    CHECK_FALSE(error_of("scenario: barrier\ngrid: {dimension: 1}\n").empty());
}

TEST_CASE("type and value errors") {
    CHECK(error_of("grid: {cells: many}\n").find("grid.cells") != std::string::npos);
    CHECK(error_of("grid: {cells: 2.5}\n").find("integer") != std::string::npos);
    CHECK(error_of("grid: {cells: 0}\n").find("grid") != std::string::npos);
    CHECK(error_of("checks: [lemma7]\n").find("lemma7") != std::string::npos);
    CHECK(error_of("initial: {name: spiral}\n").find("spiral") != std::string::npos);
    CHECK(error_of("cascade: {mode: warp}\n").find("cascade.mode") != std::string::npos);
    CHECK(error_of("hamiltonian: {kind: tabulated}\n").find("tabulated") != std::string::npos);
    CHECK(error_of("solver: {c_cfl: 1.5}\n").find("c_cfl") != std::string::npos);
    CHECK(error_of("grid: [1, 2]\n").find("mapping") != std::string::npos);
    CHECK(error_of("grid: {cells: [\n").find("cfg.yaml") != std::string::npos);
    // quoted numbers stay strings
    CHECK(error_of("grid: {cells: \"20\"}\n").find("integer") != std::string::npos);
}

TEST_CASE("chain inputs and tolerance keywords") {
    const auto c = parse_config_text("chain: {alpha_dg: empirical, alpha_fallback: 0.5, delta: 0.01}\n"
                                     "tolerances: {lemma1: 0.25, residual: 0.01}\n");
    CHECK_FALSE(c.chain.alpha_dg.has_value());
    CHECK(c.chain.alpha_fallback == 0.5);
    CHECK(c.chain.delta == 0.01);
    CHECK(c.tolerances.lemma1 == 0.25);
    CHECK(c.tolerances.residual == 0.01);
    CHECK(error_of("chain: {alpha_dg: -1}\n").find("alpha_dg") != std::string::npos);
}

TEST_CASE("hamiltonian kinds from config") {
    const auto r = parse_config_text("hamiltonian: {kind: rough-coefficient, lambda: 2.0, eta: 0.0625}\n"
                                     "envelope: {lambda: 2.0}\n");
    CHECK(r.hamiltonian.kind == HamiltonianKind::RoughCoefficient);
    CHECK(r.hamiltonian.eta == 0.0625);
    const auto s = parse_config_text("hamiltonian: {kind: scaled-power-law, scale: 3.0, offset: -1.0}\n");
    CHECK(s.hamiltonian.kind == HamiltonianKind::ScaledPowerLaw);
    CHECK(s.hamiltonian.scale == 3.0);
    CHECK(s.hamiltonian.offset == -1.0);
}

TEST_CASE("config from JSON validates the same way") {
    const auto c = config_from_json(nlohmann::json{{"grid", {{"cells", 12}}}});
    CHECK(c.grid.cells == 12);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bar", 1}}), ConfigError);
}

TEST_CASE("command-line overrides update the echo") {
    auto c = parse_config_text("seed: 3\n");
    apply_overrides(c, 9, 24);
    CHECK(c.seed == 9);
    CHECK(c.grid.cells == 24);
    CHECK(c.echo["seed"] == 9);
    CHECK(c.echo["grid"]["cells"] == 24);
    CHECK_THROWS_AS(apply_overrides(c, std::nullopt, 0), ConfigError);
}
