#pragma once

// Scenario configs, single runs and seeded ensembles, report emission and
// exit-code mapping.

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/initial_data.hpp"
#include "hjlab/rescale.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hjlab {

inline constexpr const char* kReportVersion = "1.0.0";

struct ScenarioInfo {
    std::string name;
    std::string description;
};

const std::vector<ScenarioInfo>& scenarios();

/// Names accepted in the `checks` list.
const std::vector<std::string>& check_names();

struct ChainInputs {
    std::optional<double> alpha_dg = 1.0;  ///< empty: empirical search over the ensemble
    double alpha_fallback = 1.0;           ///< alpha_dg for the chain while searching
    std::optional<double> delta;           ///< empty: delta_constant(fast_convergence_threshold(D, p/N), Lambda)
    double D = 10.0;
};

struct Tolerances {
    std::optional<double> lemma1;          ///< empty: one cell-width oscillation
    double osc_above = 0.0;
    double osc_below = 0.0;
    std::optional<double> residual;        ///< empty: residual preconditions not evaluated
    double barrier_cells = 5.0;            ///< barrier checks allow this many cell widths
    double cascade = 0.0;
    double order = 0.4;
    double hopf_lax_error = 0.02;
    double alpha_min = 0.5;
    double eta_ratio = 2.0;
};

struct SolverOptions {
    double c_cfl = 0.9;
    std::optional<double> sigma;
    double sigma_inflation = 1.5;
    double sigma_floor = 1e-3;
};

struct CascadeOptions {
    int zooms = 6;
    ZoomMode mode = ZoomMode::Resolve;
    int cells = 32;
    int points_per_axis = 5;
    double delta_time = 0.5;
    double rho = 0.25;
    double x_radius = 0.5;
    double half_width = 2.0;
};

struct SweepOptions {
    std::vector<double> widths{1.0 / 64, 1.0 / 128, 1.0 / 256};
    std::vector<double> etas{0.25, 0.0625, 0.015625};
    double oracle_radius = 2.0;  ///< hopf-lax errors are measured on |x| <= this
};

struct EnsembleOptions {
    int max_attempts = 8;
    int bisection_steps = 20;
    double amplitude_max = 8.0;
    double pair_gap = 0.5;
};

struct ExperimentConfig {
    std::string scenario = "custom";
    std::uint64_t seed = 1;
    GridSpec grid;
    HamiltonianSpec hamiltonian;
    CoercivityEnvelope envelope;
    InitialDataSpec initial;
    ChainInputs chain;
    std::vector<std::string> checks;
    std::filesystem::path output_dir = "runs";
    bool snapshots = true;
    Tolerances tolerances;
    SolverOptions solver;
    CascadeOptions cascade;
    SweepOptions sweep;
    EnsembleOptions ensemble;
    nlohmann::json echo;  ///< resolved config (output section excluded)
};

/// YAML file with sections scenario, seed, grid, hamiltonian, envelope, initial,
/// chain, checks, output, tolerances, solver, cascade, sweep, ensemble. Throws
/// ConfigError with "file:line:" diagnostics on unknown keys, bad types and
/// violated invariants.
ExperimentConfig parse_config_file(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Same validation from an already-built JSON document (no line numbers).
ExperimentConfig config_from_json(const nlohmann::json& user, const std::string& origin = "<json>");

/// Re-validates after command-line overrides (seed, resolution).
void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed, std::optional<int> resolution);

struct RunOptions {
    std::filesystem::path out_dir;  ///< empty: the config's output dir
    std::size_t count = 1;
    bool ensemble = false;
    unsigned workers = 1;
    bool write = true;
};

struct RunReport {
    nlohmann::json report;
    std::string status;  ///< pass | vacuous | refuted | error
    std::filesystem::path run_dir;
};

/// Runs `count` members (member i draws its data from a seed derived from
/// (cfg.seed, i)) and merges them in index order.
RunReport execute(const ExperimentConfig& cfg, const RunOptions& options);

/// 0 pass/vacuous, 1 refuted, 3 error.
int exit_code(const std::string& status);

/// Report JSON without the timings block, as compared across repeated runs.
std::string report_without_timings(const nlohmann::json& report);

}  // namespace hjlab
