#pragma once

// Named initial data u0(x) for experiments.

#include "hjlab/oscillation.hpp"
#include "hjlab/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hjlab {

/// Catalog entry plus parameters. Unused parameters are ignored by an entry.
///   zero          0
///   constant      value
///   abs           offset + amplitude |x|
///   linear        offset + amplitude x_1
///   sine          offset + amplitude (1/N) sum_a sin(frequency x_a)
///   trig-random   offset + amplitude g(x), g a seeded band-limited cosine sum with
///                 `modes` terms, integer wave numbers up to `bandwidth` scaled by
///                 frequency, normalised so |g| <= 1
///   barrier-psi   offset + psi(-2, x) for the constant chain
struct InitialDataSpec {
    std::string name = "zero";
    double value = 0.0;
    double amplitude = 1.0;
    double offset = 0.0;
    double frequency = 1.0;
    int modes = 6;
    int bandwidth = 3;
    std::uint64_t seed = 0;
};

const std::vector<std::string>& initial_data_names();

/// Throws InvalidArgument for unknown names, or barrier-psi without a chain.
InitialData make_initial_data(const InitialDataSpec& spec, int dimension, const ConstantChain* chain = nullptr);

}  // namespace hjlab
