#include "hjlab/initial_data.hpp"

#include "hjlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

namespace hjlab {

namespace {

struct Mode {
    std::vector<double> k;
    double phase = 0.0;
    double weight = 0.0;
};

std::vector<Mode> draw_modes(const InitialDataSpec& s, int N) {
    if (s.modes < 1 || s.bandwidth < 1) throw InvalidArgument("trig-random: modes and bandwidth must be >= 1");
    std::mt19937_64 rng(s.seed);
    std::uniform_int_distribution<int> wave(-s.bandwidth, s.bandwidth);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Mode> modes(static_cast<std::size_t>(s.modes));
    double total = 0.0;
    for (auto& m : modes) {
        m.k.resize(static_cast<std::size_t>(N));
        bool nonzero = false;
        while (!nonzero) {
            for (auto& k : m.k) {
                k = wave(rng);
                nonzero = nonzero || k != 0;
            }
        }
        for (auto& k : m.k) k *= s.frequency;
        m.phase = 2.0 * std::numbers::pi * unit(rng);
        m.weight = 0.25 + unit(rng);
        total += m.weight;
    }
    for (auto& m : modes) m.weight /= total;
    return modes;
}

}  // namespace

const std::vector<std::string>& initial_data_names() {
    static const std::vector<std::string> names{"zero", "constant", "abs", "linear", "sine", "trig-random", "barrier-psi"};
    return names;
}

InitialData make_initial_data(const InitialDataSpec& s, int N, const ConstantChain* chain) {
    if (N < 1) throw InvalidArgument("initial data: dimension must be >= 1");
    if (s.name == "zero") return [](std::span<const double>) { return 0.0; };
    if (s.name == "constant") return [v = s.value](std::span<const double>) { return v; };
    if (s.name == "abs")
        return [s](std::span<const double> x) {
            double r = 0.0;
            for (double v : x) r += v * v;
            return s.offset + s.amplitude * std::sqrt(r);
        };
    if (s.name == "linear") return [s](std::span<const double> x) { return s.offset + s.amplitude * x[0]; };
    if (s.name == "sine")
        return [s, N](std::span<const double> x) {
            double sum = 0.0;
            for (double v : x) sum += std::sin(s.frequency * v);
            return s.offset + s.amplitude * sum / N;
        };
    if (s.name == "trig-random") {
        auto modes = std::make_shared<const std::vector<Mode>>(draw_modes(s, N));
        return [s, modes](std::span<const double> x) {
            double g = 0.0;
            for (const auto& m : *modes) {
                double arg = m.phase;
                for (std::size_t a = 0; a < x.size(); ++a) arg += m.k[a] * x[a];
                g += m.weight * std::cos(arg);
            }
            return s.offset + s.amplitude * g;
        };
    }
    if (s.name == "barrier-psi") {
        if (!chain) throw InvalidArgument("initial data 'barrier-psi' needs a constant chain");
        return [c = *chain, off = s.offset](std::span<const double> x) { return off + barrier_psi(c, -2.0, x); };
    }
    throw InvalidArgument("unknown initial data '" + s.name + "'");
}

}  // namespace hjlab
