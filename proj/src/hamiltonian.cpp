#include "hjlab/hamiltonian.hpp"

#include "hjlab/errors.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace hjlab {

void CoercivityEnvelope::validate() const {
    if (!(lambda >= 1.0)) throw InvalidArgument("CoercivityEnvelope: need Lambda >= 1");
    if (!(p > 1.0)) throw InvalidArgument("CoercivityEnvelope: need p > 1");
}

std::string to_string(HamiltonianKind kind) {
    switch (kind) {
        case HamiltonianKind::PowerLaw: return "power-law";
        case HamiltonianKind::ScaledPowerLaw: return "scaled-power-law";
        case HamiltonianKind::RoughCoefficient: return "rough-coefficient";
        case HamiltonianKind::Tabulated: return "tabulated";
    }
    return "unknown";
}

HamiltonianKind hamiltonian_kind_from_string(const std::string& name) {
    if (name == "power-law") return HamiltonianKind::PowerLaw;
    if (name == "scaled-power-law") return HamiltonianKind::ScaledPowerLaw;
    if (name == "rough-coefficient") return HamiltonianKind::RoughCoefficient;
    if (name == "tabulated") return HamiltonianKind::Tabulated;
    throw InvalidArgument("unknown hamiltonian kind '" + name + "'");
}

void CoefficientTable::validate() const {
    if (dimension < 1 || time_bins < 1 || space_bins < 1) throw InvalidArgument("CoefficientTable: bad extents");
    if (!(t_hi > t_lo) || !(half_width > 0.0)) throw InvalidArgument("CoefficientTable: bad domain");
    std::size_t n = static_cast<std::size_t>(time_bins);
    for (int a = 0; a < dimension; ++a) n *= static_cast<std::size_t>(space_bins);
    if (coefficient.size() != n) throw InvalidArgument("CoefficientTable: coefficient size mismatch");
    if (!offset.empty() && offset.size() != n) throw InvalidArgument("CoefficientTable: offset size mismatch");
    for (double c : coefficient)
        if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("CoefficientTable: coefficients must be >= 0");
}

std::size_t CoefficientTable::bin(double t, std::span<const double> x) const {
    auto clamp_bin = [](double s, int n) { return std::clamp(static_cast<int>(std::floor(s)), 0, n - 1); };
    std::size_t index = static_cast<std::size_t>(clamp_bin((t - t_lo) / (t_hi - t_lo) * time_bins, time_bins));
    std::size_t stride = static_cast<std::size_t>(time_bins);
    for (int a = 0; a < dimension; ++a) {
        const int j = clamp_bin((x[a] + half_width) / (2.0 * half_width) * space_bins, space_bins);
        index += stride * static_cast<std::size_t>(j);
        stride *= static_cast<std::size_t>(space_bins);
    }
    return index;
}

HamiltonianSpec HamiltonianSpec::power_law(double p) {
    HamiltonianSpec h;
    h.kind = HamiltonianKind::PowerLaw;
    h.p = p;
    return h;
}

HamiltonianSpec HamiltonianSpec::scaled_power_law(double p, double scale, double offset) {
    HamiltonianSpec h;
    h.kind = HamiltonianKind::ScaledPowerLaw;
    h.p = p;
    h.scale = scale;
    h.offset = offset;
    return h;
}

HamiltonianSpec HamiltonianSpec::rough(double p, double lambda, double eta) {
    HamiltonianSpec h;
    h.kind = HamiltonianKind::RoughCoefficient;
    h.p = p;
    h.lambda = lambda;
    h.eta = eta;
    return h;
}

HamiltonianSpec HamiltonianSpec::tabulated(double p, CoefficientTable table) {
    table.validate();
    HamiltonianSpec h;
    h.kind = HamiltonianKind::Tabulated;
    h.p = p;
    h.table = std::make_shared<const CoefficientTable>(std::move(table));
    return h;
}

void HamiltonianSpec::validate() const {
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("HamiltonianSpec: need p > 1");
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw InvalidArgument("HamiltonianSpec: scale must be >= 0");
    if (!std::isfinite(offset)) throw InvalidArgument("HamiltonianSpec: offset must be finite");
    switch (kind) {
        case HamiltonianKind::PowerLaw:
        case HamiltonianKind::ScaledPowerLaw: break;
        case HamiltonianKind::RoughCoefficient:
            if (!(lambda >= 1.0)) throw InvalidArgument("HamiltonianSpec: rough contrast lambda must be >= 1");
            if (!(eta > 0.0)) throw InvalidArgument("HamiltonianSpec: rough cell size eta must be positive");
            break;
        case HamiltonianKind::Tabulated:
            if (!table) throw InvalidArgument("HamiltonianSpec: tabulated kind needs a table");
            table->validate();
            break;
    }
}

namespace {

double map_time(const FrameMap& fr, double t) { return fr.t_origin + fr.t_scale * t; }

double mapped_x(const FrameMap& fr, std::span<const double> x, std::size_t a) {
    const double o = a < fr.x_origin.size() ? fr.x_origin[a] : 0.0;
    return o + fr.x_scale * x[a];
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double vi : v) s += vi * vi;
    return std::sqrt(s);
}

}  // namespace

double HamiltonianSpec::coefficient(double t, std::span<const double> x) const {
    switch (kind) {
        case HamiltonianKind::PowerLaw:
        case HamiltonianKind::ScaledPowerLaw: return scale;
        case HamiltonianKind::RoughCoefficient: {
            long parity = 0;
            for (std::size_t a = 0; a < x.size(); ++a)
                parity += static_cast<long>(std::floor(mapped_x(frame, x, a) / eta));
            return scale * ((parity % 2 == 0) ? lambda : 1.0 / lambda);
        }
        case HamiltonianKind::Tabulated: {
            std::vector<double> xo(x.size());
            for (std::size_t a = 0; a < x.size(); ++a) xo[a] = mapped_x(frame, x, a);
            return scale * table->coefficient[table->bin(map_time(frame, t), xo)];
        }
    }
    return scale;
}

double HamiltonianSpec::offset_at(double t, std::span<const double> x) const {
    if (kind != HamiltonianKind::Tabulated || table->offset.empty()) return offset;
    std::vector<double> xo(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) xo[a] = mapped_x(frame, x, a);
    return offset + offset_scale * table->offset[table->bin(map_time(frame, t), xo)];
}

double HamiltonianSpec::eval(double t, std::span<const double> x, std::span<const double> P) const {
    const double np = norm(P);
    const double value = coefficient(t, x) * (np == 0.0 ? 0.0 : std::pow(np, p)) + offset_at(t, x);
    if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "Hamiltonian evaluation is not finite at t=" << t << ", |x|=" << norm(x) << ", |P|=" << np;
        throw InvalidArgument(os.str());
    }
    return value;
}

double HamiltonianSpec::slope_bound(double t, std::span<const double> x, double norm_p) const {
    if (norm_p == 0.0) return 0.0;
    return coefficient(t, x) * p * std::pow(norm_p, p - 1.0);
}

HamiltonianSpec HamiltonianSpec::shifted(double delta) const {
    HamiltonianSpec h = *this;
    h.offset += delta;
    return h;
}

HamiltonianSpec HamiltonianSpec::zoomed(double t_origin, double t_scale, std::span<const double> x_origin,
                                        double x_scale, double value_scale) const {
    HamiltonianSpec h = *this;
    const double vt = value_scale * t_scale;
    h.scale = scale * vt * std::pow(value_scale * x_scale, -p);
    h.offset = offset * vt;
    h.offset_scale = offset_scale * vt;
    h.frame.t_origin = frame.t_origin + frame.t_scale * t_origin;
    h.frame.t_scale = frame.t_scale * t_scale;
    h.frame.x_origin.assign(x_origin.size(), 0.0);
    for (std::size_t a = 0; a < x_origin.size(); ++a) {
        const double o = a < frame.x_origin.size() ? frame.x_origin[a] : 0.0;
        h.frame.x_origin[a] = o + frame.x_scale * x_origin[a];
    }
    h.frame.x_scale = frame.x_scale * x_scale;
    return h;
}

CoercivityReport coercivity_check(const HamiltonianSpec& H, const CoercivityEnvelope& env,
                                  std::span<const CoercivitySample> samples) {
    if (samples.empty()) throw InvalidArgument("coercivity_check: empty sample list");
    CoercivityReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const double h = H.eval(s.t, s.x, s.P);
        const double np = norm(s.P);
        const double slack = std::min(h - env.lower(np), env.upper(np) - h);
        if (slack < 0.0) rep.violations.push_back(i);
        rep.margin = std::min(rep.margin, slack);
    }
    return rep;
}

std::vector<CoercivitySample> coercivity_samples(int dimension, double t_lo, double t_hi, double half_width,
                                                 double max_gradient, std::size_t count, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<CoercivitySample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        CoercivitySample s;
        s.t = t_lo + (t_hi - t_lo) * unit(rng);
        s.x.resize(static_cast<std::size_t>(dimension));
        for (double& xi : s.x) xi = half_width * (2.0 * unit(rng) - 1.0);
        s.P.resize(static_cast<std::size_t>(dimension));
        double n2 = 0.0;
        for (double& pi : s.P) {
            pi = gauss(rng);
            n2 += pi * pi;
        }
        // include the origin and the far end of the gradient range exactly
        const double target = i == 0 ? 0.0 : (i == 1 ? max_gradient : max_gradient * unit(rng));
        const double nrm = std::sqrt(n2);
        for (double& pi : s.P) pi = nrm > 0.0 ? pi * target / nrm : 0.0;
        out.push_back(std::move(s));
    }
    return out;
}

ScalarField gauge_shift(const ScalarField& f, const CoercivityEnvelope& env) {
    return map_values(f, [&](double t, std::span<const double>, double u) { return u + env.lambda * t; });
}

ScalarField remove_gauge_shift(const ScalarField& f, const CoercivityEnvelope& env) {
    return map_values(f, [&](double t, std::span<const double>, double u) { return u - env.lambda * t; });
}

}  // namespace hjlab
