#include "llab/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "llab/calculus.hpp"
#include "llab/error.hpp"
#include "llab/kernels.hpp"

namespace llab {

void PhysicalParams::validate() const {
    for (double v : {k, mu, m, G, P0, C})
        if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("physical parameters must be positive and finite");
}

PhysicalParams PhysicalParams::from(const FiltrationConfig& c) { return {c.k, c.mu, c.m, c.G, c.P0, c.C}; }

nlohmann::json FiltrationTransform::to_json() const {
    return {{"time_scale", time_scale}, {"value_scale", value_scale}, {"normalize_gradient", normalized}};
}

Scenario to_scenario(const PhysicalParams& phys, const Scenario& geometry, const std::string& boundary_pressure,
                     const std::string& initial_pressure, bool normalize_gradient) {
    phys.validate();
    const Expression pb = Expression::parse(boundary_pressure);
    const Expression p_init = initial_pressure.empty() ? pb : Expression::parse(initial_pressure);

    FiltrationTransform tr;
    tr.time_scale = phys.time_scale();
    tr.normalized = normalize_gradient;
    tr.value_scale = normalize_gradient ? 1.0 / phys.G : 1.0;

    Scenario s = geometry;
    s.grid.t0 = geometry.grid.t0 * tr.time_scale;
    s.grid.tau = geometry.grid.tau * tr.time_scale;
    s.params.p = 2.0;
    s.params.nu = normalize_gradient ? 1.0 : phys.G;
    s.params.epsilon = 0.0;
    s.f = DataSource::expression(Expression::parse("0"));

    // Dirichlet data and initial state tabulated on the scenario grid
    auto table = std::make_shared<ScalarField>(s.grid, 0.0);
    const auto& sg = s.grid.space;
    for (std::size_t l = 0; l < s.grid.levels(); ++l) {
        const double t_phys = geometry.grid.time(l);
        const Expression& e = l == 0 ? p_init : pb;
        auto slice = table->slice(l);
        for (std::size_t n = 0; n < sg.node_count(); ++n) {
            const Expression& use = (l == 0 && sg.on_boundary(n)) ? pb : e;
            const double P = use(sg.coord(n, 0), sg.dim == 2 ? sg.coord(n, 1) : 0.0, t_phys);
            if (!(P >= 0.0) || !std::isfinite(P)) throw ConfigError("pressure data must be finite and nonnegative");
            slice[n] = tr.value_scale * P * P;
        }
    }
    s.g = DataSource::table(table, "(" + boundary_pressure + ")^2");

    FiltrationConfig fc;
    fc.k = phys.k;
    fc.mu = phys.mu;
    fc.m = phys.m;
    fc.G = phys.G;
    fc.P0 = phys.P0;
    fc.C = phys.C;
    fc.normalize_gradient = normalize_gradient;
    fc.boundary_pressure = boundary_pressure;
    fc.initial_pressure = initial_pressure;
    s.filtration = fc;
    s.metadata["filtration_transform"] = tr.to_json();
    s.validate();
    return s;
}

Scenario to_scenario(const Scenario& geometry) {
    if (!geometry.filtration) throw ConfigError("scenario has no filtration block");
    const auto& fc = *geometry.filtration;
    return to_scenario(PhysicalParams::from(fc), geometry, fc.boundary_pressure, fc.initial_pressure,
                       fc.normalize_gradient);
}

FiltrationTransform transform_of(const Scenario& s) {
    if (!s.filtration) throw ConfigError("scenario has no filtration block");
    FiltrationTransform tr;
    tr.time_scale = PhysicalParams::from(*s.filtration).time_scale();
    tr.normalized = s.filtration->normalize_gradient;
    tr.value_scale = tr.normalized ? 1.0 / s.filtration->G : 1.0;
    return tr;
}

FiltrationState FiltrationState::from_solution(const ScalarField& u_scenario, const FiltrationTransform& tr,
                                               const PhysicalParams& phys) {
    phys.validate();
    SpaceTimeGrid g = u_scenario.grid();
    g.t0 /= tr.time_scale;
    g.tau /= tr.time_scale;
    FiltrationState st;
    st.u = ScalarField(g, 0.0);
    st.P = ScalarField(g, 0.0);
    const auto src = u_scenario.values();
    auto& u = st.u.mutable_values();
    auto& P = st.P.mutable_values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        double v = src[i] / tr.value_scale;
        if (v < 0.0) {
            if (v < -1e-10 * (1.0 + phys.P0 * phys.P0)) throw InvalidInput("negative pressure-squared in the solution");
            v = 0.0;
        }
        P[i] = std::sqrt(v);
        u[i] = P[i] * P[i];  // keeps u = P^2 exact in floating point
    }
    for (std::size_t l = 0; l < g.levels(); ++l) st.stagnant.push_back(stagnant_zone(st.u, phys.G, l));
    return st;
}

VectorSlice mass_flux(const FiltrationState& state, const PhysicalParams& phys, std::size_t level) {
    const auto& sg = state.u.grid().space;
    if (level >= state.u.grid().levels()) throw InvalidInput("level out of range");
    const VectorSlice d = gradient(sg, state.u.slice(level));
    VectorSlice j(sg.dim, sg.node_count());
    const bool two = sg.dim == 2;
    kernels::active().radial_map(d.comp[0].data(), two ? d.comp[1].data() : nullptr, j.comp[0].data(),
                                 two ? j.comp[1].data() : nullptr, d.size(), {phys.G, 1.0, 0.0, 0.0});
    const double c = -phys.k / (2.0 * phys.mu * phys.C);
    for (int a = 0; a < sg.dim; ++a)
        for (double& x : j.comp[static_cast<std::size_t>(a)]) x = x == 0.0 ? 0.0 : c * x;
    return j;
}

std::vector<std::uint8_t> stagnant_zone(const ScalarField& u, double nu, std::size_t level) {
    const auto& sg = u.grid().space;
    if (level >= u.grid().levels()) throw InvalidInput("level out of range");
    const auto mag = gradient(sg, u.slice(level)).magnitude();
    std::vector<std::uint8_t> mask(mag.size());
    for (std::size_t k = 0; k < mag.size(); ++k) mask[k] = mag[k] <= nu ? 1 : 0;
    return mask;
}

FiltrationSummary summarize(const FiltrationState& state, const PhysicalParams& phys) {
    FiltrationSummary s;
    const auto& g = state.u.grid();
    const auto& sg = g.space;
    const auto P = state.P.values();
    s.p_min = *std::min_element(P.begin(), P.end());
    s.p_max = *std::max_element(P.begin(), P.end());
    for (double v : P) s.max_relative_deviation = std::max(s.max_relative_deviation, std::fabs(v - phys.P0) / phys.P0);
    for (std::size_t l = 0; l < g.levels(); ++l) {
        std::size_t interior = 0, stagnant = 0;
        for (std::size_t k = 0; k < sg.node_count(); ++k) {
            if (sg.on_boundary(k)) continue;
            ++interior;
            stagnant += state.stagnant[l][k];
        }
        const double frac = interior ? static_cast<double>(stagnant) / static_cast<double>(interior) : 0.0;
        if (!s.stagnant_fraction.empty() && frac < s.stagnant_fraction.back()) s.stagnant_nondecreasing = false;
        s.stagnant_fraction.push_back(frac);
        const auto mag = mass_flux(state, phys, l).magnitude();
        for (double m : mag) s.max_mass_flux = std::max(s.max_mass_flux, m);
    }
    return s;
}

nlohmann::json to_json(const FiltrationSummary& s) {
    return {{"stagnant_fraction", s.stagnant_fraction},
            {"stagnant_nondecreasing", s.stagnant_nondecreasing},
            {"pressure_min", s.p_min},
            {"pressure_max", s.p_max},
            {"max_relative_pressure_deviation", s.max_relative_deviation},
            {"max_mass_flux", s.max_mass_flux}};
}

}  // namespace llab
