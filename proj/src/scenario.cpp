#include "llab/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "llab/error.hpp"
#include "llab/field_io.hpp"

namespace llab {

using nlohmann::json;

DataSource DataSource::expression(Expression e) {
    DataSource d;
    d.description_ = e.source();
    d.expr_ = std::move(e);
    return d;
}

DataSource DataSource::table(std::shared_ptr<const ScalarField> f, std::string origin) {
    DataSource d;
    d.table_ = std::move(f);
    d.description_ = std::move(origin);
    return d;
}

double DataSource::at(const SpaceTimeGrid& grid, std::size_t level, std::size_t node) const {
    if (table_) {
        if (!(table_->grid() == grid)) throw ConfigError("tabulated data '" + description_ + "' is on a different grid");
        return table_->at(level, node);
    }
    return expr_(grid.space.coord(node, 0), grid.space.dim == 2 ? grid.space.coord(node, 1) : 0.0, grid.time(level));
}

ScalarField DataSource::sample(const SpaceTimeGrid& grid) const {
    if (table_) {
        if (!(table_->grid() == grid)) throw ConfigError("tabulated data '" + description_ + "' is on a different grid");
        return *table_;
    }
    ScalarField out(grid, 0.0);
    for (std::size_t l = 0; l < grid.levels(); ++l) {
        auto s = out.slice(l);
        for (std::size_t n = 0; n < s.size(); ++n) s[n] = at(grid, l, n);
    }
    if (!out.all_finite()) throw ConfigError("expression '" + description_ + "' produced non-finite values on the grid");
    return out;
}

void NewtonConfig::validate() const {
    if (!(atol > 0.0) || !(rtol > 0.0)) throw ConfigError("newton tolerances must be positive");
    if (max_iterations < 1) throw ConfigError("newton.max_iterations must be >= 1");
    if (!(armijo > 0.0 && armijo < 1.0)) throw ConfigError("newton.armijo must lie in (0, 1)");
    if (max_backtracks < 0) throw ConfigError("newton.max_backtracks must be >= 0");
    if (picard_max_iterations < 1) throw ConfigError("newton.picard_max_iterations must be >= 1");
}

void Scenario::validate() const {
    grid.validate();
    FluxParams check = params;
    check.epsilon = 0.0;
    check.validate();
    if (epsilon_schedule.empty()) throw ConfigError("epsilon_schedule must not be empty");
    for (std::size_t k = 0; k < epsilon_schedule.size(); ++k) {
        const double e = epsilon_schedule[k];
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("epsilon_schedule entries must lie in (0, 1]");
        if (k > 0 && !(e < epsilon_schedule[k - 1]))
            throw ConfigError("epsilon_schedule must be strictly decreasing (entry " + std::to_string(k) + ")");
    }
    newton.validate();
    for (const DataSource* d : {&f, &g})
        if (d->is_table()) (void)d->at(grid, 0, 0);  // throws on a grid mismatch
    if (estimates.family < 1) throw ConfigError("estimates.family must be >= 1");
    if (!(estimates.radius_factor > 1.0)) throw ConfigError("estimates.radius_factor must exceed 1");
    if (!(estimates.stability_factor >= 1.0)) throw ConfigError("estimates.stability_factor must be >= 1");
    if (filtration) {
        const auto& f = *filtration;
        for (double v : {f.k, f.mu, f.m, f.G, f.P0, f.C})
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("filtration parameters must all be positive");
    }
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

DataSource read_data(const json& node, const std::map<std::string, double>& constants, const std::string& base,
                     const char* what) {
    if (node.is_number()) return DataSource::expression(Expression::parse(node.dump(), constants));
    if (node.is_string()) return DataSource::expression(Expression::parse(node.get<std::string>(), constants));
    if (node.is_object()) {
        if (node.contains("expr")) return DataSource::expression(Expression::parse(node["expr"].get<std::string>(), constants));
        if (node.contains("table")) {
            std::filesystem::path p = node["table"].get<std::string>();
            if (p.is_relative()) p = std::filesystem::path(base) / p;
            auto f = std::make_shared<ScalarField>(read_binary_file(p.string()));
            return DataSource::table(std::move(f), p.string());
        }
    }
    throw ConfigError(std::string("'") + what + "' must be an expression string or {\"table\": path}");
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::string& base_dir) {
    if (!doc.is_object()) throw ConfigError("scenario document must be a JSON object");
    reject_unknown(doc,
                   {"name", "description", "domain", "grid", "p", "nu", "epsilon_schedule", "constants", "f", "g",
                    "newton", "mollify", "estimates", "filtration", "seed"},
                   "scenario");
    Scenario s;
    s.source = doc;
    s.name = get_or<std::string>(doc, "name", "scenario");

    const json domain = doc.value("domain", json::object());
    reject_unknown(domain, {"dim", "lower", "upper"}, "domain");
    const int dim = get_or<int>(domain, "dim", 2);
    if (dim != 1 && dim != 2) throw ConfigError("domain.dim must be 1 or 2");
    auto pair = [&](const json& obj, const char* key, std::array<double, 2> fallback) {
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (v.is_number()) return std::array<double, 2>{v.get<double>(), v.get<double>()};
        if (v.is_array() && v.size() == static_cast<std::size_t>(dim)) {
            std::array<double, 2> out{0.0, 0.0};
            for (int a = 0; a < dim; ++a) out[static_cast<std::size_t>(a)] = v[static_cast<std::size_t>(a)].get<double>();
            return out;
        }
        throw ConfigError(std::string("'") + key + "' must be a number or an array of length dim");
    };
    const auto lower = pair(domain, "lower", {0.0, 0.0});
    const auto upper = pair(domain, "upper", {1.0, 1.0});

    const json grid = doc.value("grid", json::object());
    reject_unknown(grid, {"nodes", "t0", "T", "steps", "budget"}, "grid");
    std::array<std::size_t, 2> nodes{33, 33};
    if (grid.contains("nodes")) {
        const json& n = grid["nodes"];
        if (n.is_number_integer()) nodes = {n.get<std::size_t>(), n.get<std::size_t>()};
        else if (n.is_array() && n.size() == static_cast<std::size_t>(dim)) {
            nodes[0] = n[0].get<std::size_t>();
            nodes[1] = dim == 2 ? n[1].get<std::size_t>() : 1;
        } else
            throw ConfigError("grid.nodes must be an integer or an array of length dim");
    }
    try {
        s.grid.space = make_spatial_grid(dim, lower, upper, nodes);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    s.grid.t0 = get_or<double>(grid, "t0", 0.0);
    const double T = get_or<double>(grid, "T", 1.0);
    s.grid.steps = get_or<std::size_t>(grid, "steps", 10);
    if (s.grid.steps < 1 || !(T > s.grid.t0)) throw ConfigError("grid needs T > t0 and steps >= 1");
    s.grid.tau = (T - s.grid.t0) / static_cast<double>(s.grid.steps);
    try {
        s.grid.validate(get_or<std::size_t>(grid, "budget", SpaceTimeGrid::kDefaultValueBudget));
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }

    s.params.p = get_or<double>(doc, "p", 2.0);
    s.params.nu = get_or<double>(doc, "nu", 1.0);
    s.params.epsilon = 0.0;
    try {
        s.params.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    if (doc.contains("epsilon_schedule")) {
        const json& e = doc["epsilon_schedule"];
        if (!e.is_array()) throw ConfigError("epsilon_schedule must be an array");
        s.epsilon_schedule = e.get<std::vector<double>>();
    }

    std::map<std::string, double> constants;
    if (doc.contains("constants")) {
        for (auto it = doc["constants"].begin(); it != doc["constants"].end(); ++it) {
            if (!it.value().is_number()) throw ConfigError("constant '" + it.key() + "' must be a number");
            constants[it.key()] = it.value().get<double>();
        }
    }
    s.f = read_data(doc.value("f", json("0")), constants, base_dir, "f");
    s.g = read_data(doc.value("g", json("0")), constants, base_dir, "g");

    if (doc.contains("newton")) {
        const json& n = doc["newton"];
        reject_unknown(n,
                       {"atol", "rtol", "max_iterations", "armijo", "max_backtracks", "picard_fallback",
                        "picard_max_iterations"},
                       "newton");
        s.newton.atol = get_or(n, "atol", s.newton.atol);
        s.newton.rtol = get_or(n, "rtol", s.newton.rtol);
        s.newton.max_iterations = get_or(n, "max_iterations", s.newton.max_iterations);
        s.newton.armijo = get_or(n, "armijo", s.newton.armijo);
        s.newton.max_backtracks = get_or(n, "max_backtracks", s.newton.max_backtracks);
        s.newton.picard_fallback = get_or(n, "picard_fallback", s.newton.picard_fallback);
        s.newton.picard_max_iterations = get_or(n, "picard_max_iterations", s.newton.picard_max_iterations);
    }
    s.mollify_datum = get_or(doc, "mollify", true);

    if (doc.contains("estimates")) {
        const json& e = doc["estimates"];
        reject_unknown(e, {"x0", "t0", "R0", "family", "radius_factor", "theta", "stability_factor"}, "estimates");
        s.estimates.x0 = pair(e, "x0", {0.0, 0.0});
        if (e.contains("t0")) s.estimates.t0 = e["t0"].get<double>();
        if (e.contains("R0")) s.estimates.R0 = e["R0"].get<double>();
        s.estimates.family = get_or(e, "family", s.estimates.family);
        s.estimates.radius_factor = get_or(e, "radius_factor", s.estimates.radius_factor);
        s.estimates.stability_factor = get_or(e, "stability_factor", s.estimates.stability_factor);
        if (e.contains("theta")) {
            const json& t = e["theta"];
            if (t.is_number()) s.estimates.theta = {t.get<double>()};
            else s.estimates.theta = t.get<std::vector<double>>();
        }
    }

    if (doc.contains("filtration")) {
        const json& f = doc["filtration"];
        for (const char* key : {"p", "nu", "f", "g"})
            if (doc.contains(key))
                throw ConfigError(std::string("'") + key + "' is derived from the filtration block and must not be set");
        reject_unknown(f,
                       {"k", "mu", "m", "G", "P0", "C", "normalize_gradient", "boundary_pressure", "initial_pressure"},
                       "filtration");
        FiltrationConfig fc;
        fc.k = get_or(f, "k", fc.k);
        fc.mu = get_or(f, "mu", fc.mu);
        fc.m = get_or(f, "m", fc.m);
        fc.G = get_or(f, "G", fc.G);
        fc.P0 = get_or(f, "P0", fc.P0);
        fc.C = get_or(f, "C", fc.C);
        fc.normalize_gradient = get_or(f, "normalize_gradient", fc.normalize_gradient);
        if (f.contains("boundary_pressure")) {
            const json& b = f["boundary_pressure"];
            fc.boundary_pressure = b.is_string() ? b.get<std::string>() : b.dump();
        }
        if (f.contains("initial_pressure")) {
            const json& b = f["initial_pressure"];
            fc.initial_pressure = b.is_string() ? b.get<std::string>() : b.dump();
        }
        s.filtration = fc;
    }
    s.seed = get_or<std::uint64_t>(doc, "seed", 1);
    s.validate();
    return s;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    const auto base = std::filesystem::path(path).parent_path();
    return parse_scenario(parse_json_text(text), base.empty() ? "." : base.string());
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["domain"] = {{"dim", s.grid.space.dim},
                   {"lower", {s.grid.space.origin[0], s.grid.space.origin[1]}},
                   {"upper", {s.grid.space.upper(0), s.grid.space.dim == 2 ? s.grid.space.upper(1) : 0.0}}};
    j["grid"] = {{"nodes", {s.grid.space.extents[0], s.grid.space.extents[1]}},
                 {"h", s.grid.space.h},
                 {"tau", s.grid.tau},
                 {"t0", s.grid.t0},
                 {"T", s.grid.t_end()},
                 {"steps", s.grid.steps}};
    j["p"] = s.params.p;
    j["nu"] = s.params.nu;
    j["epsilon_schedule"] = s.epsilon_schedule;
    j["f"] = s.f.description();
    j["g"] = s.g.description();
    j["newton"] = {{"atol", s.newton.atol},
                   {"rtol", s.newton.rtol},
                   {"max_iterations", s.newton.max_iterations},
                   {"armijo", s.newton.armijo},
                   {"max_backtracks", s.newton.max_backtracks},
                   {"picard_fallback", s.newton.picard_fallback},
                   {"picard_max_iterations", s.newton.picard_max_iterations}};
    j["mollify"] = s.mollify_datum;
    json e = {{"x0", {s.estimates.x0[0], s.estimates.x0[1]}},
              {"family", s.estimates.family},
              {"radius_factor", s.estimates.radius_factor},
              {"stability_factor", s.estimates.stability_factor},
              {"theta", s.estimates.theta}};
    if (s.estimates.t0) e["t0"] = *s.estimates.t0;
    if (s.estimates.R0) e["R0"] = *s.estimates.R0;
    j["estimates"] = e;
    if (s.filtration) {
        const auto& f = *s.filtration;
        j["filtration"] = {{"k", f.k},   {"mu", f.mu}, {"m", f.m},
                           {"G", f.G},   {"P0", f.P0}, {"C", f.C},
                           {"normalize_gradient", f.normalize_gradient},
                           {"boundary_pressure", f.boundary_pressure},
                           {"initial_pressure", f.initial_pressure}};
    }
    j["seed"] = s.seed;
    j["metadata"] = s.metadata;
    return j;
}

}  // namespace llab
