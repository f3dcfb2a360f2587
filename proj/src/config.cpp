#include "geods/config.hpp"

#include "geods/error.hpp"
#include "geods/io.hpp"

#include <fstream>

namespace geods {

StructuredGrid GridConfig::fine_grid() const {
    return StructuredGrid(fine, spacing, origin, depth_of_top);
}

namespace {

Json range_json(const Range& r) { return Json::array({r.lo, r.hi}); }

Range range_from(const Json& j) {
    const auto v = j.get<std::array<double, 2>>();
    return {v[0], v[1]};
}

const char* axis_name(HorizontalAxis a) {
    return a == HorizontalAxis::east_west ? "east_west" : "north_south";
}

// Rejects keys the defaults do not know about, so typos fail loudly.
void check_keys(const Json& user, const Json& defaults, const std::string& where) {
    if (!user.is_object()) {
        throw ConfigError("'" + where + "' must be an object");
    }
    for (const auto& [key, value] : user.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        if (!defaults.contains(key)) {
            throw ConfigError("unknown configuration key '" + path + "'");
        }
        if (defaults.at(key).is_object()) {
            check_keys(value, defaults.at(key), path);
        }
    }
}

} // namespace

Json to_json(const RunConfig& c) {
    const auto& g = c.geomodel;
    const auto& t = c.training;
    Json wells = Json::array();
    for (const auto& w : c.report.wells) wells.push_back({w[0], w[1]});
    return {
        {"seed", c.seed},
        {"threads", c.threads},
        {"output_dir", c.output_dir.string()},
        {"grid",
         {{"fine_dims", {c.grid.fine.nx, c.grid.fine.ny, c.grid.fine.nz}},
          {"spacing_m", {c.grid.spacing[0], c.grid.spacing[1], c.grid.spacing[2]}},
          {"origin_m", {c.grid.origin[0], c.grid.origin[1], c.grid.origin[2]}},
          {"depth_of_top_m", c.grid.depth_of_top},
          {"refinement", {c.grid.refinement.rx, c.grid.refinement.ry, c.grid.refinement.rz}}}},
        {"geomodel",
         {{"n_layers", g.n_layers},
          {"layer_thickness_m", range_json(g.layer_thickness)},
          {"lateral_correlation_length_m", g.lateral_correlation_length},
          {"lateral_relative_std", g.lateral_relative_std},
          {"fold_amplitude_m", g.fold_amplitude},
          {"fold_width_m", g.fold_width},
          {"fold_axis", axis_name(g.fold_axis)},
          {"fold_center_m", g.fold_center ? Json(*g.fold_center) : Json()},
          {"youngs_gpa", range_json(g.youngs)},
          {"poisson", range_json(g.poisson)},
          {"density_g_cm3", range_json(g.density)},
          {"pressure_gradient_kpa_m", g.pressure_gradient}}},
        {"loads",
         {{"strain_ew", c.loads.strain_ew},
          {"strain_ns", c.loads.strain_ns},
          {"overburden_density_g_cm3", c.loads.overburden_density},
          {"gravity_m_s2", c.loads.gravity}}},
        {"solver",
         {{"preconditioner", "jacobi"},
          {"rel_tolerance", c.solver.rel_tolerance},
          {"max_iterations", c.solver.max_iterations}}},
        {"training",
         {{"optimizer", t.optimizer == nn::Optimizer::sgd ? "sgd" : "adam"},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"learning_rate", t.learning_rate},
          {"momentum", t.momentum},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"epsilon", t.epsilon},
          {"shuffle", t.shuffle}}},
        {"partition",
         {{"n_columns_x", c.partition.n_columns_x},
          {"n_columns_y", c.partition.n_columns_y},
          {"discard_top", c.partition.discard_top},
          {"discard_bottom", c.partition.discard_bottom},
          {"train_columns", c.partition.train_columns},
          {"validation_columns", c.partition.validation_columns}}},
        {"report", {{"wells", wells}}},
    };
}

RunConfig config_from_json(const Json& user) {
    const Json defaults = to_json(RunConfig{});
    check_keys(user, defaults, "");
    Json j = defaults;
    j.merge_patch(user);
    // merge_patch treats null as deletion; restore optional keys.
    if (!j["geomodel"].contains("fold_center_m")) j["geomodel"]["fold_center_m"] = nullptr;

    RunConfig c;
    try {
        c.seed = j.at("seed").get<std::uint64_t>();
        c.threads = j.at("threads").get<int>();
        c.output_dir = j.at("output_dir").get<std::string>();

        const Json& g = j.at("grid");
        const auto d = g.at("fine_dims").get<std::array<int, 3>>();
        const auto s = g.at("spacing_m").get<std::array<double, 3>>();
        const auto o = g.at("origin_m").get<std::array<double, 3>>();
        const auto r = g.at("refinement").get<std::array<int, 3>>();
        c.grid.fine = {d[0], d[1], d[2]};
        c.grid.spacing = {s[0], s[1], s[2]};
        c.grid.origin = {o[0], o[1], o[2]};
        c.grid.depth_of_top = g.at("depth_of_top_m").get<double>();
        c.grid.refinement = {r[0], r[1], r[2]};

        const Json& m = j.at("geomodel");
        GeomodelSpec& gm = c.geomodel;
        gm.seed = c.seed;
        gm.n_layers = m.at("n_layers").get<int>();
        gm.layer_thickness = range_from(m.at("layer_thickness_m"));
        gm.lateral_correlation_length = m.at("lateral_correlation_length_m").get<double>();
        gm.lateral_relative_std = m.at("lateral_relative_std").get<double>();
        gm.fold_amplitude = m.at("fold_amplitude_m").get<double>();
        gm.fold_width = m.at("fold_width_m").get<double>();
        const auto axis = m.at("fold_axis").get<std::string>();
        if (axis != "east_west" && axis != "north_south") {
            throw ConfigError("geomodel.fold_axis must be 'east_west' or 'north_south'");
        }
        gm.fold_axis = axis == "east_west" ? HorizontalAxis::east_west : HorizontalAxis::north_south;
        if (!m.at("fold_center_m").is_null()) gm.fold_center = m.at("fold_center_m").get<double>();
        gm.youngs = range_from(m.at("youngs_gpa"));
        gm.poisson = range_from(m.at("poisson"));
        gm.density = range_from(m.at("density_g_cm3"));
        gm.pressure_gradient = m.at("pressure_gradient_kpa_m").get<double>();

        const Json& l = j.at("loads");
        c.loads.strain_ew = l.at("strain_ew").get<double>();
        c.loads.strain_ns = l.at("strain_ns").get<double>();
        c.loads.overburden_density = l.at("overburden_density_g_cm3").get<double>();
        c.loads.gravity = l.at("gravity_m_s2").get<double>();

        const Json& sv = j.at("solver");
        if (sv.at("preconditioner").get<std::string>() != "jacobi") {
            throw ConfigError("solver.preconditioner must be 'jacobi'");
        }
        c.solver.rel_tolerance = sv.at("rel_tolerance").get<double>();
        c.solver.max_iterations = sv.at("max_iterations").get<int>();
        c.solver.threads = c.threads;

        const Json& t = j.at("training");
        const auto opt = t.at("optimizer").get<std::string>();
        if (opt != "sgd" && opt != "adam") {
            throw ConfigError("training.optimizer must be 'sgd' or 'adam'");
        }
        c.training.optimizer = opt == "sgd" ? nn::Optimizer::sgd : nn::Optimizer::adam;
        c.training.batch_size = t.at("batch_size").get<int>();
        c.training.epochs = t.at("epochs").get<int>();
        c.training.learning_rate = t.at("learning_rate").get<double>();
        c.training.momentum = t.at("momentum").get<double>();
        c.training.beta1 = t.at("beta1").get<double>();
        c.training.beta2 = t.at("beta2").get<double>();
        c.training.epsilon = t.at("epsilon").get<double>();
        c.training.shuffle = t.at("shuffle").get<bool>();
        c.training.seed = c.seed;

        const Json& p = j.at("partition");
        c.partition.n_columns_x = p.at("n_columns_x").get<int>();
        c.partition.n_columns_y = p.at("n_columns_y").get<int>();
        c.partition.discard_top = p.at("discard_top").get<int>();
        c.partition.discard_bottom = p.at("discard_bottom").get<int>();
        c.partition.train_columns = p.at("train_columns").get<std::vector<int>>();
        c.partition.validation_columns = p.at("validation_columns").get<std::vector<int>>();

        c.report.wells = j.at("report").at("wells").get<std::vector<std::array<int, 2>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const DependencyError&) {
        throw ConfigError("cannot read configuration file " + path.string());
    }
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

std::string default_config_text() { return to_json(RunConfig{}).dump(2) + "\n"; }

void validate(const RunConfig& c) {
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
    const auto& g = c.grid;
    if (g.fine.nx < 1 || g.fine.ny < 1 || g.fine.nz < 1) {
        throw ConfigError("grid.fine_dims must be positive");
    }
    if (!(g.spacing[0] > 0 && g.spacing[1] > 0 && g.spacing[2] > 0)) {
        throw ConfigError("grid.spacing_m must be positive");
    }
    if (!(g.depth_of_top >= 0)) throw ConfigError("grid.depth_of_top_m must be >= 0");
    build_scale_map(g.fine_grid(), g.refinement); // throws on non-divisible axes
    validate(c.geomodel);
    if (!(c.loads.overburden_density >= 0)) {
        throw ConfigError("loads.overburden_density_g_cm3 must be >= 0");
    }
    if (!(c.loads.gravity >= 0)) throw ConfigError("loads.gravity_m_s2 must be >= 0");
    fem::validate(c.solver);
    nn::validate(c.training);
    const auto& p = c.partition;
    partition_columns(g.fine_grid(), p.n_columns_x, p.n_columns_y, p.discard_top,
                      p.discard_bottom);
    if (p.train_columns.empty()) throw ConfigError("partition.train_columns must not be empty");
    const int n_columns = p.n_columns_x * p.n_columns_y;
    for (const auto* ids : {&p.train_columns, &p.validation_columns}) {
        for (int id : *ids) {
            if (id < 0 || id >= n_columns) {
                throw ConfigError("column id " + std::to_string(id) + " does not exist (0.." +
                                  std::to_string(n_columns - 1) + ")");
            }
        }
    }
    for (int a : p.train_columns) {
        for (int b : p.validation_columns) {
            if (a == b) {
                throw ConfigError("column " + std::to_string(a) +
                                  " is in both train_columns and validation_columns");
            }
        }
    }
    for (const auto& w : c.report.wells) {
        if (w[0] < 0 || w[1] < 0 || w[0] >= g.fine.nx || w[1] >= g.fine.ny) {
            throw ConfigError("report well (" + std::to_string(w[0]) + ", " +
                              std::to_string(w[1]) + ") is outside the fine grid");
        }
    }
}

fem::BoundaryConditions boundary_conditions(const RunConfig& c) {
    fem::BoundaryConditions bc;
    bc.strain_ew = c.loads.strain_ew;
    bc.strain_ns = c.loads.strain_ns;
    // g/cm3 * m/s2 * m = kPa; MPa needs 1e-3.
    bc.top_load = c.loads.overburden_density * c.loads.gravity * 1e-3 * c.grid.depth_of_top;
    return bc;
}

} // namespace geods
