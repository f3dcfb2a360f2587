#include "geods/config.hpp"
#include "geods/error.hpp"
#include "geods/fem.hpp"
#include "geods/geomodel.hpp"
#include "geods/io.hpp"
#include "geods/nn.hpp"
#include "geods/pipeline.hpp"
#include "geods/upscale.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace geods;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const std::vector<double>& v, std::vector<py::ssize_t> shape) {
    Array a(shape);
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

std::vector<double> from_numpy(const Array& a) { return {a.data(), a.data() + a.size()}; }

RunConfig parse_config(const std::string& text) { return config_from_json(Json::parse(text)); }

StructuredGrid make_grid(std::array<int, 3> dims, Vec3 spacing, double depth_of_top) {
    return StructuredGrid({dims[0], dims[1], dims[2]}, spacing, {0.0, 0.0, 0.0}, depth_of_top);
}

std::vector<py::ssize_t> cell_shape(const StructuredGrid& g) { return {g.nz(), g.ny(), g.nx()}; }

py::dict material_dict(const MaterialField& m) {
    py::dict d;
    const auto s = cell_shape(m.grid);
    d["E"] = to_numpy(m.E, s);
    d["nu"] = to_numpy(m.nu, s);
    d["rho"] = to_numpy(m.rho, s);
    d["pp"] = to_numpy(m.pp, s);
    return d;
}

} // namespace

PYBIND11_MODULE(_geods, m) {
    m.doc() = "Hybrid multiscale stress modelling";

    auto base = py::register_exception<Error>(m, "GeodsError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<IndexError>(m, "IndexError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    auto solver = py::register_exception<SolverError>(m, "SolverError", base.ptr());
    py::register_exception<NonConvergenceError>(m, "NonConvergenceError", solver.ptr());
    py::register_exception<DependencyError>(m, "DependencyError", base.ptr());
    py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
    py::register_exception<StaleArtifactError>(m, "StaleArtifactError", base.ptr());

    m.attr("MERGED_FEATURES") = nn::kMerged;
    m.attr("HIDDEN_UNITS") = nn::kHidden;
    m.attr("PARAMETER_COUNT") = nn::kParameterCount;

    m.def("default_config_text", &default_config_text);
    m.def("normalize_config", [](const std::string& text) { return to_json(parse_config(text)).dump(2); },
          "Validates a JSON configuration and returns it with every field filled in.");

    m.def(
        "run_pipeline",
        [](const std::string& config_text, bool force) {
            const RunConfig c = parse_config(config_text);
            std::vector<std::pair<std::string, bool>> out;
            py::gil_scoped_release release;
            for (const auto& r : run_pipeline(c, force)) out.emplace_back(stage_name(r.stage), r.ran);
            return out;
        },
        py::arg("config_text"), py::arg("force") = false);

    m.def(
        "run_stage",
        [](const std::string& name, const std::string& config_text, bool force) {
            const RunConfig c = parse_config(config_text);
            const Stage s = parse_stage(name);
            py::gil_scoped_release release;
            return run_stage(s, c, force).ran;
        },
        py::arg("stage"), py::arg("config_text"), py::arg("force") = false);

    m.def("read_artifact", [](const std::filesystem::path& path) {
        const io::Artifact a = io::read_artifact(path);
        py::dict arrays;
        for (const auto& [name, values] : a.arrays)
            arrays[py::str(name)] = to_numpy(values, {static_cast<py::ssize_t>(values.size())});
        return py::make_tuple(a.kind, a.meta.dump(), arrays);
    });

    m.def(
        "generate",
        [](const std::string& config_text) {
            const RunConfig c = parse_config(config_text);
            return material_dict(generate(c.geomodel, c.grid.fine_grid()));
        },
        "Fine-scale material properties for a configuration, shaped (nz, ny, nx).");

    m.def(
        "upscale",
        [](const Array& values, std::array<int, 3> ratio) {
            if (values.ndim() != 3) throw ShapeError("expected a (nz, ny, nx) array");
            const StructuredGrid g({static_cast<int>(values.shape(2)), static_cast<int>(values.shape(1)),
                                    static_cast<int>(values.shape(0))},
                                   {1.0, 1.0, 1.0});
            const ScaleMap map = build_scale_map(g, {ratio[0], ratio[1], ratio[2]});
            return to_numpy(upscale_property(map, from_numpy(values)), cell_shape(map.coarse()));
        },
        py::arg("values"), py::arg("ratio"));

    m.def(
        "solve",
        [](const Array& E, const Array& nu, const Array& rho, const Array& pp, Vec3 spacing,
           double depth_of_top, double strain_ew, double strain_ns, double top_load, double gravity,
           double rel_tolerance) {
            if (E.ndim() != 3) throw ShapeError("expected (nz, ny, nx) arrays");
            const StructuredGrid g = make_grid({static_cast<int>(E.shape(2)), static_cast<int>(E.shape(1)),
                                                static_cast<int>(E.shape(0))},
                                               spacing, depth_of_top);
            MaterialField mat(g);
            mat.E = from_numpy(E);
            mat.nu = from_numpy(nu);
            mat.rho = from_numpy(rho);
            mat.pp = from_numpy(pp);
            for (const auto* v : {&mat.nu, &mat.rho, &mat.pp})
                if (v->size() != mat.E.size()) throw ShapeError("property arrays differ in shape");
            fem::SolverSettings s;
            s.rel_tolerance = rel_tolerance;
            std::optional<fem::Solution> solved;
            {
                py::gil_scoped_release release;
                solved = fem::solve({mat, {strain_ew, strain_ns, top_load}, gravity}, s);
            }
            const fem::Solution& sol = *solved;
            std::vector<double> sigma, principal;
            for (const auto& t : sol.stress.sigma) sigma.insert(sigma.end(), {t.xx, t.yy, t.zz, t.yz, t.xz, t.xy});
            for (const auto& p : sol.stress.principal) principal.insert(principal.end(), p.begin(), p.end());
            auto shape = cell_shape(g);
            auto s6 = shape, s3 = shape;
            s6.push_back(6);
            s3.push_back(3);
            py::dict d;
            d["sigma"] = to_numpy(sigma, s6);
            d["principal"] = to_numpy(principal, s3);
            d["displacement"] = to_numpy(sol.displacement, {static_cast<py::ssize_t>(sol.displacement.size())});
            d["iterations"] = sol.iterations;
            d["relative_residual"] = sol.relative_residual;
            return d;
        },
        py::arg("E"), py::arg("nu"), py::arg("rho"), py::arg("pp"), py::arg("spacing"),
        py::arg("depth_of_top") = 0.0, py::arg("strain_ew") = 0.0, py::arg("strain_ns") = 0.0,
        py::arg("top_load") = 0.0, py::arg("gravity") = fem::kDefaultGravity,
        py::arg("rel_tolerance") = 1e-8,
        "Solves the elastic problem; E in GPa, rho in g/cm3, pp in MPa; stresses in MPa, compression positive.");

    m.def("initial_parameters", [](std::uint64_t seed) {
        const nn::NetworkModel model = nn::NetworkModel::initialize(seed);
        const auto p = model.params();
        return to_numpy({p.begin(), p.end()}, {nn::kParameterCount});
    });

    m.def("model_parameters", [](const std::filesystem::path& path) {
        const nn::NetworkModel model = nn::load_model(path);
        const auto p = model.params();
        return to_numpy({p.begin(), p.end()}, {nn::kParameterCount});
    });
}
