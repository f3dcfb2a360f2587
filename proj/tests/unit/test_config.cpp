#include "geods/config.hpp"
#include "geods/error.hpp"
#include "geods/io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace geods;

namespace {

RunConfig with(const char* text) { return config_from_json(Json::parse(text)); }

bool rejects(const char* text, const std::string& fragment) {
    try {
        with(text);
    } catch (const ConfigError& e) {
        return std::string(e.what()).find(fragment) != std::string::npos;
    }
    return false;
}

} // namespace

TEST_CASE("default configuration round-trips through json") {
    const RunConfig d;
    const RunConfig back = config_from_json(to_json(d));
    CHECK(to_json(back) == to_json(d));
    const RunConfig parsed = config_from_json(Json::parse(default_config_text()));
    CHECK(to_json(parsed) == to_json(d));
    CHECK(with("{}").grid.fine.nz == 128);
}

TEST_CASE("partial documents override defaults and share the seed") {
    const RunConfig c = with(R"({"seed": 42, "threads": 3,
        "geomodel": {"fold_center_m": 1000.0}, "training": {"optimizer": "adam"}})");
    CHECK(c.seed == 42);
    CHECK(c.geomodel.seed == 42);
    CHECK(c.training.seed == 42);
    CHECK(c.solver.threads == 3);
    REQUIRE(c.geomodel.fold_center.has_value());
    CHECK(*c.geomodel.fold_center == 1000.0);
    CHECK(c.training.optimizer == nn::Optimizer::adam);
    CHECK(c.geomodel.n_layers == GeomodelSpec{}.n_layers);
    CHECK_FALSE(with(R"({"geomodel": {"fold_center_m": null}})").geomodel.fold_center);
}

TEST_CASE("unknown keys, bad types and invalid values are configuration errors") {
    CHECK(rejects(R"({"geomodel": {"fold_amplitud_m": 1.0}})", "geomodel.fold_amplitud_m"));
    CHECK(rejects(R"({"bogus": 1})", "bogus"));
    CHECK(rejects(R"({"seed": "one"})", "invalid configuration"));
    CHECK(rejects(R"({"grid": 5})", "grid"));
    CHECK(rejects(R"({"threads": 0})", "threads"));
    CHECK(rejects(R"({"grid": {"fine_dims": [63, 64, 128]}})", "x"));
    CHECK(rejects(R"({"geomodel": {"youngs_gpa": [1.0, 85.0]}})", "Young"));
    CHECK(rejects(R"({"geomodel": {"fold_axis": "diagonal"}})", "fold_axis"));
    CHECK(rejects(R"({"solver": {"preconditioner": "ilu"}})", "preconditioner"));
    CHECK(rejects(R"({"solver": {"rel_tolerance": 2.0}})", "tolerance"));
    CHECK(rejects(R"({"training": {"optimizer": "rmsprop"}})", "optimizer"));
    CHECK(rejects(R"({"training": {"batch_size": 0}})", "batch_size"));
    CHECK(rejects(R"({"partition": {"validation_columns": [5]}})", "both"));
    CHECK(rejects(R"({"partition": {"train_columns": [16]}})", "does not exist"));
    CHECK(rejects(R"({"partition": {"train_columns": []}})", "train_columns"));
    CHECK(rejects(R"({"partition": {"n_columns_x": 5}})", "column"));
    CHECK(rejects(R"({"report": {"wells": [[64, 0]]}})", "outside"));
    CHECK(rejects(R"({"loads": {"gravity_m_s2": -1}})", "gravity"));
}

TEST_CASE("configuration files") {
    const auto dir = std::filesystem::temp_directory_path() / "geods_config_test";
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
    io::write_text(dir / "broken.json", "{ not json");
    CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
    io::write_text(dir / "ok.json", R"({"seed": 9})");
    CHECK(load_config(dir / "ok.json").seed == 9);
    std::filesystem::remove_all(dir);
}

TEST_CASE("top load is the weight of the overburden above the model") {
    RunConfig c;
    c.grid.depth_of_top = 1000.0;
    c.loads.overburden_density = 2.3;
    const auto bc = boundary_conditions(c);
    CHECK(bc.top_load == doctest::Approx(2.3 * 9.81));
    CHECK(bc.strain_ew == c.loads.strain_ew);
    CHECK(bc.strain_ns == c.loads.strain_ns);
    c.loads.overburden_density = 0.0;
    CHECK(boundary_conditions(c).top_load == 0.0);
}
