#include "geods/pipeline.hpp"

#include "geods/downscale.hpp"
#include "geods/error.hpp"
#include "geods/features.hpp"
#include "geods/fem.hpp"
#include "geods/hash.hpp"
#include "geods/io.hpp"
#include "geods/log.hpp"
#include "geods/metrics.hpp"
#include "geods/nn.hpp"
#include "geods/upscale.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace geods {

namespace fs = std::filesystem;

namespace {

struct StageInfo {
    Stage stage;
    const char* name;
};

constexpr StageInfo kStages[] = {
    {Stage::build, "build"},       {Stage::solve_coarse, "solve-coarse"},
    {Stage::solve_fine, "solve-fine"}, {Stage::extract, "extract"},
    {Stage::train, "train"},       {Stage::predict, "predict"},
    {Stage::baseline, "baseline"}, {Stage::report, "report"},
};

struct Input {
    Stage from;
    const char* file;
    bool optional = false;
};

// Upstream files each stage reads.
std::vector<Input> inputs_of(Stage s) {
    switch (s) {
    case Stage::build: return {};
    case Stage::solve_coarse: return {{Stage::build, "coarse_material.bin"}};
    case Stage::solve_fine: return {{Stage::build, "fine_material.bin"}};
    case Stage::extract:
        return {{Stage::build, "fine_material.bin"},
                {Stage::build, "coarse_material.bin"},
                {Stage::solve_coarse, "coarse_stress.bin"},
                {Stage::solve_fine, "fine_stress.bin"}};
    case Stage::train:
        return {{Stage::extract, "train_examples.bin"},
                {Stage::extract, "validation_examples.bin"}};
    case Stage::predict:
        return {{Stage::build, "fine_material.bin"},
                {Stage::build, "coarse_material.bin"},
                {Stage::solve_coarse, "coarse_stress.bin"},
                {Stage::train, "model.json"}};
    case Stage::baseline:
        return {{Stage::build, "fine_material.bin"}, {Stage::solve_coarse, "coarse_stress.bin"}};
    case Stage::report:
        return {{Stage::build, "fine_material.bin"},
                {Stage::predict, "ml_downscaled.bin"},
                {Stage::baseline, "baseline_downscaled.bin"},
                {Stage::solve_fine, "fine_stress.bin", true}};
    }
    return {};
}

Json section_subset(Stage s, const RunConfig& c) {
    const Json all = to_json(c);
    Json j;
    j["seed"] = all["seed"];
    j["grid"] = all["grid"];
    j["geomodel"] = all["geomodel"];
    if (s == Stage::build) return j;
    j["loads"] = all["loads"];
    j["solver"] = all["solver"];
    if (s == Stage::solve_coarse || s == Stage::solve_fine || s == Stage::baseline) return j;
    j["partition"] = all["partition"];
    if (s == Stage::extract) return j;
    j["training"] = all["training"];
    if (s == Stage::train || s == Stage::predict) return j;
    j["report"] = all["report"];
    return j;
}

Json manifest_json(const Manifest& m) {
    return {{"stage", m.stage},
            {"config_hash", m.config_hash},
            {"inputs", m.inputs},
            {"outputs", m.outputs},
            {"meta", m.meta}};
}

/// Reads upstream artifacts with freshness checks and records what it writes.
class StageRun {
public:
    StageRun(Stage stage, const RunConfig& cfg)
        : stage_(stage), cfg_(cfg), dir_(cfg.output_dir) {
        manifest_.stage = stage_name(stage);
        manifest_.config_hash = stage_config_hash(stage, cfg);
    }

    // Verifies an upstream file and returns its path; nullopt for a missing optional input.
    std::optional<fs::path> require(const Input& in) {
        const std::string from = stage_name(in.from);
        const auto m = read_manifest(cfg_, in.from);
        const fs::path path = dir_ / in.file;
        if (!m || !m->outputs.contains(in.file) || !fs::exists(path)) {
            if (in.optional) return std::nullopt;
            throw DependencyError("stage '" + stage_name(stage_) + "' needs " + in.file +
                                  " from stage '" + from + "'; run `geods " + from +
                                  "` first");
        }
        if (m->config_hash != stage_config_hash(in.from, cfg_)) {
            throw StaleArtifactError(std::string(in.file) + " was produced by '" + from +
                                     "' under a different configuration; rerun `geods " +
                                     from + "`");
        }
        const std::string h = sha256_file(path);
        if (h != m->outputs.at(in.file)) {
            throw StaleArtifactError(std::string(in.file) + " changed after stage '" + from +
                                     "' wrote it; rerun `geods " + from + "`");
        }
        manifest_.inputs[from + "/" + in.file] = h;
        return path;
    }

    void check_inputs() {
        for (const auto& in : inputs_of(stage_)) require(in);
    }

    fs::path path(const std::string& file) const { return dir_ / file; }

    io::Artifact read(const std::string& file) const { return io::read_artifact(path(file)); }

    void write(const std::string& file, io::Artifact a) {
        a.meta["config_hash"] = manifest_.config_hash;
        a.meta["stage"] = manifest_.stage;
        io::write_artifact(path(file), a);
        record(file);
    }

    void write_text(const std::string& file, const std::string& text) {
        io::write_text(path(file), text);
        record(file);
    }

    void write_vtk(const std::string& file, const StructuredGrid& g, const std::string& name,
                   std::span<const double> values) {
        io::write_vtk(path(file), g, name, values);
        record(file);
    }

    bool has_input(const std::string& key) const { return manifest_.inputs.contains(key); }
    Json& meta() { return manifest_.meta; }
    const std::string& config_hash() const { return manifest_.config_hash; }

    // True when a previous run recorded the same configuration, inputs and outputs.
    bool up_to_date() const {
        const auto old = read_manifest(cfg_, stage_);
        if (!old || old->config_hash != manifest_.config_hash ||
            old->inputs != manifest_.inputs) {
            return false;
        }
        for (const auto& [file, h] : old->outputs) {
            if (!fs::exists(path(file)) || sha256_file(path(file)) != h) return false;
        }
        return true;
    }

    Manifest finish() {
        io::write_text(manifest_path(cfg_, stage_), manifest_json(manifest_).dump(2) + "\n");
        return manifest_;
    }

private:
    void record(const std::string& file) { manifest_.outputs[file] = sha256_file(path(file)); }

    Stage stage_;
    const RunConfig& cfg_;
    fs::path dir_;
    Manifest manifest_;
};

std::vector<double> principal_column(const StressField& s, int m) {
    std::vector<double> v(s.principal.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = s.principal[c][static_cast<std::size_t>(m)];
    return v;
}

void export_principal(StageRun& run, const StressField& s, const std::string& prefix) {
    for (int m = 0; m < 3; ++m) {
        const std::string name = "s" + std::to_string(m + 1);
        run.write_vtk(prefix + "_" + name + ".vtk", s.grid, name, principal_column(s, m));
    }
}

std::string without_header(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

ScaleMap scale_map(const RunConfig& c) {
    return build_scale_map(c.grid.fine_grid(), c.grid.refinement);
}

ColumnPartition partition(const RunConfig& c) {
    const auto& p = c.partition;
    return partition_columns(c.grid.fine_grid(), p.n_columns_x, p.n_columns_y, p.discard_top,
                             p.discard_bottom);
}

void run_build(StageRun& run, const RunConfig& c) {
    const ScaleMap map = scale_map(c);
    const MaterialField fine = generate(c.geomodel, map.fine());
    const MaterialField coarse = upscale_material(map, fine, c.geomodel.pressure_gradient);
    run.write("fine_material.bin", io::to_artifact(fine));
    run.write("coarse_material.bin", io::to_artifact(coarse));
    run.write_vtk("fine_E.vtk", fine.grid, "E", fine.E);
    run.write_vtk("fine_nu.vtk", fine.grid, "nu", fine.nu);
    run.write_vtk("fine_rho.vtk", fine.grid, "rho", fine.rho);
    run.write_vtk("fine_pp.vtk", fine.grid, "pp", fine.pp);
    run.write_vtk("coarse_E.vtk", coarse.grid, "E", coarse.E);
}

void run_solve(StageRun& run, const RunConfig& c, const std::string& scale) {
    const MaterialField m = io::material_from(run.read(scale + "_material.bin"));
    const fem::ElasticityProblem problem{m, boundary_conditions(c), c.loads.gravity};
    const fem::Solution sol = fem::solve(problem, c.solver);
    io::Artifact a = io::to_artifact(sol.stress);
    a.add("displacement", sol.displacement);
    a.meta["iterations"] = sol.iterations;
    a.meta["relative_residual"] = sol.relative_residual;
    run.meta()["iterations"] = sol.iterations;
    run.meta()["relative_residual"] = sol.relative_residual;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d iterations, relative residual %.3e", sol.iterations,
                  sol.relative_residual);
    log_info(scale + " solve: " + buf);
    run.write(scale + "_stress.bin", std::move(a));
    export_principal(run, sol.stress, scale);
}

void run_extract(StageRun& run, const RunConfig& c) {
    const ScaleMap map = scale_map(c);
    const ColumnPartition part = partition(c);
    const MaterialField fine = io::material_from(run.read("fine_material.bin"));
    const MaterialField coarse = io::material_from(run.read("coarse_material.bin"));
    const StressField cs = io::stress_from(run.read("coarse_stress.bin"));
    const StressField fs_ = io::stress_from(run.read("fine_stress.bin"));
    auto collect = [&](const std::vector<int>& ids, const char* file) {
        std::vector<std::size_t> cells;
        for (int id : ids) {
            const auto col = part.cells(id);
            cells.insert(cells.end(), col.begin(), col.end());
        }
        const ExtractionResult r = extract_examples(map, fine, coarse, &fs_, &cs, cells);
        io::Artifact a = io::to_artifact(r.examples);
        a.meta["columns"] = ids;
        a.meta["skipped"] = r.skipped;
        run.meta()[file] = {{"examples", r.examples.size()}, {"skipped", r.skipped}};
        run.write(file, std::move(a));
    };
    collect(c.partition.train_columns, "train_examples.bin");
    collect(c.partition.validation_columns, "validation_examples.bin");
}

void run_train(StageRun& run, const RunConfig& c) {
    const auto tr = io::examples_from(run.read("train_examples.bin"));
    const auto va = io::examples_from(run.read("validation_examples.bin"));
    log_info("training on " + std::to_string(tr.size()) + " examples, validating on " +
             std::to_string(va.size()));
    nn::NetworkModel model = nn::fit(tr, va, c.training);
    model.meta.config_hash = run.config_hash();
    std::ostringstream hist;
    hist << "epoch,train_mse,validation_mse\n";
    char buf[96];
    for (const auto& r : model.meta.history) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", r.epoch, r.train_mse, r.validation_mse);
        hist << buf;
    }
    const auto& last = model.meta.history.back();
    run.meta()["final_train_mse"] = last.train_mse;
    run.meta()["final_validation_mse"] =
        std::isfinite(last.validation_mse) ? Json(last.validation_mse) : Json();
    run.write_text("model.json", nn::serialize(model));
    run.write_text("training_history.csv", hist.str());
}

void run_predict(StageRun& run, const RunConfig& c) {
    const ScaleMap map = scale_map(c);
    const MaterialField fine = io::material_from(run.read("fine_material.bin"));
    const MaterialField coarse = io::material_from(run.read("coarse_material.bin"));
    const StressField cs = io::stress_from(run.read("coarse_stress.bin"));
    const nn::NetworkModel model = nn::load_model(run.path("model.json"));
    const DownscaledStress d = predict_volume(model, map, fine, coarse, cs, c.threads);
    run.meta()["covered_cells"] = d.covered();
    run.write("ml_downscaled.bin", io::to_artifact(d));
    run.write_vtk("ml_s1.vtk", d.grid, "s1", d.s1);
    run.write_vtk("ml_s2.vtk", d.grid, "s2", d.s2);
}

void run_baseline(StageRun& run, const RunConfig& c) {
    const ScaleMap map = scale_map(c);
    const MaterialField fine = io::material_from(run.read("fine_material.bin"));
    const StressField cs = io::stress_from(run.read("coarse_stress.bin"));
    const DownscaledStress d = constant_strain_downscale(map, cs, fine, c.threads);
    run.write("baseline_downscaled.bin", io::to_artifact(d));
    run.write_vtk("baseline_s1.vtk", d.grid, "s1", d.s1);
    run.write_vtk("baseline_s2.vtk", d.grid, "s2", d.s2);
}

void run_report(StageRun& run, const RunConfig& c, bool have_truth) {
    const ColumnPartition part = partition(c);
    const MaterialField fine = io::material_from(run.read("fine_material.bin"));
    const DownscaledStress ml = io::downscaled_from(run.read("ml_downscaled.bin"));
    DownscaledStress base = io::downscaled_from(run.read("baseline_downscaled.bin"));
    // Compare both methods on the same cells.
    for (std::size_t cell = 0; cell < base.mask.size(); ++cell) base.mask[cell] &= ml.mask[cell];

    const StructuredGrid& g = fine.grid;
    std::optional<StressField> truth;
    if (have_truth) truth = io::stress_from(run.read("fine_stress.bin"));

    if (truth) {
        const std::vector<ErrorReport> all{compare(ml, *truth, part), compare(base, *truth, part)};
        const std::vector<ErrorReport> val{
            compare(ml, *truth, part, c.partition.validation_columns),
            compare(base, *truth, part, c.partition.validation_columns)};
        Json summary;
        summary["all_columns"] = Json::parse(summary_json(all));
        summary["validation_columns"] = Json::parse(summary_json(val));
        summary["validation_columns"]["ids"] = c.partition.validation_columns;
        run.write_text("report_summary.json", summary.dump(2) + "\n");
        run.write_text("report_columns.csv", columns_csv(all[0]) + without_header(columns_csv(all[1])));
        run.write_text("report_depth.csv", depth_csv(all[0]) + without_header(depth_csv(all[1])));
        run.write_vtk("ml_error_s1.vtk", g, "d_s1", all[0].d_s1);
        run.write_vtk("baseline_error_s1.vtk", g, "d_s1", all[1].d_s1);
        run.meta()["validation_mape_s1_ml"] = val[0].s1.mean;
        run.meta()["validation_mape_s1_baseline"] = val[1].s1.mean;
    } else {
        log_warning("no fine-scale solution found; report contains profiles only");
        run.write_text("report_summary.json", "{\n  \"fine_truth\": null\n}\n");
    }

    const int kb = part.k_begin(), ke = part.k_end();
    for (std::size_t w = 0; w < c.report.wells.size(); ++w) {
        const int i = c.report.wells[w][0], j = c.report.wells[w][1];
        auto series = [&](const std::string& name, std::span<const double> field) {
            return NamedProfile{name, depth_profile(g, field, i, j, kb, ke)};
        };
        auto ratio = [](std::span<const double> a, std::span<const double> b) {
            std::vector<double> r(a.size());
            for (std::size_t k = 0; k < r.size(); ++k) r[k] = b[k] / a[k];
            return r;
        };
        std::vector<NamedProfile> cols{series("E_gpa", fine.E), series("ml_s1", ml.s1),
                                       series("ml_s2", ml.s2), series("ml_r12", ratio(ml.s1, ml.s2)),
                                       series("baseline_s1", base.s1),
                                       series("baseline_s2", base.s2),
                                       series("baseline_r12", ratio(base.s1, base.s2))};
        if (truth) {
            const auto t1 = principal_column(*truth, 0), t2 = principal_column(*truth, 1);
            cols.push_back(series("true_s1", t1));
            cols.push_back(series("true_s2", t2));
            cols.push_back(series("true_r12", ratio(t1, t2)));
        }
        run.write_text("profile_well" + std::to_string(w) + "_i" + std::to_string(i) + "_j" +
                           std::to_string(j) + ".csv",
                       profiles_csv(cols));
    }
}

} // namespace

std::string stage_name(Stage stage) {
    for (const auto& s : kStages) {
        if (s.stage == stage) return s.name;
    }
    return "?";
}

Stage parse_stage(const std::string& name) {
    for (const auto& s : kStages) {
        if (name == s.name) return s.stage;
    }
    throw ConfigError("unknown stage '" + name + "'");
}

std::string stage_config_hash(Stage stage, const RunConfig& config) {
    return sha256_hex(stage_name(stage) + "\n" + section_subset(stage, config).dump());
}

fs::path manifest_path(const RunConfig& config, Stage stage) {
    return config.output_dir / "manifests" / (stage_name(stage) + ".json");
}

std::optional<Manifest> read_manifest(const RunConfig& config, Stage stage) {
    const fs::path p = manifest_path(config, stage);
    if (!fs::exists(p)) return std::nullopt;
    try {
        const Json j = Json::parse(io::read_text(p));
        Manifest m;
        m.stage = j.at("stage").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
        m.meta = j.at("meta");
        return m;
    } catch (const std::exception& e) {
        throw IntegrityError("manifest " + p.string() + " is unreadable: " + e.what());
    }
}

StageResult run_stage(Stage stage, const RunConfig& config, bool force) {
    StageRun run(stage, config);
    run.check_inputs();
    if (!force && run.up_to_date()) {
        log_info(stage_name(stage) + ": up to date");
        return {stage, false, *read_manifest(config, stage)};
    }
    const auto t0 = std::chrono::steady_clock::now();
    log_info(stage_name(stage) + ": running");
    switch (stage) {
    case Stage::build: run_build(run, config); break;
    case Stage::solve_coarse: run_solve(run, config, "coarse"); break;
    case Stage::solve_fine: run_solve(run, config, "fine"); break;
    case Stage::extract: run_extract(run, config); break;
    case Stage::train: run_train(run, config); break;
    case Stage::predict: run_predict(run, config); break;
    case Stage::baseline: run_baseline(run, config); break;
    case Stage::report:
        run_report(run, config, run.has_input("solve-fine/fine_stress.bin"));
        break;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", secs);
    log_info(stage_name(stage) + ": done in " + buf + " s");
    return {stage, true, run.finish()};
}

std::vector<StageResult> run_pipeline(const RunConfig& config, bool force) {
    std::vector<StageResult> out;
    for (const Stage s : kAllStages) out.push_back(run_stage(s, config, force));
    return out;
}

} // namespace geods
