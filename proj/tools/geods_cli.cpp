// geods: multiscale stress modelling pipeline.

#include "geods/config.hpp"
#include "geods/error.hpp"
#include "geods/log.hpp"
#include "geods/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

enum ExitCode {
    kOk = 0,
    kFailure = 1,
    kConfig = 2,
    kDependency = 3,
    kStale = 4,
    kSolver = 5,
    kIntegrity = 6,
    kDivergence = 7,
};

struct Options {
    std::string config_path = "geods.json";
    std::optional<int> threads;
    std::optional<std::string> output_dir;
    bool force = false;
};

geods::RunConfig resolve(const Options& o) {
    geods::RunConfig c = geods::load_config(o.config_path);
    if (o.threads) c.threads = c.solver.threads = *o.threads;
    if (o.output_dir) c.output_dir = *o.output_dir;
    geods::validate(c);
    return c;
}

int report_error(const std::string& stage, const std::exception& e, int code) {
    std::cerr << "geods " << stage << ": " << e.what() << '\n';
    return code;
}

int guarded(const std::string& stage, auto&& fn) {
    try {
        fn();
        return kOk;
    } catch (const geods::ConfigError& e) {
        return report_error(stage, e, kConfig);
    } catch (const geods::DependencyError& e) {
        return report_error(stage, e, kDependency);
    } catch (const geods::StaleArtifactError& e) {
        return report_error(stage, e, kStale);
    } catch (const geods::SolverError& e) {
        return report_error(stage, e, kSolver);
    } catch (const geods::IntegrityError& e) {
        return report_error(stage, e, kIntegrity);
    } catch (const geods::DivergenceError& e) {
        return report_error(stage, e, kDivergence);
    } catch (const std::exception& e) {
        return report_error(stage, e, kFailure);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid FEM / neural-network stress downscaling on synthetic geomodels"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opt.config_path, "Run configuration (JSON)")
            ->capture_default_str();
        sub->add_option("-j,--threads", opt.threads, "Worker threads (overrides config)");
        sub->add_option("-o,--output-dir", opt.output_dir, "Artifact directory (overrides config)");
        sub->add_flag("-f,--force", opt.force, "Recompute even when up to date");
    };

    std::optional<geods::Stage> chosen;
    bool run_all = false;
    for (const geods::Stage s : geods::kAllStages) {
        auto* sub = app.add_subcommand(geods::stage_name(s), "Run the " + geods::stage_name(s) +
                                                                 " stage");
        add_common(sub);
        sub->callback([&chosen, s] { chosen = s; });
    }
    auto* all = app.add_subcommand("run", "Run every stage in order");
    add_common(all);
    all->callback([&run_all] { run_all = true; });

    auto* config = app.add_subcommand("config", "Configuration helpers");
    config->require_subcommand(1);
    std::optional<std::string> init_path;
    auto* init = config->add_subcommand("init", "Print the default configuration");
    init->add_option("path", init_path, "Write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (init->parsed()) {
        return guarded("config init", [&] {
            const std::string text = geods::default_config_text();
            if (init_path) {
                std::FILE* f = std::fopen(init_path->c_str(), "wx");
                if (!f) throw geods::ConfigError(*init_path + " exists or cannot be created");
                std::fputs(text.c_str(), f);
                std::fclose(f);
            } else {
                std::cout << text;
            }
        });
    }
    if (run_all) {
        return guarded("run", [&] { geods::run_pipeline(resolve(opt), opt.force); });
    }
    const std::string name = geods::stage_name(*chosen);
    return guarded(name, [&] { geods::run_stage(*chosen, resolve(opt), opt.force); });
}
